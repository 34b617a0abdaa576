//! Complex kernel ridge regression for fixed kernel weights.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Position3;
use crate::kernels::{mix_gram, GramSet, KernelBank};
use crate::linalg::{dot_conj, norm2, CMatrix};
use crate::C64;

/// Ridge regularization strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeConfig {
    pub lambda: f64,
}

impl RidgeConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter { what: "lambda must be finite and > 0" });
        }
        Ok(Self { lambda })
    }
}

impl Default for RidgeConfig {
    /// Scale-free default tied to the unit-diagonal kernels:
    /// 1e-3 · trace(K)/M = 1e-3.
    fn default() -> Self {
        Self { lambda: 1e-3 }
    }
}

/// Everything needed to evaluate the estimate anywhere in the region.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    pub alpha: Vec<C64>,
    pub bank: KernelBank,
    pub gamma: Vec<f64>,
    mic_positions: Vec<Position3>,
}

impl EstimatorState {
    pub fn new(
        alpha: Vec<C64>,
        bank: KernelBank,
        gamma: Vec<f64>,
        mic_positions: Vec<Position3>,
    ) -> Result<Self> {
        if alpha.len() != mic_positions.len() {
            return Err(Error::DimensionMismatch {
                expected: mic_positions.len(),
                got: alpha.len(),
            });
        }
        if gamma.len() != bank.len() {
            return Err(Error::DimensionMismatch { expected: bank.len(), got: gamma.len() });
        }
        Ok(Self { alpha, bank, gamma, mic_positions })
    }

    pub fn mic_positions(&self) -> &[Position3] {
        &self.mic_positions
    }
}

/// α = (K + λI)^{-1} s via Hermitian positive-definite factorization.
pub fn solve_alpha(k: &CMatrix, s: &[C64], lambda: f64) -> Result<Vec<C64>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter { what: "lambda must be > 0" });
    }
    k.cholesky_solve_shifted(s, lambda)
}

/// Ridge objective J(γ) = ‖Kα − s‖² + λ·Re(αᴴKα) at the inner minimizer α,
/// with K = Σ γ_d K^(d). Also returns α and K for reuse by the optimizers.
pub fn objective_j(
    gram_set: &GramSet,
    gamma: &[f64],
    s: &[C64],
    lambda: f64,
) -> Result<(f64, Vec<C64>, CMatrix)> {
    let k = mix_gram(gram_set, gamma)?;
    let alpha = solve_alpha(&k, s, lambda)?;
    let ka = k.matvec(&alpha);
    let mut resid = 0.0;
    for (kv, sv) in ka.iter().zip(s.iter()) {
        resid += (kv - sv).norm_sqr();
    }
    let reg = dot_conj(&alpha, &ka).re;
    let j = resid + lambda * reg;
    if !j.is_finite() {
        return Err(Error::NonFiniteObjective);
    }
    Ok((j, alpha, k))
}

/// u(r) = Σ_m α_m Σ_d γ_d κ_d(r, r_m).
pub fn estimate_field(state: &EstimatorState, r: &Position3) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (a, rm) in state.alpha.iter().zip(state.mic_positions.iter()) {
        acc += a * state.bank.mixed_kappa(&state.gamma, r, rm);
    }
    acc
}

/// Relative residual ‖(K + λI)α − s‖ / ‖s‖; a solver health check.
pub fn relative_residual(k: &CMatrix, alpha: &[C64], s: &[C64], lambda: f64) -> f64 {
    let ka = k.matvec(alpha);
    let mut r = Vec::with_capacity(s.len());
    for i in 0..s.len() {
        r.push(ka[i] + lambda * alpha[i] - s[i]);
    }
    norm2(&r) / norm2(s)
}
