//! Multiple kernel learning of the sub-kernel weights γ.
//!
//! Two constraint sets on γ ≥ 0: the probability simplex Σγ = 1 with a
//! reduced-gradient descent (sparsity-promoting), and the unit L2 sphere
//! with damped alternating updates.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::GramSet;
use crate::linalg::quadratic_form;
use crate::ridge::{objective_j, solve_alpha};
use crate::C64;

/// Nonnegative combination weights over the sub-kernel bank.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelWeights(Vec<f64>);

impl KernelWeights {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::InvalidParameter { what: "gamma is empty" });
        }
        if gamma.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::InvalidParameter { what: "gamma must be finite and >= 0" });
        }
        Ok(Self(gamma))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Count of weights below the sparsity threshold (1e-8).
    pub fn num_zero(&self) -> usize {
        self.0.iter().filter(|g| **g < 1e-8).count()
    }

    pub fn sparsity_fraction(&self) -> f64 {
        self.num_zero() as f64 / self.0.len() as f64
    }
}

/// Stopping and line-search controls for the simplex-constrained solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Options {
    pub max_outer_iters: usize,
    /// Relative change of J between outer iterations below which to stop.
    pub j_rel_tol: f64,
    /// L1 change of γ between outer iterations below which to stop.
    pub gamma_tol: f64,
    /// Golden-section iterations for the step-size search.
    pub line_search_iters: usize,
}

impl Default for L1Options {
    fn default() -> Self {
        Self { max_outer_iters: 200, j_rel_tol: 1e-6, gamma_tol: 1e-9, line_search_iters: 20 }
    }
}

/// Controls for the L2-ball alternating solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Options {
    pub max_iters: usize,
    /// Damping of the α update, in (0, 1).
    pub sigma: f64,
    /// Relative L2 change of γ below which to stop.
    pub gamma_rel_tol: f64,
}

impl Default for L2Options {
    fn default() -> Self {
        Self { max_iters: 500, sigma: 0.5, gamma_rel_tol: 1e-6 }
    }
}

/// Outcome of a weight-learning run.
#[derive(Debug, Clone)]
pub struct MklResult {
    pub gamma: KernelWeights,
    pub alpha: Vec<C64>,
    pub j_history: Vec<f64>,
    /// γ after initialization and after each accepted update, for
    /// constraint auditing.
    pub gamma_history: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the data were identically zero and γ fell back to uniform.
    pub degenerate: bool,
}

/// ∂J/∂γ_d = −λ · Re(αᴴ K^(d) α); nonpositive for PSD sub-kernels.
pub fn grad_j(gram_set: &GramSet, alpha: &[C64], lambda: f64) -> Vec<f64> {
    gram_set
        .grams()
        .iter()
        .map(|kd| -lambda * quadratic_form(kd, alpha))
        .collect()
}

/// Index of the largest element; lowest index wins ties.
fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

/// Reduced-gradient descent direction on the simplex.
///
/// Coordinates at zero whose reduced gradient is positive are frozen;
/// the largest coordinate absorbs the balance so that Σδ = 0.
pub fn descent_direction(gamma: &[f64], grad: &[f64], d_max: usize) -> Vec<f64> {
    debug_assert_eq!(gamma.len(), grad.len());
    let mut delta = vec![0.0; gamma.len()];
    let mut balance = 0.0;
    for d in 0..gamma.len() {
        if d == d_max {
            continue;
        }
        if gamma[d] <= 0.0 && grad[d] - grad[d_max] > 0.0 {
            delta[d] = 0.0;
        } else {
            delta[d] = -grad[d] + grad[d_max];
            balance += delta[d];
        }
    }
    delta[d_max] = -balance;
    delta
}

fn clamp_simplex(gamma: &mut [f64]) {
    let mut sum = 0.0;
    for g in gamma.iter_mut() {
        if *g < 0.0 {
            *g = 0.0;
        }
        sum += *g;
    }
    if sum > 0.0 {
        for g in gamma.iter_mut() {
            *g /= sum;
        }
    }
}

/// Golden-section minimization over [0, hi]; keeps the best sampled point
/// (including the endpoints) so the result never exceeds f(0).
fn golden_section(
    mut f: impl FnMut(f64) -> Result<f64>,
    hi: f64,
    iters: usize,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = 0.0;
    let mut b = hi;
    let (mut best_x, mut best_f) = (0.0, f(0.0)?);
    let fb = f(hi)?;
    if fb < best_f {
        best_x = hi;
        best_f = fb;
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..iters {
        if fc < best_f {
            best_x = c;
            best_f = fc;
        }
        if fd < best_f {
            best_x = d;
            best_f = fd;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok((best_x, best_f))
}

/// Simplex-constrained weight learning by reduced-gradient descent.
///
/// Starts from uniform γ. Each outer iteration takes maximal steps to the
/// simplex boundary while the trial objective keeps improving (zeroing one
/// coordinate per step and folding its direction component into the
/// largest coordinate), then refines the step size by golden section.
pub fn solve_l1(gram_set: &GramSet, s: &[C64], lambda: f64, opts: &L1Options) -> Result<MklResult> {
    let d = gram_set.num_kernels();
    let mut gamma = vec![1.0 / d as f64; d];
    let mut j_history = Vec::new();
    let mut gamma_history = vec![gamma.clone()];
    let mut converged = false;
    let mut iterations = 0;

    for _outer in 0..opts.max_outer_iters {
        iterations += 1;
        let (j, alpha, _) = objective_j(gram_set, &gamma, s, lambda)?;
        j_history.push(j);

        let grad = grad_j(gram_set, &alpha, lambda);
        let d_max = argmax(&gamma);
        let delta = descent_direction(&gamma, &grad, d_max);
        if delta.iter().all(|x| x.abs() < 1e-15) {
            converged = true;
            break;
        }

        // March to successive simplex boundaries while the trial improves.
        let mut cur_g = gamma.clone();
        let mut cur_d = delta;
        let mut next_g = cur_g.clone();
        let mut next_d = cur_d.clone();
        let mut j_bar = 0.0;
        let mut rho_max = 0.0;
        while j_bar < j {
            cur_g = next_g.clone();
            cur_d = next_d.clone();
            let mut nu = usize::MAX;
            let mut best_ratio = f64::INFINITY;
            for i in 0..d {
                if cur_d[i] < -1e-15 {
                    let ratio = -cur_g[i] / cur_d[i];
                    if ratio < best_ratio {
                        best_ratio = ratio;
                        nu = i;
                    }
                }
            }
            if nu == usize::MAX {
                break;
            }
            rho_max = best_ratio;
            next_g = cur_g.clone();
            for i in 0..d {
                next_g[i] = (cur_g[i] + rho_max * cur_d[i]).max(0.0);
            }
            next_g[nu] = 0.0;
            // The max of the post-step weights absorbs the freed component;
            // using the post-step γ keeps the transfer off the coordinate
            // that just hit the boundary.
            let d_max_bar = argmax(&next_g);
            next_d = cur_d.clone();
            next_d[d_max_bar] += cur_d[nu];
            next_d[nu] = 0.0;
            j_bar = objective_j(gram_set, &next_g, s, lambda)?.0;
        }

        // Step-size refinement between the last accepted point and the
        // boundary it stopped short of.
        let mut new_gamma = cur_g.clone();
        if rho_max > 0.0 && cur_d.iter().any(|x| x.abs() > 1e-15) {
            let (rho, _) = golden_section(
                |rho| {
                    let mut trial = cur_g.clone();
                    for i in 0..d {
                        trial[i] = (cur_g[i] + rho * cur_d[i]).max(0.0);
                    }
                    Ok(objective_j(gram_set, &trial, s, lambda)?.0)
                },
                rho_max,
                opts.line_search_iters,
            )?;
            for i in 0..d {
                new_gamma[i] = (cur_g[i] + rho * cur_d[i]).max(0.0);
            }
        }
        clamp_simplex(&mut new_gamma);

        let gamma_change: f64 =
            new_gamma.iter().zip(gamma.iter()).map(|(a, b)| (a - b).abs()).sum();
        gamma = new_gamma;
        gamma_history.push(gamma.clone());

        if j_history.len() >= 2 {
            let prev = j_history[j_history.len() - 2];
            let last = j_history[j_history.len() - 1];
            if (prev - last).abs() < opts.j_rel_tol * prev.abs() {
                converged = true;
                break;
            }
        }
        if gamma_change < opts.gamma_tol {
            converged = true;
            break;
        }
    }

    let (j, alpha, _) = objective_j(gram_set, &gamma, s, lambda)?;
    j_history.push(j);
    Ok(MklResult {
        gamma: KernelWeights::new(gamma)?,
        alpha,
        j_history,
        gamma_history,
        iterations,
        converged,
        degenerate: false,
    })
}

/// L2-sphere weight learning by damped alternating updates:
/// v_d = Re(αᴴ K^(d) α), γ = v/‖v‖₂, then a damped ridge re-solve of α.
pub fn solve_l2(gram_set: &GramSet, s: &[C64], lambda: f64, opts: &L2Options) -> Result<MklResult> {
    if !(opts.sigma > 0.0 && opts.sigma < 1.0) {
        return Err(Error::InvalidParameter { what: "sigma must be in (0, 1)" });
    }
    let d = gram_set.num_kernels();
    let mut gamma = vec![1.0 / d as f64; d];
    let (mut j, mut alpha, _) = objective_j(gram_set, &gamma, s, lambda)?;
    let mut j_history = vec![j];
    let mut gamma_history = vec![gamma.clone()];
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..opts.max_iters {
        iterations += 1;
        let v: Vec<f64> = gram_set
            .grams()
            .iter()
            .map(|kd| quadratic_form(kd, &alpha).max(0.0))
            .collect();
        let v_norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if v_norm == 0.0 {
            // Zero data: no informative kernel, report uniform weights.
            let unit = 1.0 / libm::sqrt(d as f64);
            gamma_history.push(vec![unit; d]);
            return Ok(MklResult {
                gamma: KernelWeights::new(vec![unit; d])?,
                alpha: vec![C64::new(0.0, 0.0); s.len()],
                j_history,
                gamma_history,
                iterations,
                converged: true,
                degenerate: true,
            });
        }
        let new_gamma: Vec<f64> = v.iter().map(|x| x / v_norm).collect();

        let k = crate::kernels::mix_gram(gram_set, &new_gamma)?;
        let fresh = solve_alpha(&k, s, lambda)?;
        for (a, f) in alpha.iter_mut().zip(fresh.iter()) {
            *a = opts.sigma * *a + (1.0 - opts.sigma) * f;
        }

        let change = libm::sqrt(
            new_gamma
                .iter()
                .zip(gamma.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>(),
        );
        let scale = libm::sqrt(gamma.iter().map(|x| x * x).sum::<f64>());
        gamma = new_gamma;
        gamma_history.push(gamma.clone());
        j = objective_j(gram_set, &gamma, s, lambda)?.0;
        j_history.push(j);
        if change < opts.gamma_rel_tol * scale {
            converged = true;
            break;
        }
    }

    Ok(MklResult {
        gamma: KernelWeights::new(gamma)?,
        alpha,
        j_history,
        gamma_history,
        iterations,
        converged,
        degenerate: false,
    })
}
