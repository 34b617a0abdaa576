//! Directionally weighted plane-wave kernels and Gram matrix assembly.
//!
//! The closed-form kernel is
//!
//!   κ(r1, r2) = j0(√Z) / C(β),
//!   Z = (jβ sinθ cosφ − k·x12)² + (jβ sinθ sinφ − k·y12)² + (jβ cosθ − k·z12)²,
//!
//! where (φ, θ) orient the prior arrival direction η, β ≥ 0 is the
//! von Mises–Fisher concentration and [x12, y12, z12] = r1 − r2. Since j0
//! is even and entire, the branch of √Z is immaterial. A spherical
//! quadrature of the equivalent plane-wave integral serves as an
//! independent oracle.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{MicArray, Position3};
use crate::linalg::CMatrix;
use crate::C64;

/// One (η, β) pair: prior arrival direction and vMF concentration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubKernelParam {
    eta: [f64; 3],
    beta: f64,
}

impl SubKernelParam {
    /// `eta` is normalized; `beta` must be finite and ≥ 0.
    pub fn new(eta: [f64; 3], beta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter { what: "beta must be finite and >= 0" });
        }
        let n = libm::sqrt(eta[0] * eta[0] + eta[1] * eta[1] + eta[2] * eta[2]);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter { what: "eta must be a nonzero vector" });
        }
        Ok(Self { eta: [eta[0] / n, eta[1] / n, eta[2] / n], beta })
    }

    /// From azimuth φ and zenith θ of η.
    pub fn from_angles(azimuth: f64, zenith: f64, beta: f64) -> Result<Self> {
        let (st, ct) = (libm::sin(zenith), libm::cos(zenith));
        let (sp, cp) = (libm::sin(azimuth), libm::cos(azimuth));
        Self::new([st * cp, st * sp, ct], beta)
    }

    pub fn eta(&self) -> [f64; 3] {
        self.eta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// vMF normalizer C(β) = (e^β − e^{−β}) / 2β, C(0) = 1.
///
/// Evaluated as e^β (1 − e^{−2β}) / 2β so large β does not overflow
/// before the division; the small-β series avoids cancellation.
pub fn c_beta(beta: f64) -> f64 {
    if beta < 1e-4 {
        let b2 = beta * beta;
        1.0 + b2 / 6.0 + b2 * b2 / 120.0
    } else {
        libm::exp(beta) * (1.0 - libm::exp(-2.0 * beta)) / (2.0 * beta)
    }
}

/// j0(z) = sin(z)/z on complex arguments, with the even series
/// 1 − z²/6 + z⁴/120 near zero to avoid cancellation.
pub fn j0_complex(z: C64) -> C64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        C64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Closed-form directionally weighted kernel κ(r1, r2).
pub fn kappa_directional(r1: &Position3, r2: &Position3, param: &SubKernelParam, k: f64) -> C64 {
    let d = r1.sub(r2);
    let mut z_acc = C64::new(0.0, 0.0);
    for (di, ei) in d.iter().zip(param.eta.iter()) {
        let v = C64::new(-k * di, param.beta * ei);
        z_acc += v * v;
    }
    j0_complex(z_acc.sqrt()) / c_beta(param.beta)
}

/// Spherical-quadrature evaluation of the kernel's plane-wave integral:
/// ∫_{S²} w(x) e^{jk xᵀ(r1−r2)} dS with the vMF weight w. This is the
/// independent oracle for `kappa_directional`; it is not a hot path.
///
/// Gauss–Legendre in cosθ crossed with a uniform azimuth rule; the result
/// at `quadrature_order` is compared against double the order and rejected
/// if the two differ by more than 1e-9. A rule of thumb for the order is
/// `(k‖r1−r2‖ + β) + 20`.
pub fn kappa_quadrature_oracle(
    r1: &Position3,
    r2: &Position3,
    param: &SubKernelParam,
    k: f64,
    quadrature_order: usize,
) -> Result<C64> {
    if quadrature_order < 2 {
        return Err(Error::InvalidParameter { what: "quadrature_order must be >= 2" });
    }
    let coarse = sphere_integral(r1, r2, param, k, quadrature_order);
    let fine = sphere_integral(r1, r2, param, k, 2 * quadrature_order);
    let delta = (fine - coarse).norm();
    if delta > 1e-9 {
        return Err(Error::QuadratureNotConverged { order: quadrature_order, delta });
    }
    Ok(fine)
}

fn sphere_integral(r1: &Position3, r2: &Position3, param: &SubKernelParam, k: f64, n: usize) -> C64 {
    let d = r1.sub(r2);
    let (nodes, weights) = gauss_legendre(n);
    let n_az = 2 * n;
    let inv_norm = 1.0 / (4.0 * core::f64::consts::PI * c_beta(param.beta));
    let mut acc = C64::new(0.0, 0.0);
    for (t, wt) in nodes.iter().zip(weights.iter()) {
        let st = libm::sqrt((1.0 - t * t).max(0.0));
        let mut az_acc = C64::new(0.0, 0.0);
        for a in 0..n_az {
            let phi = 2.0 * core::f64::consts::PI * a as f64 / n_az as f64;
            let x = [st * libm::cos(phi), st * libm::sin(phi), *t];
            let eta_dot = param.eta[0] * x[0] + param.eta[1] * x[1] + param.eta[2] * x[2];
            let k_dot = k * (x[0] * d[0] + x[1] * d[1] + x[2] * d[2]);
            az_acc += C64::new(param.beta * eta_dot, k_dot).exp();
        }
        acc += wt * az_acc * (2.0 * core::f64::consts::PI / n_az as f64);
    }
    acc * inv_norm
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for m in 2..=n {
        let m = m as f64;
        let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Discretized sub-kernel bank with the operating wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBank {
    params: Vec<SubKernelParam>,
    wavenumber: f64,
}

impl KernelBank {
    pub fn new(params: Vec<SubKernelParam>, wavenumber: f64) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidParameter { what: "kernel bank is empty" });
        }
        if !(wavenumber > 0.0) {
            return Err(Error::InvalidParameter { what: "wavenumber must be > 0" });
        }
        for i in 0..params.len() {
            for j in (i + 1)..params.len() {
                if params[i] == params[j] {
                    return Err(Error::InvalidParameter {
                        what: "kernel bank parameters must be pairwise distinct",
                    });
                }
            }
        }
        Ok(Self { params, wavenumber })
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn params(&self) -> &[SubKernelParam] {
        &self.params
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    /// Learned-kernel evaluation Σ_d γ_d κ_d(r1, r2).
    pub fn mixed_kappa(&self, gamma: &[f64], r1: &Position3, r2: &Position3) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (g, p) in gamma.iter().zip(self.params.iter()) {
            if *g != 0.0 {
                acc += *g * kappa_directional(r1, r2, p, self.wavenumber);
            }
        }
        acc
    }
}

/// Horizontal-plane bank: `d_eta` azimuths uniform on [−π, π) at zenith
/// π/2, crossed with `d_beta` concentrations 0.0, 1.0, 2.0, …
pub fn default_bank(d_eta: usize, d_beta: usize, k: f64) -> Result<KernelBank> {
    if d_eta < 1 || d_beta < 1 {
        return Err(Error::InvalidParameter { what: "d_eta and d_beta must be >= 1" });
    }
    let mut params = Vec::with_capacity(d_eta * d_beta);
    for ib in 0..d_beta {
        for ia in 0..d_eta {
            let azimuth = -core::f64::consts::PI
                + ia as f64 * 2.0 * core::f64::consts::PI / d_eta as f64;
            params.push(SubKernelParam::from_angles(
                azimuth,
                core::f64::consts::FRAC_PI_2,
                ib as f64,
            )?);
        }
    }
    KernelBank::new(params, k)
}

/// Per-sub-kernel Gram matrices over one microphone array.
#[derive(Debug, Clone)]
pub struct GramSet {
    grams: Vec<CMatrix>,
    mic_array: MicArray,
}

impl GramSet {
    pub fn grams(&self) -> &[CMatrix] {
        &self.grams
    }

    pub fn num_kernels(&self) -> usize {
        self.grams.len()
    }

    pub fn num_mics(&self) -> usize {
        self.mic_array.len()
    }

    pub fn mic_array(&self) -> &MicArray {
        &self.mic_array
    }
}

/// K^(d)[i][j] = κ_d(r_i, r_j) for every sub-kernel in the bank.
///
/// Only the upper triangle is evaluated; the lower is its conjugate
/// mirror, which a unit test verifies against brute force.
pub fn build_gram_set(mic_array: &MicArray, bank: &KernelBank) -> GramSet {
    let m = mic_array.len();
    let ps = mic_array.positions();
    let k = bank.wavenumber();
    let grams = bank
        .params()
        .iter()
        .map(|param| {
            let mut g = CMatrix::zeros(m);
            for i in 0..m {
                for j in i..m {
                    let v = kappa_directional(&ps[i], &ps[j], param, k);
                    g.set(i, j, v);
                    if i != j {
                        g.set(j, i, v.conj());
                    }
                }
            }
            g
        })
        .collect();
    GramSet { grams, mic_array: mic_array.clone() }
}

/// K = Σ_d γ_d K^(d).
pub fn mix_gram(gram_set: &GramSet, gamma: &[f64]) -> Result<CMatrix> {
    if gamma.len() != gram_set.num_kernels() {
        return Err(Error::DimensionMismatch {
            expected: gram_set.num_kernels(),
            got: gamma.len(),
        });
    }
    let mut k = CMatrix::zeros(gram_set.num_mics());
    for (g, kd) in gamma.iter().zip(gram_set.grams.iter()) {
        if *g != 0.0 {
            k.add_scaled(kd, *g);
        }
    }
    Ok(k)
}
