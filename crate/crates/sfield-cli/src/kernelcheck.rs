//! Self-check of the closed-form kernel against numerical quadrature.

use anyhow::{bail, Result};
use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use soundfield::{kappa_directional, kappa_quadrature_oracle, Position3, SubKernelParam};

pub struct CheckOutcome {
    pub instances: usize,
    pub max_rel_err: f64,
    pub max_hermitian_defect: f64,
    pub max_diag_defect: f64,
}

fn uniform(rng: &mut ChaCha12Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    lo + u * (hi - lo)
}

/// Random geometry/parameter instances over the audible band: each
/// closed-form kernel value must match spherical quadrature to `tol`
/// relative error, be Hermitian under argument swap, and equal one on the
/// diagonal.
pub fn run_kernel_check(instances: usize, tol: f64) -> Result<CheckOutcome> {
    if instances == 0 {
        bail!("kernel-check: instance count must be >= 1");
    }
    let mut rng = ChaCha12Rng::seed_from_u64(0x5EED_CAFE);
    let mut max_rel_err: f64 = 0.0;
    let mut max_herm: f64 = 0.0;
    let mut max_diag: f64 = 0.0;

    for i in 0..instances {
        let r1 = Position3::new(
            uniform(&mut rng, -0.5, 0.5),
            uniform(&mut rng, -0.5, 0.5),
            uniform(&mut rng, -0.5, 0.5),
        );
        let r2 = Position3::new(
            uniform(&mut rng, -0.5, 0.5),
            uniform(&mut rng, -0.5, 0.5),
            uniform(&mut rng, -0.5, 0.5),
        );
        let eta = loop {
            let v = [
                uniform(&mut rng, -1.0, 1.0),
                uniform(&mut rng, -1.0, 1.0),
                uniform(&mut rng, -1.0, 1.0),
            ];
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 0.1 && n <= 1.0 {
                break v;
            }
        };
        let beta = uniform(&mut rng, 0.0, 10.0);
        let freq = uniform(&mut rng, 100.0, 1000.0);
        let k = 2.0 * std::f64::consts::PI * freq / 340.0;
        let param = SubKernelParam::new(eta, beta)
            .map_err(|e| anyhow::anyhow!("instance {i}: {e}"))?;

        let closed = kappa_directional(&r1, &r2, &param, k);
        let quad = kappa_quadrature_oracle(&r1, &r2, &param, k, 48)
            .map_err(|e| anyhow::anyhow!("instance {i}: quadrature: {e}"))?;
        let rel = (closed - quad).norm() / quad.norm().max(1e-30);
        max_rel_err = max_rel_err.max(rel);
        if rel > tol {
            bail!(
                "kernel-check: instance {i} relative error {rel:.3e} exceeds {tol:.1e} \
                 (closed {closed}, quadrature {quad})"
            );
        }

        let swapped = kappa_directional(&r2, &r1, &param, k);
        max_herm = max_herm.max((swapped - closed.conj()).norm());
        let diag = kappa_directional(&r1, &r1, &param, k);
        max_diag = max_diag.max((diag - soundfield::C64::new(1.0, 0.0)).norm());
    }

    if max_herm > 1e-12 {
        bail!("kernel-check: Hermitian defect {max_herm:.3e} exceeds 1e-12");
    }
    if max_diag > 1e-12 {
        bail!("kernel-check: diagonal defect {max_diag:.3e} exceeds 1e-12");
    }
    Ok(CheckOutcome {
        instances,
        max_rel_err,
        max_hermitian_defect: max_herm,
        max_diag_defect: max_diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_hundred_instances_pass_at_1e6() {
        let out = run_kernel_check(200, 1e-6).unwrap();
        assert_eq!(out.instances, 200);
        assert!(out.max_rel_err < 1e-6);
    }

    #[test]
    fn zero_instances_rejected() {
        assert!(run_kernel_check(0, 1e-6).is_err());
    }

    #[test]
    fn absurd_tolerance_fails() {
        assert!(run_kernel_check(50, 1e-18).is_err());
    }
}
