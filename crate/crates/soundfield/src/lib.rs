//! Sound field estimation from discrete microphone measurements.
//!
//! Reconstructs a single-frequency acoustic pressure field in a source-free
//! spherical region by kernel ridge regression against Helmholtz plane-wave
//! kernels. The kernel's directional weighting (a von Mises–Fisher density
//! over arrival directions) is either fixed or learned from the observations
//! by multiple kernel learning over a discretized bank of sub-kernels, with
//! an L1 (simplex) or L2 (unit ball) constraint on the combination weights.
//!
//! The crate is `no_std` + `alloc`; everything here is pure computation.
//! IO, configuration and the batch experiment driver live in the companion
//! `sfield-cli` crate.

#![no_std]
#![deny(unsafe_code)]
// `!(x > 0.0)` deliberately rejects NaN together with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod error;
pub mod eval;
pub mod geometry;
pub mod kernels;
pub mod linalg;
pub mod mkl;
pub mod ridge;

pub use error::Error;
pub use eval::{
    error_slice, estimated_field, make_grid, nmse, true_field, Axis, EvalGrid, FieldSlice,
    PlaneSpec, SlicePoint, NMSE_FLOOR_DB,
};
pub use geometry::{
    greens_field, observe, spherical_layer_layout, MicArray, Observation, PointSet, PointSource,
    Position3, Scene, SphereRegion,
};
pub use kernels::{
    build_gram_set, default_bank, kappa_directional, kappa_quadrature_oracle, mix_gram,
    GramSet, KernelBank, SubKernelParam,
};
pub use mkl::{
    descent_direction, grad_j, solve_l1, solve_l2, KernelWeights, L1Options, L2Options, MklResult,
};
pub use ridge::{estimate_field, objective_j, solve_alpha, EstimatorState, RidgeConfig};

/// Complex scalar used throughout: pressure values, kernel values, weights.
pub type C64 = num_complex::Complex<f64>;
