//! Batch experiment driver and file formats for the `soundfield` library.

// `!(x > 0.0)` deliberately rejects NaN together with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod export;
pub mod kernelcheck;
