//! Error type shared by all core operations.

use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A named point set does not exist or lacks the requested size.
    UnknownPointSet { name: alloc::string::String },
    /// The embedded t-design table has no entry of the requested size.
    PointSetSizeUnavailable { name: alloc::string::String, requested: usize },
    /// An evaluation position coincides with a point source.
    SourceSingularity,
    /// Vector/matrix dimensions do not agree.
    DimensionMismatch { expected: usize, got: usize },
    /// Cholesky factorization hit a nonpositive pivot; the mixed Gram
    /// matrix violates positive semidefiniteness beyond tolerance.
    FactorizationFailure { pivot: usize },
    /// Invalid scalar parameter (nonpositive frequency, radius, lambda, ...).
    InvalidParameter { what: &'static str },
    /// The spherical quadrature did not converge at the requested order.
    QuadratureNotConverged { order: usize, delta: f64 },
    /// A lattice produced no points inside the region.
    EmptyGrid,
    /// NMSE normalization is undefined for an identically zero true field.
    ZeroTrueField,
    /// The objective became non-finite during optimization.
    NonFiniteObjective,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnknownPointSet { name } => write!(f, "unknown point set `{name}`"),
            Error::PointSetSizeUnavailable { name, requested } => {
                write!(f, "point set `{name}` has no entry with {requested} points")
            }
            Error::SourceSingularity => {
                write!(f, "evaluation position coincides with a point source")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::FactorizationFailure { pivot } => {
                write!(f, "Hermitian factorization failed at pivot {pivot}")
            }
            Error::InvalidParameter { what } => write!(f, "invalid parameter: {what}"),
            Error::QuadratureNotConverged { order, delta } => {
                write!(f, "quadrature not converged at order {order} (delta {delta:e})")
            }
            Error::EmptyGrid => write!(f, "evaluation lattice contains no points in the region"),
            Error::ZeroTrueField => write!(f, "NMSE undefined: true field is identically zero"),
            Error::NonFiniteObjective => write!(f, "objective value is not finite"),
        }
    }
}

#[cfg(any(test, feature = "std"))]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
