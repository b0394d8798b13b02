use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// `det G` fell below the singularity threshold at a parameter point.
    SingularMetric { u: f64, v: f64, det: f64 },
    UnknownSurface(String),
    UnknownDomain(String),
    BadParams(String),
    DegenerateDomain(String),
    MeshingFailed(String),
    /// Refinement or lookup referred to a boundary tag the mesh does not carry.
    UnknownTag(String),
    InvalidRefinement(String),
    /// A boundary tag present on the mesh has no boundary condition.
    MissingBc(String),
    ConflictingBc(String),
    /// Cholesky met a non-positive pivot.
    NonSpd { pivot: usize, value: f64 },
    OutsideDomain { u: f64, v: f64 },
    OrientationCheckFailed { deviation: f64, tolerance: f64 },
    OptimizationStalled { objective: f64, sweeps: usize },
    /// The Mercator reference was requested at or beyond a pole.
    DomainError(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SingularMetric { u, v, det } => {
                write!(f, "singular metric at ({u}, {v}): det G = {det:e}")
            }
            Error::UnknownSurface(name) => write!(f, "unknown surface `{name}`"),
            Error::UnknownDomain(name) => write!(f, "unknown domain `{name}`"),
            Error::BadParams(msg) => write!(f, "bad parameters: {msg}"),
            Error::DegenerateDomain(msg) => write!(f, "degenerate domain: {msg}"),
            Error::MeshingFailed(msg) => write!(f, "meshing failed: {msg}"),
            Error::UnknownTag(tag) => write!(f, "unknown boundary tag `{tag}`"),
            Error::InvalidRefinement(msg) => write!(f, "invalid refinement: {msg}"),
            Error::MissingBc(tag) => write!(f, "no boundary condition for tag `{tag}`"),
            Error::ConflictingBc(msg) => write!(f, "conflicting boundary conditions: {msg}"),
            Error::NonSpd { pivot, value } => {
                write!(f, "matrix is not positive definite (pivot {pivot} = {value:e})")
            }
            Error::OutsideDomain { u, v } => write!(f, "point ({u}, {v}) is outside the mesh"),
            Error::OrientationCheckFailed { deviation, tolerance } => write!(
                f,
                "corner correspondence failed: deviation {deviation:e} exceeds {tolerance:e}"
            ),
            Error::OptimizationStalled { objective, sweeps } => write!(
                f,
                "optimization stalled after {sweeps} sweeps at objective {objective:e}"
            ),
            Error::DomainError(msg) => write!(f, "domain error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
