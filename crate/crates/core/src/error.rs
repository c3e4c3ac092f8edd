use thiserror::Error;

/// Errors raised by geometry validation, the inverse kinematic solvers and
/// the classification catalog.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("d4 must be strictly positive (got {0})")]
    NonPositiveD4(f64),
    #[error("parameter {name} must be non-negative (got {value})")]
    NegativeParameter { name: &'static str, value: f64 },
    #[error("parameter {name} is not finite")]
    NonFinite { name: &'static str },
    #[error("degenerate geometry: d2, d3 and r2 are all zero")]
    DegenerateGeometry,
    #[error("d2 is zero: use the reduced solver")]
    ZeroD2Path,
    #[error("reduced inverse kinematics is degenerate (d3 = r2 = 0)")]
    DegenerateReduced,
    #[error("unknown manipulator type `{0}`")]
    UnknownType(String),
    #[error("invalid geometry file: {0}")]
    GeometryFile(String),
    #[error("unresolved region: {0}")]
    UnresolvedRegion(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
