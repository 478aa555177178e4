use thiserror::Error;

/// Everything that can go wrong while building spaces or running a decision
/// procedure. `code()` gives the stable machine-readable name used by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unit ball is not closed under negation")]
    AsymmetricBall,
    #[error("unit ball is not full-dimensional: {0}")]
    DegenerateBall(String),
    #[error("exponent must satisfy 1 < p < infinity: {0}")]
    BadExponent(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension too small: need at least {required}, found {found}")]
    DimensionTooSmall { required: usize, found: usize },
    #[error("the zero vector is not admissible here")]
    ZeroVector,
    #[error("the operator maps the base point to zero")]
    ZeroImage,
    #[error("operator is singular")]
    SingularOperator,
    #[error("the direction is not Birkhoff-James orthogonal to the base point")]
    NotOrthogonalInput,
    #[error("functional is not a support functional at the base point")]
    NotSupportFunctional,
    #[error("subspace is not contained in the orthogonality set of the base point")]
    SubspaceNotOrthogonal,
    #[error("base point is smooth")]
    SmoothPoint,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("functionals are linearly dependent")]
    DependentFunctionals,
    #[error("space is not polyhedral")]
    NotPolyhedral,
    #[error("extreme point {0} has fewer independent support functionals than the dimension")]
    InsufficientSmoothness(String),
    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),
    #[error("set members must be unit vectors")]
    NotUnitVectors,
    #[error("p = 2 yields a multiple of an isometry")]
    EuclideanExponent,
    #[error("characterization and oracle disagree")]
    MethodDisagreement,
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::AsymmetricBall => "AsymmetricBall",
            Error::DegenerateBall(_) => "DegenerateBall",
            Error::BadExponent(_) => "BadExponent",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DimensionTooSmall { .. } => "DimensionTooSmall",
            Error::ZeroVector => "ZeroVector",
            Error::ZeroImage => "ZeroImage",
            Error::SingularOperator => "SingularOperator",
            Error::NotOrthogonalInput => "NotOrthogonalInput",
            Error::NotSupportFunctional => "NotSupportFunctional",
            Error::SubspaceNotOrthogonal => "SubspaceNotOrthogonal",
            Error::SmoothPoint => "SmoothPoint",
            Error::HypothesisViolated(_) => "HypothesisViolated",
            Error::DependentFunctionals => "DependentFunctionals",
            Error::NotPolyhedral => "NotPolyhedral",
            Error::InsufficientSmoothness(_) => "InsufficientSmoothness",
            Error::UnsupportedSpace(_) => "UnsupportedSpace",
            Error::NotUnitVectors => "NotUnitVectors",
            Error::EuclideanExponent => "EuclideanExponent",
            Error::MethodDisagreement => "MethodDisagreement",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
