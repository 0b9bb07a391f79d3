use thiserror::Error;

/// Errors shared across the simulation modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("duplicate target sites {0:?}")]
    DuplicateTargets(Vec<usize>),

    #[error("site index {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("total dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("measurement basis is not orthonormal: {0}")]
    NonOrthonormalBasis(String),

    #[error("state is not normalized (norm deviates by {0:.3e})")]
    NotNormalized(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time grid too coarse ({detail}); suggested dt <= {suggested_dt:.3e}")]
    GridTooCoarse { detail: String, suggested_dt: f64 },

    #[error("singular denominator: {0}")]
    SingularDenominator(String),

    #[error("branch undefined on this domain: {0}")]
    InvalidBranch(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("unsupported removal: {0}")]
    UnsupportedRemoval(String),
}

pub type Result<T> = std::result::Result<T, Error>;
