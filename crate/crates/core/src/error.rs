use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {dim} exceeds the configured cap of {cap}")]
    DimensionOverflow { dim: u128, cap: u128 },

    #[error("{n_sites} sites exceeds the configured maximum of {max}")]
    TooManySites { n_sites: usize, max: usize },

    #[error("site {site} is out of range 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("particle number {k} is out of range 0..={n_sites}")]
    SectorOutOfRange { k: usize, n_sites: usize },

    #[error("conjugacy class of size {size} exceeds the iteration cap of {cap}")]
    ClassTooLarge { size: u128, cap: u128 },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid cycle type: {0}")]
    InvalidCycleType(String),

    #[error("operator is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
