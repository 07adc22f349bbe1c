use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries or violates a construction invariant: {0}")]
    InvalidMatrix(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("unsupported size: {0}")]
    UnsupportedSize(String),
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("factor must be a 2x2 Hermitian matrix")]
    InvalidFactor,
    #[error("commutant decomposition failed: {0}")]
    DecompositionFailed(String),
    #[error("Bloch parameters produce a non-positive block: {0}")]
    InvalidBloch(String),
    #[error("state is not symmetric under the given representation (residual {0:.3e})")]
    NotSymmetric(f64),
    #[error("observable does not commute with the representation (residual {0:.3e})")]
    NotSymmetricObservable(f64),
    #[error("parameter shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("precision must be positive, got {0}")]
    InvalidPrecision(f64),
    #[error("shot count must be at least 1")]
    InvalidShots,
    #[error("delta must lie strictly between 0 and 1, got {0}")]
    InvalidDelta(f64),
    #[error("this closed form requires odd n, got {0}")]
    OddOnly(usize),
    #[error("block weight q_{0} = {1:.3e} is below the degeneracy threshold; drop the block first")]
    DegenerateWeight(usize, f64),
    #[error("report invariant violated: {0}")]
    BoundViolation(String),
    #[error("pauli string parse error: {0}")]
    PauliParse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
