use thiserror::Error;

use crate::quantum::Site;

pub type Result<T> = std::result::Result<T, QssError>;

#[derive(Debug, Error)]
pub enum QssError {
    #[error("duplicate site label {0}")]
    DuplicateSite(Site),

    #[error("unknown site label {0}")]
    UnknownSite(Site),

    #[error("matrix is not unitary: ||U^dag U - I|| = {0:e}")]
    NotUnitary(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("register mismatch between states")]
    RegisterMismatch,

    #[error("outcome length {got} does not match {expected} measured sites")]
    OutcomeLength { expected: usize, got: usize },

    #[error("X-basis measurement requires a qubit site, {0} has dimension {1}")]
    NotAQubit(Site, usize),

    #[error("partial trace needs a non-empty keep set")]
    EmptyKeep,

    #[error("state is not normalized: norm^2 = {0}")]
    NotNormalized(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no Pauli correction recovers the secret for alice={alice} x={x}")]
    NoCorrection { alice: String, x: String },

    #[error("correction table has no entry for alice={alice} x={x}")]
    MissingEntry { alice: String, x: String },
}
