use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("poisson truncation infeasible: nbar = {nbar} needs more than {cap} photon numbers")]
    TruncationInfeasible { nbar: f64, cap: usize },

    #[error("requested dimension {requested} exceeds the {available} available source weights")]
    DimensionTooLarge { requested: usize, available: usize },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("basis leakage {leakage:.3e} in block p = {block} exceeds {threshold:.1e}")]
    BasisLeakage { block: usize, leakage: f64, threshold: f64 },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("non-finite value in series `{0}`")]
    NonFinite(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
