use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("non-finite matrix or vector entry")]
    NonFinite,
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("state annihilated by the global operator (norm {norm:e})")]
    Annihilated { norm: f64 },
    #[error("state annihilated at step {step} (norm {norm:e})")]
    AnnihilatedAt { step: usize, norm: f64 },
    #[error("initial state is not a product state")]
    NotProductState,
    #[error("invalid Pauli letter {0:?}")]
    InvalidPauliLetter(char),
    #[error("trajectory too short: {0}")]
    TrajectoryTooShort(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("empty group: {0}")]
    EmptyGroup(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for violations of a numerical contract (non-unitary rule,
    /// annihilated state, non-Hermitian input, ...), as opposed to usage or
    /// I/O problems.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian(_)
                | Error::NotUnitary(_)
                | Error::NotNormalized(_)
                | Error::NonFinite
                | Error::InvalidDensityMatrix(_)
                | Error::Annihilated { .. }
                | Error::AnnihilatedAt { .. }
                | Error::NotProductState
                | Error::DegenerateFit(_)
        )
    }
}
