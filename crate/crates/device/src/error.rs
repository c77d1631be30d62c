use ramsey_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid pulse sequence: {0}")]
    InvalidPulse(String),

    #[error("tomography basis {0} missing from the record")]
    MissingBasis(String),

    #[error("readout matrix is singular (|det| = {0:.3e})")]
    SingularReadout(f64),

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("numerical consistency violated: {0}")]
    NumericalConsistency(String),
}

impl DeviceError {
    /// True for errors that signal an invariant breach rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            DeviceError::NumericalConsistency(_)
                | DeviceError::Core(CoreError::NumericalConsistency(_))
        )
    }
}

pub type Result<T> = std::result::Result<T, DeviceError>;
