use ramsey_core::CoreError;
use ramsey_device::DeviceError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Device(#[from] DeviceError),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical consistency violated: {0}")]
    NumericalConsistency(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 3 for invariant
    /// breaches, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Device(DeviceError::Config(_)) => 2,
            HarnessError::NumericalConsistency(_) => 3,
            HarnessError::Device(d) if d.is_numerical() => 3,
            HarnessError::Core(CoreError::NumericalConsistency(_)) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_separate_config_from_numerical_failures() {
        assert_eq!(HarnessError::Config("x".into()).exit_code(), 2);
        assert_eq!(
            HarnessError::Device(DeviceError::Config("x".into())).exit_code(),
            2
        );
        assert_eq!(HarnessError::NumericalConsistency("x".into()).exit_code(), 3);
        assert_eq!(
            HarnessError::Device(DeviceError::NumericalConsistency("x".into())).exit_code(),
            3
        );
        assert_eq!(
            HarnessError::Core(CoreError::NumericalConsistency("x".into())).exit_code(),
            3
        );
        assert_eq!(
            HarnessError::Io(std::io::Error::other("x")).exit_code(),
            1
        );
    }
}
