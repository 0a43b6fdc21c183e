use steplearn_core::Error;

/// CLI failures, each mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("bound violation: {0}")]
    Violation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Divergence(_) => 2,
            CliError::Violation(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Diverged { .. } | Error::AllDiverged => CliError::Divergence(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(Error::Diverged { step: 3, norm: 1e300 }).exit_code(), 2);
        assert_eq!(CliError::from(Error::AllDiverged).exit_code(), 2);
        assert_eq!(CliError::from(Error::Empty("net")).exit_code(), 1);
        assert_eq!(CliError::Violation("x".into()).exit_code(), 3);
        assert_eq!(CliError::from(std::io::Error::other("x")).exit_code(), 1);
    }
}
