use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] capcover::Error),
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("{message} (trace: {trace})")]
    Traced { message: String, trace: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 0 success, 1 invalid input, 2 infeasible or failed verification,
    /// 3 internal assertion or numerical failure.
    pub fn exit_code(&self) -> i32 {
        use capcover::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::Infeasible | E::Coverage { .. } => 2,
                E::Assertion(_) | E::NumericalFailure(_) | E::Unbounded => 3,
                _ => 1,
            },
            CliError::Usage(_) | CliError::Io(_) | CliError::Json(_) | CliError::Csv(_) => 1,
            CliError::Verify(_) => 2,
            CliError::Traced { .. } => 3,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes() {
        assert_eq!(CliError::Core(capcover::Error::Assertion("x".into())).exit_code(), 3);
        assert_eq!(CliError::Core(capcover::Error::Infeasible).exit_code(), 2);
        assert_eq!(CliError::Core(capcover::Error::InvalidParams("x".into())).exit_code(), 1);
        assert_eq!(CliError::Verify("x".into()).exit_code(), 2);
        let traced = CliError::Traced {
            message: "x".into(),
            trace: "t.ndjson".into(),
        };
        assert_eq!(traced.exit_code(), 3);
        assert!(traced.to_string().contains("t.ndjson"));
    }
}
