use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Tie(String),
    #[error("{0}")]
    Degenerate(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output(_) => 1,
            CliError::Input(_) => 2,
            CliError::Tie(_) => 3,
            CliError::Degenerate(_) => 4,
        }
    }
}

impl From<envadj::Error> for CliError {
    fn from(e: envadj::Error) -> Self {
        use envadj::Error as E;
        match e {
            E::PointwiseTie { .. } => CliError::Tie(e.to_string()),
            E::RetryCapExhausted { .. } => CliError::Degenerate(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}
