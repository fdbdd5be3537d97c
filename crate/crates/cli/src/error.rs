use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },

    #[error("{0} verification check(s) failed")]
    Verification(usize),

    #[error(transparent)]
    Compute(#[from] fockspin::Error),

    #[error("{path}: {err}")]
    Io { path: String, err: std::io::Error },
}

impl CliError {
    pub fn parse(origin: impl Into<String>, message: impl ToString) -> Self {
        CliError::Parse { origin: origin.into(), message: message.to_string() }
    }

    pub fn io(path: impl Into<String>, err: std::io::Error) -> Self {
        CliError::Io { path: path.into(), err }
    }

    /// 0 success, 1 verification or numerical failure, 2 usage or bad input,
    /// 3 resource limits.
    pub fn exit_code(&self) -> ExitCode {
        use fockspin::Error as E;
        let code = match self {
            CliError::Usage(_) | CliError::Parse { .. } | CliError::Io { .. } => 2,
            CliError::Verification(_) => 1,
            CliError::Compute(e) => match e {
                E::Resource(_) => 3,
                E::Domain(_)
                | E::Precondition(_)
                | E::DimensionMismatch { .. }
                | E::EmptySector { .. }
                | E::Estimation(_)
                | E::DegenerateKinematics(_) => 2,
                E::Singular(_) | E::Accuracy { .. } => 1,
            },
        };
        ExitCode::from(code)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
