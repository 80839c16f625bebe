use races_core::explicit::ExplicitError;
use races_core::model::ModelError;
use races_core::race::RaceError;
use races_core::sieve::SieveError;
use races_core::zeros::ZeroError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const DATA: i32 = 3;
    pub const INTERNAL: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Data(_) => exit::DATA,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }

    pub fn io(what: &str, path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{what} {}: {e}", path.display()))
    }
}

impl From<SieveError> for CliError {
    fn from(e: SieveError) -> Self {
        match e {
            SieveError::LimitTooLarge(_) | SieveError::Zero => CliError::Usage(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<RaceError> for CliError {
    fn from(e: RaceError) -> Self {
        match e {
            RaceError::InvalidConfig(_)
            | RaceError::BadCheckpoints
            | RaceError::BadLimit(_)
            | RaceError::UndefinedNormalization(_) => CliError::Usage(e.to_string()),
            RaceError::Sieve(s) => s.into(),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<ZeroError> for CliError {
    fn from(e: ZeroError) -> Self {
        match e {
            ZeroError::InvalidModulus(_)
            | ZeroError::CharacterIndex { .. }
            | ZeroError::Unsupported { .. }
            | ZeroError::Domain(_) => CliError::Usage(e.to_string()),
            ZeroError::CountMismatch { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Zeros(z) => z.into(),
            ModelError::TooFewSamples { .. } | ModelError::PatternLength { .. } | ModelError::Empty => {
                CliError::Usage(e.to_string())
            }
            ModelError::ModulusMismatch { .. } | ModelError::Incompatible(_) => CliError::Data(e.to_string()),
        }
    }
}

impl From<ExplicitError> for CliError {
    fn from(e: ExplicitError) -> Self {
        match e {
            ExplicitError::Zeros(z) => z.into(),
            ExplicitError::SmallX(_) | ExplicitError::Grid(_) => CliError::Usage(e.to_string()),
            ExplicitError::Incomplete { .. } | ExplicitError::ModulusMismatch { .. } => CliError::Data(e.to_string()),
        }
    }
}
