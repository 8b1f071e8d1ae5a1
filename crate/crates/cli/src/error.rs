use thiserror::Error;

/// Exit codes: 0 success, 1 other failure, 2 usage or bad parameter,
/// 3 bad input data, 4 capacity exceeded.
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("{0}")]
    Output(String),

    #[error(transparent)]
    Core(#[from] qfin_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qfin_core::Error as E;
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Data(_) => EXIT_DATA,
            Self::Output(_) => EXIT_OTHER,
            Self::Core(e) => match e {
                E::Parameter(_) => EXIT_USAGE,
                E::Capacity { .. } => EXIT_CAPACITY,
                E::Dimension { .. }
                | E::Data(_)
                | E::Validation(_)
                | E::Parse { .. }
                | E::Encoding(_)
                | E::DegenerateAmplitude(_) => EXIT_DATA,
                E::Integration(_) => EXIT_OTHER,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
