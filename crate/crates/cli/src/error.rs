use exceptional::ep_finder::EpError;
use exceptional::oscillator::OscillatorError;
use exceptional::two_level::TwoLevelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    NoConvergence(String),
    #[error("{0}")]
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::NoConvergence(_) => 4,
            CliError::Degenerate(_) => 5,
        }
    }
}

impl From<EpError> for CliError {
    fn from(e: EpError) -> Self {
        match e {
            EpError::NoConvergence { .. } => CliError::NoConvergence(e.to_string()),
            EpError::ConvergedToDegenerate { .. } | EpError::DegenerateFamily { .. } => {
                CliError::Degenerate(e.to_string())
            }
            EpError::InvalidInput(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<OscillatorError> for CliError {
    fn from(e: OscillatorError) -> Self {
        match e {
            OscillatorError::InvalidParams { .. } | OscillatorError::ZeroDrive | OscillatorError::TooFewSamples(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<TwoLevelError> for CliError {
    fn from(e: TwoLevelError) -> Self {
        match e {
            TwoLevelError::DegenerateSlopes { .. } => CliError::Degenerate(e.to_string()),
            TwoLevelError::AngleSingularity => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
