use psr_core::ensemble::EnsembleError;
use psr_core::fluctuations::FluctuationError;
use psr_core::matsko::MatskoError;
use psr_core::params::ParamError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("data error: {0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Data(_) => 4,
        }
    }

    pub fn numerical(at: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        CliError::Numerical(format!("{e} (at {at})"))
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<MatskoError> for CliError {
    fn from(e: MatskoError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<FluctuationError> for CliError {
    fn from(e: FluctuationError) -> Self {
        match e {
            FluctuationError::Param(p) => p.into(),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<EnsembleError> for CliError {
    fn from(e: EnsembleError) -> Self {
        match e {
            EnsembleError::Param(p) => p.into(),
            EnsembleError::InsufficientData { .. } | EnsembleError::NotMonotone { .. } => {
                CliError::Data(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}
