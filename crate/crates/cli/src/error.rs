// SPDX-License-Identifier: Apache-2.0
use std::path::PathBuf;

use sisnet_core::analysis::AnalysisError;
use sisnet_core::ctmc::CtmcError;
use sisnet_core::meanfield::MeanFieldError;
use sisnet_core::topology::{ScheduleError, TopologyError};

/// Failures surfaced as `ERROR <CODE>: message` with exit status 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config file {0} not found")]
    ConfigNotFound(PathBuf),
    #[error("cannot parse config: {0}")]
    ConfigParse(String),
    #[error("invalid network: {0}")]
    InvalidSpec(String),
    #[error("{0}")]
    InvalidParameter(String),
    #[error("config has no \"{0}\" block")]
    MissingBlock(&'static str),
    #[error("{0}")]
    ScheduleRatioMismatch(String),
    #[error("{0}")]
    ExactTooLarge(String),
    #[error("{0}")]
    EnsembleTooSmall(String),
    #[error("{0} exists; pass --overwrite to replace it")]
    OutputExists(PathBuf),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    EventCapExceeded(String),
    #[error("{0}")]
    StepTooLarge(String),
    #[error("{0}")]
    InvalidState(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::ConfigNotFound(_) => "CONFIG_NOT_FOUND",
            CliError::ConfigParse(_) => "CONFIG_PARSE",
            CliError::InvalidSpec(_) => "INVALID_SPEC",
            CliError::InvalidParameter(_) => "INVALID_PARAMETER",
            CliError::MissingBlock(_) => "MISSING_BLOCK",
            CliError::ScheduleRatioMismatch(_) => "SCHEDULE_RATIO_MISMATCH",
            CliError::ExactTooLarge(_) => "EXACT_TOO_LARGE",
            CliError::EnsembleTooSmall(_) => "ENSEMBLE_TOO_SMALL",
            CliError::OutputExists(_) => "OUTPUT_EXISTS",
            CliError::Io(_) => "IO_ERROR",
            CliError::EventCapExceeded(_) => "EVENT_CAP_EXCEEDED",
            CliError::StepTooLarge(_) => "STEP_TOO_LARGE",
            CliError::InvalidState(_) => "INVALID_STATE",
            CliError::Internal(_) => "INTERNAL",
        }
    }
}

impl From<TopologyError> for CliError {
    fn from(e: TopologyError) -> Self {
        match e {
            TopologyError::Parse(p) => CliError::ConfigParse(p.to_string()),
            TopologyError::Schedule(s) => s.into(),
            other => CliError::InvalidSpec(other.to_string()),
        }
    }
}

impl From<ScheduleError> for CliError {
    fn from(e: ScheduleError) -> Self {
        match e {
            ScheduleError::RatioMismatch { .. } => CliError::ScheduleRatioMismatch(e.to_string()),
            other => CliError::InvalidParameter(other.to_string()),
        }
    }
}

impl From<CtmcError> for CliError {
    fn from(e: CtmcError) -> Self {
        match e {
            CtmcError::StateSpaceTooLarge { .. } => CliError::ExactTooLarge(e.to_string()),
            CtmcError::EventCapExceeded { .. } => CliError::EventCapExceeded(e.to_string()),
            CtmcError::InvalidState(_) => CliError::InvalidState(e.to_string()),
            CtmcError::Sizes(s) => s.into(),
            CtmcError::InvalidHorizon(_) | CtmcError::InvalidDistribution(_) => {
                CliError::InvalidParameter(e.to_string())
            }
            CtmcError::NonStochasticResult(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<MeanFieldError> for CliError {
    fn from(e: MeanFieldError) -> Self {
        match e {
            MeanFieldError::StepTooLarge { .. } | MeanFieldError::NonFiniteState { .. } => {
                CliError::StepTooLarge(e.to_string())
            }
            MeanFieldError::InvalidState(_) | MeanFieldError::DimensionMismatch { .. } => {
                CliError::InvalidState(e.to_string())
            }
            MeanFieldError::NoConvergence { .. } | MeanFieldError::LeftFeasibleSet => {
                CliError::Internal(e.to_string())
            }
            MeanFieldError::InvalidConfig(_) | MeanFieldError::InvalidAlpha { .. } => {
                CliError::InvalidParameter(e.to_string())
            }
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Ctmc(c) => c.into(),
            AnalysisError::MeanField(m) => m.into(),
            AnalysisError::Schedule(s) => s.into(),
            AnalysisError::EnsembleTooSmall { .. } => CliError::EnsembleTooSmall(e.to_string()),
            other => CliError::InvalidParameter(other.to_string()),
        }
    }
}
