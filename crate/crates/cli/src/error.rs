//! Process-level error type: every failure maps to an exit code and a
//! machine-readable JSON payload on stderr.
//!
//! The classification rule is by who has to act: `Config` (exit 2) means
//! the invocation or experiment file is wrong, `Data` (exit 3) means an
//! input file is missing, malformed, or too short, and `Numerical`
//! (exit 4) means the inputs were accepted but the computation degenerated
//! (diverged training, non-finite values).

use std::collections::BTreeMap;
use std::fmt;

use gridrisk_core::backtest::BacktestError;
use gridrisk_core::features::FeaturesError;
use gridrisk_core::forecast::ForecastError;
use gridrisk_core::metrics::MetricsError;
use gridrisk_core::policy::PolicyError;
use gridrisk_core::DataError;
use serde_json::json;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
}

/// A classified failure plus free-form context for the stderr payload.
#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
    pub context: BTreeMap<String, String>,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Config, message)
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Data, message)
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Numerical, message)
    }

    fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        CliError {
            kind,
            message: message.into(),
            context: BTreeMap::new(),
        }
    }

    /// Attach a context entry (builder style).
    pub fn with(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.context.insert(key.to_string(), value.to_string());
        self
    }

    pub fn code(&self) -> &'static str {
        match self.kind {
            ErrorKind::Config => "config_error",
            ErrorKind::Data => "data_error",
            ErrorKind::Numerical => "numerical_error",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numerical => 4,
        }
    }

    /// One-line JSON body for stderr.
    pub fn stderr_json(&self) -> String {
        json!({
            "code": self.code(),
            "message": self.message,
            "context": self.context,
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code(), self.message)
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<ForecastError> for CliError {
    fn from(e: ForecastError) -> Self {
        match &e {
            ForecastError::DivergedLoss { .. } | ForecastError::NonFiniteState { .. } => {
                CliError::numerical(e.to_string())
            }
            ForecastError::BadConfig(_) | ForecastError::NonPositiveStep(_) => {
                CliError::config(e.to_string())
            }
            ForecastError::Objective(inner) => {
                use gridrisk_core::objective::ObjectiveError;
                match inner {
                    ObjectiveError::BadConfig(_) => CliError::config(e.to_string()),
                    ObjectiveError::NonFinite(_) | ObjectiveError::NonPositiveVariance(_) => {
                        CliError::numerical(e.to_string())
                    }
                    _ => CliError::data(e.to_string()),
                }
            }
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<FeaturesError> for CliError {
    fn from(e: FeaturesError) -> Self {
        CliError::data(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match &e {
            MetricsError::NonFinite(_) => CliError::numerical(e.to_string()),
            MetricsError::BadPercentile(_) | MetricsError::BadThreshold(_) => {
                CliError::config(e.to_string())
            }
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<PolicyError> for CliError {
    fn from(e: PolicyError) -> Self {
        match &e {
            PolicyError::KappaBelowOne(_) => CliError::config(e.to_string()),
            PolicyError::NegativeRho(_) | PolicyError::NonFinite(_) => {
                CliError::numerical(e.to_string())
            }
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<BacktestError> for CliError {
    fn from(e: BacktestError) -> Self {
        match e {
            BacktestError::BadParams(_) => CliError::config(e.to_string()),
            BacktestError::Fold { index, ref source } => {
                CliError::from(source.clone()).with("fold", index)
            }
            BacktestError::Metrics(inner) => CliError::from(inner),
            BacktestError::Data(inner) => CliError::from(inner),
            _ => CliError::data(e.to_string()),
        }
    }
}
