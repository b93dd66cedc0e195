//! Risk metrics for quantile load forecasts.
//!
//! The point of this module is that MAPE alone hides the failure mode that
//! matters operationally: *which side* of the actual the forecast landed on,
//! and how much reserve the tail of the under-forecast distribution would
//! have required. Everything here scores a [`QuantileForecastSet`] — the
//! per-issue, per-lead quantile predictions plus realized actuals.

mod dm;
mod forecast_set;
mod percentile;
mod point;
mod report;

pub use dm::{dm_test, DmResult};
pub use forecast_set::QuantileForecastSet;
pub use percentile::{percentile, reserve, ReserveBasis};
pub use point::{bias_at_horizon, direction_rates, large_error_counts, mape, DirectionRates};
pub use report::{build_risk_report, ReportMode, ReportSpec, RiskReport};

use thiserror::Error;

/// Errors raised while scoring forecasts.
#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("input slices have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("metric input is empty")]
    Empty,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("actual at index {index} is not strictly positive ({value})")]
    NonPositiveActual { index: usize, value: f64 },
    #[error("forecast at index {index} must be strictly positive for a percent basis ({value})")]
    NonPositiveForecast { index: usize, value: f64 },
    #[error("percentile must lie in [0, 100], got {0}")]
    BadPercentile(f64),
    #[error("threshold must be finite and positive, got {0}")]
    BadThreshold(f64),
    #[error("quantile levels invalid: {0}")]
    BadLevels(String),
    #[error("lead hours invalid: {0}")]
    BadLeads(String),
    #[error("issue hours must be strictly increasing")]
    BadIssues,
    #[error("forecast set dimensions disagree: {0}")]
    BadShape(String),
    #[error("quantile crossing at issue {issue}, lead {lead}")]
    Crossing { issue: usize, lead: usize },
    #[error("quantile levels must include 0.5")]
    MissingMedian,
    #[error("lead {0} is not in the forecast set")]
    MissingLead(u32),
    #[error("need more points than the horizon for a DM test (n = {n}, h = {h})")]
    DmTooShort { n: usize, h: u32 },
    #[error("loss differential has zero variance but nonzero mean; DM statistic undefined")]
    DegenerateDifferential,
}
