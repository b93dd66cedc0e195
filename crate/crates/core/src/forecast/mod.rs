//! Desk-scale forecasters: seasonal-naive baseline, linear multi-quantile
//! model trained on the combined objective, a Gaussian-head linear model,
//! and a forward-only selective state-space cell.

mod gaussian;
mod linear;
mod naive;
mod scaler;
mod ssm;

pub use gaussian::{GaussianLinearModel, GaussianTrainConfig};
pub use linear::{
    Checkpoint, LinearQuantileModel, QuantileTrainConfig, DEFAULT_EPOCHS, DEFAULT_PATIENCE,
};
pub use naive::SeasonalNaive;
pub use scaler::FeatureScaler;
pub use ssm::{selective_scan, zoh_discretize, SsmCell};

use ndarray::Array2;
use thiserror::Error;

use crate::data::{AlignedFrame, HourRange};
use crate::features::FeaturesError;
use crate::objective::ObjectiveError;

/// Errors from fitting or running forecasters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForecastError {
    #[error("history does not reach hour {hour} needed for issue {issue}")]
    InsufficientHistory { issue: i64, hour: i64 },
    #[error("training loss diverged at epoch {epoch}: {loss} vs initial {initial}")]
    DivergedLoss {
        epoch: usize,
        loss: f64,
        initial: f64,
    },
    #[error("degenerate design: {0}")]
    DegenerateDesign(&'static str),
    #[error("feature columns changed since fit: expected {expected}, got {got}")]
    ColumnMismatch { expected: usize, got: usize },
    #[error("model has not been fitted")]
    NotFitted,
    #[error("discretization step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("state went non-finite at step {step}")]
    NonFiniteState { step: usize },
    #[error("bad forecaster configuration: {0}")]
    BadConfig(&'static str),
    #[error(transparent)]
    Feature(#[from] FeaturesError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

/// A model that can be fitted on a training window and asked for quantile
/// forecasts at an issue hour.
pub trait Forecaster {
    /// Quantile levels each prediction row carries, ascending.
    fn levels(&self) -> &[f64];

    /// Fit on `train`; `val` is the tail window reserved for early
    /// stopping or sanity checks and lies inside the training history.
    fn fit(
        &mut self,
        frame: &AlignedFrame,
        train: HourRange,
        val: HourRange,
    ) -> Result<(), ForecastError>;

    /// Forecast the requested leads from `issue`. Returns
    /// `leads.len() x levels().len()`, non-decreasing across each row.
    fn predict(
        &self,
        frame: &AlignedFrame,
        issue: i64,
        leads: &[u32],
    ) -> Result<Array2<f64>, ForecastError>;
}
