//! Training objectives for quantile forecasts, with hand-derived gradients.
//!
//! The combined objective is the weighted multi-quantile pinball loss plus
//! two operational hinges — one capping mean bias at the scheduling horizon,
//! one capping a smoothed over-forecast rate:
//!
//! ```text
//! L = sum_q w_q * (1/H) sum_h pinball_q   (mean over the batch)
//!   + lambda_bias * max(0, b - b_max)      b = mean(sched - actual) at h*
//!   + lambda_opr  * max(0, s - pi_max)     s = 100 * mean sigmoid((sched - actual)/tau) at h*
//! ```
//!
//! Gradients are written out by hand (there is no autodiff here) and every
//! one of them is checked against central finite differences in the tests.
//! Subgradient conventions at the kinks are pinned down explicitly so that
//! training is deterministic: see [`pinball_subgrad`].

mod combined;
mod gaussian;
mod penalty;
mod pinball;

pub use combined::{combined_objective, combined_objective_grad, CombinedLoss};
pub use gaussian::{gaussian_nll, gaussian_nll_grad};
pub use penalty::{bias_penalty, opr_penalty, schedule_bias, sigmoid, smooth_opr};
pub use pinball::{multi_quantile_grad, multi_quantile_loss, pinball, pinball_subgrad};

use ndarray::{ArrayView2, ArrayView3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::QuantileForecastSet;

/// Errors raised while evaluating objectives.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ObjectiveError {
    #[error("invalid objective config: {0}")]
    BadConfig(String),
    #[error("batch shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("scheduling lead {0} is not in the batch")]
    MissingLead(u32),
    #[error("empty batch")]
    Empty,
    #[error("variance must be strictly positive, got {0}")]
    NonPositiveVariance(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Quantile levels, per-level weights, and penalty knobs.
///
/// `pi_max` is a percent (0..=100) so it reads on the same scale as the
/// hard over-forecast rate; `tau_mw` is the sigmoid temperature in MW.
/// The penalty multipliers and caps default to desk-scale values — they are
/// tuning knobs, not physical constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub quantiles: Vec<f64>,
    pub weights: Vec<f64>,
    pub h_star: u32,
    pub b_max_mw: f64,
    pub lambda_bias: f64,
    pub lambda_opr: f64,
    pub pi_max: f64,
    pub tau_mw: f64,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            quantiles: vec![0.025, 0.5, 0.975],
            weights: vec![4.0, 1.0, 4.0],
            h_star: 24,
            b_max_mw: 150.0,
            lambda_bias: 10.0,
            lambda_opr: 10.0,
            pi_max: 40.0,
            tau_mw: 250.0,
        }
    }
}

impl ObjectiveConfig {
    pub fn validate(&self) -> Result<(), ObjectiveError> {
        let bad = |msg: String| Err(ObjectiveError::BadConfig(msg));
        if self.quantiles.is_empty() {
            return bad("quantiles must be nonempty".to_string());
        }
        if self.quantiles.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
            return bad("quantiles must lie strictly inside (0, 1)".to_string());
        }
        if self.quantiles.windows(2).any(|w| w[1] <= w[0]) {
            return bad("quantiles must be strictly increasing".to_string());
        }
        if self.weights.len() != self.quantiles.len() {
            return bad(format!(
                "{} weights for {} quantiles",
                self.weights.len(),
                self.quantiles.len()
            ));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return bad("weights must be finite and positive".to_string());
        }
        if self.h_star == 0 {
            return bad("h_star must be at least 1".to_string());
        }
        if !self.b_max_mw.is_finite() {
            return bad("b_max_mw must be finite".to_string());
        }
        if !self.lambda_bias.is_finite() || self.lambda_bias < 0.0 {
            return bad("lambda_bias must be finite and nonnegative".to_string());
        }
        if !self.lambda_opr.is_finite() || self.lambda_opr < 0.0 {
            return bad("lambda_opr must be finite and nonnegative".to_string());
        }
        if !self.pi_max.is_finite() || !(0.0..=100.0).contains(&self.pi_max) {
            return bad("pi_max must lie in [0, 100] percent".to_string());
        }
        if !self.tau_mw.is_finite() || self.tau_mw <= 0.0 {
            return bad("tau_mw must be strictly positive".to_string());
        }
        Ok(())
    }

    /// The level whose head is the scheduled (point) forecast: 0.5 when
    /// present, otherwise the level closest to 0.5 (ties resolve low).
    pub fn schedule_index(&self) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, q) in self.quantiles.iter().enumerate() {
            let d = (q - 0.5).abs();
            if d < best_dist {
                best_dist = d;
                best = i;
            }
        }
        best
    }
}

/// Borrowed view of a training or evaluation batch.
///
/// Unlike [`QuantileForecastSet`], a batch carries no invariants beyond
/// shape and finiteness: mid-training predictions may cross levels, and the
/// level set comes from the [`ObjectiveConfig`] rather than the batch.
#[derive(Debug, Clone, Copy)]
pub struct PredictionBatch<'a> {
    pub predictions: ArrayView3<'a, f64>,
    pub actuals: ArrayView2<'a, f64>,
    pub lead_hours: &'a [u32],
}

impl<'a> PredictionBatch<'a> {
    pub fn new(
        predictions: ArrayView3<'a, f64>,
        actuals: ArrayView2<'a, f64>,
        lead_hours: &'a [u32],
    ) -> Result<Self, ObjectiveError> {
        let (b, h, _l) = predictions.dim();
        if b == 0 || h == 0 {
            return Err(ObjectiveError::Empty);
        }
        if actuals.dim() != (b, h) {
            return Err(ObjectiveError::ShapeMismatch(format!(
                "actuals {:?} vs predictions {:?}",
                actuals.dim(),
                predictions.dim()
            )));
        }
        if lead_hours.len() != h {
            return Err(ObjectiveError::ShapeMismatch(format!(
                "{} lead hours for {} lead columns",
                lead_hours.len(),
                h
            )));
        }
        Ok(Self {
            predictions,
            actuals,
            lead_hours,
        })
    }

    /// Check the level axis against a config.
    pub fn check_levels(&self, cfg: &ObjectiveConfig) -> Result<(), ObjectiveError> {
        let l = self.predictions.dim().2;
        if l != cfg.quantiles.len() {
            return Err(ObjectiveError::ShapeMismatch(format!(
                "batch has {} levels, config has {}",
                l,
                cfg.quantiles.len()
            )));
        }
        Ok(())
    }

    pub fn lead_index(&self, lead: u32) -> Result<usize, ObjectiveError> {
        self.lead_hours
            .iter()
            .position(|&h| h == lead)
            .ok_or(ObjectiveError::MissingLead(lead))
    }
}

/// View a scored forecast set as an objective batch (levels must match the
/// config exactly, including order).
pub fn batch_from_forecast_set<'a>(
    fs: &'a QuantileForecastSet,
    cfg: &ObjectiveConfig,
) -> Result<PredictionBatch<'a>, ObjectiveError> {
    if fs.levels() != cfg.quantiles.as_slice() {
        return Err(ObjectiveError::ShapeMismatch(format!(
            "forecast-set levels {:?} differ from config quantiles {:?}",
            fs.levels(),
            cfg.quantiles
        )));
    }
    let (ni, nh, nl) = (fs.n_issues(), fs.lead_hours().len(), fs.levels().len());
    let predictions = ArrayView3::from_shape((ni, nh, nl), fs.predictions_flat())
        .map_err(|e| ObjectiveError::ShapeMismatch(e.to_string()))?;
    let actuals = ArrayView2::from_shape((ni, nh), fs.actuals_flat())
        .map_err(|e| ObjectiveError::ShapeMismatch(e.to_string()))?;
    PredictionBatch::new(predictions, actuals, fs.lead_hours())
}
