//! Parametric baseline: linear-Gaussian heads trained by maximum
//! likelihood.
//!
//! Two linear heads share the feature row: one predicts the mean, the
//! other a pre-variance `s` mapped through softplus so the variance stays
//! positive. Quantiles come from the fitted normal,
//!
//! ```text
//!     q_level = mu + sigma * PHI^-1(level)
//! ```
//!
//! which makes the levels non-crossing by construction. Training runs in
//! standardized space; the scalers stay in the model state because the
//! softplus head cannot be folded back into raw-space coefficients.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::{AlignedFrame, HourRange};
use crate::features::{build_feature_matrix, build_feature_rows, FeatureMatrix, FeatureSpec};
use crate::objective::{gaussian_nll_grad, sigmoid};

use super::scaler::{FeatureScaler, TargetScaler};
use super::{ForecastError, Forecaster};

/// Optimizer settings for [`GaussianLinearModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianTrainConfig {
    /// Quantile levels reported by `predict`, strictly increasing.
    pub levels: Vec<f64>,
    pub leads: Vec<u32>,
    pub step0: f64,
    pub epochs: usize,
    pub patience: usize,
    pub issue_stride_hours: u32,
    pub seed: u64,
}

impl GaussianTrainConfig {
    pub fn new(seed: u64) -> Self {
        GaussianTrainConfig {
            levels: vec![0.025, 0.5, 0.975],
            leads: (1..=48).collect(),
            step0: 0.05,
            epochs: 300,
            patience: 60,
            issue_stride_hours: 24,
            seed,
        }
    }

    fn validate(&self) -> Result<(), ForecastError> {
        if self.levels.is_empty()
            || self
                .levels
                .iter()
                .any(|&l| !(0.0 < l && l < 1.0) || !l.is_finite())
            || self.levels.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(ForecastError::BadConfig(
                "levels must be strictly increasing inside (0, 1)",
            ));
        }
        if self.leads.is_empty() || self.leads.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ForecastError::BadConfig("leads must be strictly increasing"));
        }
        if !(self.step0 > 0.0) || self.epochs == 0 || self.issue_stride_hours == 0 {
            return Err(ForecastError::BadConfig(
                "need positive step0, epochs and stride",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct GaussianState {
    columns: Vec<String>,
    feature_scaler: FeatureScaler,
    target_scaler: TargetScaler,
    /// Mean head in standardized space.
    w_mu: Array1<f64>,
    b_mu: f64,
    /// Pre-variance head in standardized space.
    w_s: Array1<f64>,
    b_s: f64,
}

/// Gaussian maximum-likelihood forecaster; see the module doc.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLinearModel {
    spec: FeatureSpec,
    cfg: GaussianTrainConfig,
    state: Option<GaussianState>,
}

fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else {
        z.exp().ln_1p()
    }
}

impl GaussianLinearModel {
    pub fn new(spec: FeatureSpec, cfg: GaussianTrainConfig) -> Result<Self, ForecastError> {
        cfg.validate()?;
        Ok(GaussianLinearModel {
            spec,
            cfg,
            state: None,
        })
    }

    pub fn config(&self) -> &GaussianTrainConfig {
        &self.cfg
    }

    /// Fit directly on prepared matrices; `val` drives early stopping.
    pub fn fit_matrix(
        &mut self,
        train: &FeatureMatrix,
        val: Option<&FeatureMatrix>,
    ) -> Result<(), ForecastError> {
        let n_rows = train.rows.nrows();
        let n_cols = train.rows.ncols();
        if n_rows < n_cols + 2 {
            return Err(ForecastError::DegenerateDesign(
                "fewer training rows than parameters",
            ));
        }

        let feature_scaler = FeatureScaler::fit(train.rows.view());
        let target_scaler = TargetScaler::fit(&train.targets);
        let x = feature_scaler.transform(train.rows.view());
        let y: Array1<f64> = train.targets.mapv(|v| target_scaler.scale(v));
        let val_parts = val.map(|vm| {
            let vx = feature_scaler.transform(vm.rows.view());
            let vy: Array1<f64> = vm.targets.mapv(|v| target_scaler.scale(v));
            (vx, vy)
        });

        let mut w_mu: Array1<f64> = Array1::zeros(n_cols);
        let mut b_mu = 0.0;
        let mut w_s: Array1<f64> = Array1::zeros(n_cols);
        // softplus(b_s) = 1: unit variance start in standardized space
        let mut b_s = (1f64.exp() - 1.0).ln();

        let mut initial_loss = None;
        let mut best: Option<(f64, Array1<f64>, f64, Array1<f64>, f64)> = None;
        let mut since_best = 0usize;

        for epoch in 0..self.cfg.epochs {
            let step = self.cfg.step0
                * 0.5
                * (1.0 + (std::f64::consts::PI * epoch as f64 / self.cfg.epochs as f64).cos());

            let (loss, g_wmu, g_bmu, g_ws, g_bs) =
                nll_and_grads(&x, &y, &w_mu, b_mu, &w_s, b_s)?;
            let initial = *initial_loss.get_or_insert(loss);
            if !loss.is_finite() || loss > 10.0 * initial.abs().max(1e-12) + 10.0 {
                return Err(ForecastError::DivergedLoss {
                    epoch,
                    loss,
                    initial,
                });
            }
            w_mu.scaled_add(-step, &g_wmu);
            b_mu -= step * g_bmu;
            w_s.scaled_add(-step, &g_ws);
            b_s -= step * g_bs;

            if let Some((vx, vy)) = &val_parts {
                let (vloss, ..) = nll_and_grads(vx, vy, &w_mu, b_mu, &w_s, b_s)?;
                let improved = best.as_ref().is_none_or(|(b, ..)| vloss < *b);
                if improved {
                    best = Some((vloss, w_mu.clone(), b_mu, w_s.clone(), b_s));
                    since_best = 0;
                } else {
                    since_best += 1;
                    if since_best >= self.cfg.patience {
                        break;
                    }
                }
            }
        }

        if let Some((_, wm, bm, ws, bs)) = best {
            w_mu = wm;
            b_mu = bm;
            w_s = ws;
            b_s = bs;
        }

        self.state = Some(GaussianState {
            columns: train.columns.clone(),
            feature_scaler,
            target_scaler,
            w_mu,
            b_mu,
            w_s,
            b_s,
        });
        Ok(())
    }

    /// Fitted mean and standard deviation in MW for raw feature rows.
    pub fn mean_std_rows(
        &self,
        rows: ArrayView2<'_, f64>,
    ) -> Result<(Array1<f64>, Array1<f64>), ForecastError> {
        let state = self.state.as_ref().ok_or(ForecastError::NotFitted)?;
        if rows.ncols() != state.w_mu.len() {
            return Err(ForecastError::ColumnMismatch {
                expected: state.w_mu.len(),
                got: rows.ncols(),
            });
        }
        let x = state.feature_scaler.transform(rows);
        let mu_z = x.dot(&state.w_mu) + b_scalar(state.b_mu, x.nrows());
        let s = x.dot(&state.w_s) + b_scalar(state.b_s, x.nrows());
        let std_y = state.target_scaler.std;
        let mu = mu_z.mapv(|m| state.target_scaler.unscale(m));
        let sd = s.mapv(|v| softplus(v).max(1e-12).sqrt() * std_y);
        Ok((mu, sd))
    }

    fn predict_rows(&self, rows: ArrayView2<'_, f64>) -> Result<Array2<f64>, ForecastError> {
        let (mu, sd) = self.mean_std_rows(rows)?;
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let z: Vec<f64> = self
            .cfg
            .levels
            .iter()
            .map(|&l| normal.inverse_cdf(l))
            .collect();
        let mut preds = Array2::zeros((rows.nrows(), z.len()));
        for r in 0..rows.nrows() {
            for (c, &zl) in z.iter().enumerate() {
                preds[[r, c]] = mu[r] + sd[r] * zl;
            }
        }
        Ok(preds)
    }

    fn issues_ending_before(&self, start: i64, exclusive_end: i64) -> Vec<i64> {
        let horizon = *self.cfg.leads.last().expect("validated non-empty") as i64;
        let stride = self.cfg.issue_stride_hours as i64;
        let mut t = exclusive_end - 1 - horizon;
        let mut issues = Vec::new();
        while t >= start {
            issues.push(t);
            t -= stride;
        }
        issues.reverse();
        issues
    }
}

fn b_scalar(b: f64, n: usize) -> Array1<f64> {
    Array1::from_elem(n, b)
}

/// Mean NLL over rows plus gradients for both heads.
#[allow(clippy::type_complexity)]
fn nll_and_grads(
    x: &Array2<f64>,
    y: &Array1<f64>,
    w_mu: &Array1<f64>,
    b_mu: f64,
    w_s: &Array1<f64>,
    b_s: f64,
) -> Result<(f64, Array1<f64>, f64, Array1<f64>, f64), ForecastError> {
    let n = x.nrows();
    let mu = x.dot(w_mu) + b_scalar(b_mu, n);
    let s = x.dot(w_s) + b_scalar(b_s, n);

    let mut loss = 0.0;
    let mut d_mu = Array1::zeros(n);
    let mut d_s = Array1::zeros(n);
    for i in 0..n {
        let var = softplus(s[i]).max(1e-12);
        let (nll, g_mu, g_var) = gaussian_nll_grad(y[i], mu[i], var)?;
        loss += nll;
        d_mu[i] = g_mu;
        d_s[i] = g_var * sigmoid(s[i]); // d var / d s = sigmoid(s)
    }
    let scale = 1.0 / n as f64;
    loss *= scale;
    let g_wmu = x.t().dot(&d_mu) * scale;
    let g_bmu = d_mu.sum() * scale;
    let g_ws = x.t().dot(&d_s) * scale;
    let g_bs = d_s.sum() * scale;
    Ok((loss, g_wmu, g_bmu, g_ws, g_bs))
}

impl Forecaster for GaussianLinearModel {
    fn levels(&self) -> &[f64] {
        &self.cfg.levels
    }

    fn fit(
        &mut self,
        frame: &AlignedFrame,
        train: HourRange,
        val: HourRange,
    ) -> Result<(), ForecastError> {
        let train_issues = self.issues_ending_before(train.start, val.start);
        if train_issues.is_empty() {
            return Err(ForecastError::DegenerateDesign(
                "training window admits no issues",
            ));
        }
        let train_fm = build_feature_matrix(frame, &train_issues, &self.cfg.leads, &self.spec)
            .map_err(ForecastError::Feature)?;

        let horizon = *self.cfg.leads.last().expect("validated") as i64;
        let stride = self.cfg.issue_stride_hours as i64;
        let mut val_issues = Vec::new();
        let mut t = val.start - 1;
        while t + horizon < val.end {
            val_issues.push(t);
            t += stride;
        }
        let val_fm = if val_issues.is_empty() {
            None
        } else {
            build_feature_matrix(frame, &val_issues, &self.cfg.leads, &self.spec).ok()
        };

        self.fit_matrix(&train_fm, val_fm.as_ref())
    }

    fn predict(
        &self,
        frame: &AlignedFrame,
        issue: i64,
        leads: &[u32],
    ) -> Result<Array2<f64>, ForecastError> {
        let rows = build_feature_rows(frame, issue, leads, &self.spec).map_err(|e| match e {
            crate::features::FeaturesError::GapInWindow { issue, hour } => {
                ForecastError::InsufficientHistory { issue, hour }
            }
            other => ForecastError::Feature(other),
        })?;
        self.predict_rows(rows.view())
    }
}
