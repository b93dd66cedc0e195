//! Linear multi-quantile model trained by subgradient descent on the
//! combined objective.
//!
//! One weight vector and intercept per quantile level, pooled across leads:
//! lead and clock encodings live in the feature row, so a single model
//! serves the whole 48 h horizon. Training runs in standardized feature and
//! target space (hinge thresholds are rescaled to match); the fitted
//! scalers are folded back into raw-space weights afterwards, so the stored
//! parameters apply directly to unscaled features.

use ndarray::{Array1, Array2, Array3, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{AlignedFrame, HourRange};
use crate::features::{build_feature_matrix, build_feature_rows, FeatureMatrix, FeatureSpec};
use crate::metrics::percentile;
use crate::objective::{
    combined_objective, combined_objective_grad, ObjectiveConfig, PredictionBatch,
};

use super::scaler::{FeatureScaler, TargetScaler};
use super::{ForecastError, Forecaster};

pub const DEFAULT_EPOCHS: usize = 400;
pub const DEFAULT_PATIENCE: usize = 60;

/// Optimizer and data-window settings for [`LinearQuantileModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTrainConfig {
    pub objective: ObjectiveConfig,
    /// Leads trained and predicted, ascending.
    pub leads: Vec<u32>,
    /// Initial step size in standardized space; decays by cosine to zero.
    pub step0: f64,
    pub epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    /// `None` = full batch; `Some(k)` = k issues per minibatch, shuffled
    /// each epoch with the seeded generator.
    pub batch_size: Option<usize>,
    /// Spacing between consecutive training issues.
    pub issue_stride_hours: u32,
    pub seed: u64,
}

impl QuantileTrainConfig {
    pub fn new(seed: u64) -> Self {
        QuantileTrainConfig {
            objective: ObjectiveConfig::default(),
            leads: (1..=48).collect(),
            step0: 0.05,
            epochs: DEFAULT_EPOCHS,
            patience: DEFAULT_PATIENCE,
            batch_size: None,
            issue_stride_hours: 24,
            seed,
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON encoding.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }

    fn validate(&self) -> Result<(), ForecastError> {
        self.objective.validate()?;
        if self.leads.is_empty() || self.leads.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ForecastError::BadConfig("leads must be strictly increasing"));
        }
        if self.leads[0] < 1 {
            return Err(ForecastError::BadConfig("leads start at 1"));
        }
        if !(self.step0 > 0.0) || self.epochs == 0 {
            return Err(ForecastError::BadConfig("need positive step0 and epochs"));
        }
        if self.issue_stride_hours == 0 {
            return Err(ForecastError::BadConfig("issue stride must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct FittedState {
    columns: Vec<String>,
    /// Raw-space weights, `n_levels x n_columns`.
    weights: Array2<f64>,
    /// Raw-space intercepts (MW).
    intercepts: Array1<f64>,
    /// Training loss per epoch, standardized space.
    trace: Vec<f64>,
}

/// Serialized model: exactly the parameters needed to reproduce
/// predictions, plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub quantiles: Vec<f64>,
    pub columns: Vec<String>,
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    pub config_hash: String,
    pub seed: u64,
}

/// Linear multi-quantile forecaster; see the module doc.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearQuantileModel {
    spec: FeatureSpec,
    cfg: QuantileTrainConfig,
    state: Option<FittedState>,
}

impl LinearQuantileModel {
    pub fn new(spec: FeatureSpec, cfg: QuantileTrainConfig) -> Result<Self, ForecastError> {
        cfg.validate()?;
        Ok(LinearQuantileModel {
            spec,
            cfg,
            state: None,
        })
    }

    pub fn config(&self) -> &QuantileTrainConfig {
        &self.cfg
    }

    pub fn trace(&self) -> Option<&[f64]> {
        self.state.as_ref().map(|s| s.trace.as_slice())
    }

    /// Training issues: latest issue whose full horizon stays before
    /// `exclusive_end`, walking back by the stride to `start`.
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

    /// Fit directly on prepared matrices. `val` rows drive early stopping;
    /// pass `None` to train for the full epoch budget.
    pub fn fit_matrix(
        &mut self,
        train: &FeatureMatrix,
        val: Option<&FeatureMatrix>,
    ) -> Result<(), ForecastError> {
        let n_cols = train.rows.ncols();
        let n_rows = train.rows.nrows();
        let n_leads = self.cfg.leads.len();
        let n_levels = self.cfg.objective.quantiles.len();
        if n_rows == 0 || !n_rows.is_multiple_of(n_leads) {
            return Err(ForecastError::DegenerateDesign(
                "training rows do not tile the lead grid",
            ));
        }
        if n_rows < n_cols + 1 {
            return Err(ForecastError::DegenerateDesign(
                "fewer training rows than parameters",
            ));
        }
        let n_issues = n_rows / n_leads;

        let feature_scaler = FeatureScaler::fit(train.rows.view());
        let target_scaler = TargetScaler::fit(&train.targets);
        let x = feature_scaler.transform(train.rows.view());
        let y: Array1<f64> = train.targets.mapv(|v| target_scaler.scale(v));
        let actuals = y
            .clone()
            .into_shape_with_order((n_issues, n_leads))
            .expect("row count checked");

        // Hinge thresholds are MW quantities; training runs in z-space.
        let mut objective = self.cfg.objective.clone();
        objective.b_max_mw /= target_scaler.std;
        objective.tau_mw /= target_scaler.std;

        let val_parts = match val {
            Some(vm) if vm.rows.nrows() > 0 && vm.rows.nrows() % n_leads == 0 => {
                let vx = feature_scaler.transform(vm.rows.view());
                let vy: Array1<f64> = vm.targets.mapv(|v| target_scaler.scale(v));
                let v_issues = vm.rows.nrows() / n_leads;
                let va = vy
                    .into_shape_with_order((v_issues, n_leads))
                    .expect("row count checked");
                Some((vx, va))
            }
            _ => None,
        };

        let mut weights: Array2<f64> = Array2::zeros((n_levels, n_cols));
        let y_vec: Vec<f64> = y.to_vec();
        let mut intercepts: Array1<f64> = Array1::zeros(n_levels);
        for (l, &q) in self.cfg.objective.quantiles.iter().enumerate() {
            intercepts[l] =
                percentile(&y_vec, q * 100.0).map_err(|_| {
                    ForecastError::DegenerateDesign("cannot take target quantiles")
                })?;
        }

        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let mut trace = Vec::with_capacity(self.cfg.epochs);
        let mut initial_loss = None;
        let mut best: Option<(f64, Array2<f64>, Array1<f64>)> = None;
        let mut since_best = 0usize;

        for epoch in 0..self.cfg.epochs {
            let step = self.cfg.step0
                * 0.5
                * (1.0 + (std::f64::consts::PI * epoch as f64 / self.cfg.epochs as f64).cos());

            let epoch_loss = match self.cfg.batch_size {
                None => self.descend_on(
                    &x,
                    &actuals,
                    &objective,
                    &mut weights,
                    &mut intercepts,
                    step,
                )?,
                Some(chunk) => {
                    let chunk = chunk.max(1);
                    let mut order: Vec<usize> = (0..n_issues).collect();
                    order.shuffle(&mut rng);
                    let mut losses = 0.0;
                    let mut batches = 0.0;
                    for ids in order.chunks(chunk) {
                        let (bx, ba) = gather_issues(&x, &actuals, ids, n_leads);
                        losses += self.descend_on(
                            &bx,
                            &ba,
                            &objective,
                            &mut weights,
                            &mut intercepts,
                            step,
                        )?;
                        batches += 1.0;
                    }
                    losses / batches
                }
            };

            let initial = *initial_loss.get_or_insert(epoch_loss);
            if !epoch_loss.is_finite() || epoch_loss > 10.0 * initial.abs() + 10.0 {
                return Err(ForecastError::DivergedLoss {
                    epoch,
                    loss: epoch_loss,
                    initial,
                });
            }
            trace.push(epoch_loss);

            if let Some((vx, va)) = &val_parts {
                let vloss = eval_loss(vx, va, &weights, &intercepts, &objective, &self.cfg.leads)?;
                let improved = best.as_ref().is_none_or(|(b, _, _)| vloss < *b);
                if improved {
                    best = Some((vloss, weights.clone(), intercepts.clone()));
                    since_best = 0;
                } else {
                    since_best += 1;
                    if since_best >= self.cfg.patience {
                        break;
                    }
                }
            }
        }

        if let Some((_, w, b)) = best {
            weights = w;
            intercepts = b;
        }

        // Fold both scalers into raw-space parameters.
        let mut raw_w = Array2::zeros((n_levels, n_cols));
        let mut raw_b = Array1::zeros(n_levels);
        for l in 0..n_levels {
            let mut shift = 0.0;
            for c in 0..n_cols {
                raw_w[[l, c]] = target_scaler.std * weights[[l, c]] / feature_scaler.std()[c];
                shift += weights[[l, c]] * feature_scaler.mean()[c] / feature_scaler.std()[c];
            }
            raw_b[l] = target_scaler.std * (intercepts[l] - shift) + target_scaler.mean;
        }

        self.state = Some(FittedState {
            columns: train.columns.clone(),
            weights: raw_w,
            intercepts: raw_b,
            trace,
        });
        Ok(())
    }

    /// One subgradient step on the given design; returns the loss before
    /// the update.
    fn descend_on(
        &self,
        x: &Array2<f64>,
        actuals: &Array2<f64>,
        objective: &ObjectiveConfig,
        weights: &mut Array2<f64>,
        intercepts: &mut Array1<f64>,
        step: f64,
    ) -> Result<f64, ForecastError> {
        let n_leads = self.cfg.leads.len();
        let n_levels = objective.quantiles.len();
        let n_rows = x.nrows();
        let n_issues = n_rows / n_leads;

        let mut pred_rows = x.dot(&weights.t());
        pred_rows += &intercepts.view().insert_axis(Axis(0));
        let preds = into_issue_blocks(pred_rows, (n_issues, n_leads, n_levels));

        let batch = PredictionBatch::new(preds.view(), actuals.view(), &self.cfg.leads)?;
        let (loss, grad) = combined_objective_grad(&batch, objective)?;
        let grad_rows = grad
            .into_shape_with_order((n_rows, n_levels))
            .expect("same element count");

        let grad_w = grad_rows.t().dot(x);
        let grad_b = grad_rows.sum_axis(Axis(0));
        weights.scaled_add(-step, &grad_w);
        intercepts.scaled_add(-step, &grad_b);
        Ok(loss.total)
    }
}

/// Reshape `(rows, levels)` predictions into `(issues, leads, levels)`.
///
/// `dot` with a single inner dimension hands back a column-major array,
/// which an in-place reshape rejects; normalize the layout first.
fn into_issue_blocks(pred_rows: Array2<f64>, shape: (usize, usize, usize)) -> Array3<f64> {
    let rows = if pred_rows.is_standard_layout() {
        pred_rows
    } else {
        pred_rows.as_standard_layout().into_owned()
    };
    rows.into_shape_with_order(shape).expect("row count checked")
}

fn gather_issues(
    x: &Array2<f64>,
    actuals: &Array2<f64>,
    ids: &[usize],
    n_leads: usize,
) -> (Array2<f64>, Array2<f64>) {
    let mut bx = Array2::zeros((ids.len() * n_leads, x.ncols()));
    let mut ba = Array2::zeros((ids.len(), actuals.ncols()));
    for (k, &i) in ids.iter().enumerate() {
        bx.slice_mut(ndarray::s![k * n_leads..(k + 1) * n_leads, ..])
            .assign(&x.slice(ndarray::s![i * n_leads..(i + 1) * n_leads, ..]));
        ba.row_mut(k).assign(&actuals.row(i));
    }
    (bx, ba)
}

fn eval_loss(
    x: &Array2<f64>,
    actuals: &Array2<f64>,
    weights: &Array2<f64>,
    intercepts: &Array1<f64>,
    objective: &ObjectiveConfig,
    leads: &[u32],
) -> Result<f64, ForecastError> {
    let n_leads = leads.len();
    let n_levels = objective.quantiles.len();
    let n_issues = x.nrows() / n_leads;
    let mut pred_rows = x.dot(&weights.t());
    pred_rows += &intercepts.view().insert_axis(Axis(0));
    let preds = into_issue_blocks(pred_rows, (n_issues, n_leads, n_levels));
    let batch = PredictionBatch::new(preds.view(), actuals.view(), leads)?;
    Ok(combined_objective(&batch, objective)?.total)
}

impl LinearQuantileModel {
    /// Export fitted parameters.
    pub fn checkpoint(&self) -> Result<Checkpoint, ForecastError> {
        let state = self.state.as_ref().ok_or(ForecastError::NotFitted)?;
        Ok(Checkpoint {
            quantiles: self.cfg.objective.quantiles.clone(),
            columns: state.columns.clone(),
            weights: state
                .weights
                .rows()
                .into_iter()
                .map(|r| r.to_vec())
                .collect(),
            intercepts: state.intercepts.to_vec(),
            config_hash: self.cfg.config_hash(),
            seed: self.cfg.seed,
        })
    }

    /// Rebuild a fitted model from a checkpoint plus the feature spec and
    /// config it was trained with.
    pub fn from_checkpoint(
        ck: &Checkpoint,
        spec: FeatureSpec,
        cfg: QuantileTrainConfig,
    ) -> Result<Self, ForecastError> {
        cfg.validate()?;
        if ck.quantiles != cfg.objective.quantiles {
            return Err(ForecastError::BadConfig(
                "checkpoint quantiles do not match the config",
            ));
        }
        let (expect_cols, _) = spec.columns();
        if ck.columns != expect_cols {
            return Err(ForecastError::ColumnMismatch {
                expected: expect_cols.len(),
                got: ck.columns.len(),
            });
        }
        let n_levels = ck.quantiles.len();
        let n_cols = ck.columns.len();
        if ck.weights.len() != n_levels
            || ck.weights.iter().any(|r| r.len() != n_cols)
            || ck.intercepts.len() != n_levels
        {
            return Err(ForecastError::BadConfig("checkpoint shapes are inconsistent"));
        }
        let mut weights = Array2::zeros((n_levels, n_cols));
        for (l, row) in ck.weights.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                weights[[l, c]] = v;
            }
        }
        Ok(LinearQuantileModel {
            spec,
            cfg,
            state: Some(FittedState {
                columns: ck.columns.clone(),
                weights,
                intercepts: Array1::from_vec(ck.intercepts.clone()),
                trace: Vec::new(),
            }),
        })
    }

    fn predict_rows(&self, rows: ArrayView2<'_, f64>) -> Result<Array2<f64>, ForecastError> {
        let state = self.state.as_ref().ok_or(ForecastError::NotFitted)?;
        if rows.ncols() != state.weights.ncols() {
            return Err(ForecastError::ColumnMismatch {
                expected: state.weights.ncols(),
                got: rows.ncols(),
            });
        }
        let mut preds = rows.dot(&state.weights.t());
        preds += &state.intercepts.view().insert_axis(Axis(0));
        // non-crossing: levels are sorted per point
        for mut row in preds.rows_mut() {
            let mut vals = row.to_vec();
            vals.sort_by(f64::total_cmp);
            for (c, v) in vals.into_iter().enumerate() {
                row[c] = v;
            }
        }
        Ok(preds)
    }
}

impl Forecaster for LinearQuantileModel {
    fn levels(&self) -> &[f64] {
        &self.cfg.objective.quantiles
    }

    fn fit(
        &mut self,
        frame: &AlignedFrame,
        train: HourRange,
        val: HourRange,
    ) -> Result<(), ForecastError> {
        // Train issues: targets settle strictly before the validation
        // window; validation issues: targets inside it.
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
