use ndarray::Array3;

use super::{ObjectiveConfig, ObjectiveError, PredictionBatch};

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Batch-mean bias of the scheduled head at `h_star`:
/// `b = mean(pred_sched - actual)`, positive when over-forecasting.
pub fn schedule_bias(
    batch: &PredictionBatch<'_>,
    cfg: &ObjectiveConfig,
) -> Result<f64, ObjectiveError> {
    batch.check_levels(cfg)?;
    let h = batch.lead_index(cfg.h_star)?;
    let s = cfg.schedule_index();
    let nb = batch.predictions.dim().0;
    let sum: f64 = (0..nb)
        .map(|b| batch.predictions[[b, h, s]] - batch.actuals[[b, h]])
        .sum();
    Ok(sum / nb as f64)
}

/// Hinge on mean scheduling bias: `lambda_bias * max(0, b - b_max)`.
///
/// Returns `(penalty, b)`. The hinge kink takes the inactive side, so a
/// batch sitting exactly at the cap contributes no gradient.
pub fn bias_penalty(
    batch: &PredictionBatch<'_>,
    cfg: &ObjectiveConfig,
) -> Result<(f64, f64), ObjectiveError> {
    let b = schedule_bias(batch, cfg)?;
    Ok((cfg.lambda_bias * (b - cfg.b_max_mw).max(0.0), b))
}

/// Accumulate the bias-hinge subgradient into `grad`.
pub(super) fn bias_penalty_grad_into(
    batch: &PredictionBatch<'_>,
    cfg: &ObjectiveConfig,
    grad: &mut Array3<f64>,
) -> Result<(f64, f64), ObjectiveError> {
    let (penalty, b) = bias_penalty(batch, cfg)?;
    if b > cfg.b_max_mw {
        let h = batch.lead_index(cfg.h_star)?;
        let s = cfg.schedule_index();
        let nb = batch.predictions.dim().0;
        let g = cfg.lambda_bias / nb as f64;
        for i in 0..nb {
            grad[[i, h, s]] += g;
        }
    }
    Ok((penalty, b))
}

/// Differentiable stand-in for the over-forecast rate at `h_star`, in
/// percent: `100 * mean sigmoid((pred_sched - actual) / tau)`.
///
/// As `tau` shrinks the sigmoid sharpens toward the indicator
/// `pred > actual` and this converges to the hard OPR (ties land at 50
/// rather than 0, which is why the comparison tolerance in tests stays off
/// exact ties).
pub fn smooth_opr(
    batch: &PredictionBatch<'_>,
    cfg: &ObjectiveConfig,
) -> Result<f64, ObjectiveError> {
    batch.check_levels(cfg)?;
    let h = batch.lead_index(cfg.h_star)?;
    let s = cfg.schedule_index();
    let nb = batch.predictions.dim().0;
    let sum: f64 = (0..nb)
        .map(|b| sigmoid((batch.predictions[[b, h, s]] - batch.actuals[[b, h]]) / cfg.tau_mw))
        .sum();
    Ok(100.0 * sum / nb as f64)
}

/// Hinge on the smoothed over-forecast rate:
/// `lambda_opr * max(0, smooth_opr - pi_max)`. Returns `(penalty, rate)`.
pub fn opr_penalty(
    batch: &PredictionBatch<'_>,
    cfg: &ObjectiveConfig,
) -> Result<(f64, f64), ObjectiveError> {
    let rate = smooth_opr(batch, cfg)?;
    Ok((cfg.lambda_opr * (rate - cfg.pi_max).max(0.0), rate))
}

/// Accumulate the OPR-hinge gradient into `grad`.
pub(super) fn opr_penalty_grad_into(
    batch: &PredictionBatch<'_>,
    cfg: &ObjectiveConfig,
    grad: &mut Array3<f64>,
) -> Result<(f64, f64), ObjectiveError> {
    let (penalty, rate) = opr_penalty(batch, cfg)?;
    if rate > cfg.pi_max {
        let h = batch.lead_index(cfg.h_star)?;
        let s = cfg.schedule_index();
        let nb = batch.predictions.dim().0;
        let scale = cfg.lambda_opr * 100.0 / (nb as f64 * cfg.tau_mw);
        for i in 0..nb {
            let sig = sigmoid(
                (batch.predictions[[i, h, s]] - batch.actuals[[i, h]]) / cfg.tau_mw,
            );
            grad[[i, h, s]] += scale * sig * (1.0 - sig);
        }
    }
    Ok((penalty, rate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::{Array2, Array3};

    fn batch_with_bias(bias: f64, n: usize) -> (Array3<f64>, Array2<f64>) {
        let preds = Array3::from_elem((n, 1, 1), 10_000.0 + bias);
        let actuals = Array2::from_elem((n, 1), 10_000.0);
        (preds, actuals)
    }

    fn single_level_cfg() -> ObjectiveConfig {
        ObjectiveConfig {
            quantiles: vec![0.5],
            weights: vec![1.0],
            h_star: 24,
            ..ObjectiveConfig::default()
        }
    }

    #[test]
    fn bias_hinge_activates_above_cap() {
        // +500 MW mean bias against a 150 MW cap: penalty = lambda * 350
        let (preds, actuals) = batch_with_bias(500.0, 8);
        let batch = PredictionBatch::new(preds.view(), actuals.view(), &[24]).unwrap();
        let cfg = single_level_cfg();
        let (penalty, b) = bias_penalty(&batch, &cfg).unwrap();
        assert_relative_eq!(b, 500.0);
        assert_relative_eq!(penalty, cfg.lambda_bias * 350.0);
    }

    #[test]
    fn bias_hinge_silent_at_or_below_cap() {
        let cfg = single_level_cfg();
        for bias in [-200.0, 0.0, 150.0] {
            let (preds, actuals) = batch_with_bias(bias, 4);
            let batch = PredictionBatch::new(preds.view(), actuals.view(), &[24]).unwrap();
            let (penalty, _) = bias_penalty(&batch, &cfg).unwrap();
            assert_relative_eq!(penalty, 0.0);
            let mut grad = Array3::zeros((4, 1, 1));
            bias_penalty_grad_into(&batch, &cfg, &mut grad).unwrap();
            assert_relative_eq!(grad[[0, 0, 0]], 0.0);
        }
    }

    #[test]
    fn missing_h_star_is_an_error() {
        let (preds, actuals) = batch_with_bias(0.0, 2);
        let batch = PredictionBatch::new(preds.view(), actuals.view(), &[12]).unwrap();
        assert_eq!(
            bias_penalty(&batch, &single_level_cfg()),
            Err(ObjectiveError::MissingLead(24))
        );
    }

    #[test]
    fn ties_give_fifty_percent_smooth_opr() {
        let (preds, actuals) = batch_with_bias(0.0, 4);
        let batch = PredictionBatch::new(preds.view(), actuals.view(), &[24]).unwrap();
        assert_relative_eq!(smooth_opr(&batch, &single_level_cfg()).unwrap(), 50.0);
    }

    #[test]
    fn smooth_opr_approaches_hard_rate() {
        // 3 of 4 over-forecast by a comfortable margin; tau much smaller
        // than the margins drives the sigmoids to {0, 1}.
        let mut preds = Array3::zeros((4, 1, 1));
        let actuals = Array2::from_elem((4, 1), 10_000.0);
        for (i, off) in [800.0, 900.0, 700.0, -600.0].iter().enumerate() {
            preds[[i, 0, 0]] = 10_000.0 + off;
        }
        let mut cfg = single_level_cfg();
        cfg.tau_mw = 1.0;
        let batch = PredictionBatch::new(preds.view(), actuals.view(), &[24]).unwrap();
        assert_relative_eq!(smooth_opr(&batch, &cfg).unwrap(), 75.0, epsilon = 1e-6);
    }

    #[test]
    fn opr_hinge_grad_is_positive_when_active() {
        let (preds, actuals) = batch_with_bias(100.0, 4);
        let batch = PredictionBatch::new(preds.view(), actuals.view(), &[24]).unwrap();
        let mut cfg = single_level_cfg();
        cfg.pi_max = 10.0; // active: smooth rate > 50
        let mut grad = Array3::zeros((4, 1, 1));
        let (penalty, rate) = opr_penalty_grad_into(&batch, &cfg, &mut grad).unwrap();
        assert!(rate > 50.0);
        assert!(penalty > 0.0);
        assert!(grad[[0, 0, 0]] > 0.0);
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_relative_eq!(sigmoid(0.0), 0.5);
        assert_relative_eq!(sigmoid(800.0), 1.0);
        assert_relative_eq!(sigmoid(-800.0), 0.0);
        assert!(sigmoid(-800.0) >= 0.0);
    }
}
