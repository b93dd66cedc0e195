use ndarray::Array3;

use super::{ObjectiveConfig, ObjectiveError, PredictionBatch};

/// Pinball (quantile) loss at level `q`:
/// `max(q * (y - q_hat), (q - 1) * (y - q_hat))`.
///
/// Under-prediction of a high quantile is punished `q / (1 - q)` times
/// harder than over-prediction, which is exactly what makes the minimizer
/// the `q`-quantile. At `q = 0.5` this is half the absolute error.
pub fn pinball(y: f64, q_hat: f64, q: f64) -> f64 {
    let delta = y - q_hat;
    (q * delta).max((q - 1.0) * delta)
}

/// Subgradient of [`pinball`] with respect to the prediction `q_hat`.
///
/// `-q` when the actual sits above the prediction, `1 - q` below. At the
/// kink (`y == q_hat`) the `1 - q` branch is chosen — a fixed convention so
/// repeated runs take identical steps.
pub fn pinball_subgrad(y: f64, q_hat: f64, q: f64) -> f64 {
    if y > q_hat {
        -q
    } else {
        1.0 - q
    }
}

/// Weighted multi-quantile loss over a batch:
/// `mean_b [ sum_q w_q * (1/H) * sum_h pinball_q ]`.
pub fn multi_quantile_loss(
    batch: &PredictionBatch<'_>,
    cfg: &ObjectiveConfig,
) -> Result<f64, ObjectiveError> {
    batch.check_levels(cfg)?;
    let (nb, nh, _) = batch.predictions.dim();
    let mut total = 0.0;
    for b in 0..nb {
        for h in 0..nh {
            let y = batch.actuals[[b, h]];
            for (l, (&q, &w)) in cfg.quantiles.iter().zip(&cfg.weights).enumerate() {
                total += w * pinball(y, batch.predictions[[b, h, l]], q);
            }
        }
    }
    Ok(total / (nb as f64 * nh as f64))
}

/// [`multi_quantile_loss`] together with its subgradient tensor
/// (`d loss / d prediction`, same shape as the predictions).
pub fn multi_quantile_grad(
    batch: &PredictionBatch<'_>,
    cfg: &ObjectiveConfig,
) -> Result<(f64, Array3<f64>), ObjectiveError> {
    batch.check_levels(cfg)?;
    let dim = batch.predictions.dim();
    let (nb, nh, _) = dim;
    let scale = 1.0 / (nb as f64 * nh as f64);
    let mut total = 0.0;
    let mut grad = Array3::zeros(dim);
    for b in 0..nb {
        for h in 0..nh {
            let y = batch.actuals[[b, h]];
            for (l, (&q, &w)) in cfg.quantiles.iter().zip(&cfg.weights).enumerate() {
                let p = batch.predictions[[b, h, l]];
                total += w * pinball(y, p, q);
                grad[[b, h, l]] = scale * w * pinball_subgrad(y, p, q);
            }
        }
    }
    Ok((total * scale, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::{arr2, Array3};

    #[test]
    fn pinball_fixtures() {
        // over-forecast a 0.9 quantile by 2: (0.9 - 1) * (10 - 12) = 0.2
        assert_relative_eq!(pinball(10.0, 12.0, 0.9), 0.2);
        // under-forecast by 2: 0.9 * 2 = 1.8
        assert_relative_eq!(pinball(10.0, 8.0, 0.9), 1.8);
        // exact hit costs nothing
        assert_relative_eq!(pinball(10.0, 10.0, 0.9), 0.0);
        // q = 0.5 is half the absolute error
        assert_relative_eq!(pinball(10.0, 8.0, 0.5), 1.0);
        assert_relative_eq!(pinball(10.0, 13.0, 0.5), 1.5);
    }

    #[test]
    fn subgrad_sides_and_kink() {
        assert_relative_eq!(pinball_subgrad(10.0, 8.0, 0.9), -0.9);
        assert_relative_eq!(pinball_subgrad(10.0, 12.0, 0.9), 0.1);
        // kink convention: the (1 - q) side
        assert_relative_eq!(pinball_subgrad(10.0, 10.0, 0.9), 0.1);
    }

    fn single_point_batch() -> (Array3<f64>, ndarray::Array2<f64>) {
        let mut preds = Array3::zeros((1, 1, 3));
        preds[[0, 0, 0]] = 8.0;
        preds[[0, 0, 1]] = 10.0;
        preds[[0, 0, 2]] = 12.0;
        (preds, arr2(&[[10.0]]))
    }

    #[test]
    fn weighted_single_point_fixture() {
        // y = 10, preds (8, 10, 12) at (0.025, 0.5, 0.975), weights (4, 1, 4):
        // 4 * 0.05 + 1 * 0 + 4 * 0.05 = 0.4
        let (preds, actuals) = single_point_batch();
        let batch = PredictionBatch::new(preds.view(), actuals.view(), &[24]).unwrap();
        let cfg = ObjectiveConfig::default();
        assert_relative_eq!(multi_quantile_loss(&batch, &cfg).unwrap(), 0.4);
    }

    #[test]
    fn grad_matches_loss_and_scaling() {
        let (preds, actuals) = single_point_batch();
        let batch = PredictionBatch::new(preds.view(), actuals.view(), &[24]).unwrap();
        let cfg = ObjectiveConfig::default();
        let (loss, grad) = multi_quantile_grad(&batch, &cfg).unwrap();
        assert_relative_eq!(loss, 0.4);
        // level 0: y > pred -> -q * w = -0.025 * 4
        assert_relative_eq!(grad[[0, 0, 0]], -0.1);
        // level 1 at the kink -> (1 - 0.5) * 1
        assert_relative_eq!(grad[[0, 0, 1]], 0.5);
        // level 2: y < pred -> (1 - 0.975) * 4
        assert_relative_eq!(grad[[0, 0, 2]], 0.1);
    }

    #[test]
    fn batch_averaging_divides_by_issues_and_leads() {
        // two issues, two leads, single 0.5 level with weight 1, all errors 2
        // pinball = 1 each -> loss 1 regardless of batch size
        let preds = Array3::from_elem((2, 2, 1), 8.0);
        let actuals = arr2(&[[10.0, 10.0], [10.0, 10.0]]);
        let batch = PredictionBatch::new(preds.view(), actuals.view(), &[1, 2]).unwrap();
        let cfg = ObjectiveConfig {
            quantiles: vec![0.5],
            weights: vec![1.0],
            ..ObjectiveConfig::default()
        };
        let (loss, grad) = multi_quantile_grad(&batch, &cfg).unwrap();
        assert_relative_eq!(loss, 1.0);
        // each cell's grad: (1/4) * 1 * (-0.5)
        assert_relative_eq!(grad[[1, 1, 0]], -0.125);
    }

    #[test]
    fn level_count_mismatch_is_rejected() {
        let (preds, actuals) = single_point_batch();
        let batch = PredictionBatch::new(preds.view(), actuals.view(), &[24]).unwrap();
        let cfg = ObjectiveConfig {
            quantiles: vec![0.5],
            weights: vec![1.0],
            ..ObjectiveConfig::default()
        };
        assert!(matches!(
            multi_quantile_loss(&batch, &cfg),
            Err(ObjectiveError::ShapeMismatch(_))
        ));
    }
}
