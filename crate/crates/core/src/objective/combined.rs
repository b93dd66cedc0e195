use ndarray::Array3;
use serde::Serialize;

use super::penalty::{bias_penalty, bias_penalty_grad_into, opr_penalty, opr_penalty_grad_into};
use super::pinball::{multi_quantile_grad, multi_quantile_loss};
use super::{ObjectiveConfig, ObjectiveError, PredictionBatch};

/// Decomposition of the combined training objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CombinedLoss {
    /// Sum of the three terms below.
    pub total: f64,
    /// Weighted multi-quantile pinball loss.
    pub loss_q: f64,
    /// Hinge penalty on mean scheduling bias at `h_star`.
    pub bias_penalty: f64,
    /// Hinge penalty on the smoothed over-forecast rate at `h_star`.
    pub opr_penalty: f64,
    /// Mean scheduling bias (MW) the bias hinge saw.
    pub bias_h_star: f64,
    /// Smoothed over-forecast rate (percent) the OPR hinge saw.
    pub smooth_opr_pct: f64,
}

/// Evaluate the combined objective: pinball loss plus the two operational
/// hinge penalties.
pub fn combined_objective(
    batch: &PredictionBatch<'_>,
    cfg: &ObjectiveConfig,
) -> Result<CombinedLoss, ObjectiveError> {
    let loss_q = multi_quantile_loss(batch, cfg)?;
    let (bias_pen, bias) = bias_penalty(batch, cfg)?;
    let (opr_pen, rate) = opr_penalty(batch, cfg)?;
    Ok(CombinedLoss {
        total: loss_q + bias_pen + opr_pen,
        loss_q,
        bias_penalty: bias_pen,
        opr_penalty: opr_pen,
        bias_h_star: bias,
        smooth_opr_pct: rate,
    })
}

/// Evaluate the combined objective and its subgradient with respect to
/// every prediction in the batch.
pub fn combined_objective_grad(
    batch: &PredictionBatch<'_>,
    cfg: &ObjectiveConfig,
) -> Result<(CombinedLoss, Array3<f64>), ObjectiveError> {
    let (loss_q, mut grad) = multi_quantile_grad(batch, cfg)?;
    let (bias_pen, bias) = bias_penalty_grad_into(batch, cfg, &mut grad)?;
    let (opr_pen, rate) = opr_penalty_grad_into(batch, cfg, &mut grad)?;
    Ok((
        CombinedLoss {
            total: loss_q + bias_pen + opr_pen,
            loss_q,
            bias_penalty: bias_pen,
            opr_penalty: opr_pen,
            bias_h_star: bias,
            smooth_opr_pct: rate,
        },
        grad,
    ))
}
