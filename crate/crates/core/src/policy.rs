//! Market-derived cost asymmetry and quantile selection.
//!
//! Day-ahead under-forecasts are settled against real-time prices, so the
//! hourly DA-RT spread carries the cost asymmetry between under- and
//! over-procurement:
//!
//! ```text
//! s_t   = lmp_rt_t - lmp_da_t
//! rho   = E[max(0, s)] / E[max(0, -s)]
//! q*    = rho / (1 + rho)
//! ```
//!
//! `rho_price` uses prices alone and is therefore immune to load-forecast
//! bias. `rho_event` conditions the spread on the sign of the DA load
//! forecast error; it is a diagnostic and goes absent (`None`) when either
//! side has too few hours to trust. Scheduling never trains below the
//! median: `q_target = max(0.5, q*(kappa * rho_price))` with the premium
//! `kappa >= 1` chosen by the desk.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::HourlySeries;

/// Errors from asymmetry estimation and quantile mapping.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("series share no hours")]
    NoOverlap,
    #[error("mean negative spread is zero; rho undefined")]
    DegenerateSpread,
    #[error("rho must be non-negative, got {0}")]
    NegativeRho(f64),
    #[error("kappa must be at least 1, got {0}")]
    KappaBelowOne(f64),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    Empty,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Hourly DA-RT spread split into positive and negative parts.
///
/// `s_plus[i] - s_minus[i]` reconstructs the raw spread at `hours[i]`, and
/// at most one of the two parts is nonzero per hour.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadSeries {
    pub hours: Vec<i64>,
    pub s_plus: Vec<f64>,
    pub s_minus: Vec<f64>,
}

impl SpreadSeries {
    /// Number of hours with both prices present.
    pub fn len(&self) -> usize {
        self.hours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hours.is_empty()
    }
}

/// Decompose the hourly spread `rt - da` over the hours both series cover.
///
/// Hours missing either price are dropped; nothing is imputed.
pub fn spread_decompose(
    lmp_da: &HourlySeries,
    lmp_rt: &HourlySeries,
) -> Result<SpreadSeries, PolicyError> {
    let mut hours = Vec::new();
    let mut s_plus = Vec::new();
    let mut s_minus = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < lmp_da.hours().len() && j < lmp_rt.hours().len() {
        match lmp_da.hours()[i].cmp(&lmp_rt.hours()[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let s = lmp_rt.values()[j] - lmp_da.values()[i];
                hours.push(lmp_da.hours()[i]);
                s_plus.push(s.max(0.0));
                s_minus.push((-s).max(0.0));
                i += 1;
                j += 1;
            }
        }
    }
    if hours.is_empty() {
        return Err(PolicyError::NoOverlap);
    }
    Ok(SpreadSeries {
        hours,
        s_plus,
        s_minus,
    })
}

/// Price-only asymmetry ratio `E[s+] / E[s-]`.
pub fn rho_price(s_plus: &[f64], s_minus: &[f64]) -> Result<f64, PolicyError> {
    if s_plus.len() != s_minus.len() {
        return Err(PolicyError::LengthMismatch {
            left: s_plus.len(),
            right: s_minus.len(),
        });
    }
    if s_plus.is_empty() {
        return Err(PolicyError::Empty);
    }
    let n = s_plus.len() as f64;
    let mean_plus = s_plus.iter().sum::<f64>() / n;
    let mean_minus = s_minus.iter().sum::<f64>() / n;
    if !mean_plus.is_finite() || !mean_minus.is_finite() {
        return Err(PolicyError::NonFinite("spread"));
    }
    if mean_minus == 0.0 {
        return Err(PolicyError::DegenerateSpread);
    }
    Ok(mean_plus / mean_minus)
}

/// Event-conditional asymmetry: mean positive spread over hours the DA load
/// forecast ran short, divided by mean negative spread over hours it ran
/// long.
///
/// Returns `None` (rather than an error) when either conditional side has
/// fewer than `min_event_hours` samples or the over-forecast cost is zero;
/// absence encodes instability.
pub fn rho_event(
    spread: &SpreadSeries,
    actual_load: &HourlySeries,
    da_forecast: &HourlySeries,
    min_event_hours: usize,
) -> Result<Option<f64>, PolicyError> {
    let mut under = Vec::new();
    let mut over = Vec::new();
    for (idx, &hour) in spread.hours.iter().enumerate() {
        let (Some(y), Some(y_hat)) = (actual_load.value_at(hour), da_forecast.value_at(hour))
        else {
            continue;
        };
        let delta = y - y_hat;
        if delta > 0.0 {
            under.push(spread.s_plus[idx]);
        } else if delta < 0.0 {
            over.push(spread.s_minus[idx]);
        }
    }
    if under.is_empty() && over.is_empty() {
        return Err(PolicyError::NoOverlap);
    }
    if under.len() < min_event_hours || over.len() < min_event_hours {
        return Ok(None);
    }
    let c_under = under.iter().sum::<f64>() / under.len() as f64;
    let c_over = over.iter().sum::<f64>() / over.len() as f64;
    if c_over == 0.0 {
        return Ok(None);
    }
    Ok(Some(c_under / c_over))
}

/// Pinball-optimal quantile level for asymmetry `rho`: `rho / (1 + rho)`.
pub fn q_star(rho: f64) -> Result<f64, PolicyError> {
    if !rho.is_finite() {
        return Err(PolicyError::NonFinite("rho"));
    }
    if rho < 0.0 {
        return Err(PolicyError::NegativeRho(rho));
    }
    Ok(rho / (1.0 + rho))
}

/// Scheduling quantile: apply the reliability premium and floor at the
/// median, `max(0.5, q_star(kappa * rho_price))`.
pub fn q_target(rho_price: f64, kappa: f64) -> Result<f64, PolicyError> {
    if !kappa.is_finite() || kappa < 1.0 {
        return Err(PolicyError::KappaBelowOne(kappa));
    }
    Ok(q_star(kappa * rho_price)?.max(0.5))
}

/// Per-node asymmetry report.
///
/// Every stored `(rho, q)` pair satisfies `q = rho / (1 + rho)`; `q_target`
/// additionally carries the median floor so it lives in `[0.5, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryEstimate {
    pub node: String,
    /// Spread hours that entered `rho_price`.
    pub hours: usize,
    pub rho_price: f64,
    pub q_price_star: f64,
    pub rho_event: Option<f64>,
    pub q_event_star: Option<f64>,
    pub kappa: f64,
    pub rho_op: f64,
    pub q_target: f64,
}

impl AsymmetryEstimate {
    /// Copy rounded to report precision (ratios and levels at 4 decimals).
    pub fn rounded(&self) -> AsymmetryEstimate {
        fn r4(x: f64) -> f64 {
            (x * 1e4).round() / 1e4
        }
        AsymmetryEstimate {
            node: self.node.clone(),
            hours: self.hours,
            rho_price: r4(self.rho_price),
            q_price_star: r4(self.q_price_star),
            rho_event: self.rho_event.map(r4),
            q_event_star: self.q_event_star.map(r4),
            kappa: self.kappa,
            rho_op: r4(self.rho_op),
            q_target: r4(self.q_target),
        }
    }
}

/// Estimate the full per-node asymmetry report from aligned price series
/// and, when load actuals plus the DA forecast are supplied, the
/// event-conditional diagnostic.
pub fn estimate_asymmetry(
    node: &str,
    lmp_da: &HourlySeries,
    lmp_rt: &HourlySeries,
    event_inputs: Option<(&HourlySeries, &HourlySeries)>,
    kappa: f64,
    min_event_hours: usize,
) -> Result<AsymmetryEstimate, PolicyError> {
    let spread = spread_decompose(lmp_da, lmp_rt)?;
    let rho = rho_price(&spread.s_plus, &spread.s_minus)?;
    let rho_ev = match event_inputs {
        Some((actual, forecast)) => rho_event(&spread, actual, forecast, min_event_hours)?,
        None => None,
    };
    let q_ev = match rho_ev {
        Some(r) => Some(q_star(r)?),
        None => None,
    };
    let rho_op = kappa_checked(kappa)? * rho;
    Ok(AsymmetryEstimate {
        node: node.to_string(),
        hours: spread.len(),
        rho_price: rho,
        q_price_star: q_star(rho)?,
        rho_event: rho_ev,
        q_event_star: q_ev,
        kappa,
        rho_op,
        q_target: q_target(rho, kappa)?,
    })
}

fn kappa_checked(kappa: f64) -> Result<f64, PolicyError> {
    if !kappa.is_finite() || kappa < 1.0 {
        return Err(PolicyError::KappaBelowOne(kappa));
    }
    Ok(kappa)
}
