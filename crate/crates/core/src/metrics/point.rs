use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::forecast_set::QuantileForecastSet;
use super::MetricsError;

fn check_pair(actual: &[f64], forecast: &[f64]) -> Result<(), MetricsError> {
    if actual.len() != forecast.len() {
        return Err(MetricsError::LengthMismatch {
            left: actual.len(),
            right: forecast.len(),
        });
    }
    if actual.is_empty() {
        return Err(MetricsError::Empty);
    }
    if actual.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite("actuals"));
    }
    if forecast.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite("forecasts"));
    }
    Ok(())
}

/// Mean absolute percentage error, in percent. Actuals must be strictly
/// positive — a zero-load hour makes the ratio meaningless.
pub fn mape(actual: &[f64], forecast: &[f64]) -> Result<f64, MetricsError> {
    check_pair(actual, forecast)?;
    let mut acc = 0.0;
    for (i, (y, f)) in actual.iter().zip(forecast).enumerate() {
        if *y <= 0.0 {
            return Err(MetricsError::NonPositiveActual { index: i, value: *y });
        }
        acc += (y - f).abs() / y;
    }
    Ok(100.0 * acc / actual.len() as f64)
}

/// Under-forecast, over-forecast, and exact-tie rates, in percent.
///
/// Comparisons are strict, ties get their own bucket, and the three rates
/// sum to 100 up to floating rounding: a point is under-forecast (actual
/// above forecast), over-forecast, or a tie — never two of those.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionRates {
    pub upr_pct: f64,
    pub opr_pct: f64,
    pub tie_pct: f64,
}

/// Classify every point by which side of the actual the forecast landed on.
pub fn direction_rates(actual: &[f64], forecast: &[f64]) -> Result<DirectionRates, MetricsError> {
    check_pair(actual, forecast)?;
    let mut under = 0u64;
    let mut over = 0u64;
    let mut tie = 0u64;
    for (y, f) in actual.iter().zip(forecast) {
        if y > f {
            under += 1;
        } else if f > y {
            over += 1;
        } else {
            tie += 1;
        }
    }
    let n = actual.len() as f64;
    Ok(DirectionRates {
        upr_pct: 100.0 * under as f64 / n,
        opr_pct: 100.0 * over as f64 / n,
        tie_pct: 100.0 * tie as f64 / n,
    })
}

/// Mean signed error of the median forecast at one lead, `median - actual`:
/// positive values mean systematic over-forecast at that horizon.
pub fn bias_at_horizon(fs: &QuantileForecastSet, h_star: u32) -> Result<f64, MetricsError> {
    let h = fs.lead_index(h_star)?;
    let med = fs.median_index();
    let n = fs.n_issues() as f64;
    let sum: f64 = (0..fs.n_issues())
        .map(|i| fs.prediction(i, h, med) - fs.actual(i, h))
        .sum();
    Ok(sum / n)
}

/// Count points whose absolute median-forecast error strictly exceeds each
/// threshold. Keys are the thresholds rendered as strings (integers render
/// without a decimal point), ready for JSON.
pub fn large_error_counts(
    actual: &[f64],
    forecast: &[f64],
    thresholds_mw: &[f64],
) -> Result<BTreeMap<String, u64>, MetricsError> {
    check_pair(actual, forecast)?;
    let mut out = BTreeMap::new();
    for &t in thresholds_mw {
        if !t.is_finite() || t <= 0.0 {
            return Err(MetricsError::BadThreshold(t));
        }
        let count = actual
            .iter()
            .zip(forecast)
            .filter(|(y, f)| (*y - *f).abs() > t)
            .count() as u64;
        out.insert(format_threshold(t), count);
    }
    Ok(out)
}

/// Render a threshold for use as a JSON key: `1000.0 -> "1000"`.
pub fn format_threshold(t: f64) -> String {
    if t == t.trunc() && t.abs() < 1e15 {
        format!("{}", t as i64)
    } else {
        format!("{t}")
    }
}
