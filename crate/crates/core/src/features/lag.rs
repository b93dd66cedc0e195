//! Cross-correlation lag scan between weather covariates and load.
//!
//! For each candidate lag the scan computes the Pearson correlation between
//! the covariate shifted back by `tau` hours and load:
//!
//! ```text
//! r(tau) = Corr(w_{t-tau}, L_t),   tau = 0..max_lag
//! ```
//!
//! The optimal lag is the argmax of |r(tau)|, taking the smallest lag on
//! ties. Load responds to temperature with a delay of a few hours (building
//! thermal mass), so the curve typically peaks away from zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{AlignedFrame, ChannelKind, HourlySeries};

use super::FeaturesError;

/// Minimum overlapping hours required at every scanned lag.
pub const MIN_SCAN_OVERLAP: usize = 48;

/// Scan result for one covariate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagEntry {
    /// Lag (hours) maximizing |pearson_r|; smallest wins ties.
    pub lag_hours: u32,
    /// Correlation at that lag.
    pub pearson_r: f64,
    /// The full curve r(0), r(1), ..., r(max_lag).
    pub curve: Vec<f64>,
}

/// Per-covariate lag profile, keyed by channel label.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LagProfile {
    pub covariates: BTreeMap<String, LagEntry>,
}

impl LagProfile {
    pub fn get(&self, label: &str) -> Option<&LagEntry> {
        self.covariates.get(label)
    }
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, FeaturesError> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(FeaturesError::ConstantSeries);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Correlate `covariate` against `load` at every lag `0..=max_lag`.
///
/// Each lag needs at least [`MIN_SCAN_OVERLAP`] overlapping hours and both
/// series non-constant on that overlap.
pub fn lag_scan(
    covariate: &HourlySeries,
    load: &HourlySeries,
    max_lag: u32,
) -> Result<LagEntry, FeaturesError> {
    let mut curve = Vec::with_capacity(max_lag as usize + 1);
    for tau in 0..=max_lag {
        let mut ws = Vec::new();
        let mut ls = Vec::new();
        for (&t, &l) in load.hours().iter().zip(load.values()) {
            if let Some(w) = covariate.value_at(t - tau as i64) {
                ws.push(w);
                ls.push(l);
            }
        }
        if ws.len() < MIN_SCAN_OVERLAP {
            return Err(FeaturesError::InsufficientOverlap {
                lag: tau,
                overlap: ws.len(),
                required: MIN_SCAN_OVERLAP,
            });
        }
        curve.push(pearson(&ws, &ls)?);
    }
    let mut best = 0;
    for (tau, r) in curve.iter().enumerate() {
        if r.abs() > curve[best].abs() {
            best = tau;
        }
    }
    Ok(LagEntry {
        lag_hours: best as u32,
        pearson_r: curve[best],
        curve,
    })
}

/// Run the lag scan for every weather channel in `frame` against its load
/// channel, keyed by channel label.
pub fn scan_weather_lags(frame: &AlignedFrame, max_lag: u32) -> Result<LagProfile, FeaturesError> {
    let load_idx = frame
        .kind_index(ChannelKind::Load)
        .ok_or(FeaturesError::MissingChannel("load"))?;
    let load = frame
        .to_series(load_idx)
        .map_err(|_| FeaturesError::Empty)?;
    let mut covariates = BTreeMap::new();
    for (idx, meta) in frame.channels().iter().enumerate() {
        if meta.kind == ChannelKind::Load {
            continue;
        }
        let series = frame.to_series(idx).map_err(|_| FeaturesError::Empty)?;
        covariates.insert(meta.label(), lag_scan(&series, &load, max_lag)?);
    }
    Ok(LagProfile { covariates })
}
