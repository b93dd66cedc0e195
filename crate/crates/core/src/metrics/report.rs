use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::forecast_set::QuantileForecastSet;
use super::percentile::{reserve, ReserveBasis};
use super::point::{bias_at_horizon, direction_rates, large_error_counts, mape};
use super::MetricsError;

/// Which evaluation points a report scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportMode {
    /// Pool every lead of every issue time (the default protocol).
    WalkForward,
    /// Score only the scheduling lead (`h_star`) of each issue time.
    FixedSplit,
}

/// Report parameters. `h_star` is both the bias horizon and, in fixed-split
/// mode, the single scored lead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSpec {
    pub mode: ReportMode,
    pub h_star: u32,
    pub reserve_percentile: f64,
    pub thresholds_mw: Vec<f64>,
}

impl Default for ReportSpec {
    fn default() -> Self {
        Self {
            mode: ReportMode::WalkForward,
            h_star: 24,
            reserve_percentile: 99.5,
            thresholds_mw: vec![1000.0, 1500.0, 2000.0],
        }
    }
}

/// The headline risk table for one model run.
///
/// `bias_24h_mw` is named for the default 24-hour scheduling horizon; its
/// value is always computed at the configured `h_star`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub mape_pct: f64,
    pub upr_pct: f64,
    pub reserve_p995_pct: f64,
    pub bias_24h_mw: f64,
    pub opr_pct: f64,
    pub reserve_p995_mw: f64,
    pub tie_pct: f64,
    pub n_points: u64,
    pub large_error_counts: BTreeMap<String, u64>,
}

/// Score a forecast set into the headline table.
pub fn build_risk_report(
    fs: &QuantileForecastSet,
    spec: &ReportSpec,
) -> Result<RiskReport, MetricsError> {
    let scored: Vec<u32> = match spec.mode {
        ReportMode::WalkForward => fs.lead_hours().to_vec(),
        ReportMode::FixedSplit => vec![spec.h_star],
    };
    let (actual, median) = fs.pooled_points(&scored)?;
    let rates = direction_rates(&actual, &median)?;
    Ok(RiskReport {
        mape_pct: mape(&actual, &median)?,
        upr_pct: rates.upr_pct,
        reserve_p995_pct: reserve(&actual, &median, spec.reserve_percentile, ReserveBasis::Pct)?,
        bias_24h_mw: bias_at_horizon(fs, spec.h_star)?,
        opr_pct: rates.opr_pct,
        reserve_p995_mw: reserve(&actual, &median, spec.reserve_percentile, ReserveBasis::Mw)?,
        tie_pct: rates.tie_pct,
        n_points: actual.len() as u64,
        large_error_counts: large_error_counts(&actual, &median, &spec.thresholds_mw)?,
    })
}
