//! Design matrix for the linear forecasters.
//!
//! A row is one (issue time, lead) pair. Weather columns carry the
//! covariate at the target hour minus its scanned lag, `w_{(t+h) - tau}`;
//! with `h > tau` that timestamp lies after the issue and stands in for a
//! weather forecast, so those columns are flagged. Everything else — load
//! lags, issue/lead clocks — is strictly history at issue time `t`.

use std::collections::BTreeMap;

use chrono_tz::Tz;
use ndarray::{Array1, Array2};

use crate::data::{AlignedFrame, ChannelKind};

use super::lag::LagProfile;
use super::time::time_features_at_hour;
use super::FeaturesError;

/// Operational horizon (hours) used to normalize the lead feature.
pub const LEAD_HORIZON: f64 = 48.0;

/// What goes into each feature row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    /// Channel label -> lag (hours) applied relative to the target hour.
    pub weather_lags: BTreeMap<String, u32>,
    /// Hours back from the issue for load-history columns.
    pub load_lags: Vec<u32>,
    /// Local clock for hour/day-of-week encodings.
    pub tz: Tz,
}

impl FeatureSpec {
    /// Recent load plus daily and weekly anchors.
    pub fn default_load_lags() -> Vec<u32> {
        vec![0, 1, 2, 3, 23, 24, 47, 48, 167, 168]
    }

    /// Build from a lag scan, taking every scanned covariate.
    pub fn from_profile(profile: &LagProfile, tz: Tz) -> Self {
        FeatureSpec {
            weather_lags: profile
                .covariates
                .iter()
                .map(|(label, entry)| (label.clone(), entry.lag_hours))
                .collect(),
            load_lags: Self::default_load_lags(),
            tz,
        }
    }

    /// Column names in row order, with a flag marking columns that may read
    /// values timestamped after the issue (assumed-forecast weather).
    pub fn columns(&self) -> (Vec<String>, Vec<bool>) {
        let mut names = vec![
            "lead_frac".to_string(),
            "lead_sin".to_string(),
            "lead_cos".to_string(),
            "tgt_hour_sin".to_string(),
            "tgt_hour_cos".to_string(),
            "tgt_dow_sin".to_string(),
            "tgt_dow_cos".to_string(),
        ];
        let mut flags = vec![false; names.len()];
        for (label, tau) in &self.weather_lags {
            names.push(format!("w:{label}@-{tau}h"));
            flags.push(true);
        }
        for lag in &self.load_lags {
            names.push(format!("load:t-{lag}"));
            flags.push(false);
        }
        (names, flags)
    }

    pub fn n_columns(&self) -> usize {
        7 + self.weather_lags.len() + self.load_lags.len()
    }
}

/// Rows of features with aligned targets, one row per surviving
/// (issue, lead) pair. Issues with any required hour missing are dropped
/// whole — no value is ever invented.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    /// Per column: may the value be timestamped after the issue?
    pub future_flagged: Vec<bool>,
    /// `n_rows x n_columns`.
    pub rows: Array2<f64>,
    /// Load at the target hour, per row.
    pub targets: Array1<f64>,
    /// Issue hour of each row.
    pub row_issue: Vec<i64>,
    /// Lead of each row.
    pub row_lead: Vec<u32>,
    /// Issues that survived the gap policy, in order.
    pub kept_issues: Vec<i64>,
}

fn resolve_channels(
    frame: &AlignedFrame,
    spec: &FeatureSpec,
) -> Result<(usize, Vec<(usize, u32)>), FeaturesError> {
    let load_idx = frame
        .kind_index(ChannelKind::Load)
        .ok_or(FeaturesError::MissingChannel("load"))?;
    let mut weather = Vec::with_capacity(spec.weather_lags.len());
    for (label, &tau) in &spec.weather_lags {
        let idx = frame
            .channels()
            .iter()
            .position(|c| c.label() == *label)
            .ok_or_else(|| FeaturesError::UnknownChannel(label.clone()))?;
        weather.push((idx, tau));
    }
    Ok((load_idx, weather))
}

/// Feature rows for a single issue, one row per lead, without targets.
///
/// Errors with [`FeaturesError::GapInWindow`] when any required hour is
/// absent; the caller decides whether that drops the issue or aborts.
pub fn build_feature_rows(
    frame: &AlignedFrame,
    issue: i64,
    leads: &[u32],
    spec: &FeatureSpec,
) -> Result<Array2<f64>, FeaturesError> {
    if leads.is_empty() {
        return Err(FeaturesError::BadConfig("no leads requested"));
    }
    let (load_idx, weather) = resolve_channels(frame, spec)?;
    let mut rows = Array2::zeros((leads.len(), spec.n_columns()));
    for (r, &lead) in leads.iter().enumerate() {
        let target_hour = issue + lead as i64;
        let mut c = 0;
        let two_pi = 2.0 * std::f64::consts::PI;
        rows[[r, c]] = lead as f64 / LEAD_HORIZON;
        c += 1;
        rows[[r, c]] = (two_pi * lead as f64 / 24.0).sin();
        c += 1;
        rows[[r, c]] = (two_pi * lead as f64 / 24.0).cos();
        c += 1;
        let tf = time_features_at_hour(target_hour, spec.tz);
        for v in tf.as_array() {
            rows[[r, c]] = v;
            c += 1;
        }
        for &(idx, tau) in &weather {
            let hour = target_hour - tau as i64;
            rows[[r, c]] = frame
                .get(idx, hour)
                .ok_or(FeaturesError::GapInWindow { issue, hour })?;
            c += 1;
        }
        for &lag in &spec.load_lags {
            let hour = issue - lag as i64;
            rows[[r, c]] = frame
                .get(load_idx, hour)
                .ok_or(FeaturesError::GapInWindow { issue, hour })?;
            c += 1;
        }
    }
    Ok(rows)
}

/// Build the training matrix over many issues.
///
/// An issue is kept only if every feature cell *and* every target is
/// available for all `leads`; otherwise the whole issue is skipped.
pub fn build_feature_matrix(
    frame: &AlignedFrame,
    issues: &[i64],
    leads: &[u32],
    spec: &FeatureSpec,
) -> Result<FeatureMatrix, FeaturesError> {
    if leads.is_empty() {
        return Err(FeaturesError::BadConfig("no leads requested"));
    }
    let (load_idx, _) = resolve_channels(frame, spec)?;
    let (columns, future_flagged) = spec.columns();
    let mut blocks: Vec<Array2<f64>> = Vec::new();
    let mut targets = Vec::new();
    let mut row_issue = Vec::new();
    let mut row_lead = Vec::new();
    let mut kept_issues = Vec::new();
    'issues: for &issue in issues {
        let mut issue_targets = Vec::with_capacity(leads.len());
        for &lead in leads {
            match frame.get(load_idx, issue + lead as i64) {
                Some(y) => issue_targets.push(y),
                None => continue 'issues,
            }
        }
        let rows = match build_feature_rows(frame, issue, leads, spec) {
            Ok(rows) => rows,
            Err(FeaturesError::GapInWindow { .. }) => continue,
            Err(e) => return Err(e),
        };
        blocks.push(rows);
        targets.extend(issue_targets);
        row_issue.extend(std::iter::repeat_n(issue, leads.len()));
        row_lead.extend_from_slice(leads);
        kept_issues.push(issue);
    }
    if blocks.is_empty() {
        return Err(FeaturesError::Empty);
    }
    let n_rows = blocks.len() * leads.len();
    let mut rows = Array2::zeros((n_rows, spec.n_columns()));
    for (b, block) in blocks.iter().enumerate() {
        rows.slice_mut(ndarray::s![b * leads.len()..(b + 1) * leads.len(), ..])
            .assign(block);
    }
    Ok(FeatureMatrix {
        columns,
        future_flagged,
        rows,
        targets: Array1::from_vec(targets),
        row_issue,
        row_lead,
        kept_issues,
    })
}
