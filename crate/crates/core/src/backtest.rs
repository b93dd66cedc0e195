//! Rolling-origin walk-forward backtesting.
//!
//! The schedule expands training history in `refit_days` blocks:
//!
//! ```text
//!     |------ train k ------|== val ==|  issues: stride until cutoff k+1
//!     start                 cutoff_k = start + (initial + k*refit) days
//! ```
//!
//! Issue times sit on the last hour of the training window and step by the
//! stride; every target hour (issue + lead) lands strictly beyond the data
//! the model saw. The final, shorter block before the data end is kept by
//! default so recent history is still scored.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::data::{AlignedFrame, ChannelKind, DataError, HourRange};
use crate::forecast::{ForecastError, Forecaster};
use crate::metrics::{
    build_risk_report, mape, MetricsError, QuantileForecastSet, ReportMode, ReportSpec, RiskReport,
};

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error("need {need_hours} hours of data, have {have_hours}")]
    InsufficientData { have_hours: i64, need_hours: i64 },
    #[error("bad schedule parameters: {0}")]
    BadParams(&'static str),
    #[error("fold {index} failed: {source}")]
    Fold {
        index: usize,
        source: ForecastError,
    },
    #[error("no issue time produced a scoreable forecast")]
    EmptySet,
    #[error("frame has no load channel")]
    NoLoadChannel,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Walk-forward windowing parameters, in days except the hour fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub initial_train_days: u32,
    pub refit_days: u32,
    pub val_days: u32,
    pub stride_hours: u32,
    pub horizon_hours: u32,
    /// Keep the final block even when the data end truncates it.
    pub keep_partial_final: bool,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        ScheduleParams {
            initial_train_days: 180,
            refit_days: 90,
            val_days: 30,
            stride_hours: 24,
            horizon_hours: 48,
            keep_partial_final: true,
        }
    }
}

impl ScheduleParams {
    fn validate(&self) -> Result<(), BacktestError> {
        if self.initial_train_days == 0
            || self.refit_days == 0
            || self.val_days == 0
            || self.stride_hours == 0
            || self.horizon_hours == 0
        {
            return Err(BacktestError::BadParams("all window sizes must be positive"));
        }
        if self.val_days > self.initial_train_days {
            return Err(BacktestError::BadParams(
                "validation window must fit inside the initial training history",
            ));
        }
        Ok(())
    }
}

/// One refit block: expanding train range, trailing validation range, and
/// the issue times evaluated before the next refit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub index: usize,
    pub train: HourRange,
    pub validation: HourRange,
    pub issues: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkForwardSchedule {
    pub params: ScheduleParams,
    pub data_range: HourRange,
    pub folds: Vec<Fold>,
}

impl WalkForwardSchedule {
    pub fn total_issues(&self) -> usize {
        self.folds.iter().map(|f| f.issues.len()).sum()
    }

    /// First 16 hex digits of the SHA-256 over the serialized schedule;
    /// identifies the evaluation windows a report was scored on.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("schedule serializes");
        let digest = Sha256::digest(json.as_bytes());
        let mut hex = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

/// Build the deterministic fold list for `data_range` (half-open hours).
pub fn make_schedule(
    data_range: HourRange,
    params: &ScheduleParams,
) -> Result<WalkForwardSchedule, BacktestError> {
    params.validate()?;
    let need = i64::from(params.initial_train_days) * 24 + i64::from(params.horizon_hours);
    if data_range.len() < need {
        return Err(BacktestError::InsufficientData {
            have_hours: data_range.len(),
            need_hours: need,
        });
    }

    let horizon = i64::from(params.horizon_hours);
    let stride = i64::from(params.stride_hours);
    let refit = i64::from(params.refit_days) * 24;
    let last_target = data_range.end - 1;

    let mut folds = Vec::new();
    let mut truncated_final = false;
    for k in 0.. {
        let cutoff = data_range.start + (i64::from(params.initial_train_days) + refit / 24 * k) * 24;
        let next_cutoff = cutoff + refit;
        // first issue is the last training hour; horizon must fit the data
        let first = cutoff - 1;
        if first + horizon > last_target {
            break;
        }
        let mut issues = Vec::new();
        let mut t = first;
        while t < next_cutoff - 1 {
            if t + horizon > last_target {
                truncated_final = true;
                break;
            }
            issues.push(t);
            t += stride;
        }
        let windows = "window sizes validated positive";
        folds.push(Fold {
            index: folds.len(),
            train: HourRange::new(data_range.start, cutoff).expect(windows),
            validation: HourRange::new(cutoff - i64::from(params.val_days) * 24, cutoff)
                .expect(windows),
            issues,
        });
    }
    if truncated_final && !params.keep_partial_final {
        folds.pop();
    }
    if folds.is_empty() {
        return Err(BacktestError::InsufficientData {
            have_hours: data_range.len(),
            need_hours: need,
        });
    }
    Ok(WalkForwardSchedule {
        params: params.clone(),
        data_range,
        folds,
    })
}

/// Per-fold execution record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold: usize,
    pub issues_attempted: usize,
    pub issues_scored: usize,
    /// Issue times dropped because history or targets were gapped.
    pub skipped_issues: Vec<i64>,
}

/// Everything a backtest produced: the concatenated forecast set (primary
/// evaluation surface), per-fold sets for dispersion stats, and the
/// execution trail.
#[derive(Debug, Clone)]
pub struct BacktestRun {
    pub levels: Vec<f64>,
    pub lead_hours: Vec<u32>,
    pub concatenated: QuantileForecastSet,
    pub per_fold: Vec<Option<QuantileForecastSet>>,
    pub summaries: Vec<FoldSummary>,
    pub schedule_hash: String,
}

/// Run one model family over the schedule. The factory builds a fresh
/// model for each fold; fitting errors abort with the fold index, while
/// issues whose history or targets are gapped are skipped and recorded.
pub fn run_backtest<M, F>(
    frame: &AlignedFrame,
    schedule: &WalkForwardSchedule,
    leads: &[u32],
    factory: F,
) -> Result<BacktestRun, BacktestError>
where
    M: Forecaster,
    F: Fn(usize) -> Result<M, ForecastError>,
{
    if leads.is_empty() {
        return Err(BacktestError::BadParams("no leads to score"));
    }
    let load_channel = frame
        .kind_index(ChannelKind::Load)
        .ok_or(BacktestError::NoLoadChannel)?;

    let mut levels: Option<Vec<f64>> = None;
    let mut all_issues: Vec<i64> = Vec::new();
    let mut all_preds: Vec<f64> = Vec::new();
    let mut all_actuals: Vec<f64> = Vec::new();
    let mut per_fold = Vec::with_capacity(schedule.folds.len());
    let mut summaries = Vec::with_capacity(schedule.folds.len());

    for fold in &schedule.folds {
        let wrap = |source: ForecastError| BacktestError::Fold {
            index: fold.index,
            source,
        };
        let mut model = factory(fold.index).map_err(wrap)?;
        model.fit(frame, fold.train, fold.validation).map_err(wrap)?;
        let model_levels = model.levels().to_vec();
        match &levels {
            None => levels = Some(model_levels.clone()),
            Some(first) if *first != model_levels => {
                return Err(BacktestError::BadParams(
                    "factory produced models with different quantile levels",
                ));
            }
            _ => {}
        }

        let mut fold_issues = Vec::new();
        let mut fold_preds = Vec::new();
        let mut fold_actuals = Vec::new();
        let mut skipped = Vec::new();
        'issues: for &t in &fold.issues {
            // all targets must exist before we commit the issue
            let mut actuals = Vec::with_capacity(leads.len());
            for &h in leads {
                match frame.get(load_channel, t + i64::from(h)) {
                    Some(v) if v.is_finite() => actuals.push(v),
                    _ => {
                        skipped.push(t);
                        continue 'issues;
                    }
                }
            }
            let preds = match model.predict(frame, t, leads) {
                Ok(p) => p,
                Err(ForecastError::InsufficientHistory { .. })
                | Err(ForecastError::Feature(_)) => {
                    skipped.push(t);
                    continue;
                }
                Err(e) => return Err(wrap(e)),
            };
            fold_issues.push(t);
            fold_preds.extend(preds.iter().copied());
            fold_actuals.extend_from_slice(&actuals);
        }

        summaries.push(FoldSummary {
            fold: fold.index,
            issues_attempted: fold.issues.len(),
            issues_scored: fold_issues.len(),
            skipped_issues: skipped,
        });
        if fold_issues.is_empty() {
            per_fold.push(None);
        } else {
            let set = QuantileForecastSet::new(
                model_levels.clone(),
                leads.to_vec(),
                fold_issues.clone(),
                fold_preds.clone(),
                fold_actuals.clone(),
            )?;
            per_fold.push(Some(set));
            all_issues.extend_from_slice(&fold_issues);
            all_preds.extend_from_slice(&fold_preds);
            all_actuals.extend_from_slice(&fold_actuals);
        }
    }

    if all_issues.is_empty() {
        return Err(BacktestError::EmptySet);
    }
    let levels = levels.expect("at least one fold ran");
    let concatenated = QuantileForecastSet::new(
        levels.clone(),
        leads.to_vec(),
        all_issues,
        all_preds,
        all_actuals,
    )?;
    Ok(BacktestRun {
        levels,
        lead_hours: leads.to_vec(),
        concatenated,
        per_fold,
        summaries,
        schedule_hash: schedule.hash(),
    })
}

/// Mean and population standard deviation across folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    MeanStd {
        mean,
        std: var.sqrt(),
    }
}

/// Fold-level dispersion of the headline metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldStats {
    pub folds_scored: usize,
    pub mape_pct: MeanStd,
    pub upr_pct: MeanStd,
    pub opr_pct: MeanStd,
    pub reserve_p995_mw: MeanStd,
    pub bias_24h_mw: MeanStd,
}

/// One report row: concatenated metrics are the primary numbers, fold
/// statistics show dispersion across refits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: String,
    pub variant: String,
    pub mode: ReportMode,
    pub metrics: RiskReport,
    pub per_lead_mape: BTreeMap<String, f64>,
    pub fold_stats: Option<FoldStats>,
    pub schedule_hash: String,
}

/// Score each run into a report row under a shared spec.
pub fn emit_report(
    runs: &[(String, String, &BacktestRun)],
    spec: &ReportSpec,
) -> Result<Vec<ModelReport>, BacktestError> {
    let mut rows = Vec::with_capacity(runs.len());
    for (model, variant, run) in runs {
        let metrics = build_risk_report(&run.concatenated, spec)?;

        let mut per_lead_mape = BTreeMap::new();
        if spec.mode == ReportMode::WalkForward {
            for &h in &[1u32, 6, 12, 24] {
                if run.lead_hours.contains(&h) {
                    let (actual, median) = run.concatenated.pooled_points(&[h])?;
                    per_lead_mape.insert(h.to_string(), mape(&actual, &median)?);
                }
            }
        }

        let fold_reports: Vec<RiskReport> = run
            .per_fold
            .iter()
            .flatten()
            .map(|fs| build_risk_report(fs, spec))
            .collect::<Result<_, _>>()?;
        let fold_stats = if fold_reports.is_empty() {
            None
        } else {
            let pick = |f: fn(&RiskReport) -> f64| {
                mean_std(&fold_reports.iter().map(f).collect::<Vec<_>>())
            };
            Some(FoldStats {
                folds_scored: fold_reports.len(),
                mape_pct: pick(|r| r.mape_pct),
                upr_pct: pick(|r| r.upr_pct),
                opr_pct: pick(|r| r.opr_pct),
                reserve_p995_mw: pick(|r| r.reserve_p995_mw),
                bias_24h_mw: pick(|r| r.bias_24h_mw),
            })
        };

        rows.push(ModelReport {
            model: model.clone(),
            variant: variant.clone(),
            mode: spec.mode,
            metrics,
            per_lead_mape,
            fold_stats,
            schedule_hash: run.schedule_hash.clone(),
        });
    }
    Ok(rows)
}

/// Deterministic pretty JSON for a set of report rows.
pub fn report_json(reports: &[ModelReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

/// CSV mirror: one row per (model, variant), stable column order. Large-
/// error counts collapse into a `threshold:count` list.
pub fn report_csv(reports: &[ModelReport]) -> String {
    let mut out = String::from(
        "model,variant,mode,mape_pct,upr_pct,opr_pct,tie_pct,reserve_p995_mw,reserve_p995_pct,\
         bias_24h_mw,n_points,large_errors,mape_1h,mape_6h,mape_12h,mape_24h,schedule_hash\n",
    );
    for r in reports {
        let mode = match r.mode {
            ReportMode::WalkForward => "walk_forward",
            ReportMode::FixedSplit => "fixed_split",
        };
        let counts = r
            .metrics
            .large_error_counts
            .iter()
            .map(|(k, v)| format!("{k}:{v}"))
            .collect::<Vec<_>>()
            .join("|");
        let lead = |h: &str| {
            r.per_lead_mape
                .get(h)
                .map(|v| format!("{v:.6}"))
                .unwrap_or_default()
        };
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{},{},{}\n",
            r.model,
            r.variant,
            mode,
            r.metrics.mape_pct,
            r.metrics.upr_pct,
            r.metrics.opr_pct,
            r.metrics.tie_pct,
            r.metrics.reserve_p995_mw,
            r.metrics.reserve_p995_pct,
            r.metrics.bias_24h_mw,
            r.metrics.n_points,
            counts,
            lead("1"),
            lead("6"),
            lead("12"),
            lead("24"),
            r.schedule_hash,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{align, AlignPolicy, HourlySeries};
    use crate::forecast::SeasonalNaive;
    use approx::assert_relative_eq;

    /// Exactly weekly-periodic load on [0, n) hours.
    fn periodic_frame(n_hours: i64) -> AlignedFrame {
        let hours: Vec<i64> = (0..n_hours).collect();
        let values: Vec<f64> = hours
            .iter()
            .map(|h| {
                let w = (h.rem_euclid(168)) as f64;
                2000.0 + 500.0 * (2.0 * std::f64::consts::PI * w / 168.0).sin()
                    + 150.0 * (2.0 * std::f64::consts::PI * (h.rem_euclid(24)) as f64 / 24.0).cos()
            })
            .collect();
        let load = HourlySeries::new(ChannelKind::Load, "load_mw", "T", hours, values).unwrap();
        align(&[load], AlignPolicy::Intersection).unwrap()
    }

    #[test]
    fn minimal_range_yields_one_fold_one_issue() {
        let range = HourRange::new(0, 180 * 24 + 48).unwrap();
        let sched = make_schedule(range, &ScheduleParams::default()).unwrap();
        assert_eq!(sched.folds.len(), 1);
        assert_eq!(sched.folds[0].issues, vec![180 * 24 - 1]);
        assert_eq!(sched.folds[0].train, HourRange::new(0, 4320).unwrap());
        assert_eq!(sched.folds[0].validation, HourRange::new(4320 - 720, 4320).unwrap());
    }

    #[test]
    fn two_year_range_matches_hand_count() {
        let range = HourRange::new(0, 730 * 24).unwrap();
        let sched = make_schedule(range, &ScheduleParams::default()).unwrap();
        assert_eq!(sched.folds.len(), 7);
        assert_eq!(sched.total_issues(), 6 * 90 + 9);
        // expanding, monotone, no duplicate issues
        for pair in sched.folds.windows(2) {
            assert!(pair[0].train.end < pair[1].train.end);
            assert_eq!(pair[0].train.start, pair[1].train.start);
            assert!(pair[0].issues.last().unwrap() < pair[1].issues.first().unwrap());
        }
        for fold in &sched.folds {
            assert_eq!(fold.validation.end, fold.train.end);
            assert_eq!(fold.validation.len(), 720);
            for &t in &fold.issues {
                assert!(t >= fold.train.end - 1);
                assert!(t + 48 < range.end, "horizon fits");
            }
        }
    }

    #[test]
    fn partial_final_block_can_be_dropped() {
        let range = HourRange::new(0, 730 * 24).unwrap();
        let params = ScheduleParams {
            keep_partial_final: false,
            ..ScheduleParams::default()
        };
        let sched = make_schedule(range, &params).unwrap();
        assert_eq!(sched.folds.len(), 6);
        assert_eq!(sched.total_issues(), 6 * 90);
    }

    #[test]
    fn short_history_is_rejected() {
        let range = HourRange::new(0, 180 * 24 + 47).unwrap();
        assert!(matches!(
            make_schedule(range, &ScheduleParams::default()),
            Err(BacktestError::InsufficientData { .. })
        ));
    }

    #[test]
    fn schedule_hash_tracks_content() {
        let range = HourRange::new(0, 730 * 24).unwrap();
        let a = make_schedule(range, &ScheduleParams::default()).unwrap();
        let b = make_schedule(range, &ScheduleParams::default()).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = make_schedule(
            range,
            &ScheduleParams {
                stride_hours: 48,
                ..ScheduleParams::default()
            },
        )
        .unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn seasonal_naive_scores_zero_on_periodic_data() {
        let frame = periodic_frame(240 * 24);
        let sched = make_schedule(HourRange::new(0, 240 * 24).unwrap(), &ScheduleParams::default()).unwrap();
        let leads: Vec<u32> = (1..=48).collect();
        let run = run_backtest(&frame, &sched, &leads, |_| Ok(SeasonalNaive::new())).unwrap();
        let report = build_risk_report(&run.concatenated, &ReportSpec::default()).unwrap();
        assert_relative_eq!(report.mape_pct, 0.0, epsilon = 1e-9);
        assert_relative_eq!(report.tie_pct, 100.0);
        assert_relative_eq!(report.reserve_p995_mw, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn shared_schedule_means_matched_windows() {
        let frame = periodic_frame(240 * 24);
        let sched = make_schedule(HourRange::new(0, 240 * 24).unwrap(), &ScheduleParams::default()).unwrap();
        let leads = vec![1, 24, 48];
        let a = run_backtest(&frame, &sched, &leads, |_| Ok(SeasonalNaive::new())).unwrap();
        let b = run_backtest(&frame, &sched, &leads, |_| {
            Ok(SeasonalNaive::with_period(24))
        })
        .unwrap();
        assert_eq!(
            a.concatenated.issue_hours(),
            b.concatenated.issue_hours(),
            "both models must score the identical issue multiset"
        );
        assert_eq!(a.schedule_hash, b.schedule_hash);
    }

    #[test]
    fn gapped_targets_skip_the_issue_and_record_it() {
        // drop the hour that issue t = 4343 needs for lead 24
        let n = (185 * 24) as i64;
        let missing = 4343 + 24;
        let hours: Vec<i64> = (0..n).filter(|&h| h != missing).collect();
        let values: Vec<f64> = hours.iter().map(|h| 2000.0 + (h % 24) as f64).collect();
        let load = HourlySeries::new(ChannelKind::Load, "load_mw", "T", hours, values).unwrap();
        let frame = align(&[load], AlignPolicy::Intersection).unwrap();
        let sched = make_schedule(HourRange::new(0, n).unwrap(), &ScheduleParams::default()).unwrap();
        let run = run_backtest(&frame, &sched, &[1, 24], |_| Ok(SeasonalNaive::new())).unwrap();
        let summary = &run.summaries[0];
        assert_eq!(summary.skipped_issues, vec![4343]);
        assert_eq!(summary.issues_scored, summary.issues_attempted - 1);
        assert!(!run.concatenated.issue_hours().contains(&4343));
    }

    #[test]
    fn perfect_forecasts_render_a_clean_row() {
        let frame = periodic_frame(240 * 24);
        let sched = make_schedule(HourRange::new(0, 240 * 24).unwrap(), &ScheduleParams::default()).unwrap();
        let leads: Vec<u32> = vec![1, 6, 12, 24, 48];
        let run = run_backtest(&frame, &sched, &leads, |_| Ok(SeasonalNaive::new())).unwrap();
        let rows = emit_report(
            &[("seasonal_naive".into(), "weekly".into(), &run)],
            &ReportSpec::default(),
        )
        .unwrap();
        let r = &rows[0];
        assert_relative_eq!(r.metrics.mape_pct, 0.0, epsilon = 1e-9);
        assert_relative_eq!(r.metrics.upr_pct, 0.0);
        assert_relative_eq!(r.metrics.opr_pct, 0.0);
        assert_relative_eq!(r.metrics.tie_pct, 100.0);
        assert_relative_eq!(r.metrics.bias_24h_mw, 0.0, epsilon = 1e-9);
        assert_eq!(r.per_lead_mape.len(), 4);
        assert_relative_eq!(r.per_lead_mape["24"], 0.0, epsilon = 1e-9);
        let stats = r.fold_stats.as_ref().unwrap();
        assert_eq!(stats.folds_scored, run.per_fold.len());
        assert_relative_eq!(stats.mape_pct.mean, 0.0, epsilon = 1e-9);
        assert_relative_eq!(stats.mape_pct.std, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn csv_mirror_has_one_row_per_model() {
        let frame = periodic_frame(240 * 24);
        let sched = make_schedule(HourRange::new(0, 240 * 24).unwrap(), &ScheduleParams::default()).unwrap();
        let run = run_backtest(&frame, &sched, &[1, 6, 12, 24], |_| Ok(SeasonalNaive::new()))
            .unwrap();
        let rows = emit_report(
            &[
                ("seasonal_naive".into(), "weekly".into(), &run),
                ("seasonal_naive".into(), "daily".into(), &run),
            ],
            &ReportSpec::default(),
        )
        .unwrap();
        let csv = report_csv(&rows);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("model,variant,mode,mape_pct"));
        assert!(lines[1].starts_with("seasonal_naive,weekly,walk_forward,"));
        assert!(lines[2].starts_with("seasonal_naive,daily,walk_forward,"));
        assert!(lines[1].contains("1000:0|1500:0|2000:0"));
    }

    #[test]
    fn report_json_is_deterministic() {
        let frame = periodic_frame(240 * 24);
        let sched = make_schedule(HourRange::new(0, 240 * 24).unwrap(), &ScheduleParams::default()).unwrap();
        let mk = || {
            let run =
                run_backtest(&frame, &sched, &[1, 24], |_| Ok(SeasonalNaive::new())).unwrap();
            let rows = emit_report(
                &[("seasonal_naive".into(), "weekly".into(), &run)],
                &ReportSpec::default(),
            )
            .unwrap();
            report_json(&rows)
        };
        assert_eq!(mk(), mk());
    }
}
