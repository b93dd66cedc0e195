use std::path::PathBuf;

use clap::Args;
use gridrisk_core::backtest::{emit_report, make_schedule, report_csv, BacktestRun, run_backtest};
use gridrisk_core::forecast::{GaussianLinearModel, LinearQuantileModel, SeasonalNaive};
use gridrisk_core::AlignedFrame;

use crate::commands::{frame_range, load_frame};
use crate::config::{ExperimentConfig, ModelKind};
use crate::error::CliError;
use crate::output;

/// Run the walk-forward backtest an experiment file describes.
#[derive(Debug, Args)]
pub struct BacktestArgs {
    /// Experiment file (TOML; `.json` accepted).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's report output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

pub fn run(args: &BacktestArgs) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let seed = cfg.require_seed()?;
    let frame = load_frame(&cfg)?;
    let range = frame_range(&frame)?;
    let schedule = make_schedule(range, &cfg.schedule.to_params())?;

    let leads = cfg.leads();
    let run = fit_and_score(&cfg, &frame, &schedule, &leads, seed)?;
    let (model, variant) = cfg.model_labels();
    let rows = emit_report(&[(model.clone(), variant, &run)], &cfg.report_spec())?;

    let hash = cfg.config_hash();
    let out_dir = cfg.out_dir(args.out_dir.as_deref());
    let json_doc = output::stamped(
        &hash,
        "reports",
        serde_json::to_value(&rows).expect("reports serialize"),
    );
    output::write_json(&out_dir, "report.json", &json_doc)?;
    let csv_body = format!("{}{}", output::csv_banner(&hash, &[]), report_csv(&rows));
    output::write_text(&out_dir.join("report.csv"), &csv_body)?;
    output::write_forecasts_csv(&out_dir, &run, &hash)?;

    let m = &rows[0].metrics;
    let scored: usize = run.summaries.iter().map(|s| s.issues_scored).sum();
    println!(
        "{model}: {} folds, {scored} issues; MAPE {:.2}%, UPR {:.1}%, OPR {:.1}%, \
         reserve(p99.5) {:.1} MW, bias@h* {:.1} MW",
        run.summaries.len(),
        m.mape_pct,
        m.upr_pct,
        m.opr_pct,
        m.reserve_p995_mw,
        m.bias_24h_mw
    );
    println!(
        "wrote report.json, report.csv, forecasts.csv under {}",
        out_dir.display()
    );
    Ok(())
}

fn fit_and_score(
    cfg: &ExperimentConfig,
    frame: &AlignedFrame,
    schedule: &gridrisk_core::backtest::WalkForwardSchedule,
    leads: &[u32],
    seed: u64,
) -> Result<BacktestRun, CliError> {
    let run = match cfg.model.kind {
        ModelKind::SeasonalNaive => {
            let period = cfg.naive_period();
            run_backtest(frame, schedule, leads, |_| {
                Ok(SeasonalNaive::with_period(period))
            })
        }
        ModelKind::LinearQuantile => {
            let spec = cfg.feature_spec()?;
            let train_cfg = cfg.quantile_train_config(seed);
            run_backtest(frame, schedule, leads, |_| {
                LinearQuantileModel::new(spec.clone(), train_cfg.clone())
            })
        }
        ModelKind::Gaussian => {
            let spec = cfg.feature_spec()?;
            let train_cfg = cfg.gaussian_train_config(seed);
            run_backtest(frame, schedule, leads, |_| {
                GaussianLinearModel::new(spec.clone(), train_cfg.clone())
            })
        }
    }?;
    Ok(run)
}
