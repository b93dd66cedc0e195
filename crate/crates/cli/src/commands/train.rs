use std::path::PathBuf;

use clap::Args;
use gridrisk_core::forecast::LinearQuantileModel;
use gridrisk_core::forecast::Forecaster;
use gridrisk_core::HourRange;
use serde_json::json;

use crate::commands::{frame_range, load_frame};
use crate::config::{ExperimentConfig, ModelKind};
use crate::error::CliError;
use crate::output;

/// Fit one model on a fixed split and write its checkpoint.
///
/// The split holds out the last 20% of the range for later evaluation and
/// uses the preceding 10% as the early-stopping window; training sees
/// everything before the hold-out.
#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Experiment file (TOML; `.json` accepted).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's report output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

pub fn run(args: &TrainArgs) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let seed = cfg.require_seed()?;
    if cfg.model.kind != ModelKind::LinearQuantile {
        return Err(
            CliError::config("train writes checkpoints for the linear_quantile model only")
                .with("kind", cfg.model.kind),
        );
    }

    let frame = load_frame(&cfg)?;
    let range = frame_range(&frame)?;
    let eval_hours = range.len() / 5;
    let val_hours = range.len() / 10;
    let eval_start = range.end - eval_hours;
    let val_start = eval_start - val_hours;
    if eval_hours == 0 || val_hours == 0 || val_start <= range.start {
        return Err(CliError::data("not enough history for a fixed split")
            .with("hours", range.len()));
    }
    let train = HourRange::new(range.start, eval_start)?;
    let val = HourRange::new(val_start, eval_start)?;

    let mut model =
        LinearQuantileModel::new(cfg.feature_spec()?, cfg.quantile_train_config(seed))?;
    model.fit(&frame, train, val)?;
    let checkpoint = model.checkpoint()?;

    let hash = cfg.config_hash();
    let out_dir = cfg.out_dir(args.out_dir.as_deref());
    let doc = output::stamped(
        &hash,
        "checkpoint",
        json!({
            "model": "linear_quantile",
            "split": {
                "train": [train.start, train.end],
                "validation": [val.start, val.end],
                "evaluation": [eval_start, range.end],
            },
            "parameters": checkpoint,
        }),
    );
    let path = output::write_json(&out_dir, "checkpoint.json", &doc)?;

    println!(
        "fitted {} quantile levels on {} columns ({} training hours, {} validation)",
        checkpoint.quantiles.len(),
        checkpoint.columns.len(),
        train.len(),
        val.len()
    );
    println!("wrote {}", path.display());
    Ok(())
}
