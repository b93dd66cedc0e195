use std::path::PathBuf;

use clap::Args;
use gridrisk_core::features::scan_weather_lags;
use gridrisk_core::{align, read_load_csv, read_weather_csv, AlignPolicy};
use serde_json::json;

use crate::error::CliError;
use crate::output;

/// Scan weather channels for the load-lead lag with peak correlation.
#[derive(Debug, Args)]
pub struct LagsArgs {
    /// Hourly load CSV (`timestamp,area,load_mw`).
    #[arg(long)]
    pub load_csv: PathBuf,
    /// Hourly weather CSV in the ten-column schema.
    #[arg(long)]
    pub weather_csv: PathBuf,
    /// Largest lag (hours) to scan.
    #[arg(long, default_value_t = 12)]
    pub max_lag: u32,
    /// Directory for lags.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: &LagsArgs) -> Result<(), CliError> {
    let mut series = read_load_csv(&args.load_csv)?;
    series.extend(read_weather_csv(&args.weather_csv)?);
    let frame = align(&series, AlignPolicy::Intersection)?;
    let profile = scan_weather_lags(&frame, args.max_lag)?;

    let hash = output::short_hash(&json!({
        "command": "lags",
        "load_csv": args.load_csv.file_name().map(|s| s.to_string_lossy().to_string()),
        "weather_csv": args.weather_csv.file_name().map(|s| s.to_string_lossy().to_string()),
        "max_lag": args.max_lag,
    }));
    let doc = output::stamped(
        &hash,
        "lags",
        serde_json::to_value(&profile).expect("profile serializes"),
    );
    let path = output::write_json(&args.out_dir, "lags.json", &doc)?;

    for (label, entry) in &profile.covariates {
        println!(
            "{label}: best lag {} h (r = {:.3})",
            entry.lag_hours, entry.pearson_r
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}
