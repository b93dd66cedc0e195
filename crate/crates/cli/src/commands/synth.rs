use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use gridrisk_core::synth::{generate, SynthConfig, SynthProfile};
use serde_json::json;

use crate::error::CliError;
use crate::output;

/// Generate a deterministic synthetic load/weather dataset.
#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Generator seed; identical seeds produce byte-identical files.
    #[arg(long)]
    pub seed: u64,
    /// Days of hourly data (at least 200, so a default backtest fits).
    #[arg(long)]
    pub days: u32,
    /// Load shape to generate.
    #[arg(long, value_enum)]
    pub profile: ProfileArg,
    /// Directory for load.csv, weather.csv, and manifest.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    Duck,
    Flat,
    Heatwave,
}

impl ProfileArg {
    fn to_core(self) -> SynthProfile {
        match self {
            ProfileArg::Duck => SynthProfile::Duck,
            ProfileArg::Flat => SynthProfile::Flat,
            ProfileArg::Heatwave => SynthProfile::Heatwave,
        }
    }
}

pub fn run(args: &SynthArgs) -> Result<(), CliError> {
    if args.days < 200 {
        return Err(
            CliError::config("synthetic datasets need at least 200 days to be backtestable")
                .with("days", args.days),
        );
    }
    let cfg = SynthConfig::new(args.profile.to_core(), args.days, args.seed);
    let dataset = generate(&cfg)?;

    fs::create_dir_all(&args.out_dir).map_err(|e| {
        CliError::data(format!("cannot create output directory: {e}"))
            .with("path", args.out_dir.display())
    })?;
    let (load_path, weather_path) = dataset.write_csvs(&args.out_dir)?;

    // data CSVs must stay byte-compatible with the ingest schemas, so
    // provenance goes in a sibling manifest instead of a comment line
    let hash = output::short_hash(&cfg);
    let manifest = output::stamped(
        &hash,
        "dataset",
        json!({
            "profile": cfg.profile.to_string(),
            "days": cfg.days,
            "seed": cfg.seed,
            "area": cfg.area,
            "start_hour": cfg.start_hour,
            "rows": dataset.load.len(),
            "files": ["load.csv", "weather.csv"],
        }),
    );
    output::write_json(&args.out_dir, "manifest.json", &manifest)?;

    println!(
        "wrote {} and {} ({} days, profile {}), manifest {}",
        load_path.display(),
        weather_path.display(),
        cfg.days,
        cfg.profile,
        args.out_dir.join("manifest.json").display()
    );
    Ok(())
}
