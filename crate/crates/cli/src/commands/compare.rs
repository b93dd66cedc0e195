use std::path::PathBuf;

use clap::Args;
use gridrisk_core::metrics::dm_test;
use serde_json::json;

use crate::error::CliError;
use crate::output;

/// Diebold-Mariano comparison of two backtests' median forecasts.
#[derive(Debug, Args)]
pub struct CompareArgs {
    /// First forecast table (forecasts.csv, or the directory holding one).
    #[arg(long)]
    pub report_a: PathBuf,
    /// Second forecast table, scored on the same issue hours.
    #[arg(long)]
    pub report_b: PathBuf,
    /// Lead (hours) whose errors are compared.
    #[arg(long, default_value_t = 24)]
    pub h_star: u32,
    /// Optional directory for dm.json; the result always goes to stdout.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

pub fn run(args: &CompareArgs) -> Result<(), CliError> {
    let path_a = output::resolve_forecasts_path(&args.report_a);
    let path_b = output::resolve_forecasts_path(&args.report_b);
    let (issues_a, errors_a) = output::read_forecast_errors(&path_a, args.h_star)?;
    let (issues_b, errors_b) = output::read_forecast_errors(&path_b, args.h_star)?;
    if issues_a != issues_b {
        return Err(
            CliError::data("forecast tables cover different issue hours")
                .with("rows_a", issues_a.len())
                .with("rows_b", issues_b.len()),
        );
    }

    let dm = dm_test(&errors_a, &errors_b, args.h_star)?;

    // content-addressed: the hash identifies the matched error series
    let hash = output::short_hash(&json!({
        "command": "compare",
        "h_star": args.h_star,
        "errors_a": errors_a,
        "errors_b": errors_b,
    }));
    let doc = output::stamped(
        &hash,
        "dm",
        serde_json::to_value(dm).expect("dm result serializes"),
    );
    println!("{}", serde_json::to_string_pretty(&doc).expect("doc serializes"));
    if let Some(dir) = &args.out_dir {
        output::write_json(dir, "dm.json", &doc)?;
    }
    Ok(())
}
