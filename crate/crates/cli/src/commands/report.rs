use std::path::PathBuf;

use clap::Args;
use gridrisk_core::backtest::{report_csv, ModelReport};

use crate::error::CliError;
use crate::output;

/// Re-render a report artifact as its CSV mirror.
#[derive(Debug, Args)]
pub struct ReportArgs {
    /// report.json from a backtest run (wrapped or bare rows).
    #[arg(long)]
    pub input: PathBuf,
    /// Directory for report.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: &ReportArgs) -> Result<(), CliError> {
    let (payload, hash) = output::read_stamped(&args.input, "reports")?;
    let rows: Vec<ModelReport> = serde_json::from_value(payload).map_err(|e| {
        CliError::data(format!("input is not a report artifact: {e}"))
            .with("path", args.input.display())
    })?;
    if rows.is_empty() {
        return Err(CliError::data("report artifact has no rows").with("path", args.input.display()));
    }

    let hash = hash.unwrap_or_else(|| "unknown".to_string());
    let body = format!("{}{}", output::csv_banner(&hash, &[]), report_csv(&rows));
    let path = args.out_dir.join("report.csv");
    output::write_text(&path, &body)?;

    println!("rendered {} report row(s) to {}", rows.len(), path.display());
    Ok(())
}
