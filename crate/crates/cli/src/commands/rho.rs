use std::path::PathBuf;

use clap::Args;
use gridrisk_core::policy::estimate_asymmetry;
use gridrisk_core::{read_load_csv, read_oasis_csv, ChannelKind};

use crate::commands::single_area;
use crate::error::CliError;
use crate::output;

/// Estimate the DA/RT price asymmetry and target quantile for one node.
#[derive(Debug, Args)]
pub struct RhoArgs {
    /// Day-ahead OASIS price CSV.
    #[arg(long)]
    pub da_csv: PathBuf,
    /// Real-time OASIS price CSV (interval rows are averaged hourly).
    #[arg(long)]
    pub rt_csv: PathBuf,
    /// Node key to select from the price files.
    #[arg(long)]
    pub node: String,
    /// Operational risk multiplier on the price ratio (at least 1).
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Actual load CSV for the event-conditional diagnostic.
    #[arg(long)]
    pub load_csv: Option<PathBuf>,
    /// Day-ahead load forecast CSV (same schema as the load file).
    #[arg(long)]
    pub forecast_csv: Option<PathBuf>,
    /// Minimum hours on each side of the shortfall split.
    #[arg(long, default_value_t = 24)]
    pub min_event_hours: usize,
    /// Directory for rho_<node>.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn run(args: &RhoArgs) -> Result<(), CliError> {
    if args.load_csv.is_some() != args.forecast_csv.is_some() {
        return Err(CliError::config(
            "--load-csv and --forecast-csv must be given together",
        ));
    }
    let da = read_oasis_csv(&args.da_csv, &args.node, ChannelKind::LmpDa, "lmp_da")?;
    let rt = read_oasis_csv(&args.rt_csv, &args.node, ChannelKind::LmpRt, "lmp_rt")?;

    let event_series = match (&args.load_csv, &args.forecast_csv) {
        (Some(load), Some(forecast)) => Some((
            single_area(read_load_csv(load)?, load)?,
            single_area(read_load_csv(forecast)?, forecast)?,
        )),
        _ => None,
    };
    let event_inputs = event_series.as_ref().map(|(a, f)| (a, f));

    let estimate = estimate_asymmetry(
        &args.node,
        &da,
        &rt,
        event_inputs,
        args.kappa,
        args.min_event_hours,
    )?
    .rounded();

    let hash = output::short_hash(&serde_json::json!({
        "command": "rho",
        "node": args.node,
        "kappa": args.kappa,
        "min_event_hours": args.min_event_hours,
        "event_inputs": event_series.is_some(),
    }));
    let doc = output::stamped(
        &hash,
        "estimate",
        serde_json::to_value(&estimate).expect("estimate serializes"),
    );
    let name = format!("rho_{}.json", sanitize(&args.node));
    let path = output::write_json(&args.out_dir, &name, &doc)?;

    println!(
        "{}: rho_price = {}, q_price_star = {}, q_target = {} ({} spread hours)",
        estimate.node, estimate.rho_price, estimate.q_price_star, estimate.q_target, estimate.hours
    );
    println!("wrote {}", path.display());
    Ok(())
}

/// Keep node-derived filenames filesystem-safe.
fn sanitize(node: &str) -> String {
    node.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
