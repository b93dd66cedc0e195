//! One submodule per subcommand, plus the data-loading steps they share.

pub mod backtest;
pub mod compare;
pub mod lags;
pub mod report;
pub mod rho;
pub mod synth;
pub mod train;

use std::path::Path;

use gridrisk_core::{
    align, read_load_csv, read_weather_csv, AlignPolicy, AlignedFrame, HourRange, HourlySeries,
};

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Load and align every channel an experiment references.
pub fn load_frame(cfg: &ExperimentConfig) -> Result<AlignedFrame, CliError> {
    let mut series = read_load_csv(&cfg.data.load_csv)?;
    if let Some(weather) = &cfg.data.weather_csv {
        series.extend(read_weather_csv(weather)?);
    }
    align(&series, AlignPolicy::Intersection).map_err(Into::into)
}

/// Half-open hour range covered by the frame's grid.
pub fn frame_range(frame: &AlignedFrame) -> Result<HourRange, CliError> {
    match (frame.hours().first(), frame.hours().last()) {
        (Some(&first), Some(&last)) => HourRange::new(first, last + 1).map_err(Into::into),
        _ => Err(CliError::data("aligned frame is empty")),
    }
}

/// Policy inputs are per-node series; a file with several areas is ambiguous.
pub fn single_area(series: Vec<HourlySeries>, path: &Path) -> Result<HourlySeries, CliError> {
    let mut series = series;
    if series.len() != 1 {
        return Err(CliError::data("expected exactly one area in load-schema file")
            .with("path", path.display())
            .with("areas", series.len()));
    }
    Ok(series.remove(0))
}
