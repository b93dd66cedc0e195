//! Reliability-first toolkit for hourly grid load forecasting.
//!
//! The crate covers the full desk loop: ingest hourly load/weather/price
//! data, measure forecast risk (directional error rates, tail reserves,
//! Diebold-Mariano comparisons), train linear multi-quantile models under
//! bias- and over-forecast constraints, size the target quantile from
//! real-time/day-ahead price asymmetry, and run leak-checked walk-forward
//! backtests.

pub mod backtest;
pub mod data;
pub mod features;
pub mod forecast;
pub mod metrics;
pub mod objective;
pub mod policy;
pub mod synth;

pub use data::{
    align, fit_normalizer, hour_index, hour_start, read_load_csv, read_oasis_csv,
    read_weather_csv, AlignPolicy, AlignedFrame, ChannelKind, ChannelMeta, DataError, HourRange,
    HourlySeries, NormalizerState,
};
