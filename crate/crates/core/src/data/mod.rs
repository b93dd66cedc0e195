//! Hourly series ingestion, alignment, and normalization.
//!
//! Everything downstream works on a strict UTC hourly grid: timestamps are
//! stored as whole hours since the Unix epoch, gaps are absent rows rather
//! than sentinel values, and non-finite values are rejected at the door.

mod align;
mod ingest;
mod normalize;
mod series;

pub use align::{align, AlignPolicy, AlignedFrame, ChannelMeta};
pub use ingest::{read_load_csv, read_oasis_csv, read_weather_csv, WEATHER_CHANNELS};
pub use normalize::{fit_normalizer, ChannelStats, NormalizerState};
pub use series::{hour_index, hour_start, ChannelKind, HourRange, HourlySeries};

use thiserror::Error;

/// Errors raised while reading, aligning, or normalizing hourly data.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: expected header {expected:?}, found {found:?}")]
    SchemaMismatch {
        path: String,
        expected: String,
        found: String,
    },
    #[error("{path} row {row}: cannot parse timestamp {value:?}")]
    BadTimestamp {
        path: String,
        row: usize,
        value: String,
    },
    #[error("{path} row {row}: cannot parse number {value:?} in column {column}")]
    BadNumber {
        path: String,
        row: usize,
        column: String,
        value: String,
    },
    #[error("timestamp {0} is not aligned to an hour boundary")]
    NotHourAligned(String),
    #[error("non-finite value for {channel} at hour index {hour}")]
    NonFinite { channel: String, hour: i64 },
    #[error("duplicate timestamp with conflicting values for {channel} at hour index {hour}")]
    DuplicateTimestamp { channel: String, hour: i64 },
    #[error("series {0} is empty")]
    EmptySeries(String),
    #[error("timestamps for {0} are not strictly increasing")]
    NotIncreasing(String),
    #[error("series lengths disagree for {channel}: {hours} timestamps vs {values} values")]
    LengthMismatch {
        channel: String,
        hours: usize,
        values: usize,
    },
    #[error("no rows matched key {key:?} in {path}")]
    KeyNotFound { path: String, key: String },
    #[error("aligned channels share no common hours")]
    NoOverlap,
    #[error("duplicate channel {0} passed to align")]
    DuplicateChannel(String),
    #[error("channel {channel} is constant over the training range (std = 0)")]
    ConstantChannel { channel: String },
    #[error("channel {channel} has no present values in the training range")]
    NoTrainRows { channel: String },
    #[error("normalizer channels do not match frame (expected {expected}, found {found})")]
    ChannelMismatch { expected: String, found: String },
    #[error("invalid hour range: start {start} must precede end {end}")]
    BadRange { start: i64, end: i64 },
}
