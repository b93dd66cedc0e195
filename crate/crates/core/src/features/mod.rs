//! Feature construction: thermal-lag scans, sinusoidal time encodings,
//! behind-the-meter fusion, and the design matrix for linear forecasters.

mod fuse;
mod lag;
mod matrix;
mod time;

pub use fuse::{btm_fuse, Affine, BtmFusion, DaylightGate};
pub use lag::{lag_scan, scan_weather_lags, LagEntry, LagProfile};
pub use matrix::{build_feature_matrix, build_feature_rows, FeatureMatrix, FeatureSpec};
pub use time::{time_features, time_features_at_hour, TimeFeatures};

use thiserror::Error;

/// Errors from feature construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeaturesError {
    #[error("series is constant on the scan overlap")]
    ConstantSeries,
    #[error("only {overlap} overlapping hours at lag {lag}; need {required}")]
    InsufficientOverlap {
        lag: u32,
        overlap: usize,
        required: usize,
    },
    #[error("required hour {hour} missing for issue {issue}")]
    GapInWindow { issue: i64, hour: i64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("daylight gate must lie in [0, 1], got {0}")]
    GateOutOfRange(f64),
    #[error("frame has no {0} channel")]
    MissingChannel(&'static str),
    #[error("channel {0} not found in frame")]
    UnknownChannel(String),
    #[error("no feature rows survive the gap policy")]
    Empty,
    #[error("bad feature configuration: {0}")]
    BadConfig(&'static str),
}
