use chrono::{DateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};

use super::DataError;

/// What an hourly series measures. Units are fixed per kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    /// System load, MW.
    Load,
    /// Dry-bulb temperature, degrees C.
    Temperature,
    /// Dewpoint temperature, degrees C.
    Dewpoint,
    /// Relative humidity, percent.
    Humidity,
    /// Wind speed, m/s.
    WindSpeed,
    /// Wind direction, degrees.
    WindDir,
    /// Cloud cover, oktas.
    CloudCover,
    /// Global horizontal irradiance, W/m^2.
    Ghi,
    /// Pressure, hPa.
    Pressure,
    /// Day-ahead locational marginal price, $/MWh.
    LmpDa,
    /// Real-time locational marginal price (hourly mean of intervals), $/MWh.
    LmpRt,
}

impl ChannelKind {
    /// Unit string for report labels.
    pub fn unit(self) -> &'static str {
        match self {
            ChannelKind::Load => "MW",
            ChannelKind::Temperature | ChannelKind::Dewpoint => "degC",
            ChannelKind::Humidity => "pct",
            ChannelKind::WindSpeed => "m/s",
            ChannelKind::WindDir => "deg",
            ChannelKind::CloudCover => "oktas",
            ChannelKind::Ghi => "W/m2",
            ChannelKind::Pressure => "hPa",
            ChannelKind::LmpDa | ChannelKind::LmpRt => "$/MWh",
        }
    }
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ChannelKind::Load => "load",
            ChannelKind::Temperature => "temperature",
            ChannelKind::Dewpoint => "dewpoint",
            ChannelKind::Humidity => "humidity",
            ChannelKind::WindSpeed => "wind_speed",
            ChannelKind::WindDir => "wind_dir",
            ChannelKind::CloudCover => "cloud_cover",
            ChannelKind::Ghi => "ghi",
            ChannelKind::Pressure => "pressure",
            ChannelKind::LmpDa => "lmp_da",
            ChannelKind::LmpRt => "lmp_rt",
        };
        f.write_str(s)
    }
}

/// Convert a UTC timestamp to whole hours since the epoch.
///
/// Errors with [`DataError::NotHourAligned`] unless minutes/seconds are zero.
pub fn hour_index(ts: DateTime<Utc>) -> Result<i64, DataError> {
    let secs = ts.timestamp();
    if secs.rem_euclid(3600) != 0 {
        return Err(DataError::NotHourAligned(ts.to_rfc3339()));
    }
    Ok(secs.div_euclid(3600))
}

/// Start of the given epoch-hour as a UTC timestamp.
pub fn hour_start(hour: i64) -> DateTime<Utc> {
    Utc.timestamp_opt(hour * 3600, 0).unwrap()
}

/// Half-open hour range `[start, end)` on the hourly grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HourRange {
    pub start: i64,
    pub end: i64,
}

impl HourRange {
    pub fn new(start: i64, end: i64) -> Result<Self, DataError> {
        if start >= end {
            return Err(DataError::BadRange { start, end });
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, hour: i64) -> bool {
        hour >= self.start && hour < self.end
    }

    /// Number of grid hours covered.
    pub fn len(&self) -> i64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.start..self.end
    }
}

/// A single hourly channel: strictly increasing epoch-hour timestamps and
/// finite values. Gaps are simply absent rows; `gap_hours` counts them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlySeries {
    kind: ChannelKind,
    name: String,
    area: String,
    hours: Vec<i64>,
    values: Vec<f64>,
}

impl HourlySeries {
    pub fn new(
        kind: ChannelKind,
        name: impl Into<String>,
        area: impl Into<String>,
        hours: Vec<i64>,
        values: Vec<f64>,
    ) -> Result<Self, DataError> {
        let name = name.into();
        let area = area.into();
        if hours.len() != values.len() {
            return Err(DataError::LengthMismatch {
                channel: name,
                hours: hours.len(),
                values: values.len(),
            });
        }
        if hours.is_empty() {
            return Err(DataError::EmptySeries(name));
        }
        if hours.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DataError::NotIncreasing(name));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFinite {
                channel: name,
                hour: hours[i],
            });
        }
        Ok(Self {
            kind,
            name,
            area,
            hours,
            values,
        })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn area(&self) -> &str {
        &self.area
    }

    pub fn hours(&self) -> &[i64] {
        &self.hours
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.hours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hours.is_empty()
    }

    pub fn first_hour(&self) -> i64 {
        self.hours[0]
    }

    pub fn last_hour(&self) -> i64 {
        *self.hours.last().unwrap()
    }

    /// Covered range `[first, last+1)`.
    pub fn range(&self) -> HourRange {
        HourRange {
            start: self.first_hour(),
            end: self.last_hour() + 1,
        }
    }

    /// Value at an exact grid hour, if present.
    pub fn value_at(&self, hour: i64) -> Option<f64> {
        self.hours
            .binary_search(&hour)
            .ok()
            .map(|i| self.values[i])
    }

    /// Missing rows inside the covered range.
    pub fn gap_hours(&self) -> i64 {
        self.range().len() - self.len() as i64
    }
}
