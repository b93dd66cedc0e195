use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Utc};

use super::series::{hour_index, ChannelKind, HourlySeries};
use super::DataError;

/// Weather CSV columns in file order, with the channel each one feeds.
pub const WEATHER_CHANNELS: [(&str, ChannelKind); 8] = [
    ("temp_c", ChannelKind::Temperature),
    ("dewpoint_c", ChannelKind::Dewpoint),
    ("humidity_pct", ChannelKind::Humidity),
    ("wind_ms", ChannelKind::WindSpeed),
    ("wind_dir_deg", ChannelKind::WindDir),
    ("cloud_oktas", ChannelKind::CloudCover),
    ("ghi_wm2", ChannelKind::Ghi),
    ("pressure_hpa", ChannelKind::Pressure),
];

const LOAD_HEADER: &str = "timestamp,area,load_mw";
const WEATHER_HEADER: &str = "timestamp,area,temp_c,dewpoint_c,humidity_pct,wind_ms,wind_dir_deg,cloud_oktas,ghi_wm2,pressure_hpa";

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>, DataError> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => DataError::Io {
                path: path.display().to_string(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => DataError::Csv {
                path: path.display().to_string(),
                source: e,
            },
        })
}

fn check_header(
    path: &Path,
    rdr: &mut csv::Reader<std::fs::File>,
    expected: &str,
) -> Result<(), DataError> {
    let found = rdr
        .headers()
        .map_err(|e| DataError::Csv {
            path: path.display().to_string(),
            source: e,
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if found != expected {
        return Err(DataError::SchemaMismatch {
            path: path.display().to_string(),
            expected: expected.to_string(),
            found,
        });
    }
    Ok(())
}

fn parse_utc(path: &Path, row: usize, raw: &str) -> Result<DateTime<Utc>, DataError> {
    DateTime::parse_from_rfc3339(raw)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|_| DataError::BadTimestamp {
            path: path.display().to_string(),
            row,
            value: raw.to_string(),
        })
}

fn parse_num(path: &Path, row: usize, column: &str, raw: &str) -> Result<f64, DataError> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| DataError::BadNumber {
            path: path.display().to_string(),
            row,
            column: column.to_string(),
            value: raw.to_string(),
        })
}

/// Accumulates (hour, value) pairs for one channel, deduplicating repeats.
///
/// A timestamp seen twice with the same value is kept once; conflicting
/// values are an error.
struct ChannelAcc {
    kind: ChannelKind,
    name: String,
    area: String,
    cells: BTreeMap<i64, f64>,
}

impl ChannelAcc {
    fn new(kind: ChannelKind, name: &str, area: &str) -> Self {
        Self {
            kind,
            name: name.to_string(),
            area: area.to_string(),
            cells: BTreeMap::new(),
        }
    }

    fn push(&mut self, hour: i64, value: f64) -> Result<(), DataError> {
        if !value.is_finite() {
            return Err(DataError::NonFinite {
                channel: self.label(),
                hour,
            });
        }
        if let Some(prev) = self.cells.insert(hour, value) {
            if prev != value {
                return Err(DataError::DuplicateTimestamp {
                    channel: self.label(),
                    hour,
                });
            }
        }
        Ok(())
    }

    fn label(&self) -> String {
        format!("{}/{}", self.area, self.name)
    }

    fn finish(self) -> Result<HourlySeries, DataError> {
        let (hours, values): (Vec<i64>, Vec<f64>) = self.cells.into_iter().unzip();
        HourlySeries::new(self.kind, self.name, self.area, hours, values)
    }
}

/// Read an hourly load CSV (`timestamp,area,load_mw`), one series per area.
///
/// Empty value cells are treated as absent rows (gaps), not zeros.
pub fn read_load_csv(path: impl AsRef<Path>) -> Result<Vec<HourlySeries>, DataError> {
    let path = path.as_ref();
    let mut rdr = open_reader(path)?;
    check_header(path, &mut rdr, LOAD_HEADER)?;

    let mut areas: BTreeMap<String, ChannelAcc> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2; // 1-based, after header
        let rec = rec.map_err(|e| DataError::Csv {
            path: path.display().to_string(),
            source: e,
        })?;
        let ts = parse_utc(path, row, &rec[0])?;
        let hour = hour_index(ts)?;
        let area = rec[1].to_string();
        let raw = rec[2].trim();
        if raw.is_empty() {
            continue;
        }
        let value = parse_num(path, row, "load_mw", raw)?;
        areas
            .entry(area.clone())
            .or_insert_with(|| ChannelAcc::new(ChannelKind::Load, "load_mw", &area))
            .push(hour, value)?;
    }
    if areas.is_empty() {
        return Err(DataError::EmptySeries(path.display().to_string()));
    }
    areas.into_values().map(ChannelAcc::finish).collect()
}

/// Read an hourly weather CSV, producing one series per (area, channel).
///
/// Header must be exactly the ten-column weather schema. Empty cells are
/// gaps for that channel only.
pub fn read_weather_csv(path: impl AsRef<Path>) -> Result<Vec<HourlySeries>, DataError> {
    let path = path.as_ref();
    let mut rdr = open_reader(path)?;
    check_header(path, &mut rdr, WEATHER_HEADER)?;

    let mut accs: BTreeMap<(String, usize), ChannelAcc> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| DataError::Csv {
            path: path.display().to_string(),
            source: e,
        })?;
        let ts = parse_utc(path, row, &rec[0])?;
        let hour = hour_index(ts)?;
        let area = rec[1].to_string();
        for (c, (col_name, kind)) in WEATHER_CHANNELS.iter().enumerate() {
            let raw = rec[c + 2].trim();
            if raw.is_empty() {
                continue;
            }
            let value = parse_num(path, row, col_name, raw)?;
            accs.entry((area.clone(), c))
                .or_insert_with(|| ChannelAcc::new(*kind, col_name, &area))
                .push(hour, value)?;
        }
    }
    if accs.is_empty() {
        return Err(DataError::EmptySeries(path.display().to_string()));
    }
    accs.into_values().map(ChannelAcc::finish).collect()
}

/// Read a CAISO OASIS-style CSV and aggregate one key's rows to hourly means.
///
/// The reader is keyed on `INTERVALSTARTTIME_GMT` plus the first recognized
/// identity column (`NODE`, `NODE_ID`, `PNODE_NAME`, `TAC_AREA_NAME`,
/// `RESOURCE_NAME`); the value comes from the first of `MW`, `VALUE`, `PRC`.
/// Five-minute interval rows collapse to the mean of the intervals observed
/// in each hour (a full hour has 12), so hourly day-ahead rows pass through
/// unchanged. When an `LMP_TYPE` column is present only `LMP` rows are used,
/// and when `MARKET_RUN_ID` is present it must agree with the requested
/// kind (`DAM` for day-ahead, `RTM` for real-time).
pub fn read_oasis_csv(
    path: impl AsRef<Path>,
    key: &str,
    kind: ChannelKind,
    name: &str,
) -> Result<HourlySeries, DataError> {
    const ID_COLUMNS: [&str; 5] = ["NODE", "NODE_ID", "PNODE_NAME", "TAC_AREA_NAME", "RESOURCE_NAME"];
    const VALUE_COLUMNS: [&str; 3] = ["MW", "VALUE", "PRC"];

    let path = path.as_ref();
    let mut rdr = open_reader(path)?;
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| DataError::Csv {
            path: path.display().to_string(),
            source: e,
        })?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let col = |want: &str| headers.iter().position(|h| h == want);

    let ts_col = col("INTERVALSTARTTIME_GMT").ok_or_else(|| DataError::SchemaMismatch {
        path: path.display().to_string(),
        expected: "INTERVALSTARTTIME_GMT".to_string(),
        found: headers.join(","),
    })?;
    let id_col = ID_COLUMNS
        .iter()
        .find_map(|c| col(c))
        .ok_or_else(|| DataError::SchemaMismatch {
            path: path.display().to_string(),
            expected: format!("one of {}", ID_COLUMNS.join("/")),
            found: headers.join(","),
        })?;
    let value_col = VALUE_COLUMNS
        .iter()
        .find_map(|c| col(c))
        .ok_or_else(|| DataError::SchemaMismatch {
            path: path.display().to_string(),
            expected: format!("one of {}", VALUE_COLUMNS.join("/")),
            found: headers.join(","),
        })?;
    let lmp_type_col = col("LMP_TYPE");
    let market_col = col("MARKET_RUN_ID");
    let expected_market = match kind {
        ChannelKind::LmpDa => Some("DAM"),
        ChannelKind::LmpRt => Some("RTM"),
        _ => None,
    };

    // hour -> (sum, count) of interval values
    let mut hours: BTreeMap<i64, (f64, u32)> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| DataError::Csv {
            path: path.display().to_string(),
            source: e,
        })?;
        if &rec[id_col] != key {
            continue;
        }
        if let Some(c) = lmp_type_col {
            if &rec[c] != "LMP" {
                continue;
            }
        }
        if let (Some(c), Some(want)) = (market_col, expected_market) {
            if &rec[c] != want {
                return Err(DataError::SchemaMismatch {
                    path: path.display().to_string(),
                    expected: format!("MARKET_RUN_ID={want}"),
                    found: rec[c].to_string(),
                });
            }
        }
        let ts = parse_utc(path, row, &rec[ts_col])?;
        let hour = ts.timestamp().div_euclid(3600);
        let value = parse_num(path, row, &headers[value_col], &rec[value_col])?;
        if !value.is_finite() {
            return Err(DataError::NonFinite {
                channel: key.to_string(),
                hour,
            });
        }
        let slot = hours.entry(hour).or_insert((0.0, 0));
        slot.0 += value;
        slot.1 += 1;
    }
    if hours.is_empty() {
        return Err(DataError::KeyNotFound {
            path: path.display().to_string(),
            key: key.to_string(),
        });
    }
    let (hs, vs): (Vec<i64>, Vec<f64>) = hours
        .into_iter()
        .map(|(h, (sum, n))| (h, sum / f64::from(n)))
        .unzip();
    HourlySeries::new(kind, name, key, hs, vs)
}
