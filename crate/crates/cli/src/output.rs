//! Artifact plumbing: provenance stamping, stable-name writers, and the
//! per-issue forecast table that `compare` consumes.
//!
//! Every JSON artifact is wrapped with `tool`, `tool_version`, and
//! `config_hash` fields; CSV artifacts carry the same provenance in a
//! leading `#` comment line (synthetic *datasets* are the one exception —
//! they must stay byte-compatible with the ingest schemas, so their
//! provenance lives in a sibling `manifest.json`).

use std::fs;
use std::path::{Path, PathBuf};

use gridrisk_core::backtest::BacktestRun;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TOOL: &str = "gridrisk";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// First 16 hex digits of the SHA-256 of the canonical JSON encoding.
pub fn short_hash(value: &impl Serialize) -> String {
    let body = serde_json::to_string(value).expect("value serializes");
    let digest = Sha256::digest(body.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Wrap a payload with the provenance fields every JSON artifact carries.
pub fn stamped(config_hash: &str, payload_key: &str, payload: Value) -> Value {
    let mut map = Map::new();
    map.insert("tool".to_string(), json!(TOOL));
    map.insert("tool_version".to_string(), json!(TOOL_VERSION));
    map.insert("config_hash".to_string(), json!(config_hash));
    map.insert(payload_key.to_string(), payload);
    Value::Object(map)
}

/// Provenance comment line for CSV artifacts.
pub fn csv_banner(config_hash: &str, extra: &[(&str, &str)]) -> String {
    let mut line = format!("# tool={TOOL} tool_version={TOOL_VERSION} config_hash={config_hash}");
    for (k, v) in extra {
        line.push_str(&format!(" {k}={v}"));
    }
    line.push('\n');
    line
}

pub fn write_text(path: &Path, body: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::data(format!("cannot create output directory: {e}"))
                    .with("path", parent.display())
            })?;
        }
    }
    fs::write(path, body).map_err(|e| {
        CliError::data(format!("cannot write output file: {e}")).with("path", path.display())
    })
}

/// Write pretty JSON (trailing newline) under `dir` and return the path.
pub fn write_json(dir: &Path, name: &str, value: &Value) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let mut body = serde_json::to_string_pretty(value).expect("json serializes");
    body.push('\n');
    write_text(&path, &body)?;
    Ok(path)
}

/// Read a JSON artifact back, tolerating both wrapped and bare payloads.
///
/// Returns the payload under `payload_key` (or the whole document when the
/// wrapper fields are absent) plus the recorded config hash, if any.
pub fn read_stamped(path: &Path, payload_key: &str) -> Result<(Value, Option<String>), CliError> {
    let raw = fs::read_to_string(path).map_err(|e| {
        CliError::data(format!("cannot read input file: {e}")).with("path", path.display())
    })?;
    let doc: Value = serde_json::from_str(&raw).map_err(|e| {
        CliError::data(format!("input is not valid JSON: {e}")).with("path", path.display())
    })?;
    match doc {
        Value::Object(mut map) if map.contains_key(payload_key) => {
            let hash = map
                .get("config_hash")
                .and_then(Value::as_str)
                .map(str::to_string);
            let payload = map.remove(payload_key).expect("key checked");
            Ok((payload, hash))
        }
        other => Ok((other, None)),
    }
}

/// Write the per-issue forecast table: one row per (issue, lead), with the
/// realized actual and one column per quantile level.
pub fn write_forecasts_csv(
    dir: &Path,
    run: &BacktestRun,
    config_hash: &str,
) -> Result<PathBuf, CliError> {
    let set = &run.concatenated;
    let mut out = csv_banner(config_hash, &[("schedule_hash", &run.schedule_hash)]);
    out.push_str("issue_hour,lead_hours,actual");
    for l in set.levels() {
        out.push_str(&format!(",q{l}"));
    }
    out.push('\n');
    for i in 0..set.n_issues() {
        for (hi, &h) in set.lead_hours().iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}",
                set.issue_hours()[i],
                h,
                set.actual(i, hi)
            ));
            for li in 0..set.levels().len() {
                out.push_str(&format!(",{}", set.prediction(i, hi, li)));
            }
            out.push('\n');
        }
    }
    let path = dir.join("forecasts.csv");
    write_text(&path, &out)?;
    Ok(path)
}

/// Resolve a `--report-a`-style argument: a forecast table file, or a
/// directory that contains one under the stable name.
pub fn resolve_forecasts_path(arg: &Path) -> PathBuf {
    if arg.is_dir() {
        arg.join("forecasts.csv")
    } else {
        arg.to_path_buf()
    }
}

/// Load median-forecast errors (`actual - median`) at one lead from a
/// forecast table, issue-ordered as written.
pub fn read_forecast_errors(path: &Path, lead: u32) -> Result<(Vec<i64>, Vec<f64>), CliError> {
    let raw = fs::read_to_string(path).map_err(|e| {
        CliError::data(format!("cannot read forecast table: {e}")).with("path", path.display())
    })?;
    let bad = |row: usize, what: &str| {
        CliError::data(format!("malformed forecast table: {what}"))
            .with("path", path.display())
            .with("row", row)
    };

    let mut lines = raw
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
    let (header_row, header) = lines.next().ok_or_else(|| bad(0, "no header"))?;
    let cols: Vec<&str> = header.split(',').collect();
    let find = |name: &str| cols.iter().position(|c| *c == name);
    let issue_col = find("issue_hour").ok_or_else(|| bad(header_row, "missing issue_hour"))?;
    let lead_col = find("lead_hours").ok_or_else(|| bad(header_row, "missing lead_hours"))?;
    let actual_col = find("actual").ok_or_else(|| bad(header_row, "missing actual"))?;
    let median_col = cols
        .iter()
        .position(|c| {
            c.strip_prefix('q')
                .and_then(|s| s.parse::<f64>().ok())
                .is_some_and(|l| (l - 0.5).abs() < 1e-9)
        })
        .ok_or_else(|| bad(header_row, "no median (q0.5) column"))?;

    let mut issues = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(bad(i + 1, "wrong field count"));
        }
        let row_lead: u32 = fields[lead_col].parse().map_err(|_| bad(i + 1, "bad lead"))?;
        if row_lead != lead {
            continue;
        }
        let issue: i64 = fields[issue_col].parse().map_err(|_| bad(i + 1, "bad issue"))?;
        let actual: f64 = fields[actual_col].parse().map_err(|_| bad(i + 1, "bad actual"))?;
        let median: f64 = fields[median_col].parse().map_err(|_| bad(i + 1, "bad median"))?;
        issues.push(issue);
        errors.push(actual - median);
    }
    if issues.is_empty() {
        return Err(
            CliError::data("forecast table has no rows at the requested lead")
                .with("path", path.display())
                .with("lead", lead),
        );
    }
    Ok((issues, errors))
}
