//! Experiment file schema: one strict TOML (or JSON) document describing a
//! train or backtest run end to end — data paths, windowing, objective,
//! model choice, and output location.
//!
//! Every section rejects unknown keys so a config that parses is a faithful
//! record of what ran. Omitted fields fall back to the library defaults;
//! the resolved document is what gets hashed into output provenance.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use chrono_tz::Tz;
use gridrisk_core::backtest::ScheduleParams;
use gridrisk_core::features::FeatureSpec;
use gridrisk_core::forecast::{GaussianTrainConfig, QuantileTrainConfig};
use gridrisk_core::metrics::{ReportMode, ReportSpec};
use gridrisk_core::objective::ObjectiveConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Training RNG seed; mandatory for `train` and `backtest`.
    pub seed: Option<u64>,
    pub data: DataSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    /// Only meaningful for `linear_quantile`; rejected elsewhere.
    pub objective: Option<ObjectiveSection>,
    pub model: ModelSection,
    #[serde(default)]
    pub report: ReportSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub load_csv: PathBuf,
    pub weather_csv: Option<PathBuf>,
    /// IANA zone name used for clock features.
    #[serde(default = "default_timezone")]
    pub timezone: String,
}

fn default_timezone() -> String {
    "UTC".to_string()
}

/// Walk-forward windowing; mirrors the library defaults when omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleSection {
    pub initial_train_days: u32,
    pub refit_days: u32,
    pub val_days: u32,
    pub stride_hours: u32,
    pub horizon_hours: u32,
    pub keep_partial_final: bool,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        let p = ScheduleParams::default();
        ScheduleSection {
            initial_train_days: p.initial_train_days,
            refit_days: p.refit_days,
            val_days: p.val_days,
            stride_hours: p.stride_hours,
            horizon_hours: p.horizon_hours,
            keep_partial_final: p.keep_partial_final,
        }
    }
}

impl ScheduleSection {
    pub fn to_params(&self) -> ScheduleParams {
        ScheduleParams {
            initial_train_days: self.initial_train_days,
            refit_days: self.refit_days,
            val_days: self.val_days,
            stride_hours: self.stride_hours,
            horizon_hours: self.horizon_hours,
            keep_partial_final: self.keep_partial_final,
        }
    }
}

/// Training objective for the quantile model; library defaults when omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObjectiveSection {
    pub quantiles: Vec<f64>,
    pub weights: Vec<f64>,
    pub h_star: u32,
    pub b_max_mw: f64,
    pub lambda_bias: f64,
    pub lambda_opr: f64,
    pub pi_max: f64,
    pub tau_mw: f64,
}

impl Default for ObjectiveSection {
    fn default() -> Self {
        let o = ObjectiveConfig::default();
        ObjectiveSection {
            quantiles: o.quantiles,
            weights: o.weights,
            h_star: o.h_star,
            b_max_mw: o.b_max_mw,
            lambda_bias: o.lambda_bias,
            lambda_opr: o.lambda_opr,
            pi_max: o.pi_max,
            tau_mw: o.tau_mw,
        }
    }
}

impl ObjectiveSection {
    pub fn to_core(&self) -> ObjectiveConfig {
        ObjectiveConfig {
            quantiles: self.quantiles.clone(),
            weights: self.weights.clone(),
            h_star: self.h_star,
            b_max_mw: self.b_max_mw,
            lambda_bias: self.lambda_bias,
            lambda_opr: self.lambda_opr,
            pi_max: self.pi_max,
            tau_mw: self.tau_mw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    SeasonalNaive,
    LinearQuantile,
    Gaussian,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::SeasonalNaive => "seasonal_naive",
            ModelKind::LinearQuantile => "linear_quantile",
            ModelKind::Gaussian => "gaussian",
        };
        f.write_str(s)
    }
}

/// Forecaster choice plus its hyperparameters. Fields that do not apply to
/// the chosen kind are configuration errors, not silent no-ops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    /// Label for the report row; defaults to "default".
    pub variant: Option<String>,
    /// Leads trained and scored, ascending; defaults to 1..=48.
    pub leads: Option<Vec<u32>>,
    pub step0: Option<f64>,
    pub epochs: Option<usize>,
    pub patience: Option<usize>,
    pub batch_size: Option<usize>,
    pub issue_stride_hours: Option<u32>,
    /// Gaussian head only: quantile levels to report.
    pub levels: Option<Vec<f64>>,
    /// Seasonal naive only: season length, default 168.
    pub period_hours: Option<u32>,
    pub load_lags: Option<Vec<u32>>,
    #[serde(default)]
    pub weather_lags: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportSection {
    pub out_dir: PathBuf,
    /// Scheduling horizon for the bias column; defaults to the objective's.
    pub h_star: Option<u32>,
    pub reserve_percentile: Option<f64>,
    pub thresholds_mw: Option<Vec<f64>>,
}

impl Default for ReportSection {
    fn default() -> Self {
        ReportSection {
            out_dir: PathBuf::from("out"),
            h_star: None,
            reserve_percentile: None,
            thresholds_mw: None,
        }
    }
}

impl ExperimentConfig {
    /// Parse and validate a config file. TOML is the primary format; a
    /// `.json` extension switches to JSON.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let raw = fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read config file: {e}"))
                .with("path", path.display())
        })?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg: ExperimentConfig = if is_json {
            serde_json::from_str(&raw).map_err(|e| {
                CliError::config(format!("invalid JSON config: {e}")).with("path", path.display())
            })?
        } else {
            toml::from_str(&raw).map_err(|e| {
                CliError::config(format!("invalid TOML config: {e}")).with("path", path.display())
            })?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.timezone()?;

        let m = &self.model;
        let mut stray: Vec<&str> = Vec::new();
        let fit_keys: [(&str, bool); 5] = [
            ("step0", m.step0.is_some()),
            ("epochs", m.epochs.is_some()),
            ("patience", m.patience.is_some()),
            ("issue_stride_hours", m.issue_stride_hours.is_some()),
            ("load_lags", m.load_lags.is_some()),
        ];
        match m.kind {
            ModelKind::SeasonalNaive => {
                for (key, present) in fit_keys {
                    if present {
                        stray.push(key);
                    }
                }
                if m.batch_size.is_some() {
                    stray.push("batch_size");
                }
                if m.levels.is_some() {
                    stray.push("levels");
                }
                if !m.weather_lags.is_empty() {
                    stray.push("weather_lags");
                }
            }
            ModelKind::LinearQuantile => {
                if m.levels.is_some() {
                    stray.push("levels");
                }
                if m.period_hours.is_some() {
                    stray.push("period_hours");
                }
            }
            ModelKind::Gaussian => {
                if m.batch_size.is_some() {
                    stray.push("batch_size");
                }
                if m.period_hours.is_some() {
                    stray.push("period_hours");
                }
            }
        }
        if !stray.is_empty() {
            return Err(CliError::config(format!(
                "model keys do not apply to kind {}: {}",
                m.kind,
                stray.join(", ")
            )));
        }
        if self.objective.is_some() && m.kind != ModelKind::LinearQuantile {
            return Err(CliError::config(
                "the [objective] section only applies to the linear_quantile model",
            ));
        }
        Ok(())
    }

    pub fn timezone(&self) -> Result<Tz, CliError> {
        self.data.timezone.parse::<Tz>().map_err(|_| {
            CliError::config("unknown IANA timezone").with("timezone", &self.data.timezone)
        })
    }

    /// The seed, or the config error the contract demands.
    pub fn require_seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::config("seed is mandatory for train and backtest"))
    }

    pub fn objective_config(&self) -> ObjectiveConfig {
        self.objective
            .as_ref()
            .map(ObjectiveSection::to_core)
            .unwrap_or_default()
    }

    pub fn feature_spec(&self) -> Result<FeatureSpec, CliError> {
        Ok(FeatureSpec {
            weather_lags: self.model.weather_lags.clone(),
            load_lags: self
                .model
                .load_lags
                .clone()
                .unwrap_or_else(FeatureSpec::default_load_lags),
            tz: self.timezone()?,
        })
    }

    pub fn leads(&self) -> Vec<u32> {
        self.model.leads.clone().unwrap_or_else(|| (1..=48).collect())
    }

    pub fn quantile_train_config(&self, seed: u64) -> QuantileTrainConfig {
        let mut c = QuantileTrainConfig::new(seed);
        c.objective = self.objective_config();
        c.leads = self.leads();
        let m = &self.model;
        if let Some(v) = m.step0 {
            c.step0 = v;
        }
        if let Some(v) = m.epochs {
            c.epochs = v;
        }
        if let Some(v) = m.patience {
            c.patience = v;
        }
        if let Some(v) = m.batch_size {
            c.batch_size = Some(v);
        }
        if let Some(v) = m.issue_stride_hours {
            c.issue_stride_hours = v;
        }
        c
    }

    pub fn gaussian_train_config(&self, seed: u64) -> GaussianTrainConfig {
        let mut c = GaussianTrainConfig::new(seed);
        if let Some(v) = &self.model.levels {
            c.levels = v.clone();
        }
        c.leads = self.leads();
        let m = &self.model;
        if let Some(v) = m.step0 {
            c.step0 = v;
        }
        if let Some(v) = m.epochs {
            c.epochs = v;
        }
        if let Some(v) = m.patience {
            c.patience = v;
        }
        if let Some(v) = m.issue_stride_hours {
            c.issue_stride_hours = v;
        }
        c
    }

    pub fn naive_period(&self) -> u32 {
        self.model.period_hours.unwrap_or(168)
    }

    /// `(model, variant)` labels for report rows.
    pub fn model_labels(&self) -> (String, String) {
        let variant = self
            .model
            .variant
            .clone()
            .unwrap_or_else(|| "default".to_string());
        (self.model.kind.to_string(), variant)
    }

    pub fn report_spec(&self) -> ReportSpec {
        let defaults = ReportSpec::default();
        let h_star = self.report.h_star.unwrap_or_else(|| {
            self.objective
                .as_ref()
                .map_or(defaults.h_star, |o| o.h_star)
        });
        ReportSpec {
            mode: ReportMode::WalkForward,
            h_star,
            reserve_percentile: self
                .report
                .reserve_percentile
                .unwrap_or(defaults.reserve_percentile),
            thresholds_mw: self
                .report
                .thresholds_mw
                .clone()
                .unwrap_or(defaults.thresholds_mw),
        }
    }

    /// Output directory, with the command-line override taking precedence.
    pub fn out_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .unwrap_or_else(|| self.report.out_dir.clone())
    }

    /// Hash of the fully resolved document (defaults filled in), so two
    /// files that mean the same run stamp outputs identically.
    pub fn config_hash(&self) -> String {
        output::short_hash(self)
    }
}
