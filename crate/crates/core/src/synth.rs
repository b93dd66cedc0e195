//! Deterministic synthetic datasets for tests, benchmarks and demos.
//!
//! Three profiles:
//!
//! * `Duck` — a solar-shaped net-load day (morning shoulder, midday PV
//!   belly, evening ramp) on top of a thermal load response. All
//!   temperature dependence enters through the temperature **three hours
//!   earlier**, so a lag scan on the output must recover tau* = 3.
//! * `Flat` — constant load and weather; degenerate on purpose.
//! * `Heatwave` — the duck profile plus multi-day heat events and an AC
//!   saturation kick, for exercising tail metrics.
//!
//! Everything is a pure function of the seed: one generator stream per
//! channel, so adding a channel never reshuffles the others.

use std::fmt;
use std::io::Write as IoWrite;
use std::path::{Path, PathBuf};

use chrono::{Datelike, SecondsFormat, Weekday};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{align, hour_start, AlignPolicy, AlignedFrame, ChannelKind, DataError, HourlySeries};

/// Hours of thermal inertia between temperature and load response.
pub const EMBEDDED_LAG_HOURS: u32 = 3;

/// 2024-01-01T00:00:00Z on the epoch-hour grid.
pub const DEFAULT_START_HOUR: i64 = 473_352;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthProfile {
    Duck,
    Flat,
    Heatwave,
}

impl fmt::Display for SynthProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SynthProfile::Duck => "duck",
            SynthProfile::Flat => "flat",
            SynthProfile::Heatwave => "heatwave",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub profile: SynthProfile,
    pub days: u32,
    pub seed: u64,
    pub start_hour: i64,
    pub area: String,
}

impl SynthConfig {
    pub fn new(profile: SynthProfile, days: u32, seed: u64) -> Self {
        SynthConfig {
            profile,
            days,
            seed,
            start_hour: DEFAULT_START_HOUR,
            area: "SYNTH".to_string(),
        }
    }
}

/// A generated load series plus its weather channels.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub cfg: SynthConfig,
    pub load: HourlySeries,
    pub weather: Vec<HourlySeries>,
}

impl SynthDataset {
    /// All series aligned on one hourly grid (the generator emits a dense
    /// grid, so intersection loses nothing).
    pub fn frame(&self) -> Result<AlignedFrame, DataError> {
        let mut all = vec![self.load.clone()];
        all.extend(self.weather.iter().cloned());
        align(&all, AlignPolicy::Intersection)
    }

    /// Write `load.csv` and `weather.csv` under `dir` in the ingest
    /// schemas. Output is byte-identical for identical configs.
    pub fn write_csvs(&self, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf), DataError> {
        let dir = dir.as_ref();
        let load_path = dir.join("load.csv");
        let weather_path = dir.join("weather.csv");

        let io_err = |path: &Path, e: std::io::Error| DataError::Io {
            path: path.display().to_string(),
            source: e,
        };

        let mut out = String::from("timestamp,area,load_mw\n");
        for (h, v) in self.load.hours().iter().zip(self.load.values()) {
            out.push_str(&format!("{},{},{:.3}\n", stamp(*h), self.cfg.area, v));
        }
        write_file(&load_path, &out).map_err(|e| io_err(&load_path, e))?;

        // channels are dense on the same grid, in the header's column order
        let hours = self.weather[0].hours();
        let mut out = String::from(
            "timestamp,area,temp_c,dewpoint_c,humidity_pct,wind_ms,wind_dir_deg,cloud_oktas,ghi_wm2,pressure_hpa\n",
        );
        for (r, h) in hours.iter().enumerate() {
            let c = |i: usize| self.weather[i].values()[r];
            out.push_str(&format!(
                "{},{},{:.2},{:.2},{:.1},{:.2},{:.1},{:.0},{:.1},{:.2}\n",
                stamp(*h),
                self.cfg.area,
                c(0),
                c(1),
                c(2),
                c(3),
                c(4),
                c(5),
                c(6),
                c(7),
            ));
        }
        write_file(&weather_path, &out).map_err(|e| io_err(&weather_path, e))?;
        Ok((load_path, weather_path))
    }
}

fn stamp(hour: i64) -> String {
    hour_start(hour).to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn write_file(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(contents.as_bytes())?;
    f.flush()
}

/// Independent generator per channel: reseeding one channel's formula
/// cannot shift any other channel.
fn stream(seed: u64, channel: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(channel + 1))
}

/// Stationary AR(1) path: `x_k = phi x_{k-1} + innovation`.
fn ar1(rng: &mut ChaCha8Rng, n: usize, phi: f64, stationary_sd: f64) -> Vec<f64> {
    let innovation = Normal::new(0.0, stationary_sd * (1.0 - phi * phi).sqrt()).unwrap();
    let start = Normal::new(0.0, stationary_sd).unwrap();
    let mut xs = Vec::with_capacity(n);
    let mut x = start.sample(rng);
    for _ in 0..n {
        xs.push(x);
        x = phi * x + innovation.sample(rng);
    }
    xs
}

/// Clear-sky solar shape on the local clock: half-sine between 07 and 17.
fn pv_shape(local_hour: i64) -> f64 {
    if (7..17).contains(&local_hour) {
        (std::f64::consts::PI * (local_hour - 7) as f64 / 10.0).sin()
    } else {
        0.0
    }
}

fn is_weekend(hour: i64) -> bool {
    matches!(
        hour_start(hour).weekday(),
        Weekday::Sat | Weekday::Sun
    )
}

/// Smooth multi-day heat events: `sin^2` envelopes with seeded placement.
fn heat_events(seed: u64, days: u32, n_hours: usize) -> Vec<f64> {
    let mut rng = stream(seed, 7);
    let mut bump = vec![0.0; n_hours];
    let n_events = (days / 45).max(1);
    let span_days = days / n_events;
    for k in 0..n_events {
        let latest_start = span_days.saturating_sub(6).max(1);
        let start_day = k * span_days + rng.random_range(0..latest_start);
        let duration_h = (72 + 24 * rng.random_range(0..3u32)) as usize;
        let amplitude = 9.0 + 6.0 * rng.random::<f64>();
        let start_h = start_day as usize * 24;
        for i in 0..duration_h {
            let t = start_h + i;
            if t >= n_hours {
                break;
            }
            let x = i as f64 / duration_h as f64;
            bump[t] += amplitude * (std::f64::consts::PI * x).sin().powi(2);
        }
    }
    bump
}

/// Generate one dataset. Per channel, for hour `t` with local clock `h`:
///
/// ```text
///     temp_t  = 18 + 6 sin(2 pi (h - 9) / 24) + AR(phi = 0.9, sd = 6)   [+ heat events]
///     load_t  = 2800 + 60 (temp_{t-3} - 18) - 400 pv(h)
///               - 170 [weekend] + N(0, 25)                              [+ 45 max(0, temp_{t-3} - 29)]
/// ```
///
/// so the entire temperature response — diurnal swing, weather noise, heat
/// events — acts through a 3 h lag.
pub fn generate(cfg: &SynthConfig) -> Result<SynthDataset, DataError> {
    let n = cfg.days as usize * 24;
    let lag = EMBEDDED_LAG_HOURS as usize;
    let hours: Vec<i64> = (cfg.start_hour..cfg.start_hour + n as i64).collect();

    // temperature from `lag` hours before the window so the first loads
    // have something to respond to
    let n_temp = n + lag;
    let temp_full: Vec<f64> = match cfg.profile {
        SynthProfile::Flat => vec![18.0; n_temp],
        SynthProfile::Duck | SynthProfile::Heatwave => {
            let mut rng = stream(cfg.seed, 0);
            let noise = ar1(&mut rng, n_temp, 0.9, 6.0);
            let events = if cfg.profile == SynthProfile::Heatwave {
                heat_events(cfg.seed, cfg.days, n_temp)
            } else {
                vec![0.0; n_temp]
            };
            (0..n_temp)
                .map(|i| {
                    let h = (cfg.start_hour - lag as i64 + i as i64).rem_euclid(24);
                    18.0 + 6.0 * (2.0 * std::f64::consts::PI * (h - 9) as f64 / 24.0).sin()
                        + noise[i]
                        + events[i]
                })
                .collect()
        }
    };
    let temp = &temp_full[lag..];

    let load_vals: Vec<f64> = match cfg.profile {
        SynthProfile::Flat => vec![2800.0; n],
        _ => {
            let mut rng = stream(cfg.seed, 1);
            let noise = Normal::new(0.0, 25.0).unwrap();
            (0..n)
                .map(|i| {
                    let t = hours[i];
                    let lagged = temp_full[i]; // temp at t - lag
                    let mut mw = 2800.0 + 60.0 * (lagged - 18.0)
                        - 400.0 * pv_shape(t.rem_euclid(24))
                        - if is_weekend(t) { 170.0 } else { 0.0 }
                        + noise.sample(&mut rng);
                    if cfg.profile == SynthProfile::Heatwave {
                        mw += 45.0 * (lagged - 29.0).max(0.0);
                    }
                    mw
                })
                .collect()
        }
    };

    // secondary channels: plausible, deterministic, never constant except
    // in the flat profile
    let (humidity, wind, wind_dir, cloud, pressure): (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) =
        match cfg.profile {
            SynthProfile::Flat => (
                vec![55.0; n],
                vec![4.0; n],
                vec![220.0; n],
                vec![2.0; n],
                vec![1013.0; n],
            ),
            _ => {
                let mut hum_rng = stream(cfg.seed, 3);
                let hum_noise = ar1(&mut hum_rng, n, 0.8, 4.0);
                let humidity = (0..n)
                    .map(|i| (55.0 - 1.8 * (temp[i] - 18.0) + hum_noise[i]).clamp(12.0, 100.0))
                    .collect();

                let mut wind_rng = stream(cfg.seed, 2);
                let wind = ar1(&mut wind_rng, n, 0.8, 1.5)
                    .into_iter()
                    .map(|w| (4.0 + w).max(0.0))
                    .collect();

                let mut dir_rng = stream(cfg.seed, 6);
                let mut dir = 220.0f64;
                let wind_dir = (0..n)
                    .map(|_| {
                        dir = (dir + dir_rng.random_range(-18.0..18.0)).rem_euclid(360.0);
                        dir
                    })
                    .collect();

                let mut cloud_rng = stream(cfg.seed, 4);
                let mut oktas = 2i32;
                let cloud = (0..n)
                    .map(|_| {
                        oktas = (oktas + cloud_rng.random_range(-1..=1)).clamp(0, 8);
                        f64::from(oktas)
                    })
                    .collect();

                let mut pres_rng = stream(cfg.seed, 5);
                let pressure = ar1(&mut pres_rng, n, 0.97, 4.0)
                    .into_iter()
                    .map(|p| 1013.0 + p)
                    .collect();

                (humidity, wind, wind_dir, cloud, pressure)
            }
        };

    let dewpoint: Vec<f64> = (0..n).map(|i| temp[i] - (100.0 - humidity[i]) / 5.0).collect();
    let ghi: Vec<f64> = (0..n)
        .map(|i| {
            let clear = 950.0 * pv_shape(hours[i].rem_euclid(24));
            (clear * (1.0 - 0.06 * cloud[i])).max(0.0)
        })
        .collect();

    let mk = |kind: ChannelKind, name: &str, values: Vec<f64>| {
        HourlySeries::new(kind, name, cfg.area.clone(), hours.clone(), values)
    };
    // file column order; write_csvs indexes this vec positionally
    let weather = vec![
        mk(ChannelKind::Temperature, "temp_c", temp.to_vec())?,
        mk(ChannelKind::Dewpoint, "dewpoint_c", dewpoint)?,
        mk(ChannelKind::Humidity, "humidity_pct", humidity)?,
        mk(ChannelKind::WindSpeed, "wind_ms", wind)?,
        mk(ChannelKind::WindDir, "wind_dir_deg", wind_dir)?,
        mk(ChannelKind::CloudCover, "cloud_oktas", cloud)?,
        mk(ChannelKind::Ghi, "ghi_wm2", ghi)?,
        mk(ChannelKind::Pressure, "pressure_hpa", pressure)?,
    ];
    let load = mk(ChannelKind::Load, "load_mw", load_vals)?;

    Ok(SynthDataset {
        cfg: cfg.clone(),
        load,
        weather,
    })
}
