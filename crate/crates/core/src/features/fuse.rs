//! Behind-the-meter registry fusion with a daylight prior.
//!
//! Static PV registry attributes (capacity, tilt, azimuth, ...) only move
//! net load while the sun is up. The fusion embeds the registry vector,
//! modulates it with context-conditioned FiLM parameters, gates it by
//! daylight, and adds it to the input embedding:
//!
//! ```text
//! b_emb = phi(b)
//! (gamma, beta) = g(c)
//! z = x + d * (gamma .* b_emb + beta),   d in [0, 1]
//! ```
//!
//! With `d = 0` at night the registry contributes nothing, which keeps PV
//! capacity from "explaining" nighttime net load.

use chrono_tz::Tz;
use ndarray::{Array1, Array2, ArrayView1};

use super::FeaturesError;
use crate::data::hour_start;
use chrono::Timelike;

/// Dense affine map `y = W x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    weight: Array2<f64>,
    bias: Array1<f64>,
}

impl Affine {
    pub fn new(weight: Array2<f64>, bias: Array1<f64>) -> Result<Self, FeaturesError> {
        if weight.nrows() != bias.len() {
            return Err(FeaturesError::DimensionMismatch {
                expected: weight.nrows(),
                got: bias.len(),
            });
        }
        Ok(Self { weight, bias })
    }

    /// Identity map of the given size.
    pub fn identity(dim: usize) -> Self {
        Self {
            weight: Array2::eye(dim),
            bias: Array1::zeros(dim),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn apply(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>, FeaturesError> {
        if x.len() != self.in_dim() {
            return Err(FeaturesError::DimensionMismatch {
                expected: self.in_dim(),
                got: x.len(),
            });
        }
        Ok(self.weight.dot(&x) + &self.bias)
    }
}

/// Fixed fusion maps: `phi` embeds the registry vector, `g` maps context to
/// the stacked FiLM parameters `(gamma, beta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BtmFusion {
    phi: Affine,
    g: Affine,
}

impl BtmFusion {
    pub fn new(phi: Affine, g: Affine) -> Result<Self, FeaturesError> {
        if g.out_dim() != 2 * phi.out_dim() {
            return Err(FeaturesError::DimensionMismatch {
                expected: 2 * phi.out_dim(),
                got: g.out_dim(),
            });
        }
        Ok(Self { phi, g })
    }

    pub fn embed_dim(&self) -> usize {
        self.phi.out_dim()
    }

    /// Fuse one timestep. `x` must match the embedding width.
    pub fn fuse(
        &self,
        x: ArrayView1<'_, f64>,
        b: ArrayView1<'_, f64>,
        c: ArrayView1<'_, f64>,
        d: f64,
    ) -> Result<Array1<f64>, FeaturesError> {
        btm_fuse(&self.phi, &self.g, x, b, c, d)
    }
}

/// Functional form of the fusion; see the module doc for the math.
pub fn btm_fuse(
    phi: &Affine,
    g: &Affine,
    x: ArrayView1<'_, f64>,
    b: ArrayView1<'_, f64>,
    c: ArrayView1<'_, f64>,
    d: f64,
) -> Result<Array1<f64>, FeaturesError> {
    if !(0.0..=1.0).contains(&d) {
        return Err(FeaturesError::GateOutOfRange(d));
    }
    let b_emb = phi.apply(b)?;
    let dim = b_emb.len();
    if x.len() != dim {
        return Err(FeaturesError::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    let film = g.apply(c)?;
    let gamma = film.slice(ndarray::s![..dim]);
    let beta = film.slice(ndarray::s![dim..]);
    let b_mod = (&gamma * &b_emb + beta) * d;
    Ok(&x + &b_mod)
}

/// Smooth daylight gate: exactly 0 at night, exactly 1 in full day, with a
/// smoothstep ramp of `transition_hours` centered on sunrise and sunset
/// (local clock hours).
#[derive(Debug, Clone, PartialEq)]
pub struct DaylightGate {
    pub sunrise: f64,
    pub sunset: f64,
    pub transition_hours: f64,
    pub tz: Tz,
}

impl DaylightGate {
    pub fn new(sunrise: f64, sunset: f64, transition_hours: f64, tz: Tz) -> Result<Self, FeaturesError> {
        if !(0.0..24.0).contains(&sunrise)
            || !(0.0..24.0).contains(&sunset)
            || sunrise >= sunset
            || transition_hours <= 0.0
            || sunset - sunrise <= transition_hours
        {
            return Err(FeaturesError::BadConfig(
                "need 0 <= sunrise < sunset < 24 with a transition shorter than the day",
            ));
        }
        Ok(Self {
            sunrise,
            sunset,
            transition_hours,
            tz,
        })
    }

    /// Gate value for a local clock time in fractional hours.
    pub fn at_local_hour(&self, hour: f64) -> f64 {
        let half = self.transition_hours / 2.0;
        let up = smoothstep((hour - (self.sunrise - half)) / self.transition_hours);
        let down = smoothstep((hour - (self.sunset - half)) / self.transition_hours);
        up - down
    }

    /// Gate value for a grid hour index, using the configured timezone.
    pub fn at_hour(&self, hour: i64) -> f64 {
        let local = hour_start(hour).with_timezone(&self.tz);
        let clock =
            local.hour() as f64 + local.minute() as f64 / 60.0 + local.second() as f64 / 3600.0;
        self.at_local_hour(clock)
    }
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}
