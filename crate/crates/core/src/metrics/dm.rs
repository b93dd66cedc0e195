//! Diebold-Mariano test for equal predictive accuracy.
//!
//! For forecast errors `e_a` and `e_b` at horizon `h`, the squared-error
//! loss differential is `d_t = e_a(t)^2 - e_b(t)^2` and the statistic is
//!
//! ```text
//! DM = mean(d) / sqrt(V / n)
//! V  = g_0 + 2 * sum_{k=1}^{h-1} (1 - k/h) * g_k      (Bartlett kernel)
//! g_k = (1/n) * sum_{t=k}^{n-1} (d_t - mean(d)) (d_{t-k} - mean(d))
//! ```
//!
//! i.e. a Newey-West long-run variance with bandwidth `h - 1`, which is the
//! classic correction for the serial correlation that multi-step forecast
//! errors carry by construction. The reference distribution is standard
//! normal, two-sided.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::MetricsError;

/// Outcome of a Diebold-Mariano comparison.
///
/// Negative statistics favor the first forecast (smaller squared errors).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub horizon: u32,
}

/// Compare two error series at horizon `h` under squared-error loss.
///
/// Identical series return statistic 0 with p-value 1. A differential with
/// (numerically) zero variance but nonzero mean has no finite statistic and
/// errors instead of reporting spurious certainty.
pub fn dm_test(errors_a: &[f64], errors_b: &[f64], h: u32) -> Result<DmResult, MetricsError> {
    if errors_a.len() != errors_b.len() {
        return Err(MetricsError::LengthMismatch {
            left: errors_a.len(),
            right: errors_b.len(),
        });
    }
    let n = errors_a.len();
    if h == 0 || n <= h as usize {
        return Err(MetricsError::DmTooShort { n, h });
    }
    if errors_a.iter().chain(errors_b).any(|e| !e.is_finite()) {
        return Err(MetricsError::NonFinite("forecast errors"));
    }

    let d: Vec<f64> = errors_a
        .iter()
        .zip(errors_b)
        .map(|(a, b)| a * a - b * b)
        .collect();
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    // Bartlett-weighted long-run variance of d.
    let mut v = 0.0;
    for k in 0..h as usize {
        let mut gamma = 0.0;
        for t in k..n {
            gamma += (d[t] - mean) * (d[t - k] - mean);
        }
        gamma /= nf;
        if k == 0 {
            v += gamma;
        } else {
            v += 2.0 * (1.0 - k as f64 / f64::from(h)) * gamma;
        }
    }

    if scale == 0.0 {
        // both forecasts made literally the same squared errors
        return Ok(DmResult {
            statistic: 0.0,
            p_value: 1.0,
            n,
            horizon: h,
        });
    }
    if v <= scale * scale * 1e-20 {
        // constant nonzero differential: variance estimate is zero and the
        // statistic would be infinite
        return Err(MetricsError::DegenerateDifferential);
    }

    let statistic = mean / (v / nf).sqrt();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let p_value = 2.0 * (1.0 - normal.cdf(statistic.abs()));
    Ok(DmResult {
        statistic,
        p_value,
        n,
        horizon: h,
    })
}
