use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Percentile by sorted linear interpolation.
///
/// The sorted sample is treated as knots at fractional index
/// `(n - 1) * p / 100`; values between knots interpolate linearly. A single
/// observation returns itself for every `p`.
pub fn percentile(values: &[f64], p: f64) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty);
    }
    if !p.is_finite() || !(0.0..=100.0).contains(&p) {
        return Err(MetricsError::BadPercentile(p));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite("percentile input"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let idx = (sorted.len() - 1) as f64 * p / 100.0;
    let lo = idx.floor() as usize;
    let hi = idx.ceil() as usize;
    let frac = idx - lo as f64;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

/// Denominate the reserve in MW or in percent of the point forecast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReserveBasis {
    Mw,
    Pct,
}

/// Reserve requirement: the `p`-th percentile of clipped under-forecast
/// errors `max(0, actual - forecast)`, either in MW or as a percent of the
/// forecast. Over-forecast hours contribute zeros rather than being dropped,
/// so a forecast that never under-predicts yields exactly 0.
pub fn reserve(
    actual: &[f64],
    forecast: &[f64],
    p: f64,
    basis: ReserveBasis,
) -> Result<f64, MetricsError> {
    if actual.len() != forecast.len() {
        return Err(MetricsError::LengthMismatch {
            left: actual.len(),
            right: forecast.len(),
        });
    }
    let shortfalls: Vec<f64> = match basis {
        ReserveBasis::Mw => actual
            .iter()
            .zip(forecast)
            .map(|(y, f)| (y - f).max(0.0))
            .collect(),
        ReserveBasis::Pct => actual
            .iter()
            .zip(forecast)
            .enumerate()
            .map(|(i, (y, f))| {
                if *f <= 0.0 {
                    Err(MetricsError::NonPositiveForecast { index: i, value: *f })
                } else {
                    Ok(((y - f) / f).max(0.0) * 100.0)
                }
            })
            .collect::<Result<_, _>>()?,
    };
    percentile(&shortfalls, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interpolation_convention_fixture() {
        // 1..=100: index (100-1) * 99.5 / 100 = 98.505
        // -> sorted[98] + 0.505 * (sorted[99] - sorted[98]) = 99 + 0.505
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_relative_eq!(percentile(&v, 99.5).unwrap(), 99.505);
        assert_relative_eq!(percentile(&v, 0.0).unwrap(), 1.0);
        assert_relative_eq!(percentile(&v, 100.0).unwrap(), 100.0);
    }

    #[test]
    fn single_value_is_every_percentile() {
        assert_relative_eq!(percentile(&[42.0], 0.0).unwrap(), 42.0);
        assert_relative_eq!(percentile(&[42.0], 37.0).unwrap(), 42.0);
        assert_relative_eq!(percentile(&[42.0], 100.0).unwrap(), 42.0);
    }

    #[test]
    fn out_of_range_p_is_rejected() {
        assert_eq!(
            percentile(&[1.0], 100.5),
            Err(MetricsError::BadPercentile(100.5))
        );
        assert_eq!(
            percentile(&[1.0], -0.1),
            Err(MetricsError::BadPercentile(-0.1))
        );
    }

    #[test]
    fn reserve_is_zero_when_never_under() {
        let actual = [90.0, 95.0, 100.0];
        let forecast = [100.0, 100.0, 100.0];
        assert_relative_eq!(
            reserve(&actual, &forecast, 99.5, ReserveBasis::Mw).unwrap(),
            0.0
        );
    }

    #[test]
    fn reserve_ascending_under_errors() {
        // under-errors 1..=1000 MW: percentile index 999 * 0.995 = 994.005
        // -> 995 + 0.005 * 1 = 995.005
        let actual: Vec<f64> = (1..=1000).map(|k| 1000.0 + k as f64).collect();
        let forecast = vec![1000.0; 1000];
        assert_relative_eq!(
            reserve(&actual, &forecast, 99.5, ReserveBasis::Mw).unwrap(),
            995.005
        );
    }

    #[test]
    fn pct_basis_requires_positive_forecast() {
        let err = reserve(&[1.0], &[0.0], 99.5, ReserveBasis::Pct);
        assert_eq!(
            err,
            Err(MetricsError::NonPositiveForecast { index: 0, value: 0.0 })
        );
        // 10% shortfall against the forecast
        let v = reserve(&[110.0], &[100.0], 50.0, ReserveBasis::Pct).unwrap();
        assert_relative_eq!(v, 10.0);
    }
}
