use ndarray::Array2;

use crate::data::{AlignedFrame, ChannelKind, HourRange};

use super::{ForecastError, Forecaster};

/// Weekly seasonal-naive baseline: the forecast for `t + h` is the load one
/// week (or the fewest whole weeks needed to stay in history) earlier.
#[derive(Debug, Clone)]
pub struct SeasonalNaive {
    period_hours: i64,
    levels: [f64; 1],
}

impl SeasonalNaive {
    pub fn new() -> Self {
        Self::with_period(168)
    }

    /// Same repeat-last-cycle rule with a custom season length.
    pub fn with_period(period_hours: u32) -> Self {
        SeasonalNaive {
            period_hours: i64::from(period_hours.max(1)),
            levels: [0.5],
        }
    }
}

impl Default for SeasonalNaive {
    fn default() -> Self {
        Self::new()
    }
}

impl Forecaster for SeasonalNaive {
    fn levels(&self) -> &[f64] {
        &self.levels
    }

    fn fit(
        &mut self,
        frame: &AlignedFrame,
        _train: HourRange,
        _val: HourRange,
    ) -> Result<(), ForecastError> {
        frame
            .kind_index(ChannelKind::Load)
            .map(|_| ())
            .ok_or(ForecastError::DegenerateDesign("frame has no load channel"))
    }

    fn predict(
        &self,
        frame: &AlignedFrame,
        issue: i64,
        leads: &[u32],
    ) -> Result<Array2<f64>, ForecastError> {
        let load_idx = frame
            .kind_index(ChannelKind::Load)
            .ok_or(ForecastError::DegenerateDesign("frame has no load channel"))?;
        let mut out = Array2::zeros((leads.len(), 1));
        for (r, &lead) in leads.iter().enumerate() {
            let mut reference = issue + lead as i64 - self.period_hours;
            while reference > issue {
                reference -= self.period_hours;
            }
            out[[r, 0]] = frame
                .get(load_idx, reference)
                .ok_or(ForecastError::InsufficientHistory {
                    issue,
                    hour: reference,
                })?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{align, AlignPolicy, HourlySeries};
    use approx::assert_relative_eq;

    fn weekly_frame(n: i64) -> AlignedFrame {
        let hours: Vec<i64> = (0..n).collect();
        let load: Vec<f64> = hours.iter().map(|&h| 900.0 + (h % 168) as f64).collect();
        let series = vec![
            HourlySeries::new(ChannelKind::Load, "load_mw", "TEST", hours, load).unwrap(),
        ];
        align(&series, AlignPolicy::Intersection).unwrap()
    }

    #[test]
    fn weekly_periodic_load_is_predicted_exactly() {
        let frame = weekly_frame(600);
        let model = SeasonalNaive::new();
        let leads: Vec<u32> = (1..=48).collect();
        let issue = 500;
        let pred = model.predict(&frame, issue, &leads).unwrap();
        for (r, &lead) in leads.iter().enumerate() {
            let truth = 900.0 + ((issue + lead as i64) % 168) as f64;
            assert_relative_eq!(pred[[r, 0]], truth);
        }
    }

    #[test]
    fn missing_reference_hour_is_an_error() {
        let frame = weekly_frame(200);
        let model = SeasonalNaive::new();
        // issue 100, lead 48: reference = 100 + 48 - 168 = -20, not in frame
        let err = model.predict(&frame, 100, &[48]).unwrap_err();
        assert_eq!(
            err,
            ForecastError::InsufficientHistory {
                issue: 100,
                hour: -20
            }
        );
    }

    #[test]
    fn constant_load_forecasts_the_constant() {
        let hours: Vec<i64> = (0..400).collect();
        let series = vec![HourlySeries::new(
            ChannelKind::Load,
            "load_mw",
            "TEST",
            hours,
            vec![1234.0; 400],
        )
        .unwrap()];
        let frame = align(&series, AlignPolicy::Intersection).unwrap();
        let pred = SeasonalNaive::new().predict(&frame, 350, &[1, 24, 48]).unwrap();
        for r in 0..3 {
            assert_relative_eq!(pred[[r, 0]], 1234.0);
        }
    }
}
