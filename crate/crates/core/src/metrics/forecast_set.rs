use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Quantile predictions for a batch of issue times, with realized actuals.
///
/// Storage is dense: `predictions[i][h][l]` is the level-`l` quantile issued
/// at `issue_hours[i]` for target time `issue + lead_hours[h]`, flattened
/// row-major; `actuals[i][h]` is what the load turned out to be. Construction
/// enforces the evaluation contract — strictly increasing levels containing
/// the median, strictly increasing leads and issues, finite values, and
/// non-crossing quantiles — so scoring code can index without re-checking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileForecastSet {
    levels: Vec<f64>,
    lead_hours: Vec<u32>,
    issue_hours: Vec<i64>,
    predictions: Vec<f64>,
    actuals: Vec<f64>,
}

impl QuantileForecastSet {
    pub fn new(
        levels: Vec<f64>,
        lead_hours: Vec<u32>,
        issue_hours: Vec<i64>,
        predictions: Vec<f64>,
        actuals: Vec<f64>,
    ) -> Result<Self, MetricsError> {
        if levels.is_empty() {
            return Err(MetricsError::BadLevels("no levels".to_string()));
        }
        if levels.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
            return Err(MetricsError::BadLevels(
                "levels must lie strictly inside (0, 1)".to_string(),
            ));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MetricsError::BadLevels(
                "levels must be strictly increasing".to_string(),
            ));
        }
        if !levels.contains(&0.5) {
            return Err(MetricsError::MissingMedian);
        }
        if lead_hours.is_empty() || lead_hours[0] == 0 {
            return Err(MetricsError::BadLeads(
                "leads must be nonempty and start at 1 or later".to_string(),
            ));
        }
        if lead_hours.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MetricsError::BadLeads(
                "leads must be strictly increasing".to_string(),
            ));
        }
        if issue_hours.is_empty() {
            return Err(MetricsError::Empty);
        }
        if issue_hours.windows(2).any(|w| w[1] <= w[0]) {
            return Err(MetricsError::BadIssues);
        }
        let (ni, nh, nl) = (issue_hours.len(), lead_hours.len(), levels.len());
        if predictions.len() != ni * nh * nl {
            return Err(MetricsError::BadShape(format!(
                "predictions: expected {} values, got {}",
                ni * nh * nl,
                predictions.len()
            )));
        }
        if actuals.len() != ni * nh {
            return Err(MetricsError::BadShape(format!(
                "actuals: expected {} values, got {}",
                ni * nh,
                actuals.len()
            )));
        }
        if predictions.iter().any(|v| !v.is_finite()) {
            return Err(MetricsError::NonFinite("predictions"));
        }
        if actuals.iter().any(|v| !v.is_finite()) {
            return Err(MetricsError::NonFinite("actuals"));
        }
        for i in 0..ni {
            for h in 0..nh {
                let base = (i * nh + h) * nl;
                for l in 1..nl {
                    if predictions[base + l] < predictions[base + l - 1] {
                        return Err(MetricsError::Crossing { issue: i, lead: h });
                    }
                }
            }
        }
        Ok(Self {
            levels,
            lead_hours,
            issue_hours,
            predictions,
            actuals,
        })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn lead_hours(&self) -> &[u32] {
        &self.lead_hours
    }

    pub fn issue_hours(&self) -> &[i64] {
        &self.issue_hours
    }

    pub fn n_issues(&self) -> usize {
        self.issue_hours.len()
    }

    /// Index of the 0.5 level (guaranteed present).
    pub fn median_index(&self) -> usize {
        self.levels.iter().position(|&q| q == 0.5).unwrap()
    }

    pub fn lead_index(&self, lead: u32) -> Result<usize, MetricsError> {
        self.lead_hours
            .iter()
            .position(|&h| h == lead)
            .ok_or(MetricsError::MissingLead(lead))
    }

    pub fn prediction(&self, issue: usize, lead: usize, level: usize) -> f64 {
        self.predictions[(issue * self.lead_hours.len() + lead) * self.levels.len() + level]
    }

    pub fn actual(&self, issue: usize, lead: usize) -> f64 {
        self.actuals[issue * self.lead_hours.len() + lead]
    }

    /// `(actuals, medians)` pooled over the given lead hours, issue-major.
    pub fn pooled_points(&self, leads: &[u32]) -> Result<(Vec<f64>, Vec<f64>), MetricsError> {
        let med = self.median_index();
        let idx: Vec<usize> = leads
            .iter()
            .map(|&h| self.lead_index(h))
            .collect::<Result<_, _>>()?;
        let mut actuals = Vec::with_capacity(self.n_issues() * idx.len());
        let mut medians = Vec::with_capacity(self.n_issues() * idx.len());
        for i in 0..self.n_issues() {
            for &h in &idx {
                actuals.push(self.actual(i, h));
                medians.push(self.prediction(i, h, med));
            }
        }
        Ok((actuals, medians))
    }

    /// Raw prediction storage, `[issue][lead][level]` row-major.
    pub fn predictions_flat(&self) -> &[f64] {
        &self.predictions
    }

    /// Raw actuals storage, `[issue][lead]` row-major.
    pub fn actuals_flat(&self) -> &[f64] {
        &self.actuals
    }

    /// Median-forecast errors `actual - median` at one lead, issue-ordered.
    pub fn lead_errors(&self, lead: u32) -> Result<Vec<f64>, MetricsError> {
        let h = self.lead_index(lead)?;
        let med = self.median_index();
        Ok((0..self.n_issues())
            .map(|i| self.actual(i, h) - self.prediction(i, h, med))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_set() -> QuantileForecastSet {
        QuantileForecastSet::new(
            vec![0.1, 0.5, 0.9],
            vec![1, 24],
            vec![100, 200],
            vec![
                // issue 100, lead 1: (9, 10, 11); lead 24: (18, 20, 22)
                9.0, 10.0, 11.0, 18.0, 20.0, 22.0,
                // issue 200
                8.0, 9.0, 10.0, 19.0, 21.0, 23.0,
            ],
            vec![10.5, 21.0, 8.5, 20.0],
        )
        .unwrap()
    }

    #[test]
    fn indexing_is_row_major() {
        let fs = small_set();
        assert_eq!(fs.prediction(0, 1, 2), 22.0);
        assert_eq!(fs.prediction(1, 0, 0), 8.0);
        assert_eq!(fs.actual(1, 1), 20.0);
        assert_eq!(fs.median_index(), 1);
    }

    #[test]
    fn crossing_is_rejected() {
        let err = QuantileForecastSet::new(
            vec![0.1, 0.5, 0.9],
            vec![1],
            vec![0],
            vec![1.0, 0.9, 1.2], // 0.5-level below 0.1-level
            vec![1.0],
        );
        assert_eq!(err.unwrap_err(), MetricsError::Crossing { issue: 0, lead: 0 });
    }

    #[test]
    fn median_level_is_required() {
        let err = QuantileForecastSet::new(
            vec![0.1, 0.9],
            vec![1],
            vec![0],
            vec![1.0, 2.0],
            vec![1.0],
        );
        assert_eq!(err.unwrap_err(), MetricsError::MissingMedian);
    }

    #[test]
    fn lead_errors_are_actual_minus_median() {
        let fs = small_set();
        let e = fs.lead_errors(24).unwrap();
        assert_eq!(e, vec![1.0, -1.0]);
        assert_eq!(fs.lead_errors(7), Err(MetricsError::MissingLead(7)));
    }

    #[test]
    fn pooled_points_walk_issue_major() {
        let fs = small_set();
        let (a, m) = fs.pooled_points(&[1, 24]).unwrap();
        assert_eq!(a, vec![10.5, 21.0, 8.5, 20.0]);
        assert_eq!(m, vec![10.0, 20.0, 9.0, 21.0]);
    }
}
