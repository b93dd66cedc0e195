use ndarray::{Array1, Array2, ArrayView2};

/// Column-wise standardizer fitted on training rows.
///
/// Constant columns are centered but their scale is clamped to 1 so the
/// transform stays invertible; a constant feature is legitimate here (flat
/// synthetic weather, an all-night gate) and simply carries no signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureScaler {
    mean: Array1<f64>,
    std: Array1<f64>,
}

impl FeatureScaler {
    pub fn fit(rows: ArrayView2<'_, f64>) -> FeatureScaler {
        let n = rows.nrows() as f64;
        let mean = rows.sum_axis(ndarray::Axis(0)) / n;
        let mut std = Array1::zeros(rows.ncols());
        for c in 0..rows.ncols() {
            let var = rows
                .column(c)
                .iter()
                .map(|v| (v - mean[c]) * (v - mean[c]))
                .sum::<f64>()
                / n;
            let s = var.sqrt();
            std[c] = if s < 1e-12 { 1.0 } else { s };
        }
        FeatureScaler { mean, std }
    }

    pub fn transform(&self, rows: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = rows.to_owned();
        for c in 0..out.ncols() {
            out.column_mut(c).mapv_inplace(|v| (v - self.mean[c]) / self.std[c]);
        }
        out
    }

    pub fn mean(&self) -> &Array1<f64> {
        &self.mean
    }

    pub fn std(&self) -> &Array1<f64> {
        &self.std
    }
}

/// Scalar standardizer for the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetScaler {
    pub mean: f64,
    pub std: f64,
}

impl TargetScaler {
    pub fn fit(values: &Array1<f64>) -> TargetScaler {
        let n = values.len() as f64;
        let mean = values.sum() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let s = var.sqrt();
        TargetScaler {
            mean,
            std: if s < 1e-12 { 1.0 } else { s },
        }
    }

    pub fn scale(&self, y: f64) -> f64 {
        (y - self.mean) / self.std
    }

    pub fn unscale(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn standardizes_and_clamps_constant_columns() {
        let rows = array![[1.0, 7.0], [3.0, 7.0]];
        let scaler = FeatureScaler::fit(rows.view());
        assert_relative_eq!(scaler.mean()[0], 2.0);
        assert_relative_eq!(scaler.std()[0], 1.0); // population std of {1,3}
        assert_relative_eq!(scaler.std()[1], 1.0); // clamped
        let z = scaler.transform(rows.view());
        assert_relative_eq!(z[[0, 0]], -1.0);
        assert_relative_eq!(z[[1, 0]], 1.0);
        assert_relative_eq!(z[[0, 1]], 0.0);
    }

    #[test]
    fn target_scaler_round_trips() {
        let y = array![100.0, 220.0, 160.0, 90.0];
        let s = TargetScaler::fit(&y);
        for &v in y.iter() {
            assert_relative_eq!(s.unscale(s.scale(v)), v, epsilon = 1e-10);
        }
    }
}
