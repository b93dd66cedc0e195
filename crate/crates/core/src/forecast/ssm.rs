//! Forward-only selective state-space cell.
//!
//! Continuous dynamics with diagonal state matrix `A` (entries < 0) are
//! discretized per step by zero-order hold:
//!
//! ```text
//! Abar = exp(delta * A)
//! Bbar = (delta A)^-1 (exp(delta A) - I) * delta B = (exp(delta a) - 1) / a * b
//! h_k  = Abar h_{k-1} + Bbar x_k,      y_k = C_k . h_k (+ D x_k)
//! ```
//!
//! Selectivity makes `B`, `C` and `delta` functions of the current input
//! through fixed affine maps, with `delta_k = softplus(s_delta(x_k)) > 0`.
//! With zero-slope maps the cell degenerates to an LTI system whose output
//! is the convolution of the input with the kernel `C Abar^{k-1} Bbar` —
//! the oracle the tests compare against.

use ndarray::{array, Array1};

use crate::features::Affine;

use super::ForecastError;

/// Zero-order-hold discretization of diagonal continuous dynamics.
///
/// Entries with `|delta * a_i| < 1e-8` take the series limit
/// `bbar_i = delta * b_i` to avoid catastrophic cancellation.
pub fn zoh_discretize(
    a: &Array1<f64>,
    b: &Array1<f64>,
    delta: f64,
) -> Result<(Array1<f64>, Array1<f64>), ForecastError> {
    if !(delta > 0.0) {
        return Err(ForecastError::NonPositiveStep(delta));
    }
    if a.len() != b.len() {
        return Err(ForecastError::BadConfig("A and B dimensions differ"));
    }
    let mut abar = Array1::zeros(a.len());
    let mut bbar = Array1::zeros(a.len());
    for i in 0..a.len() {
        let da = delta * a[i];
        abar[i] = da.exp();
        bbar[i] = if da.abs() < 1e-8 {
            delta * b[i]
        } else {
            (da.exp() - 1.0) / a[i] * b[i]
        };
    }
    Ok((abar, bbar))
}

fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else {
        z.exp().ln_1p()
    }
}

/// Diagonal selective SSM over a scalar input channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SsmCell {
    a: Array1<f64>,
    d: Option<f64>,
    s_b: Affine,
    s_c: Affine,
    s_delta: Affine,
}

impl SsmCell {
    /// `a` must be strictly negative elementwise; the selective maps take
    /// the scalar input to `B` (N), `C` (N) and the pre-softplus step (1).
    pub fn new(
        a: Array1<f64>,
        d: Option<f64>,
        s_b: Affine,
        s_c: Affine,
        s_delta: Affine,
    ) -> Result<Self, ForecastError> {
        if a.is_empty() {
            return Err(ForecastError::BadConfig("state dimension is zero"));
        }
        if a.iter().any(|&v| !(v < 0.0)) {
            return Err(ForecastError::BadConfig(
                "all diagonal entries of A must be strictly negative",
            ));
        }
        let n = a.len();
        let dims_ok = s_b.in_dim() == 1
            && s_c.in_dim() == 1
            && s_delta.in_dim() == 1
            && s_b.out_dim() == n
            && s_c.out_dim() == n
            && s_delta.out_dim() == 1;
        if !dims_ok {
            return Err(ForecastError::BadConfig(
                "selective maps must be 1 -> N, 1 -> N, 1 -> 1",
            ));
        }
        Ok(SsmCell {
            a,
            d,
            s_b,
            s_c,
            s_delta,
        })
    }

    /// LTI convenience constructor: constant `B`, `C`, `delta` regardless
    /// of the input (zero-slope selective maps).
    pub fn lti(
        a: Array1<f64>,
        b: Array1<f64>,
        c: Array1<f64>,
        d: Option<f64>,
        delta: f64,
    ) -> Result<Self, ForecastError> {
        if !(delta > 0.0) {
            return Err(ForecastError::NonPositiveStep(delta));
        }
        let n = a.len();
        if b.len() != n || c.len() != n {
            return Err(ForecastError::BadConfig("A, B, C dimensions differ"));
        }
        // softplus(z) = delta  =>  z = ln(e^delta - 1)
        let z = (delta.exp() - 1.0).ln();
        let zeros = ndarray::Array2::zeros((n, 1));
        let s_b = Affine::new(zeros.clone(), b).expect("shape by construction");
        let s_c = Affine::new(zeros, c).expect("shape by construction");
        let s_delta =
            Affine::new(ndarray::Array2::zeros((1, 1)), array![z]).expect("shape by construction");
        SsmCell::new(a, d, s_b, s_c, s_delta)
    }

    pub fn state_dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &Array1<f64> {
        &self.a
    }
}

/// Run the recurrence over `xs` from a zero state, emitting one output per
/// input.
pub fn selective_scan(cell: &SsmCell, xs: &[f64]) -> Result<Vec<f64>, ForecastError> {
    let mut h = Array1::zeros(cell.state_dim());
    let mut ys = Vec::with_capacity(xs.len());
    for (step, &x) in xs.iter().enumerate() {
        let xv = array![x];
        let b = cell.s_b.apply(xv.view())?;
        let c = cell.s_c.apply(xv.view())?;
        let delta = softplus(cell.s_delta.apply(xv.view())?[0]);
        let (abar, bbar) = zoh_discretize(&cell.a, &b, delta)?;
        h = &abar * &h + &bbar * x;
        if !h.iter().all(|v| v.is_finite()) {
            return Err(ForecastError::NonFiniteState { step });
        }
        let mut y = c.dot(&h);
        if let Some(d) = cell.d {
            y += d * x;
        }
        ys.push(y);
    }
    Ok(ys)
}
