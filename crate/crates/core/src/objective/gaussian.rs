use super::ObjectiveError;

/// Per-point Gaussian negative log-likelihood, dropping the `ln(2*pi)/2`
/// constant:
///
/// ```text
/// nll = 0.5 * (ln var + (y - mu)^2 / var)
/// ```
pub fn gaussian_nll(y: f64, mu: f64, var: f64) -> Result<f64, ObjectiveError> {
    if !(var > 0.0) {
        return Err(ObjectiveError::NonPositiveVariance(var));
    }
    if !y.is_finite() || !mu.is_finite() || !var.is_finite() {
        return Err(ObjectiveError::NonFinite("gaussian nll input"));
    }
    let r = y - mu;
    Ok(0.5 * (var.ln() + r * r / var))
}

/// NLL together with its partials `(nll, d/dmu, d/dvar)`.
pub fn gaussian_nll_grad(y: f64, mu: f64, var: f64) -> Result<(f64, f64, f64), ObjectiveError> {
    let nll = gaussian_nll(y, mu, var)?;
    let r = y - mu;
    let d_mu = (mu - y) / var;
    let d_var = 0.5 * (1.0 / var - r * r / (var * var));
    Ok((nll, d_mu, d_var))
}
