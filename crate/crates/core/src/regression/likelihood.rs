use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distributions::sltb::{ScaleLocation, DEFAULT_LOCATION, DEFAULT_SCALE};
use crate::error::{Error, Result};
use crate::numeric::special::{inv_logit, ln_gamma};

/// Response distribution for the mean-precision regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Beta,
    Sltb { s: f64, l: f64 },
}

impl Default for Family {
    fn default() -> Self {
        Family::Sltb {
            s: DEFAULT_SCALE,
            l: DEFAULT_LOCATION,
        }
    }
}

impl Family {
    pub fn sltb(s: f64, l: f64) -> Result<Self> {
        ScaleLocation::new(s, l)?;
        Ok(Family::Sltb { s, l })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Beta => "beta",
            Family::Sltb { .. } => "sltb",
        }
    }

    pub fn scale_location(&self) -> Option<ScaleLocation> {
        match *self {
            Family::Beta => None,
            Family::Sltb { s, l } => Some(ScaleLocation { s, l }),
        }
    }

    /// Mean of the response law with location parameter `mu`.
    pub fn response_mean(&self, mu: f64) -> f64 {
        match *self {
            Family::Beta => mu,
            Family::Sltb { s, l } => (s * (mu - l)).clamp(0.0, 1.0),
        }
    }
}

/// `ln f(y; μ, φ)` for the plain beta law, without argument checks.
#[inline]
pub(crate) fn beta_ln_pdf(y: f64, mu: f64, phi: f64) -> f64 {
    let a = mu * phi;
    let b = (1.0 - mu) * phi;
    ln_gamma(phi) - ln_gamma(a) - ln_gamma(b) + (a - 1.0) * y.ln() + (b - 1.0) * (-y).ln_1p()
}

fn split_theta<'a>(theta: &'a [f64], x: &DMatrix<f64>) -> Result<(&'a [f64], f64)> {
    if theta.len() != x.ncols() + 1 {
        return Err(Error::validation(format!(
            "parameter vector has length {}, expected {} coefficients plus log-precision",
            theta.len(),
            x.ncols()
        )));
    }
    let (beta, eta) = theta.split_at(x.ncols());
    Ok((beta, eta[0]))
}

pub(crate) fn linear_predictor(x: &DMatrix<f64>, beta: &[f64]) -> DVector<f64> {
    x * DVector::from_column_slice(beta)
}

/// Rows whose response sits exactly on 0 or 1.
pub fn boundary_rows(y: &[f64]) -> Vec<usize> {
    y.iter()
        .enumerate()
        .filter(|(_, &v)| v == 0.0 || v == 1.0)
        .map(|(i, _)| i + 1)
        .collect()
}

fn describe_rows(rows: &[usize]) -> String {
    let shown: Vec<String> = rows.iter().take(10).map(usize::to_string).collect();
    let more = if rows.len() > 10 { format!(" and {} more", rows.len() - 10) } else { String::new() };
    format!("{} rows at 0 or 1: {}{more}", rows.len(), shown.join(", "))
}

/// Sum of per-row log-densities; `θ = [β…, η]` with `φ = exp(η)`.
pub fn loglik(family: Family, theta: &[f64], x: &DMatrix<f64>, y: &[f64]) -> Result<f64> {
    if x.nrows() != y.len() {
        return Err(Error::validation("design rows and response length differ"));
    }
    let (beta, eta) = split_theta(theta, x)?;
    match family {
        Family::Beta => {
            let rows = boundary_rows(y);
            if !rows.is_empty() {
                return Err(Error::Boundary(describe_rows(&rows)));
            }
            if let Some(i) = y.iter().position(|v| !(*v > 0.0 && *v < 1.0)) {
                return Err(Error::domain(format!("response row {} = {} outside (0, 1)", i + 1, y[i])));
            }
        }
        Family::Sltb { s, l } => {
            ScaleLocation::new(s, l)?;
            if let Some(i) = y.iter().position(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::domain(format!("response row {} = {} outside [0, 1]", i + 1, y[i])));
            }
            let sl = ScaleLocation { s, l };
            if !sl.has_finite_boundaries() {
                let rows = boundary_rows(y);
                if !rows.is_empty() {
                    return Err(Error::Boundary(describe_rows(&rows)));
                }
            }
        }
    }
    if !eta.is_finite() {
        return Err(Error::non_finite("log-precision"));
    }
    let lp = linear_predictor(x, beta);
    if let Some(i) = lp.iter().position(|v| !v.is_finite()) {
        return Err(Error::non_finite(format!("linear predictor at row {}", i + 1)));
    }
    let total = sum_rows(family, &lp, eta, y);
    if total.is_finite() {
        Ok(total)
    } else {
        let phi = eta.exp();
        let row = lp
            .iter()
            .zip(y)
            .position(|(&e, &yi)| !row_ln_pdf(family, yi, inv_logit(e), phi).is_finite())
            .map_or(0, |i| i + 1);
        Err(Error::non_finite(format!("log-likelihood at row {row}")))
    }
}

#[inline]
fn row_ln_pdf(family: Family, y: f64, mu: f64, phi: f64) -> f64 {
    match family {
        Family::Beta => beta_ln_pdf(y, mu, phi),
        Family::Sltb { s, l } => ScaleLocation { s, l }.ln_pdf(y, mu, phi),
    }
}

fn sum_rows(family: Family, lp: &DVector<f64>, eta: f64, y: &[f64]) -> f64 {
    let phi = eta.exp();
    lp.iter().zip(y).map(|(&e, &yi)| row_ln_pdf(family, yi, inv_logit(e), phi)).sum()
}

/// Negative log-likelihood for optimizers: +∞ wherever it is undefined.
pub(crate) fn objective(family: Family, theta: &[f64], x: &DMatrix<f64>, y: &[f64]) -> f64 {
    let (beta, eta) = theta.split_at(x.ncols());
    let eta = eta[0];
    let mu_clip = |e: f64| {
        let m = inv_logit(e);
        m > 0.0 && m < 1.0
    };
    let lp = linear_predictor(x, beta);
    if !eta.is_finite() || eta.abs() > 700.0 || !lp.iter().all(|&e| mu_clip(e)) {
        return f64::INFINITY;
    }
    let v = -sum_rows(family, &lp, eta, y);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

pub fn loglik_beta(theta: &[f64], x: &DMatrix<f64>, y: &[f64]) -> Result<f64> {
    loglik(Family::Beta, theta, x, y)
}

pub fn loglik_sltb(theta: &[f64], x: &DMatrix<f64>, y: &[f64], s: f64, l: f64) -> Result<f64> {
    loglik(Family::Sltb { s, l }, theta, x, y)
}
