use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::design::{build_design, Design};
use super::likelihood::{loglik, objective, Family};
use super::spec::RegressionSpec;
use crate::data::TabularDataset;
use crate::distributions::sltb::DEFAULT_LOCATION;
use crate::error::{Error, Result};
use crate::numeric::diff::numeric_hessian;
use crate::numeric::optimize::{minimize, OptimOptions};
use crate::numeric::special::{logit, std_normal_cdf};

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub family: Family,
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    /// `η̂ = ln φ̂`.
    pub log_precision: f64,
    pub log_precision_se: f64,
    pub loglik: f64,
    /// Covariance of `(β̂, η̂)` from the observed information.
    pub vcov: Vec<Vec<f64>>,
    pub se: Vec<f64>,
    pub z: Vec<f64>,
    pub p: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub n: usize,
    #[serde(skip)]
    pub trace: Vec<f64>,
}

impl FitResult {
    pub fn precision(&self) -> f64 {
        self.log_precision.exp()
    }

    pub fn theta(&self) -> Vec<f64> {
        let mut t = self.coefficients.clone();
        t.push(self.log_precision);
        t
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.coefficients[i])
    }
}

/// OLS of `logit(y)` with `y` clamped into `[l, 1 − l]`; `η = ln 10`.
pub fn starting_values(design: &Design, y: &[f64], family: Family) -> Result<Vec<f64>> {
    let l = match family {
        Family::Sltb { l, .. } if l > 0.0 => l,
        _ => DEFAULT_LOCATION,
    };
    let z = DVector::from_iterator(y.len(), y.iter().map(|&v| logit(v.clamp(l, 1.0 - l))));
    let xt = design.x.transpose();
    let beta = (&xt * &design.x)
        .cholesky()
        .ok_or_else(|| Error::RankDeficient {
            columns: design.names.clone(),
        })?
        .solve(&(&xt * z));
    let mut theta: Vec<f64> = beta.iter().copied().collect();
    theta.push(10f64.ln());
    Ok(theta)
}

/// Inverts a symmetric positive-definite matrix through its eigendecomposition.
pub(crate) fn invert_information(h: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(h);
    let (min, max) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0f64), |(lo, hi), &v| (lo.min(v), hi.max(v.abs())));
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(min > 0.0) || condition > 1e14 {
        return Err(Error::SingularHessian { condition });
    }
    let inv = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v));
    Ok(&eig.eigenvectors * inv * eig.eigenvectors.transpose())
}

pub fn fit_design(design: &Design, y: &[f64], family: Family, opts: &OptimOptions) -> Result<FitResult> {
    if design.n_rows() != y.len() {
        return Err(Error::validation("design rows and response length differ"));
    }
    let x = &design.x;
    let start = starting_values(design, y, family)?;
    // surfaces boundary and domain problems before optimizing
    loglik(family, &start, x, y)?;

    let opt = minimize(|t| objective(family, t, x, y), &start, opts)?;
    let ll = loglik(family, &opt.x, x, y)?;
    let hess = numeric_hessian(|t| objective(family, t, x, y), &opt.x, None)?;
    let vcov = invert_information(hess)?;

    let k = design.n_cols();
    let se_all: Vec<f64> = (0..=k).map(|i| vcov[(i, i)].sqrt()).collect();
    let coefficients = opt.x[..k].to_vec();
    let z: Vec<f64> = coefficients.iter().zip(&se_all).map(|(b, s)| b / s).collect();
    let p = z.iter().map(|zi| (2.0 * std_normal_cdf(-zi.abs())).min(1.0)).collect();
    Ok(FitResult {
        family,
        names: design.names.clone(),
        coefficients,
        log_precision: opt.x[k],
        log_precision_se: se_all[k],
        loglik: ll,
        vcov: (0..=k).map(|i| vcov.row(i).iter().copied().collect()).collect(),
        se: se_all[..k].to_vec(),
        z,
        p,
        converged: opt.converged,
        iterations: opt.iterations,
        n: y.len(),
        trace: opt.trace,
    })
}

/// Builds the design from `spec` and maximizes the family log-likelihood.
pub fn fit_mle(spec: &RegressionSpec, data: &TabularDataset, family: Family) -> Result<FitResult> {
    let design = build_design(spec, data)?;
    let y = data.response(&spec.response)?;
    fit_design(&design, y, family, &OptimOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rng::Rng;

    #[test]
    fn recovers_generating_coefficients() {
        let mut rng = Rng::seed_from(11);
        let n = 2000;
        let x1: Vec<f64> = (0..n).map(|_| rng.std_normal()).collect();
        let y: Vec<f64> = x1
            .iter()
            .map(|&v| {
                let mu = crate::numeric::special::inv_logit(0.5 - 0.8 * v);
                rng.beta(mu * 20.0, (1.0 - mu) * 20.0).unwrap()
            })
            .collect();
        let design = Design::from_columns(n, vec![("x1".into(), x1)]).unwrap();
        let fit = fit_design(&design, &y, Family::Beta, &OptimOptions::default()).unwrap();
        assert!((fit.coefficients[0] - 0.5).abs() < 0.05);
        assert!((fit.coefficients[1] + 0.8).abs() < 0.05);
        assert!((fit.precision() - 20.0).abs() < 2.0);
        assert!(fit.se.iter().all(|&s| s > 0.0));
        assert!(fit.p.iter().all(|&p| (0.0..=1.0).contains(&p)));
        assert!(fit.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn singular_information_reports_condition() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(invert_information(h), Err(Error::SingularHessian { .. })));
    }
}
