use nalgebra::DMatrix;
use serde::Serialize;

use super::fit::FitResult;
use super::likelihood::linear_predictor;
use crate::numeric::special::inv_logit;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MseSubset {
    All,
    BoundaryOnes,
    BoundaryZeros,
}

impl MseSubset {
    fn keeps(self, y: f64) -> bool {
        match self {
            MseSubset::All => true,
            MseSubset::BoundaryOnes => y == 1.0,
            MseSubset::BoundaryZeros => y == 0.0,
        }
    }
}

/// Fitted response means: `s(μ̂ − l)` for SLTB, `μ̂` for beta.
pub fn predict_mean(fit: &FitResult, x: &DMatrix<f64>) -> Vec<f64> {
    linear_predictor(x, &fit.coefficients)
        .iter()
        .map(|&e| fit.family.response_mean(inv_logit(e)))
        .collect()
}

pub fn residuals(fit: &FitResult, x: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    predict_mean(fit, x).iter().zip(y).map(|(m, v)| v - m).collect()
}

/// Mean squared error over the rows selected by `subset`; `None` if empty.
pub fn mse_of(y: &[f64], fitted: &[f64], subset: MseSubset) -> Option<f64> {
    let (sum, count) = y
        .iter()
        .zip(fitted)
        .filter(|(v, _)| subset.keeps(**v))
        .fold((0.0, 0usize), |(s, c), (v, m)| (s + (v - m).powi(2), c + 1));
    (count > 0).then(|| sum / count as f64)
}

pub fn mse(fit: &FitResult, x: &DMatrix<f64>, y: &[f64], subset: MseSubset) -> Option<f64> {
    mse_of(y, &predict_mean(fit, x), subset)
}

#[derive(Debug, Clone, Serialize)]
pub struct MseReport {
    pub overall: f64,
    pub boundary_ones: Option<f64>,
    pub boundary_zeros: Option<f64>,
    pub n: usize,
    pub n_ones: usize,
    pub n_zeros: usize,
}

impl MseReport {
    pub fn new(fit: &FitResult, x: &DMatrix<f64>, y: &[f64]) -> Self {
        let fitted = predict_mean(fit, x);
        Self {
            overall: mse_of(y, &fitted, MseSubset::All).unwrap_or(f64::NAN),
            boundary_ones: mse_of(y, &fitted, MseSubset::BoundaryOnes),
            boundary_zeros: mse_of(y, &fitted, MseSubset::BoundaryZeros),
            n: y.len(),
            n_ones: y.iter().filter(|&&v| v == 1.0).count(),
            n_zeros: y.iter().filter(|&&v| v == 0.0).count(),
        }
    }
}
