//! Central finite differences.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default per-coordinate step for second differences: `ε^{1/4}·(1 + |xᵢ|)`.
pub fn default_hessian_step(x: f64) -> f64 {
    f64::EPSILON.powf(0.25) * (1.0 + x.abs())
}

/// Default per-coordinate step for first differences: `ε^{1/3}·(1 + |xᵢ|)`.
pub fn default_gradient_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + x.abs())
}

fn eval<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], coord: usize) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::non_finite(format!(
            "finite-difference evaluation perturbing coordinate {coord}"
        )))
    }
}

/// Central-difference gradient.
pub fn numeric_gradient<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: Option<f64>) -> Result<Vec<f64>> {
    let mut work = x.to_vec();
    let mut grad = vec![0.0; x.len()];
    for i in 0..x.len() {
        let hi = h.unwrap_or_else(|| default_gradient_step(x[i]));
        work[i] = x[i] + hi;
        let fp = eval(&mut f, &work, i)?;
        work[i] = x[i] - hi;
        let fm = eval(&mut f, &work, i)?;
        work[i] = x[i];
        grad[i] = (fp - fm) / (2.0 * hi);
    }
    Ok(grad)
}

/// Central-difference Hessian, symmetrized as `(H + Hᵀ)/2`.
///
/// `h = None` uses [`default_hessian_step`] per coordinate; `Some(h)` uses the
/// same absolute step everywhere.
pub fn numeric_hessian<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: Option<f64>) -> Result<DMatrix<f64>> {
    let n = x.len();
    if let Some(h) = h {
        if !(h > 0.0) {
            return Err(Error::domain(format!("Hessian step must be positive, got {h}")));
        }
    }
    let steps: Vec<f64> = x
        .iter()
        .map(|&xi| h.unwrap_or_else(|| default_hessian_step(xi)))
        .collect();
    let mut work = x.to_vec();
    let f0 = eval(&mut f, &work, 0)?;
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        let hi = steps[i];
        work[i] = x[i] + hi;
        let fp = eval(&mut f, &work, i)?;
        work[i] = x[i] - hi;
        let fm = eval(&mut f, &work, i)?;
        work[i] = x[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in 0..i {
            let hj = steps[j];
            let mut corner = |di: f64, dj: f64, work: &mut Vec<f64>| {
                work[i] = x[i] + di;
                work[j] = x[j] + dj;
                let v = eval(&mut f, work, i);
                work[i] = x[i];
                work[j] = x[j];
                v
            };
            let fpp = corner(hi, hj, &mut work)?;
            let fpm = corner(hi, -hj, &mut work)?;
            let fmp = corner(-hi, hj, &mut work)?;
            let fmm = corner(-hi, -hj, &mut work)?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let sym = (&hess + hess.transpose()) * 0.5;
    Ok(sym)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let h = numeric_hessian(|x| x[0] * x[0] + x[1] * x[1], &[0.0, 0.0], None).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 2.0 } else { 0.0 };
                assert!((h[(i, j)] - want).abs() < 1e-6, "{h}");
            }
        }
    }

    #[test]
    fn bilinear_cross_term() {
        let h = numeric_hessian(|x| x[0] * x[1], &[1.0, 1.0], None).unwrap();
        assert!(h[(0, 0)].abs() < 1e-6);
        assert!(h[(1, 1)].abs() < 1e-6);
        assert!((h[(0, 1)] - 1.0).abs() < 1e-6);
        assert_eq!(h[(0, 1)], h[(1, 0)]);
    }

    #[test]
    fn non_finite_evaluation_names_coordinate() {
        let err = numeric_hessian(
            |x| if x[1] > 0.5 + 1e-9 { f64::NAN } else { x[0] + x[1] },
            &[0.0, 0.5],
            Some(1e-3),
        )
        .unwrap_err();
        match err {
            Error::NonFinite { context } => assert!(context.contains("coordinate 1"), "{context}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gradient_of_cubic() {
        let g = numeric_gradient(|x| x[0].powi(3) + 2.0 * x[1], &[2.0, -1.0], None).unwrap();
        assert!((g[0] - 12.0).abs() < 1e-7);
        assert!((g[1] - 2.0).abs() < 1e-8);
    }
}
