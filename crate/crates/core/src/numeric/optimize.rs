//! Unconstrained minimization: a Nelder–Mead simplex phase followed by a
//! BFGS polish with central finite-difference gradients.

use crate::error::{Error, Result};
use crate::numeric::diff::numeric_gradient;

#[derive(Debug, Clone)]
pub struct OptimOptions {
    /// Iteration budget for the simplex phase.
    pub simplex_iters: usize,
    /// Iteration budget for the quasi-Newton phase.
    pub bfgs_iters: usize,
    /// Scaled gradient tolerance: `max |gᵢ|·max(1,|xᵢ|) / max(1,|f|)`.
    pub gradient_tol: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            simplex_iters: 400,
            bfgs_iters: 500,
            gradient_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every accepted step, starting with the initial point.
    pub trace: Vec<f64>,
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// Nelder–Mead simplex search. Non-finite objective values are treated as +∞.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], max_iter: usize) -> OptimResult {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += if p[i].abs() > 1e-8 { 0.1 * p[i].abs().max(0.25) } else { 0.25 };
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| finite_or_inf(f(p))).collect();
    let mut trace = vec![values[0]];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if trace.last().is_none_or(|&t| values[0] < t) {
            trace.push(values[0]);
        }

        let spread = (values[n] - values[0]).abs();
        let size = simplex[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0_f64, f64::max);
        if spread <= 1e-12 * (1.0 + values[0].abs()) && size < 1e-8 {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64, worst: &[f64]| -> Vec<f64> {
            centroid.iter().zip(worst).map(|(c, w)| c + t * (w - c)).collect()
        };
        let reflected = along(-1.0, &simplex[n]);
        let fr = finite_or_inf(f(&reflected));
        if fr < values[0] {
            let expanded = along(-2.0, &simplex[n]);
            let fe = finite_or_inf(f(&expanded));
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = along(-0.5, &simplex[n]);
            let v = finite_or_inf(f(&c));
            (c, v)
        } else {
            let c = along(0.5, &simplex[n]);
            let v = finite_or_inf(f(&c));
            (c, v)
        };
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        for i in 1..=n {
            let best = simplex[0].clone();
            for (x, b) in simplex[i].iter_mut().zip(&best) {
                *x = b + 0.5 * (*x - b);
            }
            values[i] = finite_or_inf(f(&simplex[i]));
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    OptimResult {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
        trace,
    }
}

fn scaled_gradient_norm(g: &[f64], x: &[f64], fx: f64) -> f64 {
    g.iter()
        .zip(x)
        .map(|(gi, xi)| gi.abs() * xi.abs().max(1.0))
        .fold(0.0, f64::max)
        / fx.abs().max(1.0)
}

/// BFGS with backtracking Armijo line search and finite-difference gradients.
/// Every accepted step strictly decreases the objective.
pub fn bfgs<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], max_iter: usize, gradient_tol: f64) -> Result<OptimResult> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return Err(Error::non_finite("objective at the BFGS starting point"));
    }
    let mut g = numeric_gradient(&mut f, &x, None)?;
    let mut hinv = vec![vec![0.0; n]; n];
    for (i, row) in hinv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut trace = vec![fx];
    let mut iterations = 0;
    let mut converged = scaled_gradient_norm(&g, &x, fx) < gradient_tol;
    while !converged && iterations < max_iter {
        iterations += 1;
        let mut dir: Vec<f64> = hinv.iter().map(|row| -row.iter().zip(&g).map(|(h, gi)| h * gi).sum::<f64>()).collect();
        let mut slope: f64 = dir.iter().zip(&g).map(|(d, gi)| d * gi).sum();
        if !(slope < 0.0) {
            // not a descent direction: reset to steepest descent
            for (i, row) in hinv.iter_mut().enumerate() {
                row.iter_mut().for_each(|v| *v = 0.0);
                row[i] = 1.0;
            }
            dir = g.iter().map(|v| -v).collect();
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
            let ft = f(&trial);
            if ft.is_finite() && ft <= fx + 1e-4 * t * slope && ft < fx {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // No further decrease is attainable at finite-difference resolution.
            converged = scaled_gradient_norm(&g, &x, fx) < gradient_tol.max(1e-6);
            break;
        };
        let g_new = numeric_gradient(&mut f, &x_new, None)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 * s.iter().map(|v| v * v).sum::<f64>().sqrt() * y.iter().map(|v| v * v).sum::<f64>().sqrt() {
            if iterations == 1 {
                let yy: f64 = y.iter().map(|v| v * v).sum();
                let scale = sy / yy;
                for (i, row) in hinv.iter_mut().enumerate() {
                    row.iter_mut().for_each(|v| *v = 0.0);
                    row[i] = scale;
                }
            }
            let rho = 1.0 / sy;
            let hy: Vec<f64> = hinv.iter().map(|row| row.iter().zip(&y).map(|(h, yi)| h * yi).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    hinv[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        trace.push(fx);
        converged = scaled_gradient_norm(&g, &x, fx) < gradient_tol;
    }
    Ok(OptimResult {
        x,
        value: fx,
        iterations,
        converged,
        trace,
    })
}

/// Simplex start followed by BFGS polish.
pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &OptimOptions) -> Result<OptimResult> {
    let simplex = nelder_mead(&mut f, x0, opts.simplex_iters);
    let start = if simplex.value.is_finite() { simplex.x.clone() } else { x0.to_vec() };
    let polished = bfgs(&mut f, &start, opts.bfgs_iters, opts.gradient_tol)?;
    let iterations = simplex.iterations + polished.iterations;
    if !polished.converged {
        return Err(Error::NonConvergence {
            iterations,
            best: polished.x,
            best_value: polished.value,
        });
    }
    let mut trace = simplex.trace;
    trace.extend(polished.trace.into_iter().skip(1));
    Ok(OptimResult {
        iterations,
        trace,
        ..polished
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn rosenbrock_minimum() {
        let r = minimize(rosenbrock, &[-1.2, 1.0], &OptimOptions::default()).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5, "{:?}", r.x);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn nelder_mead_quadratic() {
        let r = nelder_mead(|x| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2), &[0.0, 0.0], 2000);
        assert!(r.converged);
        assert!((r.x[0] - 3.0).abs() < 1e-6 && (r.x[1] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn budget_exhaustion_reports_best_point() {
        let opts = OptimOptions {
            simplex_iters: 2,
            bfgs_iters: 1,
            gradient_tol: 1e-12,
        };
        match minimize(rosenbrock, &[-1.2, 1.0], &opts) {
            Err(Error::NonConvergence { best, .. }) => assert_eq!(best.len(), 2),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
