//! Grid search for the `(s, l)` tuning constants.
//!
//! Candidates are laid out on a regular grid in `(log10(s − 1), log10 l)` and
//! scored by the summed squared difference between the SLTB and beta
//! densities at equally spaced interior points.

use serde::Serialize;

use super::beta::BetaMuPhi;
use super::sltb::ScaleLocation;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TuningGrid {
    pub log_scale_excess: (f64, f64),
    pub log_location: (f64, f64),
    pub steps: usize,
    /// Number of evaluation points in `(0, 1)`.
    pub eval_points: usize,
    pub base: BetaMuPhi,
}

impl Default for TuningGrid {
    fn default() -> Self {
        Self {
            log_scale_excess: (-10.0, -2.0),
            log_location: (-11.0, -2.0),
            steps: 33,
            eval_points: 10_000,
            base: BetaMuPhi { mu: 0.5, phi: 4.0 },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TuningPoint {
    pub s: f64,
    pub l: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TuningResult {
    pub best: TuningPoint,
    /// Every feasible candidate, in grid order.
    pub surface: Vec<TuningPoint>,
}

/// Summed squared density difference at `n` midpoints of `(0, 1)`.
pub fn squared_density_gap(sl: &ScaleLocation, base: &BetaMuPhi, n: usize) -> f64 {
    (0..n)
        .map(|k| {
            let g = (k as f64 + 0.5) / n as f64;
            let d = sl.ln_pdf(g, base.mu, base.phi).exp() - base.pdf_closed(g);
            d * d
        })
        .sum()
}

pub fn tune_scale_location(grid: &TuningGrid) -> Result<TuningResult> {
    if grid.steps < 2 || grid.eval_points == 0 {
        return Err(Error::validation("tuning grid needs at least 2 steps and 1 evaluation point"));
    }
    BetaMuPhi::new(grid.base.mu, grid.base.phi)?;
    let axis = |(lo, hi): (f64, f64), i: usize| lo + (hi - lo) * i as f64 / (grid.steps - 1) as f64;

    let mut surface = Vec::with_capacity(grid.steps * grid.steps);
    for i in 0..grid.steps {
        let s = 1.0 + 10f64.powf(axis(grid.log_scale_excess, i));
        for j in 0..grid.steps {
            let l = 10f64.powf(axis(grid.log_location, j));
            let Ok(sl) = ScaleLocation::new(s, l) else { continue };
            if !sl.has_finite_boundaries() {
                continue;
            }
            let objective = squared_density_gap(&sl, &grid.base, grid.eval_points);
            if objective.is_finite() {
                surface.push(TuningPoint { s, l, objective });
            }
        }
    }
    let best = surface
        .iter()
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .cloned()
        .ok_or_else(|| Error::validation("no feasible (s, l) candidate on the tuning grid"))?;
    Ok(TuningResult { best, surface })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_vanishes_for_identity_transform() {
        let sl = ScaleLocation { s: 1.0, l: 0.0 };
        let base = BetaMuPhi { mu: 0.5, phi: 4.0 };
        assert!(squared_density_gap(&sl, &base, 1000) < 1e-24);
    }

    #[test]
    fn defaults_beat_coarse_tuning() {
        let base = BetaMuPhi { mu: 0.5, phi: 4.0 };
        let coarse = squared_density_gap(&ScaleLocation { s: 1.08, l: 0.04 }, &base, 10_000);
        let fine = squared_density_gap(&ScaleLocation::default(), &base, 10_000);
        assert!(fine < coarse * 1e-10);
    }

    #[test]
    fn search_returns_feasible_minimum() {
        let grid = TuningGrid {
            steps: 9,
            eval_points: 500,
            ..TuningGrid::default()
        };
        let res = tune_scale_location(&grid).unwrap();
        assert!(res.best.l < (res.best.s - 1.0) / res.best.s);
        assert!(res.surface.iter().all(|p| p.objective >= res.best.objective));
    }

    #[test]
    fn degenerate_grid_rejected() {
        let grid = TuningGrid {
            steps: 1,
            ..TuningGrid::default()
        };
        assert!(tune_scale_location(&grid).is_err());
    }
}
