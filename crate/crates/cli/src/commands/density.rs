use serde::{Deserialize, Serialize};
use sltb_core::distributions::{BetaMuPhi, SltbParams};
use sltb_core::{Error, Result};

use super::{num, OutDir};

/// Scale and location of the exaggerated illustration, chosen so the
/// truncation is visible by eye.
pub const ILLUSTRATION_PRESET: (f64, f64) = (1.08, 0.04);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityRun {
    pub mu: f64,
    pub phi: f64,
    pub s: f64,
    pub l: f64,
    pub grid_n: usize,
}

impl DensityRun {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 2 {
            return Err(Error::Validation(format!("grid must have at least 2 points, got {}", self.grid_n)));
        }
        SltbParams::new(self.mu, self.phi, self.s, self.l)?;
        Ok(())
    }

    pub fn run(&self, out: &mut OutDir) -> Result<serde_json::Value> {
        self.validate()?;
        let sltb = SltbParams::new(self.mu, self.phi, self.s, self.l)?;
        let beta = BetaMuPhi::new(self.mu, self.phi)?;
        let last = (self.grid_n - 1) as f64;
        let mut rows = Vec::with_capacity(self.grid_n);
        for k in 0..self.grid_n {
            let g = k as f64 / last;
            let beta_pdf = if k == 0 || k == self.grid_n - 1 {
                String::new()
            } else {
                num(beta.logpdf(g)?.exp())
            };
            rows.push(vec![num(g), num(sltb.pdf(g)?), beta_pdf]);
        }
        out.csv("density.csv", &["g", "sltb_pdf", "beta_pdf"], &rows)?;
        Ok(serde_json::json!({}))
    }
}
