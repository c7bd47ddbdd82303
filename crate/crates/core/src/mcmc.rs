//! Posterior summaries, retained-draw storage and proposal-scale adaptation
//! shared by the hierarchical samplers.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::stats::{effective_sample_size, mean, quantile_sorted, variance};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub lower95: f64,
    pub upper95: f64,
    pub ess: f64,
}

impl ParamSummary {
    pub fn from_draws(name: impl Into<String>, draws: &[f64]) -> Self {
        let mut sorted = draws.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            name: name.into(),
            mean: mean(draws),
            sd: if draws.len() > 1 { variance(draws).sqrt() } else { 0.0 },
            q1: quantile_sorted(&sorted, 0.25),
            median: quantile_sorted(&sorted, 0.5),
            q3: quantile_sorted(&sorted, 0.75),
            lower95: quantile_sorted(&sorted, 0.025),
            upper95: quantile_sorted(&sorted, 0.975),
            ess: effective_sample_size(draws),
        }
    }

    pub fn covers(&self, value: f64) -> bool {
        self.lower95 <= value && value <= self.upper95
    }
}

/// Retained draws, one row per kept iteration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Draws {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Draws {
    pub fn new(names: Vec<String>) -> Self {
        Self { names, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.names.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["draw".to_owned()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend(row.iter().map(|&v| crate::data::format_number(v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PosteriorSummary {
    pub params: Vec<ParamSummary>,
    /// Post-burn-in acceptance rate per Metropolis block.
    pub acceptance: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
    pub retained: usize,
}

impl PosteriorSummary {
    pub fn param(&self, name: &str) -> Option<&ParamSummary> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Flags blocks whose acceptance rate suggests a badly scaled proposal.
    pub(crate) fn check_acceptance(&mut self) {
        for (block, &rate) in &self.acceptance {
            if !(0.05..=0.95).contains(&rate) {
                self.warnings.push(format!("block {block}: acceptance rate {rate:.3} outside [0.05, 0.95]"));
            }
        }
    }
}

pub(crate) fn summarize_draws(draws: &Draws, names: &[&str]) -> Vec<ParamSummary> {
    names
        .iter()
        .filter_map(|n| draws.column(n).map(|col| ParamSummary::from_draws(*n, &col)))
        .collect()
}

/// Chain length settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ChainSettings {
    pub iterations: usize,
    pub burnin: usize,
    pub thin: usize,
}

impl ChainSettings {
    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burnin {
            return Err(Error::validation(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burnin
            )));
        }
        if self.thin == 0 {
            return Err(Error::validation("thin must be at least 1"));
        }
        Ok(())
    }

    /// Iteration `it` (0-based) is kept.
    pub fn keeps(&self, it: usize) -> bool {
        it >= self.burnin && (it - self.burnin) % self.thin == 0
    }
}

/// Random-walk scale with acceptance bookkeeping.
///
/// During burn-in the scale is nudged every `WINDOW` proposals toward an
/// acceptance rate in `[0.2, 0.5]`; afterwards it is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveScale {
    pub scale: f64,
    window_accepted: u32,
    window_proposed: u32,
    accepted: u64,
    proposed: u64,
}

impl AdaptiveScale {
    const WINDOW: u32 = 50;

    pub fn new(scale: f64) -> Self {
        Self {
            scale,
            window_accepted: 0,
            window_proposed: 0,
            accepted: 0,
            proposed: 0,
        }
    }

    pub fn record(&mut self, accepted: bool, adapting: bool) {
        self.proposed += 1;
        self.accepted += u64::from(accepted);
        if !adapting {
            return;
        }
        self.window_proposed += 1;
        self.window_accepted += u32::from(accepted);
        if self.window_proposed == Self::WINDOW {
            let rate = f64::from(self.window_accepted) / f64::from(Self::WINDOW);
            if rate < 0.2 {
                self.scale *= 0.7;
            } else if rate > 0.5 {
                self.scale *= 1.4;
            }
            self.window_accepted = 0;
            self.window_proposed = 0;
        }
    }

    /// Clears the counters; called once burn-in ends.
    pub fn reset_counts(&mut self) {
        self.accepted = 0;
        self.proposed = 0;
        self.window_accepted = 0;
        self.window_proposed = 0;
    }

    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Pools rates of several scalar blocks under one label.
pub(crate) fn pooled_rate(blocks: &[AdaptiveScale]) -> f64 {
    let (a, p) = blocks.iter().fold((0u64, 0u64), |(a, p), b| (a + b.accepted, p + b.proposed));
    if p == 0 {
        f64::NAN
    } else {
        a as f64 / p as f64
    }
}

/// Acceptance tally for proposals whose scale is dictated by the model.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AcceptCounter {
    pub accepted: u64,
    pub proposed: u64,
}

impl AcceptCounter {
    pub fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += u64::from(accepted);
    }

    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}
