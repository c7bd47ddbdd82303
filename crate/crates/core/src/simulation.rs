//! Monte Carlo study of SLTB regression on data with boundary responses.
//!
//! Each replication draws `x1 ~ Bernoulli(0.5)` and `x2 ~ N(100, 15)`
//! (standardized within the dataset), then `y ~ Beta(μφ, (1 − μ)φ)` with
//! `logit μ = β0 + β1·x1 + β2·x2 + β3·x1·x2`. Rounding `y` to a fixed number
//! of decimals produces exact ones and zeros.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::TabularDataset;
use crate::distributions::sltb::{DEFAULT_LOCATION, DEFAULT_SCALE};
use crate::error::{Error, Result};
use crate::numeric::optimize::OptimOptions;
use crate::numeric::rng::Rng;
use crate::numeric::special::inv_logit;
use crate::numeric::stats;
use crate::regression::{boundary_rows, fit_design, Design, Family, MseReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sltb,
    Beta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    pub reps: usize,
    pub beta_true: [f64; 4],
    pub phi_true: f64,
    /// Decimals kept when rounding `y`; `None` leaves draws continuous.
    pub rounding_decimals: Option<u32>,
    pub base_seed: u64,
    pub s: f64,
    pub l: f64,
    /// Only fit replications containing at least one `y = 1`.
    pub require_boundary: bool,
    pub methods: Vec<Method>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 20,
            reps: 1000,
            beta_true: [1.2, -0.88, 0.43, -0.52],
            phi_true: 10.0,
            rounding_decimals: Some(2),
            base_seed: 20_240_601,
            s: DEFAULT_SCALE,
            l: DEFAULT_LOCATION,
            require_boundary: true,
            methods: vec![Method::Sltb, Method::Beta],
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(Error::validation(format!("n must be at least 8, got {}", self.n)));
        }
        if self.reps < 1 {
            return Err(Error::validation("reps must be at least 1"));
        }
        if !(self.phi_true > 0.0) || !self.phi_true.is_finite() {
            return Err(Error::validation("phi_true must be positive"));
        }
        if self.beta_true.iter().any(|b| !b.is_finite()) {
            return Err(Error::validation("beta_true must be finite"));
        }
        if self.rounding_decimals.is_some_and(|d| d > 15) {
            return Err(Error::validation("rounding_decimals must be at most 15"));
        }
        Family::sltb(self.s, self.l)?;
        Ok(())
    }
}

/// One simulated dataset, kept in design form.
#[derive(Debug, Clone)]
pub struct SimDataset {
    pub design: Design,
    pub y: Vec<f64>,
}

impl SimDataset {
    pub fn to_table(&self) -> Result<TabularDataset> {
        TabularDataset::new()
            .with_numeric("y", self.y.clone())?
            .with_numeric("x1", self.design.x.column(1).iter().copied().collect())?
            .with_numeric("x2", self.design.x.column(2).iter().copied().collect())
    }

    pub fn count_equal(&self, v: f64) -> usize {
        self.y.iter().filter(|&&y| y == v).count()
    }
}

fn round_to(y: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    ((y * scale).round_ties_even() / scale).clamp(0.0, 1.0)
}

pub fn gen_dataset(cfg: &SimConfig, rep_index: usize) -> Result<SimDataset> {
    let mut rng = Rng::for_replication(cfg.base_seed, rep_index as u64);
    let n = cfg.n;
    let x1: Vec<f64> = (0..n).map(|_| if rng.bernoulli(0.5) { 1.0 } else { 0.0 }).collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.normal(100.0, 15.0)).collect::<Result<_>>()?;
    let (m, sd) = (stats::mean(&raw), stats::variance(&raw).sqrt());
    let x2: Vec<f64> = raw.iter().map(|v| (v - m) / sd).collect();
    let [b0, b1, b2, b3] = cfg.beta_true;
    let phi = cfg.phi_true;
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let mu = inv_logit(b0 + b1 * x1[i] + b2 * x2[i] + b3 * x1[i] * x2[i]);
        let draw = rng.beta(mu * phi, (1.0 - mu) * phi)?;
        y.push(match cfg.rounding_decimals {
            Some(d) => round_to(draw, d),
            None => draw,
        });
    }
    let x12 = x1.iter().zip(&x2).map(|(a, b)| a * b).collect();
    let design = Design::from_columns_unchecked(
        n,
        vec![("x1".into(), x1), ("x2".into(), x2), ("x1:x2".into(), x12)],
    );
    Ok(SimDataset { design, y })
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodOutcome {
    pub method: Method,
    /// `None` when the method does not apply or the fit failed.
    pub mse: Option<f64>,
    pub coefficients: Option<Vec<f64>>,
    pub log_precision: Option<f64>,
    pub error: Option<String>,
    pub inapplicable: bool,
    #[serde(skip)]
    pub fit_seconds: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplicationRecord {
    pub rep: usize,
    pub seed: u64,
    pub n_ones: usize,
    pub n_zeros: usize,
    /// Passed the boundary filter and was fitted.
    pub used: bool,
    pub outcomes: Vec<MethodOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub fitted: usize,
    pub failures: usize,
    pub inapplicable: usize,
    pub mean_mse: Option<f64>,
    /// Mean absolute error of each coefficient against `beta_true`.
    pub mean_abs_coef_error: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodTiming {
    pub method: Method,
    pub mean_fit_seconds: Option<f64>,
    pub total_fit_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct McStudyReport {
    pub config: SimConfig,
    pub replications: usize,
    pub boundary_replications: usize,
    pub methods: Vec<MethodSummary>,
    #[serde(skip)]
    pub timings: Vec<MethodTiming>,
    #[serde(skip)]
    pub records: Vec<ReplicationRecord>,
}

fn fit_method(method: Method, cfg: &SimConfig, data: &SimDataset) -> MethodOutcome {
    let family = match method {
        Method::Sltb => Family::Sltb { s: cfg.s, l: cfg.l },
        Method::Beta => Family::Beta,
    };
    let blank = MethodOutcome {
        method,
        mse: None,
        coefficients: None,
        log_precision: None,
        error: None,
        inapplicable: false,
        fit_seconds: None,
    };
    if family == Family::Beta && !boundary_rows(&data.y).is_empty() {
        return MethodOutcome {
            inapplicable: true,
            ..blank
        };
    }
    let start = Instant::now();
    let fit = fit_design(&data.design, &data.y, family, &OptimOptions::default());
    let secs = start.elapsed().as_secs_f64();
    match fit {
        Ok(fit) => MethodOutcome {
            mse: Some(MseReport::new(&fit, &data.design.x, &data.y).overall),
            log_precision: Some(fit.log_precision),
            coefficients: Some(fit.coefficients),
            fit_seconds: Some(secs),
            ..blank
        },
        Err(e) => MethodOutcome {
            error: Some(e.to_string()),
            fit_seconds: Some(secs),
            ..blank
        },
    }
}

pub fn run_replication(cfg: &SimConfig, rep: usize) -> Result<ReplicationRecord> {
    let data = gen_dataset(cfg, rep)?;
    let n_ones = data.count_equal(1.0);
    let used = !cfg.require_boundary || n_ones > 0;
    let outcomes = if used {
        cfg.methods.iter().map(|&m| fit_method(m, cfg, &data)).collect()
    } else {
        Vec::new()
    };
    Ok(ReplicationRecord {
        rep,
        seed: cfg.base_seed.wrapping_add(rep as u64),
        n_ones,
        n_zeros: data.count_equal(0.0),
        used,
        outcomes,
    })
}

/// Runs every replication, in parallel when `threads > 1`. Records come
/// back ordered by replication index regardless of scheduling.
pub fn run_study(cfg: &SimConfig, threads: usize) -> Result<McStudyReport> {
    cfg.validate()?;
    let records: Vec<ReplicationRecord> = if threads > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::validation(format!("cannot start thread pool: {e}")))?;
        pool.install(|| (0..cfg.reps).into_par_iter().map(|r| run_replication(cfg, r)).collect::<Result<_>>())?
    } else {
        (0..cfg.reps).map(|r| run_replication(cfg, r)).collect::<Result<_>>()?
    };
    Ok(summarize(cfg, records))
}

fn summarize(cfg: &SimConfig, records: Vec<ReplicationRecord>) -> McStudyReport {
    let mut methods = Vec::new();
    let mut timings = Vec::new();
    for &method in &cfg.methods {
        let outcomes: Vec<&MethodOutcome> = records
            .iter()
            .flat_map(|r| r.outcomes.iter())
            .filter(|o| o.method == method)
            .collect();
        let fitted: Vec<&&MethodOutcome> = outcomes.iter().filter(|o| o.mse.is_some()).collect();
        let mses: Vec<f64> = fitted.iter().filter_map(|o| o.mse).collect();
        let mean_abs_coef_error = (!fitted.is_empty()).then(|| {
            (0..4)
                .map(|k| {
                    fitted
                        .iter()
                        .map(|o| (o.coefficients.as_ref().unwrap()[k] - cfg.beta_true[k]).abs())
                        .sum::<f64>()
                        / fitted.len() as f64
                })
                .collect()
        });
        methods.push(MethodSummary {
            method,
            fitted: fitted.len(),
            failures: outcomes.iter().filter(|o| o.error.is_some()).count(),
            inapplicable: outcomes.iter().filter(|o| o.inapplicable).count(),
            mean_mse: (!mses.is_empty()).then(|| stats::mean(&mses)),
            mean_abs_coef_error,
        });
        let secs: Vec<f64> = fitted.iter().filter_map(|o| o.fit_seconds).collect();
        timings.push(MethodTiming {
            method,
            mean_fit_seconds: (!secs.is_empty()).then(|| stats::mean(&secs)),
            total_fit_seconds: secs.iter().sum(),
        });
    }
    McStudyReport {
        config: cfg.clone(),
        replications: records.len(),
        boundary_replications: records.iter().filter(|r| r.n_ones > 0).count(),
        methods,
        timings,
        records,
    }
}

impl McStudyReport {
    pub fn method(&self, method: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == method)
    }

    pub fn timing(&self, method: Method) -> Option<&MethodTiming> {
        self.timings.iter().find(|m| m.method == method)
    }

    /// One row per replication and method; timings are left out so the file
    /// is reproducible.
    pub fn write_records_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["rep", "seed", "n_ones", "n_zeros", "used", "method", "mse", "b0", "b1", "b2", "b3", "log_precision", "status"])?;
        let opt = |v: Option<f64>| v.map(crate::data::format_number).unwrap_or_default();
        for r in &self.records {
            let head = [r.rep.to_string(), r.seed.to_string(), r.n_ones.to_string(), r.n_zeros.to_string(), r.used.to_string()];
            if r.outcomes.is_empty() {
                let mut row: Vec<String> = head.to_vec();
                row.extend(std::iter::repeat(String::new()).take(7));
                row.push("filtered".into());
                w.write_record(&row)?;
                continue;
            }
            for o in &r.outcomes {
                let mut row: Vec<String> = head.to_vec();
                row.push(serde_json::to_value(o.method)?.as_str().unwrap_or_default().to_owned());
                row.push(opt(o.mse));
                let coefs = o.coefficients.clone().map_or(vec![None; 4], |c| c.into_iter().map(Some).collect());
                row.extend(coefs.into_iter().map(opt));
                row.push(opt(o.log_precision));
                row.push(if o.inapplicable {
                    "inapplicable".into()
                } else if let Some(e) = &o.error {
                    format!("failed: {e}")
                } else {
                    "ok".into()
                });
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(reps: usize) -> SimConfig {
        SimConfig {
            reps,
            ..SimConfig::default()
        }
    }

    #[test]
    fn generated_values_in_unit_interval() {
        let cfg = SimConfig { n: 400, ..small(1) };
        for rep in 0..5 {
            let d = gen_dataset(&cfg, rep).unwrap();
            assert!(d.y.iter().all(|v| (0.0..=1.0).contains(v)));
            let x2: Vec<f64> = d.design.x.column(2).iter().copied().collect();
            assert!(stats::mean(&x2).abs() < 1e-12);
            assert!((stats::variance(&x2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn continuous_draws_never_hit_boundaries() {
        let cfg = SimConfig {
            n: 10_000,
            rounding_decimals: None,
            ..small(1)
        };
        let hits: usize = (0..100).map(|r| {
            let d = gen_dataset(&cfg, r).unwrap();
            d.count_equal(0.0) + d.count_equal(1.0)
        }).sum();
        assert_eq!(hits, 0);
    }

    #[test]
    fn rounding_is_half_even() {
        assert_eq!(round_to(0.125, 2), 0.12);
        assert_eq!(round_to(0.375, 2), 0.38);
        assert_eq!(round_to(0.625, 2), 0.62);
        assert_eq!(round_to(0.9951, 2), 1.0);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig { reps: 0, ..small(1) }.validate().is_err());
        assert!(SimConfig { n: 5, ..small(1) }.validate().is_err());
        let parsed: SimConfig = serde_json::from_str(r#"{"n": 40, "reps": 3}"#).unwrap();
        assert_eq!(parsed.n, 40);
        assert_eq!(parsed.beta_true, [1.2, -0.88, 0.43, -0.52]);
    }

    #[test]
    fn filter_and_determinism() {
        let cfg = small(12);
        let a = run_study(&cfg, 1).unwrap();
        let b = run_study(&cfg, 2).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let mut ca = Vec::new();
        let mut cb = Vec::new();
        a.write_records_csv(&mut ca).unwrap();
        b.write_records_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        for r in a.records.iter().filter(|r| r.used) {
            assert!(r.n_ones >= 1);
            let beta = r.outcomes.iter().find(|o| o.method == Method::Beta).unwrap();
            assert!(beta.inapplicable);
        }
        let sltb = a.method(Method::Sltb).unwrap();
        assert_eq!(sltb.fitted + sltb.failures, a.records.iter().filter(|r| r.used).count());
    }
}
