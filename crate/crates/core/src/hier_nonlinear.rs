//! Hierarchical hyperbolic discounting models.
//!
//! Indifference points follow `V(D) = 1/(1 + e^ψ·D)` per subject. The SLTB
//! model draws `y_ij ~ SLTB(V_i(D_j), φ_i)` with `ψ_i ~ N(μ_ψ, σ²_ψ)` and
//! `ln φ_i ~ N(μ_φ, σ²_φ)`; the normal baseline draws
//! `y_ij ~ N(V_i(D_j), σ²)`. Both use conjugate normal / inverse-gamma
//! updates for the population parameters and random-walk Metropolis for
//! the subject parameters.

use serde::{Deserialize, Serialize};

use crate::data::{Column, TabularDataset};
use crate::distributions::sltb::{ScaleLocation, DEFAULT_LOCATION, DEFAULT_SCALE};
use crate::error::{Error, Result};
use crate::mcmc::{summarize_draws, AcceptCounter, ChainSettings, Draws, PosteriorSummary};
use crate::numeric::optimize::{minimize, OptimOptions};
use crate::numeric::rng::Rng;
use crate::numeric::special::ln_gamma;
use crate::numeric::stats;

/// Hyperbolic discounted value `1/(1 + e^ψ·D)`.
#[inline]
pub fn discount_mean(psi: f64, delay: f64) -> f64 {
    1.0 / (1.0 + (psi + delay.ln()).exp())
}

/// Indifference points grouped by subject.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountData {
    /// `(delay, y)` pairs per subject.
    pub subjects: Vec<Vec<(f64, f64)>>,
}

impl DiscountData {
    pub fn n_subjects(&self) -> usize {
        self.subjects.len()
    }

    pub fn n_obs(&self) -> usize {
        self.subjects.iter().map(Vec::len).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.subjects.is_empty() {
            return Err(Error::validation("discounting data has no subjects"));
        }
        for (i, obs) in self.subjects.iter().enumerate() {
            if obs.is_empty() {
                return Err(Error::validation(format!("subject {} has no observations", i + 1)));
            }
            for &(d, y) in obs {
                if !(d > 0.0) || !d.is_finite() {
                    return Err(Error::validation(format!("subject {}: delay must be positive, got {d}", i + 1)));
                }
                if !(0.0..=1.0).contains(&y) {
                    return Err(Error::validation(format!("subject {}: y = {y} outside [0, 1]", i + 1)));
                }
            }
        }
        Ok(())
    }

    /// Reads columns `subject`, `delay`, `y`; subjects are ordered by label.
    pub fn from_table(table: &TabularDataset) -> Result<Self> {
        let labels: Vec<String> = match table.column("subject")? {
            Column::Numeric(v) => v.iter().map(|x| crate::data::format_number(*x)).collect(),
            Column::Factor { levels, codes } => codes.iter().map(|&c| levels[c].clone()).collect(),
        };
        let delay = table.numeric("delay")?;
        let y = table.response("y")?;
        let mut order = labels.clone();
        order.sort_by(|a, b| match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(p), Ok(q)) => p.total_cmp(&q),
            _ => a.cmp(b),
        });
        order.dedup();
        let mut subjects = vec![Vec::new(); order.len()];
        for r in 0..labels.len() {
            let i = order.binary_search_by(|o| match (o.parse::<f64>(), labels[r].parse::<f64>()) {
                (Ok(p), Ok(q)) => p.total_cmp(&q),
                _ => o.cmp(&labels[r]),
            });
            subjects[i.expect("label present")].push((delay[r], y[r]));
        }
        let data = Self { subjects };
        data.validate()?;
        Ok(data)
    }

    pub fn to_table(&self) -> Result<TabularDataset> {
        let mut subject = Vec::new();
        let mut delay = Vec::new();
        let mut y = Vec::new();
        for (i, obs) in self.subjects.iter().enumerate() {
            for &(d, v) in obs {
                subject.push((i + 1) as f64);
                delay.push(d);
                y.push(v);
            }
        }
        TabularDataset::new()
            .with_numeric("subject", subject)?
            .with_numeric("delay", delay)?
            .with_numeric("y", y)
    }
}

/// Population values used to simulate subjects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscountTruth {
    pub mu_psi: f64,
    pub sigma2_psi: f64,
    pub mu_ln_phi: f64,
    pub sigma2_ln_phi: f64,
}

impl Default for DiscountTruth {
    fn default() -> Self {
        Self {
            mu_psi: -4.87,
            sigma2_psi: 2.48,
            mu_ln_phi: 4.4,
            sigma2_ln_phi: 0.5,
        }
    }
}

pub const DEFAULT_DELAYS: [f64; 6] = [1.0, 7.0, 30.0, 182.0, 365.0, 1825.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscountSimConfig {
    pub n_subjects: usize,
    pub delays: Vec<f64>,
    pub truth: DiscountTruth,
    pub rounding_decimals: Option<u32>,
    pub seed: u64,
}

impl Default for DiscountSimConfig {
    fn default() -> Self {
        Self {
            n_subjects: 100,
            delays: DEFAULT_DELAYS.to_vec(),
            truth: DiscountTruth::default(),
            rounding_decimals: Some(2),
            seed: 7,
        }
    }
}

/// Simulated data together with the subject parameters that produced it.
#[derive(Debug, Clone)]
pub struct SimulatedDiscounting {
    pub data: DiscountData,
    pub psi: Vec<f64>,
    pub ln_phi: Vec<f64>,
}

pub fn gen_discount_data(cfg: &DiscountSimConfig) -> Result<SimulatedDiscounting> {
    if cfg.n_subjects < 2 {
        return Err(Error::validation("need at least 2 subjects"));
    }
    if cfg.delays.len() < 3 {
        return Err(Error::validation("need at least 3 delays"));
    }
    if cfg.delays.windows(2).any(|w| !(w[0] < w[1])) || !(cfg.delays[0] > 0.0) {
        return Err(Error::validation("delays must be positive and strictly increasing"));
    }
    let t = cfg.truth;
    if !(t.sigma2_psi > 0.0 && t.sigma2_ln_phi > 0.0) {
        return Err(Error::validation("truth variances must be positive"));
    }
    let mut rng = Rng::seed_from(cfg.seed);
    let mut subjects = Vec::with_capacity(cfg.n_subjects);
    let mut psi = Vec::with_capacity(cfg.n_subjects);
    let mut ln_phi = Vec::with_capacity(cfg.n_subjects);
    for _ in 0..cfg.n_subjects {
        let p = rng.normal(t.mu_psi, t.sigma2_psi.sqrt())?;
        let lf = rng.normal(t.mu_ln_phi, t.sigma2_ln_phi.sqrt())?;
        let phi = lf.exp();
        let mut obs = Vec::with_capacity(cfg.delays.len());
        for &d in &cfg.delays {
            let mu = discount_mean(p, d);
            let draw = rng.beta(mu * phi, (1.0 - mu) * phi)?;
            let y = match cfg.rounding_decimals {
                Some(k) => {
                    let scale = 10f64.powi(k as i32);
                    ((draw * scale).round_ties_even() / scale).clamp(0.0, 1.0)
                }
                None => draw,
            };
            obs.push((d, y));
        }
        subjects.push(obs);
        psi.push(p);
        ln_phi.push(lf);
    }
    Ok(SimulatedDiscounting {
        data: DiscountData { subjects },
        psi,
        ln_phi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperPriors {
    pub mu_psi0: f64,
    pub lambda2_psi0: f64,
    pub a1: f64,
    pub b1: f64,
    pub mu_phi0: f64,
    pub lambda2_phi0: f64,
    pub a2: f64,
    pub b2: f64,
}

impl Default for HyperPriors {
    fn default() -> Self {
        Self {
            mu_psi0: -1.0,
            lambda2_psi0: 100.0,
            a1: 1.0,
            b1: 0.1,
            mu_phi0: 1.0,
            lambda2_phi0: 100.0,
            a2: 1.0,
            b2: 0.1,
        }
    }
}

impl HyperPriors {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.lambda2_psi0, self.a1, self.b1, self.lambda2_phi0, self.a2, self.b2];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::validation("prior variances and inverse-gamma parameters must be positive"));
        }
        Ok(())
    }
}

/// Full conditional of a normal mean with known variance `var` and prior
/// `N(prior_mean, prior_var)`: returns `(posterior mean, posterior variance)`.
pub fn normal_mean_conditional(sum: f64, count: usize, var: f64, prior_mean: f64, prior_var: f64) -> (f64, f64) {
    let post_var = 1.0 / (count as f64 / var + 1.0 / prior_var);
    ((sum / var + prior_mean / prior_var) * post_var, post_var)
}

/// Full conditional `IG((count + a)/2, (ss + b)/2)` of a normal variance
/// under an `IG(a/2, b/2)` prior: returns `(shape, rate)`.
pub fn variance_conditional(ss: f64, count: usize, a: f64, b: f64) -> (f64, f64) {
    ((count as f64 + a) / 2.0, (ss + b) / 2.0)
}

/// Gibbs draw of a population mean given member values.
pub fn draw_population_mean(rng: &mut Rng, values: &[f64], var: f64, prior_mean: f64, prior_var: f64) -> f64 {
    let (m, v) = normal_mean_conditional(values.iter().sum(), values.len(), var, prior_mean, prior_var);
    m + v.sqrt() * rng.std_normal()
}

/// Gibbs draw of a population variance given member values and their mean.
pub fn draw_population_variance(rng: &mut Rng, values: &[f64], mean: f64, a: f64, b: f64) -> f64 {
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum();
    let (shape, rate) = variance_conditional(ss, values.len(), a, b);
    assert!(rate > 0.0, "inverse-gamma rate must be positive");
    rng.inv_gamma(shape, rate).expect("valid inverse-gamma parameters")
}

/// Gibbs draw of the residual variance in the normal model.
pub fn draw_residual_variance(rng: &mut Rng, data: &DiscountData, psi: &[f64], a: f64, b: f64) -> f64 {
    let ss: f64 = data
        .subjects
        .iter()
        .zip(psi)
        .map(|(obs, &p)| residual_ss(obs, p))
        .sum();
    let (shape, rate) = variance_conditional(ss, data.n_obs(), a, b);
    assert!(rate > 0.0, "inverse-gamma rate must be positive");
    rng.inv_gamma(shape, rate).expect("valid inverse-gamma parameters")
}

fn residual_ss(obs: &[(f64, f64)], psi: f64) -> f64 {
    obs.iter().map(|&(d, y)| (y - discount_mean(psi, d)).powi(2)).sum()
}

fn sltb_subject_loglik(sl: &ScaleLocation, obs: &[(f64, f64)], psi: f64, ln_phi: f64) -> f64 {
    let phi = ln_phi.exp();
    let lg = ln_gamma(phi);
    obs.iter()
        .map(|&(d, y)| sl.ln_pdf_with(y, discount_mean(psi, d), phi, lg))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlinearModel {
    Sltb,
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearConfig {
    pub chain: ChainSettings,
    pub seed: u64,
    pub priors: HyperPriors,
    pub s: f64,
    pub l: f64,
    /// `false` drops the data term so subject parameters follow the
    /// population law.
    pub likelihood: bool,
    /// `false` holds the population parameters at their initial values.
    pub update_population: bool,
}

impl Default for NonlinearConfig {
    fn default() -> Self {
        Self {
            chain: ChainSettings {
                iterations: 20_000,
                burnin: 5_000,
                thin: 5,
            },
            seed: 11,
            priors: HyperPriors::default(),
            s: DEFAULT_SCALE,
            l: DEFAULT_LOCATION,
            likelihood: true,
            update_population: true,
        }
    }
}

impl NonlinearConfig {
    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        self.priors.validate()?;
        ScaleLocation::new(self.s, self.l)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlinearChainState {
    pub psi: Vec<f64>,
    pub ln_phi: Vec<f64>,
    pub mu_psi: f64,
    pub sigma2_psi: f64,
    pub mu_phi: f64,
    pub sigma2_phi: f64,
    /// Residual variance of the normal model.
    pub sigma2: f64,
}

pub const PSI_RANGE: (f64, f64) = (-12.0, 2.0);
const LN_PHI_RANGE: (f64, f64) = (-2.0, 10.0);

fn grid_psi(sl: &ScaleLocation, obs: &[(f64, f64)], ln_phi: f64) -> f64 {
    let steps = 281;
    (0..steps)
        .map(|k| PSI_RANGE.0 + (PSI_RANGE.1 - PSI_RANGE.0) * k as f64 / (steps - 1) as f64)
        .map(|p| (p, sltb_subject_loglik(sl, obs, p, ln_phi)))
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map_or(PSI_RANGE.0, |(p, _)| p)
}

/// Per-subject SLTB maximum-likelihood `(ψ̂, ln φ̂)`, clamped to the working
/// ranges; falls back to a grid search over `ψ` when the fit fails.
pub fn subject_mle(sl: &ScaleLocation, obs: &[(f64, f64)]) -> (f64, f64) {
    let ln_phi0 = 10f64.ln();
    let psi0 = grid_psi(sl, obs, ln_phi0);
    let objective = |t: &[f64]| -sltb_subject_loglik(sl, obs, t[0], t[1]);
    let opts = OptimOptions {
        simplex_iters: 300,
        bfgs_iters: 200,
        gradient_tol: 1e-7,
    };
    match minimize(objective, &[psi0, ln_phi0], &opts) {
        Ok(r) if r.value.is_finite() => (
            r.x[0].clamp(PSI_RANGE.0, PSI_RANGE.1),
            r.x[1].clamp(LN_PHI_RANGE.0, LN_PHI_RANGE.1),
        ),
        _ => (psi0, ln_phi0),
    }
}

/// Starting state: subject values drawn from normals matched to the
/// per-subject estimates, population variances at `10²`.
pub fn initialize_chain(data: &DiscountData, cfg: &NonlinearConfig, rng: &mut Rng) -> Result<NonlinearChainState> {
    let sl = ScaleLocation { s: cfg.s, l: cfg.l };
    let (psi_hat, ln_phi_hat): (Vec<f64>, Vec<f64>) = data.subjects.iter().map(|obs| subject_mle(&sl, obs)).unzip();
    let spread = |v: &[f64]| if v.len() > 1 { stats::variance(v).sqrt() } else { 0.0 };
    let (mp, sp) = (stats::mean(&psi_hat), spread(&psi_hat));
    let (mf, sf) = (stats::mean(&ln_phi_hat), spread(&ln_phi_hat));
    let psi = (0..data.n_subjects()).map(|_| mp + sp * rng.std_normal()).collect();
    let ln_phi = (0..data.n_subjects()).map(|_| mf + sf * rng.std_normal()).collect();
    Ok(NonlinearChainState {
        psi,
        ln_phi,
        mu_psi: mp,
        sigma2_psi: 100.0,
        mu_phi: mf,
        sigma2_phi: 100.0,
        sigma2: 100.0,
    })
}

#[inline]
fn normal_ln_kernel(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (x - mean).powi(2) / var
}

/// Random-walk Metropolis update of one subject parameter with proposal
/// variance `0.5·pop_var`, accepting with the standard posterior ratio.
/// `lik(x)` returns the subject log-likelihood at `x`; `cached` is its value
/// at `current` and is updated on acceptance.
fn subject_step(
    rng: &mut Rng,
    current: &mut f64,
    cached: &mut f64,
    pop_mean: f64,
    pop_var: f64,
    lik: impl Fn(f64) -> f64,
) -> bool {
    let proposal = *current + (0.5 * pop_var).sqrt() * rng.std_normal();
    let ll = lik(proposal);
    let log_ratio =
        normal_ln_kernel(proposal, pop_mean, pop_var) + ll - normal_ln_kernel(*current, pop_mean, pop_var) - *cached;
    let accept = log_ratio.is_finite() && rng.uniform01().ln() < log_ratio;
    if accept {
        *current = proposal;
        *cached = ll;
    }
    accept
}

#[derive(Debug, Clone, Serialize)]
pub struct NonlinearFit {
    pub model: NonlinearModel,
    pub summary: PosteriorSummary,
    #[serde(skip)]
    pub draws: Draws,
    #[serde(skip)]
    pub initial: NonlinearChainState,
}

fn population_names(model: NonlinearModel) -> Vec<&'static str> {
    match model {
        NonlinearModel::Sltb => vec!["mu_psi", "sigma2_psi", "mu_phi", "sigma2_phi"],
        NonlinearModel::Normal => vec!["mu_psi", "sigma2_psi", "sigma2"],
    }
}

/// Runs either sampler from an initialization drawn with the chain's RNG.
pub fn sample(model: NonlinearModel, data: &DiscountData, cfg: &NonlinearConfig) -> Result<NonlinearFit> {
    cfg.validate()?;
    data.validate()?;
    let mut rng = Rng::seed_from(cfg.seed);
    let init = initialize_chain(data, cfg, &mut rng)?;
    sample_from(model, data, cfg, init, &mut rng)
}

pub fn sltb_hier_sample(data: &DiscountData, cfg: &NonlinearConfig) -> Result<NonlinearFit> {
    sample(NonlinearModel::Sltb, data, cfg)
}

pub fn normal_hier_sample(data: &DiscountData, cfg: &NonlinearConfig) -> Result<NonlinearFit> {
    sample(NonlinearModel::Normal, data, cfg)
}

pub fn sample_from(
    model: NonlinearModel,
    data: &DiscountData,
    cfg: &NonlinearConfig,
    init: NonlinearChainState,
    rng: &mut Rng,
) -> Result<NonlinearFit> {
    cfg.validate()?;
    let n = data.n_subjects();
    if init.psi.len() != n || init.ln_phi.len() != n {
        return Err(Error::validation("initial state does not match the number of subjects"));
    }
    let sl = ScaleLocation { s: cfg.s, l: cfg.l };
    let pr = cfg.priors;
    let mut st = init.clone();

    let sltb_lik = |i: usize, psi: f64, ln_phi: f64| {
        if cfg.likelihood {
            sltb_subject_loglik(&sl, &data.subjects[i], psi, ln_phi)
        } else {
            0.0
        }
    };
    let mut cache: Vec<f64> = match model {
        NonlinearModel::Sltb => (0..n).map(|i| sltb_lik(i, st.psi[i], st.ln_phi[i])).collect(),
        NonlinearModel::Normal => (0..n).map(|i| residual_ss(&data.subjects[i], st.psi[i])).collect(),
    };

    let mut names: Vec<String> = population_names(model).iter().map(|s| s.to_string()).collect();
    names.extend((1..=n).map(|i| format!("psi[{i}]")));
    let mut draws = Draws::new(names);
    let mut psi_acc = AcceptCounter::default();
    let mut phi_acc = AcceptCounter::default();

    for it in 0..cfg.chain.iterations {
        if it == cfg.chain.burnin {
            psi_acc = AcceptCounter::default();
            phi_acc = AcceptCounter::default();
        }
        if cfg.update_population {
            st.mu_psi = draw_population_mean(rng, &st.psi, st.sigma2_psi, pr.mu_psi0, pr.lambda2_psi0);
            st.sigma2_psi = draw_population_variance(rng, &st.psi, st.mu_psi, pr.a1, pr.b1);
        }
        match model {
            NonlinearModel::Sltb => {
                for i in 0..n {
                    let ln_phi = st.ln_phi[i];
                    let ok = subject_step(rng, &mut st.psi[i], &mut cache[i], st.mu_psi, st.sigma2_psi, |p| {
                        sltb_lik(i, p, ln_phi)
                    });
                    psi_acc.record(ok);
                }
                if cfg.update_population {
                    st.mu_phi = draw_population_mean(rng, &st.ln_phi, st.sigma2_phi, pr.mu_phi0, pr.lambda2_phi0);
                    st.sigma2_phi = draw_population_variance(rng, &st.ln_phi, st.mu_phi, pr.a2, pr.b2);
                }
                for i in 0..n {
                    let psi = st.psi[i];
                    let ok = subject_step(rng, &mut st.ln_phi[i], &mut cache[i], st.mu_phi, st.sigma2_phi, |f| {
                        sltb_lik(i, psi, f)
                    });
                    phi_acc.record(ok);
                }
            }
            NonlinearModel::Normal => {
                if cfg.update_population {
                    st.sigma2 = draw_residual_variance(rng, data, &st.psi, pr.a2, pr.b2);
                }
                let var = st.sigma2;
                for i in 0..n {
                    let obs = &data.subjects[i];
                    let lik = |p: f64| if cfg.likelihood { -0.5 * residual_ss(obs, p) / var } else { 0.0 };
                    let mut ll = lik(st.psi[i]);
                    let ok = subject_step(rng, &mut st.psi[i], &mut ll, st.mu_psi, st.sigma2_psi, lik);
                    if ok {
                        cache[i] = residual_ss(obs, st.psi[i]);
                    }
                    psi_acc.record(ok);
                }
            }
        }
        if cfg.chain.keeps(it) {
            let mut row = match model {
                NonlinearModel::Sltb => vec![st.mu_psi, st.sigma2_psi, st.mu_phi, st.sigma2_phi],
                NonlinearModel::Normal => vec![st.mu_psi, st.sigma2_psi, st.sigma2],
            };
            row.extend_from_slice(&st.psi);
            draws.push(row);
        }
    }

    let mut acceptance = vec![("psi".to_owned(), psi_acc.rate())];
    if model == NonlinearModel::Sltb {
        acceptance.push(("ln_phi".to_owned(), phi_acc.rate()));
    }
    let mut summary = PosteriorSummary {
        params: summarize_draws(&draws, &population_names(model)),
        acceptance: acceptance.into_iter().collect(),
        warnings: Vec::new(),
        iterations: cfg.chain.iterations,
        burnin: cfg.chain.burnin,
        thin: cfg.chain.thin,
        retained: draws.len(),
    };
    summary.check_acceptance();
    Ok(NonlinearFit {
        model,
        summary,
        draws,
        initial: init,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discount_mean_limits() {
        for d in [1.0, 365.0, 1e5] {
            assert!((discount_mean(-40.0, d) - 1.0).abs() < 1e-12);
        }
        assert!((discount_mean(0.0, 1.0) - 0.5).abs() < 1e-15);
        let want = 1.0 / (1.0 + (-4.87f64).exp() * 365.0);
        assert!((discount_mean(-4.87, 365.0) - want).abs() < 1e-15);
        assert!(discount_mean(-3.0, 10.0) > discount_mean(-3.0, 11.0));
        assert!(discount_mean(-3.0, 10.0) > discount_mean(-2.9, 10.0));
    }

    #[test]
    fn step_one_arithmetic() {
        let psi = [1.0, 2.0, 3.0, 4.0];
        let (m, v) = normal_mean_conditional(psi.iter().sum(), 4, 1.0, 0.0, 1e6);
        assert!((v - 1.0 / (4.0 + 1e-6)).abs() < 1e-18);
        assert!((m - 10.0 * v).abs() < 1e-15);
        assert!((m - 2.499_999_4).abs() < 1e-7);
    }

    #[test]
    fn inverse_gamma_arithmetic() {
        assert_eq!(variance_conditional(5.0, 4, 1.0, 0.1), (2.5, 2.55));
        let (shape, rate) = variance_conditional(0.3, 12, 1.0, 0.1);
        assert_eq!(shape, 6.5);
        assert!((rate - 0.2).abs() < 1e-16);
    }

    #[test]
    fn simulated_values_in_range() {
        let cfg = DiscountSimConfig {
            n_subjects: 20,
            ..DiscountSimConfig::default()
        };
        let sim = gen_discount_data(&cfg).unwrap();
        assert_eq!(sim.data.n_obs(), 120);
        assert!(sim.data.subjects.iter().flatten().all(|&(_, y)| (0.0..=1.0).contains(&y)));
        let back = DiscountData::from_table(&sim.data.to_table().unwrap()).unwrap();
        assert_eq!(back, sim.data);
    }

    #[test]
    fn psi_mean_follows_law_of_large_numbers() {
        let cfg = DiscountSimConfig {
            n_subjects: 10_000,
            ..DiscountSimConfig::default()
        };
        let sim = gen_discount_data(&cfg).unwrap();
        let sd = cfg.truth.sigma2_psi.sqrt();
        assert!((stats::mean(&sim.psi) - cfg.truth.mu_psi).abs() < 4.0 * sd / 100.0);
    }

    #[test]
    fn flat_subject_has_strongly_negative_psi() {
        let obs: Vec<(f64, f64)> = DEFAULT_DELAYS.iter().map(|&d| (d, 1.0)).collect();
        let (psi, _) = subject_mle(&ScaleLocation::default(), &obs);
        assert!(psi < -8.0, "{psi}");
    }

    #[test]
    fn identical_subjects_start_together() {
        let obs: Vec<(f64, f64)> = DEFAULT_DELAYS.iter().map(|&d| (d, discount_mean(-4.0, d))).collect();
        let data = DiscountData {
            subjects: vec![obs; 5],
        };
        let mut rng = Rng::seed_from(2);
        let st = initialize_chain(&data, &NonlinearConfig::default(), &mut rng).unwrap();
        let spread = st.psi.iter().fold(0f64, |m, p| m.max((p - st.mu_psi).abs()));
        assert!(spread < 1e-6, "{spread}");
        assert!((st.mu_psi + 4.0).abs() < 0.05);
        assert_eq!(st.sigma2_psi, 100.0);
    }

    #[test]
    fn samplers_are_deterministic() {
        let sim = gen_discount_data(&DiscountSimConfig {
            n_subjects: 8,
            ..DiscountSimConfig::default()
        })
        .unwrap();
        let cfg = NonlinearConfig {
            chain: ChainSettings {
                iterations: 300,
                burnin: 100,
                thin: 1,
            },
            ..NonlinearConfig::default()
        };
        for model in [NonlinearModel::Sltb, NonlinearModel::Normal] {
            let a = sample(model, &sim.data, &cfg).unwrap();
            let b = sample(model, &sim.data, &cfg).unwrap();
            assert_eq!(a.draws, b.draws);
            for row in &a.draws.rows {
                let k = population_names(model).len();
                for &psi in &row[k..] {
                    assert!(discount_mean(psi, 30.0) > discount_mean(psi, 31.0));
                }
            }
        }
    }

    #[test]
    fn single_subject_shrinkage_limit() {
        let obs: Vec<(f64, f64)> = DEFAULT_DELAYS.iter().map(|&d| (d, discount_mean(-3.0, d))).collect();
        let data = DiscountData { subjects: vec![obs] };
        let cfg = NonlinearConfig {
            chain: ChainSettings {
                iterations: 20_000,
                burnin: 2_000,
                thin: 1,
            },
            priors: HyperPriors {
                lambda2_psi0: 1e6,
                ..HyperPriors::default()
            },
            ..NonlinearConfig::default()
        };
        let fit = normal_hier_sample(&data, &cfg).unwrap();
        let mu = fit.summary.param("mu_psi").unwrap().mean;
        let psi = stats::mean(&fit.draws.column("psi[1]").unwrap());
        let sd = fit.summary.param("mu_psi").unwrap().sd;
        assert!((mu - psi).abs() < 0.1 * sd.max(1.0), "mu {mu} psi {psi}");
    }
}
