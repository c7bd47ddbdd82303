//! Hierarchical SLTB regression with a random intercept per group, sampled
//! by Metropolis-within-Gibbs.
//!
//! `logit μ_r = x_rᵀβ + u_{g(r)}`, `ln φ = η`, with `β_k, η ~ N(0, V)`,
//! `u_i ~ N(0, σ²)` and `σ ~ Uniform(0, σ_max)`.

use serde::{Deserialize, Serialize};

use crate::data::{Column, TabularDataset};
use crate::distributions::sltb::{ScaleLocation, DEFAULT_LOCATION, DEFAULT_SCALE};
use crate::error::{Error, Result};
use crate::mcmc::{pooled_rate, summarize_draws, AdaptiveScale, ChainSettings, Draws, PosteriorSummary};
use crate::numeric::optimize::OptimOptions;
use crate::numeric::rng::Rng;
use crate::numeric::special::{inv_logit, ln_gamma};
use crate::numeric::stats;
use crate::regression::{fit_design, starting_values, Design, Family};

pub const FIXED_EFFECTS: [&str; 7] = [
    "(Intercept)",
    "GenderM",
    "Grade9",
    "Grade11",
    "MedDays",
    "Grade9:GenderM",
    "Grade11:GenderM",
];

/// Rows with a group index and seven fixed-effect predictors; grade 7 and
/// female are the reference levels and `MedDays` is standardized.
#[derive(Debug, Clone)]
pub struct HierLinearData {
    pub y: Vec<f64>,
    /// Row-major `n × 7`.
    x: Vec<f64>,
    pub group: Vec<usize>,
    pub group_labels: Vec<String>,
    members: Vec<Vec<usize>>,
}

const P: usize = FIXED_EFFECTS.len();

fn labels(column: &Column) -> Vec<String> {
    match column {
        Column::Numeric(v) => v.iter().map(|x| crate::data::format_number(*x).trim_end_matches(".0").to_owned()).collect(),
        Column::Factor { levels, codes } => codes.iter().map(|&c| levels[c].clone()).collect(),
    }
}

impl HierLinearData {
    /// Expects columns `county`, `gender`, `grade`, `medDays` and `y`.
    pub fn from_table(table: &TabularDataset) -> Result<Self> {
        let y = table.response("y")?.to_vec();
        let county = labels(table.column("county")?);
        let gender = labels(table.column("gender")?);
        let grade = labels(table.column("grade")?);
        let days = table.numeric("medDays")?;

        let sd = stats::variance(days).sqrt();
        if !(sd > 0.0) {
            return Err(Error::validation("medDays is constant"));
        }
        let m = stats::mean(days);

        let mut x = Vec::with_capacity(y.len() * P);
        for r in 0..y.len() {
            let male = match gender[r].to_ascii_lowercase().as_str() {
                "m" | "male" => 1.0,
                "f" | "female" => 0.0,
                other => return Err(Error::validation(format!("row {}: unknown gender '{other}'", r + 1))),
            };
            let (g9, g11) = match grade[r].as_str() {
                "7" => (0.0, 0.0),
                "9" => (1.0, 0.0),
                "11" => (0.0, 1.0),
                other => return Err(Error::validation(format!("row {}: grade must be 7, 9 or 11, got '{other}'", r + 1))),
            };
            x.extend_from_slice(&[1.0, male, g9, g11, (days[r] - m) / sd, g9 * male, g11 * male]);
        }
        let mut group_labels = county.clone();
        group_labels.sort_by(|a, b| match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(p), Ok(q)) => p.total_cmp(&q),
            _ => a.cmp(b),
        });
        group_labels.dedup();
        let group: Vec<usize> = county
            .iter()
            .map(|c| group_labels.iter().position(|g| g == c).unwrap())
            .collect();
        let mut members = vec![Vec::new(); group_labels.len()];
        for (r, &g) in group.iter().enumerate() {
            members[g].push(r);
        }
        Ok(Self {
            y,
            x,
            group,
            group_labels,
            members,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_groups(&self) -> usize {
        self.group_labels.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.x[r * P..(r + 1) * P]
    }

    fn fixed_part(&self, r: usize, beta: &[f64]) -> f64 {
        self.row(r).iter().zip(beta).map(|(a, b)| a * b).sum()
    }

    fn design(&self) -> Design {
        let cols = (1..P)
            .map(|k| (FIXED_EFFECTS[k].to_owned(), (0..self.n_rows()).map(|r| self.row(r)[k]).collect()))
            .collect();
        Design::from_columns_unchecked(self.n_rows(), cols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProposalScales {
    pub beta: f64,
    pub eta: f64,
    pub u: f64,
    pub log_sigma: f64,
}

impl Default for ProposalScales {
    fn default() -> Self {
        Self {
            beta: 0.05,
            eta: 0.05,
            u: 0.3,
            log_sigma: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HierLinearConfig {
    pub chain: ChainSettings,
    pub seed: u64,
    /// Variance of the normal priors on `β_k` and `η`.
    pub prior_variance: f64,
    pub sigma_upper: f64,
    pub s: f64,
    pub l: f64,
    pub scales: ProposalScales,
    pub adapt: bool,
    /// `false` drops the data term so the chain targets the prior.
    pub likelihood: bool,
    /// `false` holds `σ` at `initial_sigma`.
    pub update_sigma: bool,
    pub initial_sigma: f64,
    /// Start `β, η` at the fixed-effects SLTB fit instead of the logit OLS fit.
    pub warm_start: bool,
}

impl Default for HierLinearConfig {
    fn default() -> Self {
        Self {
            chain: ChainSettings {
                iterations: 20_000,
                burnin: 5_000,
                thin: 5,
            },
            seed: 1,
            prior_variance: 1e3,
            sigma_upper: 20.0,
            s: DEFAULT_SCALE,
            l: DEFAULT_LOCATION,
            scales: ProposalScales::default(),
            adapt: true,
            likelihood: true,
            update_sigma: true,
            initial_sigma: 1.0,
            warm_start: true,
        }
    }
}

impl HierLinearConfig {
    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        ScaleLocation::new(self.s, self.l)?;
        let sc = &self.scales;
        if [sc.beta, sc.eta, sc.u, sc.log_sigma].iter().any(|v| !(*v > 0.0)) {
            return Err(Error::validation("proposal scales must be positive"));
        }
        if !(self.prior_variance > 0.0) || !(self.sigma_upper > 0.0) {
            return Err(Error::validation("prior variance and sigma upper bound must be positive"));
        }
        if !(self.initial_sigma > 0.0 && self.initial_sigma < self.sigma_upper) {
            return Err(Error::validation("initial sigma must lie in (0, sigma_upper)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainState {
    pub beta: Vec<f64>,
    pub u: Vec<f64>,
    pub eta: f64,
    pub sigma: f64,
    pub iteration: usize,
}

/// Log-likelihood of the full data at `state`; errors name the first row
/// whose contribution is not finite.
pub fn hier_linear_loglik(state: &ChainState, data: &HierLinearData, sl: ScaleLocation) -> Result<f64> {
    let phi = state.eta.exp();
    let mut total = 0.0;
    for r in 0..data.n_rows() {
        let mu = inv_logit(data.fixed_part(r, &state.beta) + state.u[data.group[r]]);
        let v = sl.ln_pdf(data.y[r], mu, phi);
        if !v.is_finite() {
            return Err(Error::non_finite(format!("hierarchical log-likelihood at row {}", r + 1)));
        }
        total += v;
    }
    Ok(total)
}

/// `(φ, ln Γ(φ))` for `φ = exp(η)`.
fn precision(eta: f64) -> (f64, f64) {
    let phi = eta.exp();
    (phi, ln_gamma(phi))
}

#[inline]
fn std_normal_ln_kernel(x: f64, var: f64) -> f64 {
    -0.5 * x * x / var
}

/// Metropolis-within-Gibbs sampler with cached per-row linear predictors and
/// log-likelihood terms.
#[derive(Debug, Clone)]
pub struct HierLinearSampler<'a> {
    data: &'a HierLinearData,
    cfg: HierLinearConfig,
    sl: ScaleLocation,
    pub state: ChainState,
    lp: Vec<f64>,
    ll: Vec<f64>,
    proposal_lp: Vec<f64>,
    proposal_ll: Vec<f64>,
    beta_scales: Vec<AdaptiveScale>,
    eta_scale: AdaptiveScale,
    u_scales: Vec<AdaptiveScale>,
    sigma_scale: AdaptiveScale,
}

impl<'a> HierLinearSampler<'a> {
    pub fn new(data: &'a HierLinearData, cfg: &HierLinearConfig) -> Result<Self> {
        cfg.validate()?;
        let init = initial_state(data, cfg)?;
        Self::with_state(data, cfg, init)
    }

    pub fn with_state(data: &'a HierLinearData, cfg: &HierLinearConfig, state: ChainState) -> Result<Self> {
        cfg.validate()?;
        if state.beta.len() != P || state.u.len() != data.n_groups() {
            return Err(Error::validation("chain state does not match the data dimensions"));
        }
        let sl = ScaleLocation { s: cfg.s, l: cfg.l };
        let n = data.n_rows();
        let sc = cfg.scales;
        let mut sampler = Self {
            data,
            cfg: cfg.clone(),
            sl,
            state,
            lp: vec![0.0; n],
            ll: vec![0.0; n],
            proposal_lp: vec![0.0; n],
            proposal_ll: vec![0.0; n],
            beta_scales: vec![AdaptiveScale::new(sc.beta); P],
            eta_scale: AdaptiveScale::new(sc.eta),
            u_scales: vec![AdaptiveScale::new(sc.u); data.n_groups()],
            sigma_scale: AdaptiveScale::new(sc.log_sigma),
        };
        sampler.refresh()?;
        Ok(sampler)
    }

    fn refresh(&mut self) -> Result<()> {
        let phi = precision(self.state.eta);
        for r in 0..self.data.n_rows() {
            self.lp[r] = self.data.fixed_part(r, &self.state.beta) + self.state.u[self.data.group[r]];
            self.ll[r] = self.row_ll(r, self.lp[r], phi);
            if !self.ll[r].is_finite() {
                return Err(Error::non_finite(format!("hierarchical log-likelihood at row {}", r + 1)));
            }
        }
        Ok(())
    }

    #[inline]
    fn row_ll(&self, r: usize, lp: f64, phi: (f64, f64)) -> f64 {
        if self.cfg.likelihood {
            self.sl.ln_pdf_with(self.data.y[r], inv_logit(lp), phi.0, phi.1)
        } else {
            0.0
        }
    }

    pub fn loglik(&self) -> f64 {
        self.ll.iter().sum()
    }

    /// Accepts the pending row proposals for `rows` when `accept`.
    fn commit(&mut self, rows: impl Iterator<Item = usize>) {
        for r in rows {
            self.lp[r] = self.proposal_lp[r];
            self.ll[r] = self.proposal_ll[r];
        }
    }

    fn update_beta(&mut self, k: usize, rng: &mut Rng, adapting: bool) {
        let current = self.state.beta[k];
        let proposal = current + self.beta_scales[k].scale * rng.std_normal();
        let phi = precision(self.state.eta);
        let delta = proposal - current;
        let mut diff = 0.0;
        for r in 0..self.data.n_rows() {
            let lp = self.lp[r] + delta * self.data.row(r)[k];
            let ll = self.row_ll(r, lp, phi);
            self.proposal_lp[r] = lp;
            self.proposal_ll[r] = ll;
            diff += ll - self.ll[r];
        }
        let v = self.cfg.prior_variance;
        let log_ratio = diff + std_normal_ln_kernel(proposal, v) - std_normal_ln_kernel(current, v);
        let accept = log_ratio.is_finite() && rng.uniform01().ln() < log_ratio;
        if accept {
            self.state.beta[k] = proposal;
            self.commit(0..self.data.n_rows());
        }
        self.beta_scales[k].record(accept, adapting);
    }

    fn update_eta(&mut self, rng: &mut Rng, adapting: bool) {
        let current = self.state.eta;
        let proposal = current + self.eta_scale.scale * rng.std_normal();
        let phi = precision(proposal);
        let mut diff = 0.0;
        for r in 0..self.data.n_rows() {
            let ll = self.row_ll(r, self.lp[r], phi);
            self.proposal_lp[r] = self.lp[r];
            self.proposal_ll[r] = ll;
            diff += ll - self.ll[r];
        }
        let v = self.cfg.prior_variance;
        let log_ratio = diff + std_normal_ln_kernel(proposal, v) - std_normal_ln_kernel(current, v);
        let accept = log_ratio.is_finite() && rng.uniform01().ln() < log_ratio;
        if accept {
            self.state.eta = proposal;
            self.commit(0..self.data.n_rows());
        }
        self.eta_scale.record(accept, adapting);
    }

    fn update_u(&mut self, i: usize, rng: &mut Rng, adapting: bool) {
        let data = self.data;
        let current = self.state.u[i];
        let proposal = current + self.u_scales[i].scale * rng.std_normal();
        let phi = precision(self.state.eta);
        let delta = proposal - current;
        let mut diff = 0.0;
        for &r in &data.members[i] {
            let lp = self.lp[r] + delta;
            let ll = self.row_ll(r, lp, phi);
            self.proposal_lp[r] = lp;
            self.proposal_ll[r] = ll;
            diff += ll - self.ll[r];
        }
        let var = self.state.sigma * self.state.sigma;
        let log_ratio = diff + std_normal_ln_kernel(proposal, var) - std_normal_ln_kernel(current, var);
        let accept = log_ratio.is_finite() && rng.uniform01().ln() < log_ratio;
        if accept {
            self.state.u[i] = proposal;
            self.commit(data.members[i].iter().copied());
        }
        self.u_scales[i].record(accept, adapting);
    }

    /// Random walk on `ln σ`; the `+ ln σ` terms are the Jacobian of that
    /// change of variables under the flat prior on `σ`.
    fn update_sigma(&mut self, rng: &mut Rng, adapting: bool) {
        let current = self.state.sigma;
        let proposal = (current.ln() + self.sigma_scale.scale * rng.std_normal()).exp();
        let accept = if proposal > 0.0 && proposal < self.cfg.sigma_upper {
            let ss: f64 = self.state.u.iter().map(|u| u * u).sum();
            let g = self.state.u.len() as f64;
            let log_target = |s: f64| -g * s.ln() - 0.5 * ss / (s * s) + s.ln();
            let log_ratio = log_target(proposal) - log_target(current);
            rng.uniform01().ln() < log_ratio
        } else {
            false
        };
        if accept {
            self.state.sigma = proposal;
        }
        self.sigma_scale.record(accept, adapting);
    }

    /// One sweep over all blocks: each `β_k`, `η`, each `u_i`, then `σ`.
    pub fn mh_step(&mut self, rng: &mut Rng, adapting: bool) {
        let adapting = adapting && self.cfg.adapt;
        for k in 0..P {
            self.update_beta(k, rng, adapting);
        }
        self.update_eta(rng, adapting);
        for i in 0..self.data.n_groups() {
            self.update_u(i, rng, adapting);
        }
        if self.cfg.update_sigma {
            self.update_sigma(rng, adapting);
        }
        self.state.iteration += 1;
    }

    fn reset_counts(&mut self) {
        self.beta_scales.iter_mut().for_each(AdaptiveScale::reset_counts);
        self.u_scales.iter_mut().for_each(AdaptiveScale::reset_counts);
        self.eta_scale.reset_counts();
        self.sigma_scale.reset_counts();
    }

    fn acceptance(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = FIXED_EFFECTS
            .iter()
            .zip(&self.beta_scales)
            .map(|(n, s)| (format!("beta:{n}"), s.rate()))
            .collect();
        out.push(("eta".into(), self.eta_scale.rate()));
        out.push(("u".into(), pooled_rate(&self.u_scales)));
        if self.cfg.update_sigma {
            out.push(("sigma".into(), self.sigma_scale.rate()));
        }
        out
    }

    /// Current proposal scales, for reporting.
    pub fn scales(&self) -> ProposalScales {
        let mean = |v: &[AdaptiveScale]| v.iter().map(|s| s.scale).sum::<f64>() / v.len() as f64;
        ProposalScales {
            beta: mean(&self.beta_scales),
            eta: self.eta_scale.scale,
            u: mean(&self.u_scales),
            log_sigma: self.sigma_scale.scale,
        }
    }
}

/// `β, η` from a fixed-effects SLTB fit (or the logit OLS fit when that
/// fails or is disabled), `u = 0`, `σ` from the config.
pub fn initial_state(data: &HierLinearData, cfg: &HierLinearConfig) -> Result<ChainState> {
    let design = data.design();
    let family = Family::Sltb { s: cfg.s, l: cfg.l };
    let fitted = if cfg.warm_start && cfg.likelihood {
        fit_design(&design, &data.y, family, &OptimOptions::default()).ok().map(|f| f.theta())
    } else {
        None
    };
    let theta = match fitted {
        Some(t) => t,
        None => starting_values(&design, &data.y, family)?,
    };
    Ok(ChainState {
        beta: theta[..P].to_vec(),
        u: vec![0.0; data.n_groups()],
        eta: theta[P],
        sigma: cfg.initial_sigma,
        iteration: 0,
    })
}

pub fn draw_names(n_groups: usize) -> Vec<String> {
    let mut names: Vec<String> = FIXED_EFFECTS.iter().map(|s| s.to_string()).collect();
    names.push("eta".into());
    names.push("sigma2".into());
    names.extend((1..=n_groups).map(|i| format!("u[{i}]")));
    names
}

#[derive(Debug, Clone, Serialize)]
pub struct HierLinearFit {
    pub summary: PosteriorSummary,
    #[serde(skip)]
    pub draws: Draws,
    /// Posterior-predictive mean `E[s(μ_r − l)]` per row.
    pub fitted: Vec<f64>,
    pub mse: f64,
    pub final_scales: ProposalScales,
}

pub fn run_chain(data: &HierLinearData, cfg: &HierLinearConfig) -> Result<HierLinearFit> {
    let mut sampler = HierLinearSampler::new(data, cfg)?;
    run_sampler(&mut sampler)
}

pub fn run_sampler(sampler: &mut HierLinearSampler<'_>) -> Result<HierLinearFit> {
    let cfg = sampler.cfg.clone();
    let data = sampler.data;
    let chain = cfg.chain;
    let mut rng = Rng::seed_from(cfg.seed);
    let mut draws = Draws::new(draw_names(data.n_groups()));
    let mut fitted = vec![0.0; data.n_rows()];
    for it in 0..chain.iterations {
        if it == chain.burnin {
            sampler.reset_counts();
        }
        sampler.mh_step(&mut rng, it < chain.burnin);
        if chain.keeps(it) {
            let st = &sampler.state;
            let mut row = st.beta.clone();
            row.push(st.eta);
            row.push(st.sigma * st.sigma);
            row.extend_from_slice(&st.u);
            draws.push(row);
            for (f, &lp) in fitted.iter_mut().zip(&sampler.lp) {
                *f += (cfg.s * (inv_logit(lp) - cfg.l)).clamp(0.0, 1.0);
            }
        }
    }
    let kept = draws.len() as f64;
    fitted.iter_mut().for_each(|f| *f /= kept);
    let mse = fitted.iter().zip(&data.y).map(|(f, y)| (y - f).powi(2)).sum::<f64>() / data.n_rows() as f64;

    let mut names: Vec<&str> = FIXED_EFFECTS.to_vec();
    names.extend(["eta", "sigma2"]);
    let mut summary = PosteriorSummary {
        params: summarize_draws(&draws, &names),
        acceptance: sampler.acceptance().into_iter().collect(),
        warnings: Vec::new(),
        iterations: chain.iterations,
        burnin: chain.burnin,
        thin: chain.thin,
        retained: draws.len(),
    };
    summary.check_acceptance();
    Ok(HierLinearFit {
        summary,
        draws,
        fitted,
        mse,
        final_scales: sampler.scales(),
    })
}
