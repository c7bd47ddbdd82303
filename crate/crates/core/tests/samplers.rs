use sltb_core::data::TabularDataset;
use sltb_core::hier_linear::{self, HierLinearConfig, HierLinearData, ProposalScales};
use sltb_core::hier_nonlinear::*;
use sltb_core::mcmc::ChainSettings;
use sltb_core::numeric::rng::Rng;
use sltb_core::numeric::stats::{ks_critical_001, ks_statistic};
use statrs::distribution::{ContinuousCDF, InverseGamma, Normal};

const DRAWS: usize = 100_000;

fn assert_ks(sample: &[f64], cdf: impl Fn(f64) -> f64, what: &str) {
    let d = ks_statistic(sample, cdf);
    let crit = ks_critical_001(sample.len());
    assert!(d < crit, "{what}: KS {d:.5} >= {crit:.5}");
}

fn members() -> Vec<f64> {
    (0..40).map(|i| -4.0 + 0.37 * ((i * 7 % 13) as f64 - 6.0)).collect()
}

#[test]
fn population_mean_draws_match_normal_conditional() {
    let values = members();
    let (var, m0, v0) = (0.8, -1.0, 100.0);
    let precision = values.len() as f64 / var + 1.0 / v0;
    let mean = (values.iter().sum::<f64>() / var + m0 / v0) / precision;
    let oracle = Normal::new(mean, precision.recip().sqrt()).unwrap();
    let mut rng = Rng::seed_from(31);
    let draws: Vec<f64> = (0..DRAWS)
        .map(|_| draw_population_mean(&mut rng, &values, var, m0, v0))
        .collect();
    assert_ks(&draws, |x| oracle.cdf(x), "population mean");
}

#[test]
fn population_variance_draws_match_inverse_gamma_conditional() {
    let values = members();
    let (mean, a, b) = (-4.1, 1.0, 0.1);
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let oracle = InverseGamma::new((values.len() as f64 + a) / 2.0, (ss + b) / 2.0).unwrap();
    let mut rng = Rng::seed_from(32);
    let draws: Vec<f64> = (0..DRAWS)
        .map(|_| draw_population_variance(&mut rng, &values, mean, a, b))
        .collect();
    assert_ks(&draws, |x| oracle.cdf(x), "population variance");
}

#[test]
fn precision_block_uses_the_same_conditionals() {
    let values: Vec<f64> = members().iter().map(|v| 4.4 + 0.3 * v).collect();
    let p = HyperPriors::default();
    let var = 0.5;
    let precision = values.len() as f64 / var + 1.0 / p.lambda2_phi0;
    let mean = (values.iter().sum::<f64>() / var + p.mu_phi0 / p.lambda2_phi0) / precision;
    let normal = Normal::new(mean, precision.recip().sqrt()).unwrap();
    let ss: f64 = values.iter().map(|v| (v - 4.4).powi(2)).sum();
    let ig = InverseGamma::new((values.len() as f64 + p.a2) / 2.0, (ss + p.b2) / 2.0).unwrap();
    let mut rng = Rng::seed_from(33);
    let means: Vec<f64> = (0..DRAWS)
        .map(|_| draw_population_mean(&mut rng, &values, var, p.mu_phi0, p.lambda2_phi0))
        .collect();
    let vars: Vec<f64> = (0..DRAWS)
        .map(|_| draw_population_variance(&mut rng, &values, 4.4, p.a2, p.b2))
        .collect();
    assert_ks(&means, |x| normal.cdf(x), "precision mean");
    assert_ks(&vars, |x| ig.cdf(x), "precision variance");
}

#[test]
fn residual_variance_draws_match_inverse_gamma_conditional() {
    let sim = gen_discount_data(&DiscountSimConfig {
        n_subjects: 15,
        ..Default::default()
    })
    .unwrap();
    let psi = sim.psi.clone();
    let ssr: f64 = sim
        .data
        .subjects
        .iter()
        .zip(&psi)
        .flat_map(|(obs, &p)| obs.iter().map(move |&(d, y)| (y - 1.0 / (1.0 + (p + d.ln()).exp())).powi(2)))
        .sum();
    let n = (15 * DEFAULT_DELAYS.len()) as f64;
    let oracle = InverseGamma::new((n + 1.0) / 2.0, (ssr + 0.1) / 2.0).unwrap();
    let mut rng = Rng::seed_from(34);
    let draws: Vec<f64> = (0..DRAWS)
        .map(|_| draw_residual_variance(&mut rng, &sim.data, &psi, 1.0, 0.1))
        .collect();
    assert_ks(&draws, |x| oracle.cdf(x), "residual variance");
}

fn long_chain() -> ChainSettings {
    ChainSettings {
        iterations: 1_005_000,
        burnin: 5_000,
        thin: 10,
    }
}

#[test]
fn subject_update_targets_population_prior_without_data() {
    let data = DiscountData {
        subjects: vec![vec![(1.0, 0.9), (30.0, 0.4)], vec![(7.0, 0.6)]],
    };
    let cfg = NonlinearConfig {
        chain: long_chain(),
        likelihood: false,
        update_population: false,
        ..Default::default()
    };
    let init = NonlinearChainState {
        psi: vec![-1.0, 0.0],
        ln_phi: vec![1.0, 1.0],
        mu_psi: -2.0,
        sigma2_psi: 0.6,
        mu_phi: 1.0,
        sigma2_phi: 0.4,
        sigma2: 1.0,
    };
    let mut rng = Rng::seed_from(35);
    let fit = sample_from(NonlinearModel::Sltb, &data, &cfg, init, &mut rng).unwrap();
    let psi1 = fit.draws.column("psi[1]").unwrap();
    assert_eq!(psi1.len(), DRAWS);
    let oracle = Normal::new(-2.0, 0.6_f64.sqrt()).unwrap();
    assert_ks(&psi1, |x| oracle.cdf(x), "psi[1]");
}

fn small_panel() -> TabularDataset {
    let mut county = Vec::new();
    let mut gender = Vec::new();
    let mut grade = Vec::new();
    let mut days = Vec::new();
    for c in ["a", "b"] {
        for g in ["F", "M"] {
            for gr in [7.0, 9.0, 11.0] {
                for d in [0.0, 14.5] {
                    county.push(c);
                    gender.push(g);
                    grade.push(gr);
                    days.push(d);
                }
            }
        }
    }
    let y = vec![0.05; county.len()];
    TabularDataset::new()
        .with_factor("county", &county)
        .unwrap()
        .with_factor("gender", &gender)
        .unwrap()
        .with_numeric("grade", grade)
        .unwrap()
        .with_numeric("medDays", days)
        .unwrap()
        .with_numeric("y", y)
        .unwrap()
}

#[test]
fn fixed_effect_update_targets_its_prior_without_data() {
    let data = HierLinearData::from_table(&small_panel()).unwrap();
    let cfg = HierLinearConfig {
        chain: long_chain(),
        likelihood: false,
        adapt: false,
        warm_start: false,
        scales: ProposalScales {
            beta: 60.0,
            ..ProposalScales::default()
        },
        ..HierLinearConfig::default()
    };
    let fit = hier_linear::run_chain(&data, &cfg).unwrap();
    let b0 = fit.draws.column("(Intercept)").unwrap();
    assert_eq!(b0.len(), DRAWS);
    let oracle = Normal::new(0.0, cfg.prior_variance.sqrt()).unwrap();
    assert_ks(&b0, |x| oracle.cdf(x), "intercept");
}
