use proptest::prelude::*;
use sltb_core::distributions::{BetaMuPhi, ScaleLocation, SltbParams};
use sltb_core::numeric::quadrature::{integrate, QuadratureRule};
use sltb_core::numeric::rng::Rng;
use sltb_core::numeric::special::reg_inc_beta;

const MUS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const PHIS: [f64; 4] = [0.5, 2.0, 10.0, 50.0];

#[test]
fn density_integrates_to_one_on_grid() {
    let rule = QuadratureRule::graded(20, 1e-13);
    for mu in MUS {
        for phi in PHIS {
            let p = SltbParams::with_defaults(mu, phi).unwrap();
            let total = integrate(|g| p.pdf(g).unwrap(), 0.0, 1.0, &rule).unwrap();
            assert!((total - 1.0).abs() < 1e-8, "mu {mu} phi {phi}: {total}");
        }
    }
}

#[test]
fn boundary_log_density_is_finite_on_grid() {
    for mu in MUS {
        for phi in PHIS {
            let p = SltbParams::with_defaults(mu, phi).unwrap();
            for g in [0.0, 1.0] {
                assert!(p.logpdf(g).unwrap().is_finite(), "mu {mu} phi {phi} g {g}");
            }
        }
    }
}

fn sup_gap(k: i32) -> f64 {
    let s = 1.0 + 10f64.powi(-k) * 10f64.sqrt();
    let l = 10f64.powi(-k - 1);
    let p = SltbParams::new(0.5, 4.0, s, l).unwrap();
    let base = BetaMuPhi::new(0.5, 4.0).unwrap();
    (0..=980)
        .map(|i| 0.01 + i as f64 * 0.001)
        .map(|g| (p.pdf(g).unwrap() - base.pdf_closed(g)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn converges_to_beta_as_transform_vanishes() {
    let gaps: Vec<f64> = (4..=8).map(sup_gap).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[4] < 1e-3);
}

#[test]
fn monte_carlo_moments_match() {
    let p = SltbParams::with_defaults(0.5, 4.0).unwrap();
    let mut rng = Rng::seed_from(17);
    let n = 1_000_000;
    let xs: Vec<f64> = (0..n).map(|_| p.sample(&mut rng).unwrap().value).collect();
    let m = xs.iter().sum::<f64>() / n as f64;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se_mean = (p.variance() / n as f64).sqrt();
    assert!((m - p.mean()).abs() < 3.0 * se_mean, "{m} vs {}", p.mean());
    // Var of the sample variance for Beta(2, 2): (μ4 − σ⁴)/n
    let mu4 = 3.0 / 560.0;
    let se_var = ((mu4 - p.variance().powi(2)) / n as f64).sqrt();
    assert!((v - p.variance()).abs() < 4.0 * se_var, "{v} vs {}", p.variance());
}

proptest! {
    #[test]
    fn moment_differences_are_exact(mu in 0.01f64..0.99, phi in 0.1f64..200.0) {
        let p = SltbParams::with_defaults(mu, phi).unwrap();
        let b = p.base();
        prop_assert!(((p.mean() - b.mean()) - ((p.s - 1.0) * mu - p.s * p.l)).abs() < 1e-15);
        prop_assert!(((p.variance() - b.variance()) - (p.s * p.s - 1.0) * mu * (1.0 - mu) / (phi + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn cdf_quantile_round_trip(mu in 0.05f64..0.95, phi in 0.5f64..60.0, g in 0.001f64..0.999) {
        let p = SltbParams::with_defaults(mu, phi).unwrap();
        let q = p.cdf(g).unwrap();
        // outside this region the CDF is flat to working precision
        prop_assume!(q > 1e-12 && q < 1.0 - 1e-12 && p.pdf(g).unwrap() > 1e-6);
        let back = p.quantile(q).unwrap();
        prop_assert!((back - g).abs() < 1e-9, "g {} q {} back {}", g, q, back);
    }

    #[test]
    fn cdf_is_monotone(mu in 0.05f64..0.95, phi in 0.5f64..60.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let p = SltbParams::with_defaults(mu, phi).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(p.cdf(lo).unwrap() <= p.cdf(hi).unwrap() + 1e-15);
    }

    #[test]
    fn boundary_density_is_finite_and_positive(mu in 0.01f64..0.99, phi in 0.2f64..500.0) {
        let p = SltbParams::with_defaults(mu, phi).unwrap();
        for g in [0.0, 1.0] {
            let v = p.logpdf(g).unwrap();
            prop_assert!(v.is_finite());
        }
    }

    #[test]
    fn inc_beta_symmetry(x in 0.0f64..1.0, a in 0.05f64..50.0, b in 0.05f64..50.0) {
        let lhs = reg_inc_beta(x, a, b).unwrap();
        let rhs = 1.0 - reg_inc_beta(1.0 - x, b, a).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn fast_density_matches_checked_density(mu in 0.02f64..0.98, phi in 0.5f64..80.0, g in 0.0f64..=1.0) {
        let p = SltbParams::with_defaults(mu, phi).unwrap();
        let fast = ScaleLocation::default().ln_pdf(g, mu, phi);
        prop_assert!((fast - p.logpdf(g).unwrap()).abs() < 1e-12);
    }
}
