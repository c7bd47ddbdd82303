//! Bundled fixtures.

use crate::data::TabularDataset;
use crate::error::Result;
use crate::numeric::rng::Rng;
use crate::numeric::stats;
use crate::regression::{Coding, FactorSpec, RegressionSpec};

const READING_SKILLS: &str = include_str!("../data/reading_skills.csv");

/// Reading accuracy of 44 children with and without dyslexia.
///
/// Columns: `accuracy` (interior values, capped at 0.99), `accuracy1` (the
/// same with 0.99 recoded to 1), `dyslexia` (`no`/`yes`) and standardized `iq`.
pub fn reading_skills() -> TabularDataset {
    TabularDataset::from_csv_reader(READING_SKILLS.as_bytes()).expect("bundled fixture parses")
}

/// `response ~ dyslexia * iq` with dyslexia sum-coded (`no` = −1, `yes` = +1).
pub fn reading_skills_spec(response: &str) -> RegressionSpec {
    RegressionSpec::new(response)
        .term("dyslexia")
        .term("iq")
        .term("dyslexia:iq")
        .factor(
            "dyslexia",
            FactorSpec::Detailed {
                reference: "no".into(),
                coding: Coding::Sum,
            },
        )
}

/// Generating values for [`alcohol_standin`], in the order of
/// [`hier_linear::FIXED_EFFECTS`](crate::hier_linear::FIXED_EFFECTS).
#[derive(Debug, Clone, PartialEq)]
pub struct AlcoholTruth {
    pub beta: [f64; 7],
    pub eta: f64,
    pub sigma2: f64,
}

impl Default for AlcoholTruth {
    fn default() -> Self {
        Self {
            beta: [-3.617, -0.269, 0.753, 1.024, -0.770, 0.068, 0.266],
            eta: 3.603,
            sigma2: 0.535,
        }
    }
}

/// Day-range midpoints used for `medDays`.
pub const MED_DAYS: [f64; 5] = [0.0, 1.5, 6.0, 14.5, 25.0];

/// Synthetic county survey with the layout of the alcohol-use data: 56
/// counties × 2 genders × 3 grades × 5 day ranges, thinned at random to
/// 1340 rows. Responses are beta draws rounded to 3 decimals, which
/// produces exact zeros in the low-prevalence cells.
pub fn alcohol_standin(truth: &AlcoholTruth, seed: u64) -> Result<TabularDataset> {
    const COUNTIES: usize = 56;
    const KEEP: usize = 1340;
    let mut rng = Rng::seed_from(seed);
    let u: Vec<f64> = (0..COUNTIES)
        .map(|_| rng.normal(0.0, truth.sigma2.sqrt()))
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for county in 1..=COUNTIES {
        for gender in ["F", "M"] {
            for grade in [7.0, 9.0, 11.0] {
                for days in MED_DAYS {
                    cells.push((county, gender, grade, days));
                }
            }
        }
    }
    // partial Fisher–Yates: the first KEEP slots become a uniform subset
    for i in 0..KEEP {
        let j = i + (rng.next_u64() % (cells.len() - i) as u64) as usize;
        cells.swap(i, j);
    }
    cells.truncate(KEEP);
    cells.sort_by(|a, b| (a.0, a.1, a.2 as u32, a.3 as u32).cmp(&(b.0, b.1, b.2 as u32, b.3 as u32)));

    let days: Vec<f64> = cells.iter().map(|c| c.3).collect();
    let (m, sd) = (stats::mean(&days), stats::variance(&days).sqrt());
    let phi = truth.eta.exp();
    let b = &truth.beta;
    let mut y = Vec::with_capacity(KEEP);
    for &(county, gender, grade, d) in &cells {
        let male = f64::from(u8::from(gender == "M"));
        let g9 = f64::from(u8::from(grade == 9.0));
        let g11 = f64::from(u8::from(grade == 11.0));
        let lp = b[0] + b[1] * male + b[2] * g9 + b[3] * g11 + b[4] * (d - m) / sd + b[5] * g9 * male + b[6] * g11 * male
            + u[county - 1];
        let mu = crate::numeric::special::inv_logit(lp);
        let draw = rng.beta(mu * phi, (1.0 - mu) * phi)?;
        y.push((draw * 1000.0).round_ties_even() / 1000.0);
    }
    let county: Vec<String> = cells.iter().map(|c| c.0.to_string()).collect();
    let gender: Vec<&str> = cells.iter().map(|c| c.1).collect();
    TabularDataset::new()
        .with_factor("county", &county)?
        .with_factor("gender", &gender)?
        .with_numeric("grade", cells.iter().map(|c| c.2).collect())?
        .with_numeric("medDays", days)?
        .with_numeric("y", y)
}
