use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sltb_core::data::TabularDataset;
use sltb_core::datasets::{alcohol_standin, AlcoholTruth};
use sltb_core::hier_linear::{run_chain, HierLinearConfig, HierLinearData, ProposalScales};
use sltb_core::hier_nonlinear::{
    gen_discount_data, sample, DiscountData, DiscountSimConfig, NonlinearConfig, NonlinearModel,
};
use sltb_core::mcmc::PosteriorSummary;
use sltb_core::Result;

use super::{num, OutDir};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HierLinearRun {
    /// County survey CSV; a synthetic panel seeded by the chain seed when absent.
    pub data: Option<PathBuf>,
    pub config: HierLinearConfig,
}

#[derive(Serialize)]
struct LinearSummary<'a> {
    summary: &'a PosteriorSummary,
    posterior_predictive_mse: f64,
    final_scales: ProposalScales,
}

fn warn(model: &str, summary: &PosteriorSummary) {
    for w in &summary.warnings {
        eprintln!("warning ({model}): {w}");
    }
}

fn acceptance_rows(model: &str, summary: &PosteriorSummary) -> Vec<Vec<String>> {
    summary
        .acceptance
        .iter()
        .map(|(block, &rate)| vec![model.to_owned(), block.clone(), num(rate)])
        .collect()
}

impl HierLinearRun {
    pub fn run(&self, out: &mut OutDir) -> Result<serde_json::Value> {
        let table = match &self.data {
            Some(path) => TabularDataset::from_csv_path(path)?,
            None => {
                let t = alcohol_standin(&AlcoholTruth::default(), self.config.seed)?;
                t.write_csv(out.writer("data.csv")?)?;
                t
            }
        };
        let data = HierLinearData::from_table(&table)?;
        let fit = run_chain(&data, &self.config)?;
        warn("hier-linear", &fit.summary);
        fit.draws.write_csv(out.writer("draws.csv")?)?;
        out.json(
            "summary.json",
            &LinearSummary {
                summary: &fit.summary,
                posterior_predictive_mse: fit.mse,
                final_scales: fit.final_scales,
            },
        )?;
        out.csv("acceptance.csv", &["model", "block", "rate"], &acceptance_rows("sltb", &fit.summary))?;
        let fitted: Vec<Vec<String>> = data
            .y
            .iter()
            .zip(&fit.fitted)
            .enumerate()
            .map(|(i, (&y, &f))| vec![(i + 1).to_string(), num(y), num(f)])
            .collect();
        out.csv("fitted.csv", &["row", "y", "fitted"], &fitted)?;

        println!("{:<16} {:>9} {:>9} {:>9} {:>9}", "", "mean", "2.5%", "97.5%", "ESS");
        for p in &fit.summary.params {
            println!("{:<16} {:>9.4} {:>9.4} {:>9.4} {:>9.0}", p.name, p.mean, p.lower95, p.upper95, p.ess);
        }
        println!("posterior-predictive MSE {:.6}", fit.mse);
        Ok(serde_json::json!({}))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HierNonlinearRun {
    /// Discounting CSV with columns subject, delay, y; simulated when absent.
    pub data: Option<PathBuf>,
    pub simulation: DiscountSimConfig,
    pub sampler: NonlinearConfig,
    pub models: Vec<NonlinearModel>,
}

impl Default for HierNonlinearRun {
    fn default() -> Self {
        Self {
            data: None,
            simulation: DiscountSimConfig::default(),
            sampler: NonlinearConfig::default(),
            models: vec![NonlinearModel::Sltb, NonlinearModel::Normal],
        }
    }
}

fn model_name(m: NonlinearModel) -> &'static str {
    match m {
        NonlinearModel::Sltb => "sltb",
        NonlinearModel::Normal => "normal",
    }
}

impl HierNonlinearRun {
    pub fn run(&self, out: &mut OutDir) -> Result<serde_json::Value> {
        let (data, truth) = match &self.data {
            Some(path) => (DiscountData::from_table(&TabularDataset::from_csv_path(path)?)?, None),
            None => {
                let sim = gen_discount_data(&self.simulation)?;
                sim.data.to_table()?.write_csv(out.writer("data.csv")?)?;
                (sim.data, Some(self.simulation.truth))
            }
        };
        let truth_of = |name: &str| -> Option<f64> {
            let t = truth?;
            match name {
                "mu_psi" => Some(t.mu_psi),
                "sigma2_psi" => Some(t.sigma2_psi),
                "mu_phi" => Some(t.mu_ln_phi),
                "sigma2_phi" => Some(t.sigma2_ln_phi),
                _ => None,
            }
        };

        let mut report = Vec::new();
        let mut acceptance = Vec::new();
        for &model in &self.models {
            let name = model_name(model);
            let fit = sample(model, &data, &self.sampler)?;
            warn(name, &fit.summary);
            fit.draws.write_csv(out.writer(&format!("draws_{name}.csv"))?)?;
            out.json(&format!("summary_{name}.json"), &fit.summary)?;
            acceptance.extend(acceptance_rows(name, &fit.summary));
            for p in fit.summary.params.iter().filter(|p| !p.name.starts_with("psi[")) {
                report.push(vec![
                    name.to_owned(),
                    p.name.clone(),
                    num(p.mean),
                    num(p.sd),
                    num(p.lower95),
                    num(p.median),
                    num(p.upper95),
                    truth_of(&p.name).map(num).unwrap_or_default(),
                ]);
            }
        }
        out.csv("acceptance.csv", &["model", "block", "rate"], &acceptance)?;
        out.csv(
            "report.csv",
            &["model", "param", "mean", "sd", "lower95", "median", "upper95", "truth"],
            &report,
        )?;

        println!(
            "{:<7} {:<11} {:>9} {:>9} {:>9} {:>9} {:>9}",
            "model", "param", "mean", "sd", "2.5%", "median", "97.5%"
        );
        for r in &report {
            let v = |k: usize| r[k].parse::<f64>().unwrap_or(f64::NAN);
            println!(
                "{:<7} {:<11} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
                r[0], r[1], v(2), v(3), v(4), v(5), v(6)
            );
        }
        Ok(serde_json::json!({}))
    }
}
