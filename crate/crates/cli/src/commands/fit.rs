use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sltb_core::data::TabularDataset;
use sltb_core::numeric::special::std_normal_cdf;
use sltb_core::regression::{build_design, fit_mle, predict_mean, Family, MseReport, RegressionSpec};
use sltb_core::Result;

use super::{num, OutDir};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitRun {
    pub data: PathBuf,
    pub spec: RegressionSpec,
    pub family: Family,
}

fn opt(v: Option<f64>) -> String {
    v.map_or("-".to_owned(), |x| format!("{x:.5}"))
}

impl FitRun {
    pub fn run(&self, out: &mut OutDir) -> Result<serde_json::Value> {
        let table = TabularDataset::from_csv_path(&self.data)?;
        let fit = fit_mle(&self.spec, &table, self.family)?;
        let design = build_design(&self.spec, &table)?;
        let y = table.response(&self.spec.response)?;
        let fitted = predict_mean(&fit, &design.x);
        let report = MseReport::new(&fit, &design.x, y);

        let rows: Vec<Vec<String>> = (0..fit.coefficients.len())
            .map(|j| {
                vec![
                    fit.names[j].clone(),
                    num(fit.coefficients[j]),
                    num(fit.se[j]),
                    num(fit.z[j]),
                    num(fit.p[j]),
                ]
            })
            .collect();
        out.csv("coefficients.csv", &["term", "estimate", "std_error", "z", "p"], &rows)?;
        out.json("fit.json", &fit)?;

        let residuals: Vec<Vec<String>> = y
            .iter()
            .zip(&fitted)
            .enumerate()
            .map(|(i, (&yi, &fi))| vec![(i + 1).to_string(), num(yi), num(fi), num(yi - fi)])
            .collect();
        out.csv("residuals.csv", &["row", "y", "fitted", "residual"], &residuals)?;
        out.json("mse.json", &report)?;

        println!("{} fit, n = {}, log-likelihood {:.4}", fit.family.name(), fit.n, fit.loglik);
        println!("{:<20} {:>10} {:>10} {:>9} {:>10}", "", "Estimate", "Std.Error", "z", "Pr(>|z|)");
        let z_eta = fit.log_precision / fit.log_precision_se;
        let precision_row = (fit.log_precision, fit.log_precision_se, z_eta, 2.0 * std_normal_cdf(-z_eta.abs()));
        let table = (0..fit.coefficients.len())
            .map(|j| (fit.names[j].as_str(), (fit.coefficients[j], fit.se[j], fit.z[j], fit.p[j])))
            .chain(std::iter::once(("(log precision)", precision_row)));
        for (name, (est, se, z, p)) in table {
            println!("{name:<20} {est:>10.4} {se:>10.4} {z:>9.3} {p:>10.3e}");
        }
        println!(
            "MSE {:.5}  (y = 1: {}, y = 0: {})",
            report.overall,
            opt(report.boundary_ones),
            opt(report.boundary_zeros)
        );
        Ok(serde_json::json!({ "iterations": fit.iterations }))
    }
}
