use serde::{Deserialize, Serialize};
use sltb_core::simulation::{run_study, SimConfig};
use sltb_core::Result;

use super::OutDir;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateRun {
    pub config: SimConfig,
    pub threads: usize,
}

impl SimulateRun {
    pub fn run(&self, out: &mut OutDir) -> Result<serde_json::Value> {
        let report = run_study(&self.config, self.threads)?;
        report.write_records_csv(out.writer("replications.csv")?)?;
        out.json("summary.json", &report)?;

        println!(
            "n = {}, {} replications ({} with a boundary value)",
            self.config.n, self.config.reps, report.boundary_replications
        );
        for m in &report.methods {
            let mse = m.mean_mse.map_or("-".to_owned(), |v| format!("{v:.5}"));
            let t = report
                .timing(m.method)
                .and_then(|t| t.mean_fit_seconds)
                .map_or("-".to_owned(), |v| format!("{v:.4}s"));
            println!(
                "{:<5} fitted {:>5}  failed {:>4}  inapplicable {:>4}  mean MSE {mse}  mean fit time {t}",
                format!("{:?}", m.method).to_lowercase(),
                m.fitted,
                m.failures,
                m.inapplicable
            );
        }
        Ok(serde_json::to_value(&report.timings)?)
    }
}
