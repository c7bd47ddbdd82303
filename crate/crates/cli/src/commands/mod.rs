mod density;
mod fit;
mod mcmc;
mod simulate;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sltb_core::{Error, Result};

use crate::manifest::{unix_ms, InputDigest, RunManifest, MANIFEST_FILE};

pub use density::{DensityRun, ILLUSTRATION_PRESET};
pub use fit::FitRun;
pub use mcmc::{HierLinearRun, HierNonlinearRun};
pub use simulate::SimulateRun;

/// A fully resolved command: every default, override and seed is already
/// applied, so running it twice gives the same files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Invocation {
    Fit(FitRun),
    Simulate(SimulateRun),
    HierLinear(HierLinearRun),
    HierNonlinear(HierNonlinearRun),
    Density(DensityRun),
}

impl Invocation {
    pub fn name(&self) -> &'static str {
        match self {
            Invocation::Fit(_) => "fit",
            Invocation::Simulate(_) => "simulate",
            Invocation::HierLinear(_) => "hier-linear",
            Invocation::HierNonlinear(_) => "hier-nonlinear",
            Invocation::Density(_) => "density",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Invocation::Fit(_) | Invocation::Density(_) => None,
            Invocation::Simulate(r) => Some(r.config.base_seed),
            Invocation::HierLinear(r) => Some(r.config.seed),
            Invocation::HierNonlinear(r) => Some(r.sampler.seed),
        }
    }

    pub fn data_files(&self) -> Vec<&Path> {
        let path = match self {
            Invocation::Fit(r) => Some(&r.data),
            Invocation::HierLinear(r) => r.data.as_ref(),
            Invocation::HierNonlinear(r) => r.data.as_ref(),
            Invocation::Simulate(_) | Invocation::Density(_) => None,
        };
        path.map(PathBuf::as_path).into_iter().collect()
    }
}

/// Output directory that remembers what was written into it.
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn writer(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.written.push(name.to_owned());
        Ok(BufWriter::new(File::create(self.root.join(name))?))
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.writer(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = self.writer(name)?;
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
}

/// Runs the command into `out`, then writes `timing.json` and the manifest.
/// `extra_inputs` are configuration files worth fingerprinting.
pub fn execute(inv: &Invocation, out: &Path, extra_inputs: &[PathBuf]) -> Result<()> {
    let started_unix_ms = unix_ms();
    let mut inputs = Vec::new();
    for path in inv.data_files().into_iter().chain(extra_inputs.iter().map(PathBuf::as_path)) {
        inputs.push(InputDigest::of(path)?);
    }
    let mut dir = OutDir::create(out)?;
    let clock = Instant::now();
    let details = match inv {
        Invocation::Fit(r) => r.run(&mut dir)?,
        Invocation::Simulate(r) => r.run(&mut dir)?,
        Invocation::HierLinear(r) => r.run(&mut dir)?,
        Invocation::HierNonlinear(r) => r.run(&mut dir)?,
        Invocation::Density(r) => r.run(&mut dir)?,
    };
    let timing = serde_json::json!({
        "command": inv.name(),
        "wall_seconds": clock.elapsed().as_secs_f64(),
        "details": details,
    });
    dir.json("timing.json", &timing)?;
    let manifest = RunManifest {
        command: inv.name().to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        seed: inv.seed(),
        config: serde_json::to_value(inv)?,
        inputs,
        outputs: dir.written.clone(),
        started_unix_ms,
        finished_unix_ms: unix_ms(),
    };
    dir.json(MANIFEST_FILE, &manifest)
}

/// Reruns a recorded command after checking that its data files are unchanged.
pub fn replay(manifest_path: &Path, out: &Path) -> Result<()> {
    let manifest = RunManifest::read(manifest_path)?;
    let inv: Invocation = serde_json::from_value(manifest.config.clone())
        .map_err(|e| Error::Validation(format!("{}: {e}", manifest_path.display())))?;
    let data: Vec<&Path> = inv.data_files();
    for digest in manifest.inputs.iter().filter(|d| data.contains(&d.path.as_path())) {
        digest.verify()?;
    }
    execute(&inv, out, &[])
}
