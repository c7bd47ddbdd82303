mod commands;
mod manifest;
#[cfg(test)]
mod tests;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use sltb_core::distributions::{DEFAULT_LOCATION, DEFAULT_SCALE};
use sltb_core::hier_linear::HierLinearConfig;
use sltb_core::regression::{Family, RegressionSpec};
use sltb_core::simulation::SimConfig;
use sltb_core::{Error, Result};

use commands::{execute, replay, read_json, DensityRun, FitRun, HierLinearRun, HierNonlinearRun, Invocation, SimulateRun};

const SEED_ENV: &str = "SLTB_DEFAULT_SEED";

#[derive(Parser)]
#[command(name = "sltb", version, about = "Regression and hierarchical models for proportions with exact 0 and 1 values")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum-likelihood regression on a CSV file.
    Fit(FitArgs),
    /// Monte Carlo comparison of the SLTB and beta regressions.
    Simulate(SimulateArgs),
    /// Hierarchical linear model with county random effects.
    HierLinear(ChainArgs),
    /// Hierarchical delay-discounting model, SLTB and normal likelihoods.
    HierNonlinear(ChainArgs),
    /// Density curves of the SLTB and beta distributions on a grid.
    Density(DensityArgs),
    /// Rerun a command from its manifest.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Sltb,
    Beta,
}

#[derive(Args)]
struct ScaleLocationArgs {
    /// Scale value s of the transform.
    #[arg(long)]
    s: Option<f64>,
    /// Location value l of the transform.
    #[arg(long)]
    l: Option<f64>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    /// JSON model specification: {response, terms, factors}.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value = "sltb")]
    family: FamilyArg,
    #[command(flatten)]
    sl: ScaleLocationArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    sl: ScaleLocationArgs,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ChainArgs {
    /// Data CSV; a synthetic data set is generated when omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    sl: ScaleLocationArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Exaggerated scale and location that make the truncation visible.
    Illustration,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long, default_value_t = 0.5)]
    mu: f64,
    #[arg(long, default_value_t = 4.0)]
    phi: f64,
    #[command(flatten)]
    sl: ScaleLocationArgs,
    #[arg(long, default_value_t = 201)]
    grid_n: usize,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Loads a JSON config and reports whether it sets the seed at `seed_pointer`.
fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>, seed_pointer: &str) -> Result<(T, bool)> {
    let Some(path) = path else {
        return Ok((T::default(), false));
    };
    let value: serde_json::Value = read_json(path)?;
    let has_seed = value.pointer(seed_pointer).is_some();
    let config = serde_json::from_value(value).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    Ok((config, has_seed))
}

/// Seed precedence: flag, then the config file, then the environment.
fn resolve_seed(flag: Option<u64>, config_has_seed: bool, env_seed: Option<&str>) -> Result<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    if config_has_seed {
        return Ok(None);
    }
    match env_seed {
        Some(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Validation(format!("{SEED_ENV} must be an unsigned integer, got '{v}'"))),
        None => Ok(None),
    }
}

fn absolute(path: &Path) -> Result<PathBuf> {
    path.canonicalize()
        .map_err(|e| Error::Validation(format!("cannot open {}: {e}", path.display())))
}

fn apply_sl(sl: &ScaleLocationArgs, s: &mut f64, l: &mut f64) {
    if let Some(v) = sl.s {
        *s = v;
    }
    if let Some(v) = sl.l {
        *l = v;
    }
}

fn run(cli: Cli, env_seed: Option<&str>) -> Result<()> {
    match cli.command {
        Command::Fit(a) => {
            let spec: RegressionSpec = read_json(&a.spec)?;
            let family = match a.family {
                FamilyArg::Beta if a.sl.s.is_some() || a.sl.l.is_some() => {
                    return Err(Error::Validation("--s and --l apply only to the sltb family".into()));
                }
                FamilyArg::Beta => Family::Beta,
                FamilyArg::Sltb => {
                    let (mut s, mut l) = (DEFAULT_SCALE, DEFAULT_LOCATION);
                    apply_sl(&a.sl, &mut s, &mut l);
                    Family::sltb(s, l)?
                }
            };
            let inv = Invocation::Fit(FitRun {
                data: absolute(&a.data)?,
                spec,
                family,
            });
            execute(&inv, &a.out, &[absolute(&a.spec)?])
        }
        Command::Simulate(a) => {
            let (mut config, has_seed): (SimConfig, bool) = load_config(a.config.as_deref(), "/base_seed")?;
            if let Some(seed) = resolve_seed(a.seed, has_seed, env_seed)? {
                config.base_seed = seed;
            }
            apply_sl(&a.sl, &mut config.s, &mut config.l);
            if a.threads == 0 {
                return Err(Error::Validation("--threads must be at least 1".into()));
            }
            let inv = Invocation::Simulate(SimulateRun {
                config,
                threads: a.threads,
            });
            execute(&inv, &a.out, &config_inputs(a.config.as_deref())?)
        }
        Command::HierLinear(a) => {
            let (mut config, has_seed): (HierLinearConfig, bool) = load_config(a.config.as_deref(), "/seed")?;
            if let Some(seed) = resolve_seed(a.seed, has_seed, env_seed)? {
                config.seed = seed;
            }
            apply_sl(&a.sl, &mut config.s, &mut config.l);
            let inv = Invocation::HierLinear(HierLinearRun {
                data: a.data.as_deref().map(absolute).transpose()?,
                config,
            });
            execute(&inv, &a.out, &config_inputs(a.config.as_deref())?)
        }
        Command::HierNonlinear(a) => {
            let (mut run, has_seed): (HierNonlinearRun, bool) = load_config(a.config.as_deref(), "/sampler/seed")?;
            if let Some(seed) = resolve_seed(a.seed, has_seed, env_seed)? {
                run.sampler.seed = seed;
                run.simulation.seed = seed;
            }
            apply_sl(&a.sl, &mut run.sampler.s, &mut run.sampler.l);
            if a.data.is_some() {
                run.data = a.data.as_deref().map(absolute).transpose()?;
            }
            if run.models.is_empty() {
                return Err(Error::Validation("at least one model must be requested".into()));
            }
            execute(&Invocation::HierNonlinear(run), &a.out, &config_inputs(a.config.as_deref())?)
        }
        Command::Density(a) => {
            let (mut s, mut l) = match a.preset {
                Some(Preset::Illustration) => commands::ILLUSTRATION_PRESET,
                None => (DEFAULT_SCALE, DEFAULT_LOCATION),
            };
            apply_sl(&a.sl, &mut s, &mut l);
            let run = DensityRun {
                mu: a.mu,
                phi: a.phi,
                s,
                l,
                grid_n: a.grid_n,
            };
            run.validate()?;
            execute(&Invocation::Density(run), &a.out, &[])
        }
        Command::Replay(a) => replay(&a.manifest, &a.out),
    }
}

fn config_inputs(path: Option<&Path>) -> Result<Vec<PathBuf>> {
    path.map(absolute).into_iter().collect()
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_seed = std::env::var(SEED_ENV).ok();
    match run(cli, env_seed.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
