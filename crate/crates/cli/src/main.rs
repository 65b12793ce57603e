mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use erestab::scan::ScanSettings;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use commands::*;
use config::{merge, ConfigError, RunConfigFile};
use output::{sha256_hex, to_canonical_json, Manifest, Sink};

/// Linear stability of elliptic relative equilibria in restricted N-body
/// problems.
#[derive(Debug, Parser)]
#[command(name = "erestab", version)]
struct Cli {
    /// JSON run configuration; its values override flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving every artifact and manifest.json.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(flatten)]
    tolerances: Tolerances,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
struct Tolerances {
    /// Local error tolerance of the monodromy integration.
    #[arg(long, global = true, default_value_t = erestab::monodromy::DEFAULT_TOL)]
    integ_tol: f64,
    /// Distance from the unit circle below which a multiplier counts as on it.
    #[arg(long, global = true, default_value_t = erestab::monodromy::DEFAULT_CIRCLE_TOL)]
    circle_tol: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Central configuration and the massless equilibrium site.
    Cc(CcArgs),
    /// Large-m0 limit quantities of a polygon site.
    Polygon(PolygonArgs),
    /// Monodromy verdict for one system.
    Stability(StabilityArgs),
    /// ω-Morse indices of the second-variation operator.
    Index(IndexArgs),
    /// Verdict grid over (beta, e) plus the separation curves.
    ScanTheta(ScanThetaArgs),
    /// Stability over the (m1, m3) plane of the four-body chain.
    ScanMass(ScanMassArgs),
    /// Threshold m* of the symmetric chain.
    FindMstar(FindMstarArgs),
    /// Verdict tables for polygon sites.
    PolygonVerdicts(PolygonVerdictArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Cc(_) => "cc",
            Command::Polygon(_) => "polygon",
            Command::Stability(_) => "stability",
            Command::Index(_) => "index",
            Command::ScanTheta(_) => "scan-theta",
            Command::ScanMass(_) => "scan-mass",
            Command::FindMstar(_) => "find-mstar",
            Command::PolygonVerdicts(_) => "polygon-verdicts",
        }
    }
}

fn apply<T: Serialize + serde::de::DeserializeOwned>(args: &mut T, overrides: &Map<String, Value>) -> Result<Value> {
    *args = merge(args, overrides, "parameters")?;
    Ok(serde_json::to_value(&*args)?)
}

/// Folds the config file into the parsed flags and returns the effective
/// parameters as JSON.
fn apply_config(cli: &mut Cli) -> Result<Value> {
    let file = match &cli.config {
        Some(path) => config::load(path)?,
        None => RunConfigFile::default(),
    };
    if let Some(c) = &file.command {
        if c != cli.command.name() {
            return Err(ConfigError(format!("config is for command {c:?} but {:?} was invoked", cli.command.name())).into());
        }
    }
    cli.tolerances = merge(&cli.tolerances, &file.tolerances, "tolerances")?;
    let mut overrides = file.parameters.clone();
    for (k, v) in &file.output {
        if k == "out-dir" || k == "out_dir" {
            let dir = v.as_str().ok_or_else(|| ConfigError("output.out-dir must be a string".into()))?;
            cli.out_dir = PathBuf::from(dir);
        } else if overrides.insert(k.clone(), v.clone()).is_some() {
            return Err(ConfigError(format!("key {k:?} given in both parameters and output")).into());
        }
    }
    match &mut cli.command {
        Command::Cc(a) => apply(a, &overrides),
        Command::Polygon(a) => apply(a, &overrides),
        Command::Stability(a) => apply(a, &overrides),
        Command::Index(a) => apply(a, &overrides),
        Command::ScanTheta(a) => apply(a, &overrides),
        Command::ScanMass(a) => apply(a, &overrides),
        Command::FindMstar(a) => apply(a, &overrides),
        Command::PolygonVerdicts(a) => apply(a, &overrides),
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("ERESTAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| ConfigError(format!("ERESTAB_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker threads")?;
    }
    Ok(())
}

fn run(mut cli: Cli) -> Result<()> {
    configure_threads()?;
    let parameters = apply_config(&mut cli)?;
    let settings = ScanSettings {
        integ_tol: cli.tolerances.integ_tol,
        circle_tol: cli.tolerances.circle_tol,
        ..ScanSettings::default()
    };
    settings.validate()?;
    let tolerances = serde_json::to_value(&cli.tolerances)?;
    let name = cli.command.name();
    let hash = sha256_hex(&to_canonical_json(&json!({
        "command": name,
        "parameters": parameters,
        "tolerances": tolerances,
        "version": erestab::VERSION,
    }))?);

    let started_at = chrono::Utc::now().to_rfc3339();
    let clock = Instant::now();
    let mut sink = Sink::new(cli.out_dir.clone());
    match &cli.command {
        Command::Cc(a) => run_cc(a, &mut sink),
        Command::Polygon(a) => run_polygon(a, &mut sink),
        Command::Stability(a) => run_stability(a, &settings, &mut sink),
        Command::Index(a) => run_index(a, &mut sink),
        Command::ScanTheta(a) => run_scan_theta(a, &settings, &mut sink, &hash),
        Command::ScanMass(a) => run_scan_mass(a, &settings, &mut sink, &hash),
        Command::FindMstar(a) => run_find_mstar(a, &mut sink),
        Command::PolygonVerdicts(a) => run_polygon_verdicts(a, &settings, &mut sink),
    }?;
    let manifest = Manifest {
        command: name,
        parameters: &parameters,
        tolerances: &tolerances,
        version: erestab::VERSION,
        started_at,
        duration_s: clock.elapsed().as_secs_f64(),
        settings_hash: hash,
        artifacts: sink.written.clone(),
    };
    sink.json("manifest.json", &manifest)?;
    Ok(())
}

/// 2 for invalid input, 3 for numerical or I/O failure.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<erestab::Error>() {
        Some(erestab::Error::Domain(_)) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
