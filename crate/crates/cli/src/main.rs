//! `hoc`: runs concentration-bound experiments from JSON configs.
//!
//! Exit codes: 0 when every domination check passes, 1 when one fails,
//! 2 for an invalid config or argument (nothing is written), 3 when the
//! computation itself fails.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use hoc_core::experiment::{run_experiment, ExperimentConfig, Outcome};
use hoc_core::fixtures::inventory;
use serde_json::{json, Value};

const DEFAULT_OUT: &str = "hoc-out";

#[derive(Parser)]
#[command(name = "hoc", version, about = "Concentration certificates with Monte Carlo verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write report.json, CSV tables and tail plots.
    Run(RunArgs),
    /// Print the shipped fixtures as JSON.
    ListFixtures,
    /// Operator and Hilbert-Schmidt norms of a symmetric tensor.
    TensorNorm {
        /// JSON file with `order`, `dim` and canonical `entries`.
        tensor: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Poincaré constant of a one-dimensional law from the spectral-gap oracle.
    CatalogOracle {
        /// Distribution name, e.g. `uniform01`, `gaussian`, `exponential`.
        dist: String,
        /// Distribution parameter as `key=value`; repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        gridpoints: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the main Monte Carlo sample count.
    #[arg(long)]
    samples: Option<usize>,
}

/// Failure classes, mapped to exit codes.
enum Failure {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn invalid(e: impl Into<anyhow::Error>) -> Self {
        Self::Invalid(e.into())
    }

    fn runtime(e: impl Into<anyhow::Error>) -> Self {
        Self::Runtime(e.into())
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("HOC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::invalid(anyhow::anyhow!("HOC_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(Failure::runtime)
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Invalid)?;
    ExperimentConfig::parse(&text).map_err(|e| Failure::invalid(anyhow::anyhow!("{}: {e}", path.display())))
}

/// Parses a generated config; errors point at the user's arguments rather
/// than at lines of text they never wrote.
fn synthetic_config(value: Value) -> Result<ExperimentConfig, Failure> {
    ExperimentConfig::parse(&value.to_string()).map_err(|e| Failure::invalid(anyhow::anyhow!(e.message)))
}

fn execute(cfg: &ExperimentConfig) -> Result<Outcome, Failure> {
    log::info!("running {} experiment, seed {}", cfg.kind(), cfg.seed);
    run_experiment(cfg).map_err(Failure::runtime)
}

/// Writes report.json, one CSV per table and an SVG per tail-curve table.
/// Everything is rendered before the directory is touched.
fn write_artifacts(out: &Path, outcome: &Outcome) -> Result<Vec<PathBuf>, Failure> {
    let mut files: Vec<(String, String)> = Vec::new();
    for table in &outcome.tables {
        files.push((format!("{}.csv", table.name), table.to_csv().map_err(Failure::runtime)?));
        let title = format!("{} / {}", outcome.kind, table.name);
        if let Some(plot) = svg::tail_plot(table, &title) {
            files.push((format!("{}.svg", table.name), plot));
        }
    }
    let mut report = outcome.report.clone();
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    report["artifacts"] = json!(names);
    let text = serde_json::to_string_pretty(&report).map_err(Failure::runtime)? + "\n";
    files.insert(0, ("report.json".into(), text));

    fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(Failure::Runtime)?;
    let mut written = Vec::new();
    for (name, body) in files {
        let path = out.join(name);
        fs::write(&path, body)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Runtime)?;
        written.push(path);
    }
    Ok(written)
}

fn verdict(outcome: &Outcome) -> ExitCode {
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, Failure> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(m) = args.samples {
        cfg.set_samples(m);
        cfg.validate()
            .map_err(|(key, msg)| Failure::invalid(anyhow::anyhow!("--samples: {key}: {msg}")))?;
    }
    let out = args.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| DEFAULT_OUT.into());
    let outcome = execute(&cfg)?;
    for path in write_artifacts(&out, &outcome)? {
        println!("wrote {}", path.display());
    }
    println!("{}: {}", outcome.kind, if outcome.pass { "PASS" } else { "FAIL" });
    Ok(verdict(&outcome))
}

/// Prints the report and writes artifacts only when asked to.
fn report_and_maybe_write(outcome: &Outcome, out: Option<PathBuf>) -> Result<ExitCode, Failure> {
    println!("{}", serde_json::to_string_pretty(&outcome.report).map_err(Failure::runtime)?);
    if let Some(dir) = out {
        for path in write_artifacts(&dir, outcome)? {
            log::info!("wrote {}", path.display());
        }
    }
    Ok(verdict(outcome))
}

fn cmd_tensor_norm(tensor: &Path, out: Option<PathBuf>) -> Result<ExitCode, Failure> {
    let text = fs::read_to_string(tensor)
        .with_context(|| format!("reading {}", tensor.display()))
        .map_err(Failure::Invalid)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::invalid(anyhow::anyhow!("{}: line {}: {e}", tensor.display(), e.line())))?;
    let cfg = synthetic_config(json!({
        "schema_version": hoc_core::experiment::SCHEMA_VERSION,
        "kind": "tensor-norm",
        "seed": 0,
        "tensor": value,
    }))?;
    let outcome = execute(&cfg).map_err(|f| match f {
        // a tensor that fails to build is bad input, not a failed computation
        Failure::Runtime(e) => Failure::Invalid(e),
        other => other,
    })?;
    report_and_maybe_write(&outcome, out)
}

fn cmd_catalog_oracle(
    dist: &str,
    params: &[String],
    gridpoints: Option<usize>,
    out: Option<PathBuf>,
) -> Result<ExitCode, Failure> {
    let mut map = serde_json::Map::new();
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Failure::invalid(anyhow::anyhow!("--param expects KEY=VALUE, got {p:?}")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| Failure::invalid(anyhow::anyhow!("--param {k}: {v:?} is not a number")))?;
        map.insert(k.to_string(), json!(v));
    }
    let mut cfg = json!({
        "schema_version": hoc_core::experiment::SCHEMA_VERSION,
        "kind": "catalog-oracle",
        "seed": 0,
        "dist": { "dist": dist, "params": map },
    });
    if let Some(g) = gridpoints {
        cfg["gridpoints"] = json!(g);
    }
    let outcome = execute(&synthetic_config(cfg)?)?;
    report_and_maybe_write(&outcome, out)
}

fn dispatch(cli: Cli) -> Result<ExitCode, Failure> {
    configure_threads()?;
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::ListFixtures => {
            let text = serde_json::to_string_pretty(&inventory()).map_err(Failure::runtime)?;
            println!("{text}");
            Ok(ExitCode::SUCCESS)
        }
        Command::TensorNorm { tensor, out } => cmd_tensor_norm(&tensor, out),
        Command::CatalogOracle {
            dist,
            params,
            gridpoints,
            out,
        } => cmd_catalog_oracle(&dist, &params, gridpoints, out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
