use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use super::{run_experiment, ExperimentSpec, EXPERIMENTS};
use crate::control::{optimize, OptimResult};
use crate::error::{Error, Result};
use crate::io::{read_measure, write_field, LoadedProblem, SCHEMA_VERSION};
use crate::solver::solve_semilinear_rhs;

#[derive(Parser)]
#[command(name = "measctl", version, about = "Semilinear elliptic problems with measure data and sparse controls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the state equation of a problem file.
    Solve {
        problem: PathBuf,
        #[arg(long, default_value = "results/solve")]
        out: PathBuf,
        /// Write fields as little-endian binary instead of CSV.
        #[arg(long)]
        binary: bool,
    },
    /// Minimize the control functional of a problem file.
    Optimize {
        problem: PathBuf,
        #[arg(long, default_value = "results/optimize")]
        out: PathBuf,
        #[arg(long)]
        binary: bool,
    },
    /// Run a registered experiment.
    Experiment {
        name: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the registered experiments.
    List,
    /// Pretty-print a measure file.
    ShowMeasure { measure: PathBuf },
}

/// Experiment configuration file.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    schema: u32,
    #[serde(default)]
    parameters: std::collections::BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code: 0 on success, 1 when an assertion or a computation fails, 2 on
/// usage and configuration errors.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_)
        | Error::InvalidExponent(_)
        | Error::InvalidMeasure(_)
        | Error::InvalidNonlinearity(_)
        | Error::UnsupportedDimension { .. }
        | Error::UnknownExperiment(_)
        | Error::GridMismatch(_)
        | Error::Io { .. }
        | Error::Parse { .. } => 2,
        _ => 1,
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::List => {
            for name in EXPERIMENTS {
                println!("{name}");
            }
            Ok(0)
        }
        Command::ShowMeasure { measure } => {
            print!("{}", read_measure(&measure)?);
            Ok(0)
        }
        Command::Solve { problem, out, binary } => solve(&problem, &out, binary),
        Command::Optimize { problem, out, binary } => run_optimize(&problem, &out, binary),
        Command::Experiment {
            name,
            config,
            seed,
            out,
            threads,
        } => experiment(name, config, seed, out, threads),
    }
}

fn field_path(out: &Path, stem: &str, binary: bool) -> PathBuf {
    out.join(format!("{stem}.{}", if binary { "bin" } else { "csv" }))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn solve(problem: &Path, out: &Path, binary: bool) -> Result<i32> {
    let loaded = LoadedProblem::read(problem)?;
    let grid = loaded.grid()?;
    let g = loaded.nonlinearity()?;
    let rhs = loaded.measure()?.rasterize(&grid)?;
    let (u, report) = solve_semilinear_rhs(&g, &rhs, &loaded.spec.solver, None)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let state = field_path(out, "state", binary);
    write_field(&state, &u)?;
    write_json(&out.join("solve_report.json"), &report)?;
    println!(
        "solved in {} Newton steps, residual {:e}; state written to {}",
        report.iterations,
        report.final_residual,
        state.display()
    );
    Ok(0)
}

#[derive(Serialize)]
struct ResultSummary<'a> {
    f_value: f64,
    misfit: f64,
    tv: f64,
    sparsity: f64,
    iterations: usize,
    status: crate::control::OptimStatus,
    slack: f64,
    control_file: &'a Path,
    state_file: &'a Path,
}

fn run_optimize(problem: &Path, out: &Path, binary: bool) -> Result<i32> {
    let loaded = LoadedProblem::read(problem)?;
    let prob = loaded.control_problem()?;
    let result: OptimResult = optimize(&prob, &loaded.spec.optimizer)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let control = field_path(out, "control", binary);
    let state = field_path(out, "state", binary);
    write_field(&control, &result.control)?;
    write_field(&state, &result.u_star)?;

    let history = out.join("history.csv");
    let mut w = csv::Writer::from_path(&history).map_err(|e| Error::parse(&history, e))?;
    for entry in &result.history {
        w.serialize(entry).map_err(|e| Error::parse(&history, e))?;
    }
    w.flush().map_err(|e| Error::io(&history, e))?;

    write_json(
        &out.join("result.json"),
        &ResultSummary {
            f_value: result.f_value,
            misfit: result.misfit,
            tv: result.tv,
            sparsity: result.sparsity,
            iterations: result.iterations,
            status: result.status,
            slack: result.slack(),
            control_file: &control,
            state_file: &state,
        },
    )?;
    println!(
        "F = {} (misfit {}, ‖μ‖ = {}), {} iterations, status {:?}; results in {}",
        result.f_value,
        result.misfit,
        result.tv,
        result.iterations,
        result.status,
        out.display()
    );
    Ok(0)
}

fn experiment(
    name: String,
    config: Option<PathBuf>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    threads: Option<usize>,
) -> Result<i32> {
    if !EXPERIMENTS.contains(&name.as_str()) {
        return Err(Error::UnknownExperiment(name));
    }
    let cfg = match &config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
            if cfg.schema != SCHEMA_VERSION {
                return Err(Error::InvalidConfig(format!(
                    "unsupported schema version {} (expected {SCHEMA_VERSION})",
                    cfg.schema
                )));
            }
            cfg
        }
        None => ExperimentConfig::default(),
    };
    let mut spec = ExperimentSpec::new(&name);
    spec.parameters = cfg.parameters;
    spec.seed = seed.or(cfg.seed).unwrap_or(0);
    if let Some(dir) = out.or(cfg.output_dir) {
        spec.output_dir = dir;
    }

    let mut report = match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            pool.install(|| run_experiment(&spec))?
        }
        None => run_experiment(&spec)?,
    };
    report.write(&spec.output_dir)?;
    print!("{}", report.render());
    println!("report written to {}", spec.output_dir.join("report.json").display());
    Ok(if report.passed() { 0 } else { 1 })
}
