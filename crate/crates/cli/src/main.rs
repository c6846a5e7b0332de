//! `nested-alloc`: generate, solve, verify and benchmark nested allocation
//! instances.
//!
//! Exit codes: `0` success, `1` error, `2` infeasible (`solve`), `3` failed
//! verification (`verify`).

mod bench;
mod run;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use nested_alloc::hull::active_growth_experiment;
use nested_alloc::model::{read_instance, write_instance, FamilyTag, Mode};
use nested_alloc::oracles::{verify_kkt, KktTolerance, Verdict};
use nested_alloc::{Solution, SolveStats};

use bench::{run_bench, BenchConfig};
use run::{instance_for, ModeArg, SolverKind};

const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "nested-alloc", version, about = "Separable convex allocation under nested constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance as JSON.
    Gen(GenArgs),
    /// Solve an instance file.
    Solve(SolveArgs),
    /// Sweep generated instances and write one CSV row per run.
    Bench(BenchArgs),
    /// Check a solution against the optimality conditions.
    Verify(VerifyArgs),
    /// Mean hull-vertex count per constraint count, as CSV.
    HullGrowth(GrowthArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: FamilyTag,
    #[arg(long)]
    n: usize,
    /// Defaults to `n`.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Cont)]
    mode: ModeArg,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = SolverKind::Decomp)]
    solver: SolverKind,
    /// Accuracy for continuous instances.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long)]
    time_limit_s: Option<f64>,
    /// Include solver statistics in the output.
    #[arg(long)]
    stats: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON bench configuration; the grid flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    family: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Constraint counts; `m = n` when absent.
    #[arg(long, value_delimiter = ',')]
    m: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Cont)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SolverKind::Decomp)]
    solver: SolverKind,
    #[arg(long)]
    time_limit_s: Option<f64>,
    /// CSV path; overrides the config file. Stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    solution: PathBuf,
    /// Fixed derivative and position tolerance; calibrated from the
    /// solution's epsilon when absent.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GrowthArgs {
    #[arg(long, default_value = "crashing")]
    family: FamilyTag,
    #[arg(long, value_delimiter = ',', default_values_t = [100, 1000, 10000])]
    m: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Solution file: the solution fields, the active count and optional stats.
#[derive(Serialize, Deserialize)]
struct SolutionFile {
    #[serde(flatten)]
    solution: Solution,
    #[serde(default)]
    active: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stats: Option<SolveStats>,
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_bytes(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    let mut w = output(path)?;
    w.write_all(bytes)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn read_file(path: &Path) -> anyhow::Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_gen(args: GenArgs) -> anyhow::Result<ExitCode> {
    let m = args.m.unwrap_or(args.n);
    let inst = instance_for(args.family, args.n, m, args.seed, args.mode)?;
    write_bytes(args.out.as_deref(), &write_instance(&inst)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<ExitCode> {
    let inst = read_instance(&read_file(&args.instance)?).with_context(|| format!("loading {}", args.instance.display()))?;
    let epsilon = (inst.mode == Mode::Continuous).then_some(args.epsilon);
    let time_limit = args.time_limit_s.map(Duration::try_from_secs_f64).transpose()?;
    let out = run::run(&inst, args.solver, epsilon, time_limit)?;
    let optimal = out.solution.is_optimal();
    eprintln!(
        "{}: objective {} active {} in {:.3} ms",
        if optimal { "optimal" } else { "infeasible" },
        out.solution.objective,
        out.active,
        out.wall_ms
    );
    let file = SolutionFile {
        solution: out.solution,
        active: out.active,
        stats: if args.stats { out.stats } else { None },
    };
    write_bytes(args.out.as_deref(), &serde_json::to_vec(&file)?)?;
    Ok(if optimal { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_slice::<BenchConfig>(&read_file(path)?).with_context(|| format!("parsing {}", path.display()))?,
        None => BenchConfig {
            families: args.family,
            n_list: args.n,
            m_list: (!args.m.is_empty()).then_some(args.m),
            trials: args.trials,
            seed: args.seed,
            epsilon: Some(args.epsilon),
            mode: args.mode,
            solver: args.solver,
            time_limit_s: args.time_limit_s,
            output: None,
        },
    };
    if args.out.is_some() {
        cfg.output = args.out;
    }
    let aggregates = run_bench(&cfg, output(cfg.output.as_deref())?)?;
    for row in aggregates {
        eprintln!(
            "{} n={} m={}: mean active {} mean wall_ms {}",
            row.family,
            row.n,
            row.m,
            row.active.map_or("-".into(), |a| format!("{a:.2}")),
            row.wall_ms.map_or("-".into(), |w| format!("{w:.3}")),
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let inst = read_instance(&read_file(&args.instance)?).with_context(|| format!("loading {}", args.instance.display()))?;
    let file: SolutionFile = serde_json::from_slice(&read_file(&args.solution)?).with_context(|| format!("parsing {}", args.solution.display()))?;
    if !file.solution.is_optimal() {
        bail!("solution file records an infeasible instance; nothing to verify");
    }
    let x = &file.solution.x;
    if x.len() != inst.n {
        bail!("dimension mismatch: instance has n = {}, solution has {} entries", inst.n, x.len());
    }
    let tol = match args.tau {
        Some(tau) => KktTolerance {
            derivative: tau,
            position: tau,
        },
        None => KktTolerance::calibrated(&inst, x, file.solution.epsilon.unwrap_or(0.0)),
    };
    let report = verify_kkt(&inst, x, tol)?;
    write_bytes(args.out.as_deref(), &serde_json::to_vec_pretty(&report)?)?;
    Ok(match report.verdict {
        Verdict::Pass => ExitCode::SUCCESS,
        Verdict::Fail => ExitCode::from(3),
    })
}

fn cmd_hull_growth(args: GrowthArgs) -> anyhow::Result<ExitCode> {
    let rows = active_growth_experiment(args.family, &args.m, args.trials, args.seed)?;
    let mut writer = csv::Writer::from_writer(output(args.out.as_deref())?);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Verify(a) => cmd_verify(a),
        Command::HullGrowth(a) => cmd_hull_growth(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
