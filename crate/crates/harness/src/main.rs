use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dsfm_core::level0::{OraclePolicy, OracleRegistry, OracleTable};
use dsfm_core::{DecomposableInstance, SolveOptions, SolverRegistry};
use dsfm_harness::bench::{render_tables, run_benchmark, BenchmarkConfig};
use dsfm_harness::diagnose::{diagnose, render};
use dsfm_harness::ingest::{image_to_instance, load_raster, IngestParams};
use dsfm_harness::validate::validate_instance;
use dsfm_harness::{load_instance, save_instance, HarnessError, Result};
use serde::Serialize;

/// Decomposable submodular function minimization.
#[derive(Parser)]
#[command(name = "dsfm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize an instance with one solver.
    Solve(SolveArgs),
    /// Convert a PPM/PGM image into an instance file.
    Ingest(IngestArgs),
    /// Run a benchmark described by a TOML file.
    Bench(BenchArgs),
    /// Estimate condition-number statistics of an instance.
    Diagnose(DiagnoseArgs),
    /// Check submodularity and base-polytope membership per potential.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct OracleFlags {
    /// Oracle per potential kind, e.g. `region=wolfe:10:warm` or `all=brute`.
    #[arg(long = "oracle", value_name = "KIND=SPEC")]
    oracles: Vec<String>,
}

impl OracleFlags {
    fn build(&self, inst: &DecomposableInstance) -> Result<OracleTable> {
        let mut policy = OraclePolicy::default();
        for a in &self.oracles {
            policy.apply_assignment(a)?;
        }
        Ok(policy.build(&OracleRegistry::builtin(), inst)?)
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "ibfs")]
    solver: String,
    #[command(flatten)]
    oracle: OracleFlags,
    /// Gradient steps, or augmentation cap for flow solvers.
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fail instead of warning when a flow solver is given inexact oracles.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    target_gap: Option<f64>,
    #[arg(long)]
    debug_checks: bool,
    /// Print the minimizing set.
    #[arg(long)]
    print_set: bool,
    /// Write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    image: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    unary_scale: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda_pair: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda_square: f64,
    #[arg(long, default_value_t = 0)]
    regions: usize,
    #[arg(long, default_value_t = 0)]
    region_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    config: PathBuf,
    /// Override the configured trial count.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    instance: PathBuf,
    #[command(flatten)]
    oracle: OracleFlags,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    instance: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| HarnessError::Config(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let inst = load_instance(&args.instance)?;
    let oracles = args.oracle.build(&inst)?;
    let solver = SolverRegistry::builtin().get(&args.solver)?;
    let opts = SolveOptions {
        iterations: args.iterations,
        seed: args.seed,
        strict: args.strict,
        target_gap: args.target_gap,
        debug_checks: args.debug_checks,
        ..Default::default()
    };
    let rep = solver.solve(&inst, &oracles, &opts)?;
    for w in &rep.warnings {
        eprintln!("warning: {w}");
    }
    println!("solver      {}", rep.solver);
    println!("value       {}", rep.value);
    println!("gap         {:.3e}", rep.gap.max(0.0));
    println!("set size    {}", rep.minimizer.len());
    println!("iterations  {}", rep.iterations);
    println!("oracle calls {}", rep.oracle_calls_total);
    println!("certified   {}", rep.certified);
    println!("seconds     {:.6}", rep.wall_seconds);
    if args.print_set {
        let ids: Vec<String> = rep.minimizer.iter().map(|v| v.to_string()).collect();
        println!("set         {}", ids.join(" "));
    }
    if let Some(p) = &args.json {
        write_json(p, &rep)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn ingest(args: IngestArgs) -> Result<ExitCode> {
    let params = IngestParams {
        unary_scale: args.unary_scale,
        lambda_pair: args.lambda_pair,
        lambda_square: args.lambda_square,
        regions: args.regions,
        region_size: args.region_size,
        seed: args.seed,
        ..Default::default()
    };
    let inst = image_to_instance(&load_raster(&args.image)?, &params)?;
    save_instance(&args.output, &inst)?;
    println!(
        "wrote {} (n = {}, r = {})",
        args.output.display(),
        inst.n(),
        inst.r()
    );
    Ok(ExitCode::SUCCESS)
}

fn bench(args: BenchArgs) -> Result<ExitCode> {
    let mut cfg = BenchmarkConfig::load(&args.config)?;
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    let rep = run_benchmark(&cfg)?;
    print!("{}", render_tables(&rep));
    if let Some(p) = &args.json {
        write_json(p, &rep)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_diagnose(args: DiagnoseArgs) -> Result<ExitCode> {
    let inst = load_instance(&args.instance)?;
    let oracles = args.oracle.build(&inst)?;
    let rep = diagnose(&inst, &oracles, args.samples, args.seed)?;
    print!("{}", render(&rep));
    if let Some(p) = &args.json {
        write_json(p, &rep)?;
    }
    Ok(if rep.violations() == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(8)
    })
}

fn validate(args: ValidateArgs) -> Result<ExitCode> {
    let inst = load_instance(&args.instance)?;
    let rep = validate_instance(&inst);
    println!(
        "n = {}, r = {}, checked {}, skipped {}",
        rep.n, rep.r, rep.checked, rep.skipped
    );
    for v in &rep.violations {
        println!("potential {} ({}): {}", v.potential, v.kind, v.message);
    }
    if let Some(p) = &args.json {
        write_json(p, &rep)?;
    }
    if rep.is_valid() {
        println!("ok");
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(4))
    }
}

fn configure_threads() {
    if let Some(k) = std::env::var("DSFM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Ingest(a) => ingest(a),
        Command::Bench(a) => bench(a),
        Command::Diagnose(a) => run_diagnose(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let line = serde_json::json!({ "error": e.category(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
