use std::path::PathBuf;
use std::process::ExitCode;

use bpflow_core::etd::PhiTable;
use bpflow_core::oracle::{oracle_etd_step, MAX_ORACLE_N};
use bpflow_core::runner::{convergence_study, prepare, run_prepared};
use bpflow_core::snapshot::read_arrays;
use bpflow_core::spectral::sup_norm;
use bpflow_core::stepper::{etd1_step, etdrk2_step, StepWorkspace};
use bpflow_core::{FrameTable, Grid, ModelParams, RunConfig, Scheme, StabilizedParams, TensorField};
use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const THREADS_VAR: &str = "BPFLOW_THREADS";
const ORACLE_TOL: f64 = 1e-11;

#[derive(Parser)]
#[command(name = "bpflow", version, about = "Exponential time differencing for chiral Q-tensor gradient flows")]
#[command(after_help = "Set BPFLOW_THREADS to fix the worker thread count.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write its artifacts.
    Run {
        config: PathBuf,
        /// `key=value` assignments applied after the file.
        overrides: Vec<String>,
    },
    /// Time-step convergence study against a fine reference.
    Converge {
        config: PathBuf,
        overrides: Vec<String>,
        /// Finest ladder level k (τ = τ₁/2^k for k = 0..=levels).
        #[arg(long, default_value_t = 7)]
        levels: u32,
        /// Reference step τ₁/2^ref_level.
        #[arg(long, default_value_t = 8)]
        ref_level: u32,
        /// Coarsest step τ₁; defaults to the config's `tau`.
        #[arg(long)]
        tau1: Option<String>,
    },
    /// Compare fast steps with the dense per-mode oracle on a tiny grid.
    OracleCheck {
        #[arg(long, default_value_t = 2)]
        grid: usize,
        #[arg(long, default_value_t = 20)]
        states: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print a snapshot header.
    Info { snapshot: PathBuf },
}

enum Status {
    Ok,
    Violated,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    match dispatch(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Violated) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("{THREADS_VAR} must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err(format!("{THREADS_VAR} must be positive"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn dispatch(cmd: Command) -> bpflow_core::Result<Status> {
    match cmd {
        Command::Run { config, overrides } => run(&config, &overrides),
        Command::Converge { config, overrides, levels, ref_level, tau1 } => {
            converge(&config, &overrides, levels, ref_level, tau1.as_deref())
        }
        Command::OracleCheck { grid, states, seed } => oracle_check(grid, states, seed),
        Command::Info { snapshot } => info(&snapshot),
    }
}

fn run(path: &std::path::Path, overrides: &[String]) -> bpflow_core::Result<Status> {
    let cfg = RunConfig::load(path, overrides)?;
    let prep = prepare(&cfg)?;
    print!("{}", prep.report);
    let summary = run_prepared(&cfg, prep)?;
    println!("{summary}");
    if let Some(dir) = &cfg.output {
        println!("artifacts in {}", dir.display());
    }
    Ok(if summary.invariants_hold() { Status::Ok } else { Status::Violated })
}

fn converge(
    path: &std::path::Path,
    overrides: &[String],
    levels: u32,
    ref_level: u32,
    tau1: Option<&str>,
) -> bpflow_core::Result<Status> {
    let cfg = RunConfig::load(path, overrides)?;
    let tau1 = match tau1 {
        None => cfg.tau,
        Some(s) => bpflow_core::config::parse_real(s).filter(|t| *t > 0.0).ok_or_else(|| {
            bpflow_core::Error::Config { key: "tau1".into(), reason: format!("not a positive number: `{s}`") }
        })?,
    };
    let table = convergence_study(&cfg, tau1, levels, ref_level)?;
    print!("{table}");
    if let Some(dir) = &cfg.output {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("convergence_{}.txt", cfg.scheme)), table.to_string())?;
    }
    Ok(Status::Ok)
}

fn oracle_check(n: usize, states: usize, seed: u64) -> bpflow_core::Result<Status> {
    if n > MAX_ORACLE_N {
        return Err(bpflow_core::Error::OracleTooLarge { limit: MAX_ORACLE_N, got: n });
    }
    let grid = Grid::cube(n)?;
    let p = StabilizedParams::unchecked(ModelParams::mbp_test(), 8.0, 0.5, 2.0);
    let tau = 1.0 / 32.0;
    let frames = FrameTable::new(grid, &p)?;
    let table = PhiTable::new(&frames, tau)?;
    let mut ws = StepWorkspace::new(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 2];
    for _ in 0..states {
        let mut q = TensorField::zeros(grid);
        for c in 0..5 {
            for v in q.component_mut(c) {
                *v = rng.random_range(-0.5..0.5);
            }
        }
        for (slot, scheme) in [Scheme::Etd1, Scheme::Etdrk2].into_iter().enumerate() {
            let fast = match scheme {
                Scheme::Etd1 => etd1_step(&q, &frames, &table, &mut ws)?,
                Scheme::Etdrk2 => etdrk2_step(&q, &frames, &table, &mut ws)?,
            };
            let dense = oracle_etd_step(scheme, &q, tau, &p)?;
            worst[slot] = worst[slot].max(sup_norm(&fast.sub(&dense)?));
        }
    }
    println!("grid {n}^3, {states} states, tau = {tau}");
    println!("etd1   max |fast - dense| = {:.3e}", worst[0]);
    println!("etdrk2 max |fast - dense| = {:.3e}", worst[1]);
    let ok = worst.iter().all(|w| *w < ORACLE_TOL);
    println!("{} (tolerance {ORACLE_TOL:e})", if ok { "agree" } else { "DISAGREE" });
    Ok(if ok { Status::Ok } else { Status::Violated })
}

fn info(path: &std::path::Path) -> bpflow_core::Result<Status> {
    let (h, arrays) = read_arrays(path)?;
    let [nx, ny, nz] = h.grid.dims();
    let [lx, ly, lz] = h.grid.lengths();
    println!("kind        {}", String::from_utf8_lossy(&h.magic).trim_end_matches('\0'));
    println!("version     {}", h.version);
    println!("grid        {nx} x {ny} x {nz}");
    println!("domain      {lx} x {ly} x {lz}");
    println!("time        {}", h.time);
    println!("step        {}", h.step);
    println!("components  {}", h.components);
    for (c, a) in arrays.iter().enumerate() {
        let max = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        println!("  [{c}] max |value| = {max:.6e}");
    }
    Ok(Status::Ok)
}
