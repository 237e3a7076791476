//! Simulation main loop and the time-step convergence harness.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::{steps_for, RunConfig};
use crate::diagnostics::{biaxiality_field, order_parameter_field, structure_factor, Diagnostics, StepDiagnostics};
use crate::error::{Error, Result};
use crate::grid::{Grid, TensorField};
use crate::initial::initial_condition;
use crate::params::{select_stabilization, StabilizedParams, ValidationReport};
use crate::snapshot::{write_arrays, write_snapshot, SnapshotHeader, SCALAR_MAGIC, SFACTOR_MAGIC};
use crate::spectral::{l2_norm, sup_norm};
use crate::stepper::{Scheme, Stepper};

/// Scheme used for the convergence reference solution.
pub const REFERENCE_SCHEME: Scheme = Scheme::Etdrk2;

/// Allowed energy increase per step, relative to `1 + |E|`.
pub const ENERGY_TOL: f64 = 1e-10;

/// Initial state and stabilization resolved from a config.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub grid: Grid,
    pub initial: TensorField,
    pub params: StabilizedParams,
    pub report: ValidationReport,
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let initial = initial_condition(cfg.ic, grid, cfg.amplitude);
    let model = cfg.params.model()?;
    let (params, report) = select_stabilization(&model, sup_norm(&initial), cfg.overrides)?;
    Ok(Prepared { grid, initial, params, report })
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: u64,
    pub params: StabilizedParams,
    pub report: ValidationReport,
    /// Rows at the diagnostics cadence, including step 0 and the last step.
    pub recorded: Vec<StepDiagnostics>,
    /// Steps whose sup norm exceeded the radius `a`.
    pub mbp_violations: u64,
    /// Steps whose energy rose by more than [`ENERGY_TOL`].
    pub energy_violations: u64,
    pub max_sup: f64,
    /// Largest `(E_{m+1} − E_m) / (1 + |E_m|)` over all steps.
    pub max_energy_rise: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub final_state: TensorField,
}

impl RunSummary {
    pub fn invariants_hold(&self) -> bool {
        self.mbp_violations == 0 && self.energy_violations == 0
    }

    pub fn last(&self) -> &StepDiagnostics {
        self.recorded.last().expect("step 0 is always recorded")
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        let last = self.last();
        writeln!(f, "steps            {}", self.steps)?;
        writeln!(f, "final time       {:.6}", last.time)?;
        writeln!(f, "kappa1, kappa2   {:.6}, {:.6}", p.kappa1, p.kappa2)?;
        writeln!(f, "radius a         {:.6}", p.a)?;
        writeln!(f, "max sup norm     {:.6e}", self.max_sup)?;
        writeln!(f, "final energy     {:.10e}", last.energy)?;
        writeln!(f, "max energy rise  {:.3e}", self.max_energy_rise)?;
        writeln!(f, "eigenvalues      [{:.6}, {:.6}]", self.lambda_min, self.lambda_max)?;
        writeln!(f, "MBP              {} ({} violations)", verdict(self.mbp_violations), self.mbp_violations)?;
        write!(f, "energy decay     {} ({} violations)", verdict(self.energy_violations), self.energy_violations)
    }
}

fn verdict(violations: u64) -> &'static str {
    if violations == 0 {
        "held"
    } else {
        "BROKEN"
    }
}

struct Artifacts {
    dir: PathBuf,
    series: BufWriter<File>,
}

impl Artifacts {
    fn create(dir: &Path, cfg: &RunConfig, report: &ValidationReport) -> Result<Self> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.txt"), cfg.to_text())?;
        fs::write(dir.join("params.txt"), report.to_string())?;
        let mut series = BufWriter::new(File::create(dir.join("timeseries.csv"))?);
        writeln!(series, "{}", StepDiagnostics::CSV_HEADER)?;
        Ok(Artifacts { dir: dir.to_path_buf(), series })
    }

    fn row(&mut self, d: &StepDiagnostics) -> Result<()> {
        writeln!(self.series, "{}", d.csv_row())?;
        Ok(())
    }

    fn snapshot(&self, cfg: &RunConfig, q: &TensorField, step: u64, time: f64) -> Result<()> {
        write_snapshot(&self.dir.join(format!("snap_{step:08}.qts")), q, time, step)?;
        if cfg.scalar_fields {
            let s = order_parameter_field(q);
            let b = biaxiality_field(q);
            let header = SnapshotHeader::new(SCALAR_MAGIC, *q.grid(), time, step, 2);
            write_arrays(&self.dir.join(format!("scalars_{step:08}.qts")), &header, &[&s, &b])?;
        }
        Ok(())
    }

    fn finish(mut self, summary: &RunSummary) -> Result<()> {
        self.series.flush()?;
        fs::write(self.dir.join("summary.txt"), format!("{summary}\n"))?;
        Ok(())
    }
}

/// Runs a configuration end to end, writing artifacts if an output
/// directory is set.
pub fn run_simulation(cfg: &RunConfig) -> Result<RunSummary> {
    let prep = prepare(cfg)?;
    run_prepared(cfg, prep)
}

pub fn run_prepared(cfg: &RunConfig, prep: Prepared) -> Result<RunSummary> {
    let steps = cfg.steps()?;
    let Prepared { grid, initial, params, report } = prep;
    let mut stepper = Stepper::new(grid, &params, cfg.scheme, cfg.tau, cfg.dealias)?;
    let diag = Diagnostics::new(grid, params.model);
    let mut out = cfg.output.as_deref().map(|d| Artifacts::create(d, cfg, &report)).transpose()?;

    let mut q = initial;
    let mut d = diag.evaluate(&q, 0, 0.0)?;
    let mut summary = RunSummary {
        steps,
        params,
        report,
        recorded: vec![d],
        mbp_violations: 0,
        energy_violations: 0,
        max_sup: d.sup_norm,
        max_energy_rise: f64::NEG_INFINITY,
        lambda_min: d.lambda_min,
        lambda_max: d.lambda_max,
        final_state: TensorField::zeros(grid),
    };
    if let Some(a) = out.as_mut() {
        a.row(&d)?;
        if cfg.snapshot_every > 0 || steps == 0 {
            a.snapshot(cfg, &q, 0, 0.0)?;
        }
    }

    for m in 1..=steps {
        stepper.step(&mut q)?;
        let next = diag.evaluate(&q, m, m as f64 * cfg.tau)?;
        let rise = (next.energy - d.energy) / (1.0 + d.energy.abs());
        summary.max_energy_rise = summary.max_energy_rise.max(rise);
        if rise > ENERGY_TOL {
            summary.energy_violations += 1;
        }
        if next.sup_norm > params.a {
            summary.mbp_violations += 1;
        }
        summary.max_sup = summary.max_sup.max(next.sup_norm);
        summary.lambda_min = summary.lambda_min.min(next.lambda_min);
        summary.lambda_max = summary.lambda_max.max(next.lambda_max);
        d = next;

        let last = m == steps;
        if m % cfg.diag_every == 0 || last {
            summary.recorded.push(d);
            if let Some(a) = out.as_mut() {
                a.row(&d)?;
            }
        }
        if let Some(a) = out.as_ref() {
            if (cfg.snapshot_every > 0 && m % cfg.snapshot_every == 0) || last {
                a.snapshot(cfg, &q, m, d.time)?;
            }
        }
    }

    if let Some(a) = out.as_ref() {
        if cfg.structure_factor {
            let s = structure_factor(&q, diag.fft())?;
            let header = SnapshotHeader::new(SFACTOR_MAGIC, grid, d.time, steps, 1);
            write_arrays(&a.dir.join(format!("sfactor_{steps:08}.qts")), &header, &[&s])?;
        }
    }
    summary.final_state = q;
    if let Some(a) = out {
        a.finish(&summary)?;
    }
    Ok(summary)
}

/// Advances `q` by `steps` steps.
pub fn integrate(stepper: &mut Stepper, q: &mut TensorField, steps: u64) -> Result<()> {
    for _ in 0..steps {
        stepper.step(q)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub level: u32,
    pub tau: f64,
    pub err_sup: f64,
    pub err_l2: f64,
    /// `log₂(e_{k−1} / e_k)`; absent on the coarsest level.
    pub rate_sup: Option<f64>,
    pub rate_l2: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub tau_ref: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Rates at the finest `count` levels as `(sup, l2)` pairs.
    pub fn finest_rates(&self, count: usize) -> Vec<(f64, f64)> {
        self.rows.iter().rev().take(count).filter_map(|r| Some((r.rate_sup?, r.rate_l2?))).collect()
    }
}

impl fmt::Display for ConvergenceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rate = |r: Option<f64>| r.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
        writeln!(f, "reference tau = {:e}", self.tau_ref)?;
        writeln!(f, "{:>5} {:>12} {:>12} {:>7} {:>12} {:>7}", "k", "tau", "err_sup", "rate", "err_l2", "rate")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>5} {:>12.4e} {:>12.4e} {:>7} {:>12.4e} {:>7}",
                r.level,
                r.tau,
                r.err_sup,
                rate(r.rate_sup),
                r.err_l2,
                rate(r.rate_l2)
            )?;
        }
        Ok(())
    }
}

/// Errors at `T` for `τ = τ₁/2^k`, `k = 0..=levels`, against `τ₁/2^ref_level`.
///
/// Every run starts from the same initial field and uses the same
/// stabilization, chosen once from `base`. The reference is always
/// integrated with ETDRK2 so that its own error stays below the ladder's
/// for either scheme.
pub fn convergence_study(base: &RunConfig, tau1: f64, levels: u32, ref_level: u32) -> Result<ConvergenceTable> {
    if levels >= ref_level {
        return Err(Error::Config {
            key: "levels".into(),
            reason: format!("levels ({levels}) must be below the reference level ({ref_level})"),
        });
    }
    let prep = prepare(base)?;
    let tau_at = |k: u32| tau1 / 2f64.powi(k as i32);
    let tau_ref = tau_at(ref_level);
    let mut reference = prep.initial.clone();
    {
        let mut stepper = Stepper::new(prep.grid, &prep.params, REFERENCE_SCHEME, tau_ref, base.dealias)?;
        integrate(&mut stepper, &mut reference, steps_for(base.t_final, tau_ref)?)?;
    }
    let mut stepper = Stepper::new(prep.grid, &prep.params, base.scheme, tau1, base.dealias)?;

    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for k in 0..=levels {
        let tau = tau_at(k);
        stepper.set_tau(tau)?;
        let mut q = prep.initial.clone();
        integrate(&mut stepper, &mut q, steps_for(base.t_final, tau)?)?;
        let e = q.sub(&reference)?;
        let (err_sup, err_l2) = (sup_norm(&e), l2_norm(&e));
        let prev = rows.last();
        rows.push(ConvergenceRow {
            level: k,
            tau,
            err_sup,
            err_l2,
            rate_sup: prev.map(|p| (p.err_sup / err_sup).log2()),
            rate_l2: prev.map(|p| (p.err_l2 / err_l2).log2()),
        });
    }
    Ok(ConvergenceTable { tau_ref, rows })
}
