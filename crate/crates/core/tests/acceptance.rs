//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary so the lines show up under `cargo test`. The
//! full-size blue-phase run is skipped unless `--ignored` or
//! `--include-ignored` is passed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use bpflow_core::cmat::{self, herm_dot};
use bpflow_core::config::{parse_assignment, parse_pairs};
use bpflow_core::diagnostics::{shell_metrics, structure_factor};
use bpflow_core::etd::phi;
use bpflow_core::etd::PhiTable;
use bpflow_core::hstf::{curl_relation_residual, hstf_tensors, local_frame, operator_eigenvalues};
use bpflow_core::oracle::{hermitian_eigenvalues, oracle_etd_step, symbol_matrix};
use bpflow_core::params::{default_radius, from_dimensionless, kappa2_min};
use bpflow_core::runner::{convergence_study, run_simulation};
use bpflow_core::spectral::{sup_norm, Fft3};
use bpflow_core::stepper::{etd1_step, etdrk2_step, StepWorkspace};
use bpflow_core::{
    DimensionlessParams, FrameTable, Grid, ModelParams, RunConfig, Scheme, StabilizedParams, TensorField,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

struct Suite {
    failed: Vec<String>,
}

impl Suite {
    fn run(&mut self, name: &str, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f));
        let secs = start.elapsed().as_secs_f64();
        let o = result.unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        println!("{} {name}: {} [{secs:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            self.failed.push(name.to_string());
        }
    }
}

const MBP_BASE: &str = "
    tau = 2^-5
    t_final = 10
    L1 = 1
    L4 = 1/4
    alpha = -1
    beta = 1
    gamma = 2.25
    kappa1 = 8
    kappa2 = 0.5
    force = true
    ic = ic-a
    c = 1/3
";

const BP3_BASE: &str = "
    scheme = etdrk2
    tau = 2^-5
    tau_c = 1
    kappa = 3
    L1 = 0.1
    beta = 1
    gamma = 1
    ic = ic-b
    c = 0.2
";

fn config(base: &str, extra: &[&str]) -> RunConfig {
    let mut pairs = parse_pairs(base).unwrap();
    pairs.extend(extra.iter().map(|s| parse_assignment(s).unwrap()));
    RunConfig::from_pairs(pairs).unwrap()
}

fn mbp_params(a: f64) -> StabilizedParams {
    StabilizedParams::unchecked(ModelParams::mbp_test(), 8.0, 0.5, a)
}

fn random_field(grid: Grid, rng: &mut ChaCha8Rng, amp: f64) -> TensorField {
    let mut f = TensorField::zeros(grid);
    for c in 0..5 {
        for v in f.component_mut(c) {
            *v = amp * rng.random_range(-1.0..1.0);
        }
    }
    f
}

fn convergence(scheme: Scheme, target: f64) -> Outcome {
    let name = scheme.to_string();
    let cfg = config(MBP_BASE, &["n=32", "t_final=1", &format!("scheme={name}")]);
    let table = convergence_study(&cfg, 1.0 / 16.0, 5, 8).unwrap();
    print!("{table}");
    let rates = table.finest_rates(2);
    let ok = rates.len() == 2 && rates.iter().all(|&(s, l)| (s - target).abs() <= 0.05 && (l - target).abs() <= 0.05);
    let shown: Vec<String> = rates.iter().map(|(s, l)| format!("({s:.3}, {l:.3})")).collect();
    outcome(ok, format!("finest (sup, L2) rates {} vs {target:.2} ± 0.05", shown.join(" ")))
}

struct Sec61 {
    lines: Vec<(String, Outcome)>,
}

/// Runs the 320-step experiment for both schemes once and grades the
/// three criteria that share it.
fn section61_runs(n: usize) -> Sec61 {
    let mut mbp = Vec::new();
    let mut energy = Vec::new();
    let mut eig = Vec::new();
    for scheme in [Scheme::Etd1, Scheme::Etdrk2] {
        let cfg = config(MBP_BASE, &[&format!("n={n}"), &format!("scheme={scheme}"), "diag_every=1"]);
        let s = run_simulation(&cfg).unwrap();
        assert_eq!(s.steps, 320);
        mbp.push((scheme, s.mbp_violations, s.max_sup, s.params.a));
        energy.push((scheme, s.energy_violations, s.max_energy_rise));
        let ok = |d: &&bpflow_core::StepDiagnostics| d.lambda_min > -1.0 / 3.0 && d.lambda_max < 2.0 / 3.0;
        let inside = s.recorded.iter().all(|d| ok(&d));
        // First step from which every later row is inside, for the report.
        let settled =
            s.recorded.iter().rposition(|d| !ok(&d)).map_or(0, |i| s.recorded.get(i + 1).map_or(u64::MAX, |d| d.step));
        eig.push((scheme, inside, s.lambda_min, s.lambda_max, settled));
    }
    let mut lines = Vec::new();
    lines.push((
        "MBP preservation".to_string(),
        outcome(
            mbp.iter().all(|m| m.1 == 0),
            mbp.iter()
                .map(|(s, v, sup, a)| format!("{s}: {v} violations, max sup {sup:.6} <= a = {a:.6}"))
                .collect::<Vec<_>>()
                .join("; "),
        ),
    ));
    lines.push((
        "energy dissipation".to_string(),
        outcome(
            energy.iter().all(|e| e.1 == 0),
            energy
                .iter()
                .map(|(s, v, r)| format!("{s}: {v} violations, max rise {r:.2e} (tol 1e-10)"))
                .collect::<Vec<_>>()
                .join("; "),
        ),
    ));
    lines.push((
        "eigenvalue physicality".to_string(),
        outcome(
            eig.iter().all(|e| e.1),
            eig.iter()
                .map(|(s, _, lo, hi, m)| format!("{s}: eigenvalues in [{lo:.6}, {hi:.6}], inside from step {m} on"))
                .collect::<Vec<_>>()
                .join("; "),
        ),
    ));
    Sec61 { lines }
}

fn hstf_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let p = mbp_params(2.0);
    let (mut ortho, mut curl, mut eig, mut eig_rel) = (0f64, 0f64, 0f64, 0f64);
    for _ in 0..1000 {
        let k = loop {
            let k: [f64; 3] = std::array::from_fn(|_| rng.random_range(-32.0..32.0));
            if k.iter().map(|x| x * x).sum::<f64>() > 1e-6 {
                break k;
            }
        };
        let t = hstf_tensors(&local_frame(k).unwrap());
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((herm_dot(&t[i], &t[j]) - cmat::c(want)).norm());
            }
        }
        let kn = k.iter().map(|x| x * x).sum::<f64>().sqrt();
        curl = curl.max(curl_relation_residual(k, &t) * kn);
        let mut fast = operator_eigenvalues(k, &p);
        fast.sort_by(f64::total_cmp);
        let dense = hermitian_eigenvalues(&symbol_matrix(k, &p));
        for (a, b) in fast.iter().zip(&dense) {
            eig = eig.max((a - b).abs());
            eig_rel = eig_rel.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    // Eigenvalues are graded relative to max(1, |λ|): near the grid's
    // largest |k| the symbol is O(10³) and 1e-12 absolute is below 3 ulps.
    outcome(
        ortho < 1e-12 && curl < 1e-11 && eig_rel < 1e-12,
        format!("orthonormality {ortho:.1e}, curl relation {curl:.1e}, eigenvalues {eig_rel:.1e} rel ({eig:.1e} abs)"),
    )
}

fn oracle_equivalence(n: usize, states: usize) -> Outcome {
    let g = Grid::cube(n).unwrap();
    let p = mbp_params(2.0);
    let tau = 1.0 / 32.0;
    let frames = FrameTable::new(g, &p).unwrap();
    let table = PhiTable::new(&frames, tau).unwrap();
    let mut ws = StepWorkspace::new(g);
    let mut rng = ChaCha8Rng::seed_from_u64(7 + n as u64);
    let mut worst: f64 = 0.0;
    for _ in 0..states {
        let q = random_field(g, &mut rng, 0.5);
        for scheme in [Scheme::Etd1, Scheme::Etdrk2] {
            let fast = match scheme {
                Scheme::Etd1 => etd1_step(&q, &frames, &table, &mut ws).unwrap(),
                Scheme::Etdrk2 => etdrk2_step(&q, &frames, &table, &mut ws).unwrap(),
            };
            let dense = oracle_etd_step(scheme, &q, tau, &p).unwrap();
            worst = worst.max(sup_norm(&fast.sub(&dense).unwrap()));
        }
    }
    outcome(worst < 1e-11, format!("{n}^3 grid, {states} states, max |fast - dense| = {worst:.1e}"))
}

/// Bits kept by the fixed-point series evaluation.
const SERIES_BITS: usize = 600;

/// `Σ_{j<terms} z^j / (j + γ)!` by Horner's rule in `SERIES_BITS`-bit
/// fixed point; `z` enters exactly as a dyadic rational.
fn phi_series(gamma: usize, z: f64, terms: usize) -> f64 {
    let zr = BigRational::from_float(z).unwrap();
    let (num, den) = (zr.numer().clone(), zr.denom().clone());
    let one = BigInt::one() << SERIES_BITS;
    let mut s = one.clone();
    for n in (1..terms).rev() {
        s = &one + (s * &num) / (&den * BigInt::from(n + gamma));
    }
    let fact: usize = (1..=gamma).product();
    let s = s / BigInt::from(fact);
    s.to_f64().unwrap() * 2f64.powi(-(SERIES_BITS as i32))
}

fn phi_accuracy() -> Outcome {
    let mut seam: f64 = 0.0;
    let samples = 60;
    for i in 0..=samples {
        let m = 0.01 * 10f64.powf(i as f64 / samples as f64);
        for z in [m, -m] {
            for g in 1..=2 {
                let exact = phi_series(g, z, 200);
                seam = seam.max((phi(g, z) - exact).abs() / exact.abs());
            }
        }
    }
    let mut rec1: f64 = 0.0;
    let mut rec2: f64 = 0.0;
    let mut zs = vec![0.0];
    for i in 0..=1200 {
        zs.push(-(10f64.powf(-8.0 + 14.0 * i as f64 / 1200.0)));
    }
    for z in zs {
        let (p0, p1, p2) = (phi(0, z), phi(1, z), phi(2, z));
        let e = z.exp_m1();
        rec1 = rec1.max(if e == 0.0 { (z * p1).abs() } else { (z * p1 - e).abs() / e.abs() });
        rec2 = rec2.max((z * z * p2 - (p0 - 1.0 - z)).abs() / (1.0 + z.abs() + p0));
    }
    outcome(
        seam < 1e-14 && rec1 < 1e-13 && rec2 < 1e-13,
        format!("series error {seam:.1e} on 0.01 <= |z| <= 0.1; recurrences {rec1:.1e}, {rec2:.1e} on [-1e6, 0]"),
    )
}

fn parameter_derivation() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (kappa, q0_want, l4_want) in [(3.0, 0.9129, 0.1826), (1.0, 0.3043, 0.0609)] {
        let d = DimensionlessParams { tau_c: 1.0, kappa_chir: kappa, l1: 0.1, beta: 1.0, gamma: 1.0 };
        let (p, q0) = from_dimensionless(&d).unwrap();
        ok &= (q0 - q0_want).abs() <= 5e-5 && (p.l4 - l4_want).abs() <= 1e-4;
        details.push(format!("kappa={kappa}: q0 = {q0:.5}, L4 = {:.5}, alpha = {:.5}", p.l4, p.alpha));
    }
    outcome(ok, details.join("; "))
}

fn bp3_shell(n: usize, t_final: f64) -> Outcome {
    let cfg = config(BP3_BASE, &[&format!("n={n}"), &format!("t_final={t_final}"), "diag_every=32"]);
    let grid = cfg.grid().unwrap();
    let fft = Fft3::new(grid);
    let model = cfg.params.model().unwrap();
    let k2 = kappa2_min(&model);
    let q0 = bpflow_core::initial_condition(cfg.ic, grid, cfg.amplitude);
    let start = shell_metrics(&grid, &structure_factor(&q0, &fft).unwrap());
    let s = run_simulation(&cfg).unwrap();
    let m = shell_metrics(&grid, &structure_factor(&s.final_state, &fft).unwrap());
    let peak_k = m.peak_bin as f64 * m.dk;
    outcome(
        m.interior && m.angular_cv < 1.0,
        format!(
            "N={n}, T={t_final}: peak |k| = {peak_k:.3} (bin {} of {}), angular CV {:.3} (t=0: {:.3}), kappa1 = {:.3}, a = {:.3} (default radius {:.3})",
            m.peak_bin,
            m.radial_mean.len() - 1,
            m.angular_cv,
            start.angular_cv,
            s.params.kappa1,
            s.params.a,
            default_radius(&model, k2, sup_norm(&q0)),
        ),
    )
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let full = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    // Listing and filtering requests from the test driver run nothing.
    if args.iter().any(|a| a == "--list") {
        return;
    }

    let mut suite = Suite { failed: Vec::new() };
    suite.run("parameter derivation", parameter_derivation);
    suite.run("phi-function accuracy", phi_accuracy);
    suite.run("HSTF correctness", hstf_correctness);
    suite.run("oracle equivalence", || oracle_equivalence(2, 20));
    suite.run("oracle equivalence (4^3, helical modes)", || oracle_equivalence(4, 20));
    suite.run("convergence ETD1", || convergence(Scheme::Etd1, 1.0));
    suite.run("convergence ETDRK2", || convergence(Scheme::Etdrk2, 2.0));
    let sec = catch_unwind(|| section61_runs(64));
    match sec {
        Ok(sec) => {
            for (name, o) in sec.lines {
                suite.run(&name, || o);
            }
        }
        Err(_) => {
            for name in ["MBP preservation", "energy dissipation", "eigenvalue physicality"] {
                suite.run(name, || outcome(false, "run failed"));
            }
        }
    }
    suite.run("BP III shell (N=48, T=20)", || bp3_shell(48, 20.0));
    if full {
        suite.run("BP III shell (N=64, T=50)", || bp3_shell(64, 50.0));
    } else {
        println!("SKIP BP III shell (N=64, T=50): pass --include-ignored to run");
    }

    if suite.failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: {} failed: {}", suite.failed.len(), suite.failed.join(", "));
        std::process::exit(1);
    }
}
