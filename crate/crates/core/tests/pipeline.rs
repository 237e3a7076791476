use std::fs;

use bpflow_core::config::{parse_assignment, parse_pairs};
use bpflow_core::runner::{convergence_study, run_simulation};
use bpflow_core::snapshot::{read_arrays, read_snapshot, SFACTOR_MAGIC};
use bpflow_core::spectral::sup_norm;
use bpflow_core::{initial_condition, RunConfig, StepDiagnostics};

const BASE: &str = "
    n = 8
    scheme = etdrk2
    tau = 2^-4
    t_final = 1/2
    L1 = 1
    L4 = 1/4
    alpha = -1
    beta = 1
    gamma = 2.25
    kappa1 = 8
    kappa2 = 0.5
    force = true
    ic = ic-a
";

fn config(extra: &[&str]) -> RunConfig {
    let mut p = parse_pairs(BASE).unwrap();
    p.extend(extra.iter().map(|s| parse_assignment(s).unwrap()));
    RunConfig::from_pairs(p).unwrap()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn time_series_is_bitwise_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let cfg_a = config(&[&format!("output={}", a.display())]);
    let cfg_b = config(&[&format!("output={}", b.display())]);
    in_pool(1, || run_simulation(&cfg_a).unwrap());
    in_pool(3, || run_simulation(&cfg_b).unwrap());
    let ta = fs::read(a.join("timeseries.csv")).unwrap();
    let tb = fs::read(b.join("timeseries.csv")).unwrap();
    assert_eq!(ta, tb);
    assert_eq!(fs::read(a.join("snap_00000008.qts")).unwrap(), fs::read(b.join("snap_00000008.qts")).unwrap());
}

#[test]
fn artifacts_match_the_in_memory_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = config(&[
        &format!("output={}", out.display()),
        "diag_every=2",
        "snapshot_every=4",
        "structure_factor=1",
        "scalar_fields=1",
    ]);
    let summary = run_simulation(&cfg).unwrap();

    let csv = fs::read_to_string(out.join("timeseries.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(StepDiagnostics::CSV_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), summary.recorded.len());
    assert_eq!(rows.len(), 5);
    for (row, d) in rows.iter().zip(&summary.recorded) {
        assert_eq!(*row, d.csv_row());
        let energy: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(energy.to_bits(), d.energy.to_bits());
    }

    for step in [0, 4, 8] {
        let (f, h) = read_snapshot(&out.join(format!("snap_{step:08}.qts"))).unwrap();
        assert_eq!(h.step, step);
        assert_eq!(h.time, step as f64 / 16.0);
        if step == 8 {
            for c in 0..5 {
                assert_eq!(f.component(c), summary.final_state.component(c));
            }
        }
    }
    let (h, s) = read_arrays(&out.join("sfactor_00000008.qts")).unwrap();
    assert_eq!((h.magic, h.components), (SFACTOR_MAGIC, 1));
    assert!(s[0].iter().all(|v| *v >= 0.0));
    let (h, _) = read_arrays(&out.join("scalars_00000004.qts")).unwrap();
    assert_eq!(h.components, 2);
    let text = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(text.contains("MBP              held"));
    let reparsed = RunConfig::from_pairs(parse_pairs(&fs::read_to_string(out.join("config.txt")).unwrap()).unwrap());
    assert_eq!(reparsed.unwrap(), cfg);
}

#[test]
fn zero_final_time_writes_one_row_and_the_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z");
    let cfg = config(&["t_final=0", &format!("output={}", out.display())]);
    let s = run_simulation(&cfg).unwrap();
    assert!(s.invariants_hold());
    let csv = fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let (f, _) = read_snapshot(&out.join("snap_00000000.qts")).unwrap();
    let ic = initial_condition(cfg.ic, cfg.grid().unwrap(), cfg.amplitude);
    assert_eq!(sup_norm(&f.sub(&ic).unwrap()), 0.0);
}

#[test]
fn linear_problem_still_converges_at_first_order() {
    // β = 0 and negligible γ without stabilization: N(Q) ≈ −αQ, so ETD1 commits only
    // the quadrature error of freezing that term over a step.
    let cfg = config(&["beta=0", "gamma=1e-12", "kappa1=0", "kappa2=0", "scheme=etd1", "t_final=1"]);
    let table = convergence_study(&cfg, 1.0 / 16.0, 3, 6).unwrap();
    for (s, l) in table.finest_rates(2) {
        assert!((s - 1.0).abs() < 0.1 && (l - 1.0).abs() < 0.1, "{table}");
    }
}

#[test]
fn ladder_runs_share_the_initial_state() {
    // With T equal to one coarse step, level 0 and the reference differ
    // only by the integration, so a different starting field would show
    // up as an O(1) error.
    let cfg = config(&["t_final=2^-4"]);
    let table = convergence_study(&cfg, 1.0 / 16.0, 1, 4).unwrap();
    assert!(table.rows[0].err_sup < 1e-2, "{table}");
    assert!(table.rows[1].err_sup < table.rows[0].err_sup);
}
