//! Benchmark fixtures shared by the criterion targets.

use bpflow_core::initial::{initial_condition, IcKind};
use bpflow_core::{Grid, ModelParams, StabilizedParams, TensorField};

/// Stabilized coefficients of the bounded-norm test problem.
pub fn test_params() -> StabilizedParams {
    StabilizedParams::unchecked(ModelParams::mbp_test(), 8.0, 0.5, 2.0)
}

/// The `ic-a` field on an `n³` grid.
pub fn test_state(n: usize) -> (Grid, TensorField) {
    let grid = Grid::cube(n).expect("even grid size");
    (grid, initial_condition(IcKind::A, grid, 1.0 / 3.0))
}
