//! Brute-force reference implementations for tiny grids.
//!
//! Nothing here touches the HSTF basis or the FFT engine: symbols are
//! assembled densely in a fixed orthonormal symmetric-traceless basis,
//! φ-functions of matrices come from `nalgebra`, and transforms are naive
//! DFT sums. Single-threaded on purpose.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::cmat::C64;
use crate::error::{Error, Result};
use crate::grid::{Grid, TensorField};
use crate::params::StabilizedParams;
use crate::qtensor::{bulk_force, QTensor5};
use crate::stepper::Scheme;

pub type CMatrix = DMatrix<C64>;

/// Largest matrix accepted by [`dense_phi`].
pub const MAX_DENSE: usize = 1000;
/// Largest grid (points per axis) accepted by [`oracle_etd_step`].
pub const MAX_ORACLE_N: usize = 4;

/// Orthonormal basis of symmetric traceless 3×3 matrices.
pub fn stf_basis() -> [Matrix3<f64>; 5] {
    let s2 = FRAC_1_SQRT_2;
    let s6 = 1.0 / 6f64.sqrt();
    let off = |i: usize, j: usize| {
        let mut m = Matrix3::zeros();
        m[(i, j)] = s2;
        m[(j, i)] = s2;
        m
    };
    [
        Matrix3::from_diagonal(&nalgebra::Vector3::new(s2, -s2, 0.0)),
        Matrix3::from_diagonal(&nalgebra::Vector3::new(s6, s6, -2.0 * s6)),
        off(0, 1),
        off(0, 2),
        off(1, 2),
    ]
}

fn complexify(m: &Matrix3<f64>) -> Matrix3<C64> {
    m.map(|v| C64::new(v, 0.0))
}

fn frob(a: &Matrix3<C64>, b: &Matrix3<C64>) -> C64 {
    a.zip_map(b, |x, y| x * y.conj()).sum()
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// `i k ×_r M + (i k ×_r M)ᵀ` by index contraction.
pub fn dense_sym_curl(k: [f64; 3], m: &Matrix3<C64>) -> Matrix3<C64> {
    let mut r = Matrix3::<C64>::zeros();
    for row in 0..3 {
        for j in 0..3 {
            let mut s = C64::new(0.0, 0.0);
            for a in 0..3 {
                for b in 0..3 {
                    s += m[(row, b)] * (levi_civita(j, a, b) * k[a]);
                }
            }
            r[(row, j)] = s * C64::new(0.0, 1.0);
        }
    }
    r + r.transpose()
}

/// Matrix of `L̂(k) = −L1|k|² − (L4/2)Ĉ(k) − κ1 − κ2` in [`stf_basis`]
/// coordinates. With `curl = false` the Ĉ term is dropped (Nyquist modes).
pub fn symbol_matrix_with(k: [f64; 3], p: &StabilizedParams, curl: bool) -> CMatrix {
    let basis = stf_basis().map(|b| complexify(&b));
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let diag = -p.model.l1 * k2 - p.kappa();
    CMatrix::from_fn(5, 5, |a, b| {
        let mut img = basis[b] * C64::new(diag, 0.0);
        if curl {
            img -= dense_sym_curl(k, &basis[b]) * C64::new(0.5 * p.model.l4, 0.0);
        }
        frob(&img, &basis[a])
    })
}

pub fn symbol_matrix(k: [f64; 3], p: &StabilizedParams) -> CMatrix {
    symbol_matrix_with(k, p, true)
}

/// Sorted eigenvalues of a Hermitian symbol matrix.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn check_size(m: &CMatrix) -> Result<usize> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::InvalidParameter { name: "matrix", reason: "not square".into() });
    }
    if n > MAX_DENSE {
        return Err(Error::OracleTooLarge { limit: MAX_DENSE, got: n });
    }
    Ok(n)
}

/// `φ_γ(M)` as the top-right block of `exp` of the augmented matrix
/// `[[M, I, 0], [0, 0, I], [0, 0, 0]]` (truncated to `γ + 1` blocks).
pub fn dense_phi(gamma: usize, m: &CMatrix) -> Result<CMatrix> {
    let n = check_size(m)?;
    if gamma > 2 {
        return Err(Error::InvalidParameter { name: "gamma", reason: format!("{gamma}") });
    }
    let size = n * (gamma + 1);
    let mut big = CMatrix::zeros(size, size);
    big.view_mut((0, 0), (n, n)).copy_from(m);
    for blk in 0..gamma {
        for i in 0..n {
            big[(blk * n + i, (blk + 1) * n + i)] = C64::new(1.0, 0.0);
        }
    }
    let e = big.exp();
    Ok(e.view((0, gamma * n), (n, n)).into_owned())
}

/// `φ_γ(M)` through a complex Schur decomposition; exact for normal `M`.
pub fn dense_phi_normal(gamma: usize, m: &CMatrix) -> Result<CMatrix> {
    check_size(m)?;
    let (q, t) = m.clone().schur().unpack();
    let d = DVector::from_iterator(t.nrows(), (0..t.nrows()).map(|i| phi_complex(gamma, t[(i, i)])));
    Ok(&q * CMatrix::from_diagonal(&d) * q.adjoint())
}

fn phi_complex(gamma: usize, z: C64) -> C64 {
    if z.norm() < 1e-3 {
        let mut term = C64::new(1.0, 0.0);
        let mut s = C64::new(0.0, 0.0);
        let mut fact = (1..=gamma).map(|v| v as f64).product::<f64>();
        for n in 0..30 {
            s += term / fact;
            term *= z;
            fact *= (n + gamma + 1) as f64;
        }
        return s;
    }
    let e = z.exp();
    match gamma {
        0 => e,
        1 => (e - 1.0) / z,
        _ => (e - 1.0 - z) / (z * z),
    }
}

/// Naive DFT of a real component (`forward`) or inverse with `1/N`.
fn naive_dft(grid: &Grid, input: &[C64], forward: bool) -> Vec<C64> {
    let d = grid.dims();
    let sign = if forward { -1.0 } else { 1.0 };
    let scale = if forward { 1.0 } else { 1.0 / grid.len() as f64 };
    (0..grid.len())
        .map(|out| {
            let a = grid.unravel(out);
            let mut s = C64::new(0.0, 0.0);
            for (x, v) in input.iter().enumerate() {
                let b = grid.unravel(x);
                let frac: f64 = (0..3).map(|ax| ((a[ax] * b[ax]) % d[ax]) as f64 / d[ax] as f64).sum();
                s += v * C64::from_polar(1.0, sign * 2.0 * PI * frac);
            }
            s * scale
        })
        .collect()
}

/// Per-mode STF coordinates of a real field.
fn to_modes(f: &TensorField) -> Vec<DVector<C64>> {
    let g = f.grid();
    let basis = stf_basis();
    let comps: Vec<Vec<C64>> = (0..5)
        .map(|c| {
            let v: Vec<C64> = f.component(c).iter().map(|&x| C64::new(x, 0.0)).collect();
            naive_dft(g, &v, true)
        })
        .collect();
    (0..g.len())
        .map(|idx| {
            let q5: [C64; 5] = std::array::from_fn(|c| comps[c][idx]);
            let m = Matrix3::new(q5[0], q5[2], q5[3], q5[2], q5[1], q5[4], q5[3], q5[4], -(q5[0] + q5[1]));
            DVector::from_iterator(5, basis.iter().map(|b| frob(&m, &complexify(b))))
        })
        .collect()
}

fn from_modes(grid: &Grid, modes: &[DVector<C64>]) -> TensorField {
    let basis = stf_basis();
    let mut comps: [Vec<C64>; 5] = std::array::from_fn(|_| Vec::with_capacity(grid.len()));
    for v in modes {
        let mut m = Matrix3::<C64>::zeros();
        for (a, b) in basis.iter().enumerate() {
            m += complexify(b) * v[a];
        }
        for (c, (i, j)) in [(0, 0), (1, 1), (0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
            comps[c].push(m[(i, j)]);
        }
    }
    let data = comps.map(|c| naive_dft(grid, &c, false).into_iter().map(|z| z.re).collect());
    TensorField::from_components(*grid, data).expect("grid sized")
}

fn nonlinear(f: &TensorField, p: &StabilizedParams) -> TensorField {
    let m = p.model;
    let mut out = TensorField::zeros(*f.grid());
    for i in 0..f.grid().len() {
        let q: QTensor5 = f.get(i);
        out.set(i, bulk_force(&q, m.alpha, m.beta, m.gamma) + q * p.kappa());
    }
    out
}

/// One ETD1 or ETDRK2 step computed with dense per-mode matrices.
pub fn oracle_etd_step(scheme: Scheme, state: &TensorField, tau: f64, p: &StabilizedParams) -> Result<TensorField> {
    let g = *state.grid();
    if let Some(&n) = g.dims().iter().find(|&&n| n > MAX_ORACLE_N) {
        return Err(Error::OracleTooLarge { limit: MAX_ORACLE_N, got: n });
    }
    let phis: Vec<[CMatrix; 3]> = (0..g.len())
        .map(|idx| {
            let m = symbol_matrix_with(g.wavevector(idx), p, !g.is_nyquist(idx)) * C64::new(tau, 0.0);
            Ok([dense_phi(0, &m)?, dense_phi(1, &m)?, dense_phi(2, &m)?])
        })
        .collect::<Result<_>>()?;
    let q_hat = to_modes(state);
    let n_hat = to_modes(&nonlinear(state, p));
    let tilde_hat: Vec<DVector<C64>> =
        (0..g.len()).map(|i| &phis[i][0] * &q_hat[i] + (&phis[i][1] * &n_hat[i]) * C64::new(tau, 0.0)).collect();
    let tilde = from_modes(&g, &tilde_hat);
    if scheme == Scheme::Etd1 {
        return Ok(tilde);
    }
    let nt_hat = to_modes(&nonlinear(&tilde, p));
    let corr: Vec<DVector<C64>> =
        (0..g.len()).map(|i| (&phis[i][2] * (&nt_hat[i] - &n_hat[i])) * C64::new(tau, 0.0)).collect();
    let c = from_modes(&g, &corr);
    let mut out = tilde;
    for i in 0..g.len() {
        out.set(i, out.get(i) + c.get(i));
    }
    Ok(out)
}
