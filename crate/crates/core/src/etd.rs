//! φ-functions, operator exponentials through the HSTF basis, and the
//! stabilized nonlinear term.

use rayon::prelude::*;

use crate::cmat::{herm_dot5, C64, ZERO};
use crate::error::{Error, Result};
use crate::grid::{SpectralField, TensorField};
use crate::hstf::{hstf_tensors5, FrameTable, ModeOperator};
use crate::params::StabilizedParams;
use crate::qtensor::bulk_force;

/// Below this `|z|` the φ₁/φ₂ series replaces the closed forms.
pub const TAYLOR_SEAM: f64 = 0.05;
const TAYLOR_TERMS: usize = 10;

/// `φ_γ(z)` for `γ ∈ {0, 1, 2}`.
pub fn phi(gamma: usize, z: f64) -> f64 {
    match gamma {
        0 => z.exp(),
        1 | 2 if z.abs() < TAYLOR_SEAM => {
            // Σ_n z^n / (n + γ)!, Horner form.
            let g = gamma as f64;
            let mut s = 1.0;
            for n in (1..TAYLOR_TERMS).rev() {
                s = 1.0 + s * z / (n as f64 + g);
            }
            if gamma == 1 {
                s
            } else {
                s / 2.0
            }
        }
        1 => z.exp_m1() / z,
        2 => (z.exp_m1() - z) / (z * z),
        _ => panic!("phi order {gamma} not supported"),
    }
}

/// `φ₀, φ₁, φ₂` of `τλ` for every mode and basis element.
#[derive(Debug, Clone)]
pub struct PhiTable {
    tau: f64,
    values: Vec<[[f64; 5]; 3]>,
}

impl PhiTable {
    pub fn new(frames: &FrameTable, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter { name: "tau", reason: format!("must be positive, got {tau}") });
        }
        let values = frames
            .modes()
            .par_iter()
            .map(|m| {
                let lam = m.eigenvalues();
                std::array::from_fn(|g| lam.map(|l| phi(g, tau * l)))
            })
            .collect();
        Ok(PhiTable { tau, values })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    #[inline]
    pub fn get(&self, idx: usize) -> &[[f64; 5]; 3] {
        &self.values[idx]
    }

    pub fn check_tau(&self, tau: f64) -> Result<()> {
        if tau != self.tau {
            return Err(Error::PhiTableMismatch { built: self.tau, requested: tau });
        }
        Ok(())
    }

    fn check_len(&self, frames: &FrameTable) -> Result<()> {
        if self.values.len() != frames.grid().len() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

/// One summand of [`combine`]: `scale · φ_γ(τL) field`, or `scale · field`
/// when `phi` is `None`.
#[derive(Clone, Copy)]
pub struct Term<'a> {
    pub field: &'a SpectralField,
    pub phi: Option<usize>,
    pub scale: f64,
}

impl<'a> Term<'a> {
    pub fn new(field: &'a SpectralField, phi: Option<usize>, scale: f64) -> Self {
        Term { field, phi, scale }
    }
}

/// Writes `Σ_t scale_t φ_t(τL) field_t` into `out`, mode by mode.
pub fn combine(frames: &FrameTable, table: &PhiTable, terms: &[Term<'_>], out: &mut SpectralField) -> Result<()> {
    table.check_len(frames)?;
    let grid = frames.grid();
    if out.grid() != grid || terms.iter().any(|t| t.field.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    let [o0, o1, o2, o3, o4] = &mut out.data;
    (o0.par_iter_mut(), o1.par_iter_mut(), o2.par_iter_mut(), o3.par_iter_mut(), o4.par_iter_mut())
        .into_par_iter()
        .enumerate()
        .for_each(|(idx, (a, b, c, d, e))| {
            let r = combine_mode(frames.mode(idx), table.get(idx), terms, idx);
            (*a, *b, *c, *d, *e) = (r[0], r[1], r[2], r[3], r[4]);
        });
    Ok(())
}

#[inline]
fn weights(phis: &[[f64; 5]; 3], t: &Term<'_>) -> [f64; 5] {
    match t.phi {
        Some(g) => phis[g].map(|v| v * t.scale),
        None => [t.scale; 5],
    }
}

fn combine_mode(op: &ModeOperator, phis: &[[f64; 5]; 3], terms: &[Term<'_>], idx: usize) -> [C64; 5] {
    let mut acc = [ZERO; 5];
    match op {
        ModeOperator::Scalar(_) => {
            for t in terms {
                let w = weights(phis, t)[0];
                let v = t.field.get(idx);
                for c in 0..5 {
                    acc[c] += v[c] * w;
                }
            }
        }
        ModeOperator::Helical { frame, .. } => {
            let basis = hstf_tensors5(frame);
            let mut coef = [ZERO; 5];
            for t in terms {
                let w = weights(phis, t);
                let v = t.field.get(idx);
                for j in 0..5 {
                    coef[j] += herm_dot5(&v, &basis[j]) * w[j];
                }
            }
            for j in 0..5 {
                for c in 0..5 {
                    acc[c] += basis[j][c] * coef[j];
                }
            }
        }
    }
    acc
}

/// `φ_γ(τL) s` with `τ` checked against the table.
pub fn apply_phi(
    gamma: usize,
    tau: f64,
    s: &SpectralField,
    frames: &FrameTable,
    table: &PhiTable,
) -> Result<SpectralField> {
    table.check_tau(tau)?;
    let mut out = SpectralField::zeros(*s.grid());
    combine(frames, table, &[Term::new(s, Some(gamma), 1.0)], &mut out)?;
    Ok(out)
}

/// `f(Q) + (κ₁ + κ₂) Q` at every grid point.
pub fn nonlinear_n(f: &TensorField, p: &StabilizedParams) -> TensorField {
    let mut out = TensorField::zeros(*f.grid());
    nonlinear_n_into(f, p, &mut out);
    out
}

pub fn nonlinear_n_into(f: &TensorField, p: &StabilizedParams, out: &mut TensorField) {
    let m = p.model;
    let k = p.kappa();
    f.map_into(out, |q| bulk_force(&q, m.alpha, m.beta, m.gamma) + q * k);
}
