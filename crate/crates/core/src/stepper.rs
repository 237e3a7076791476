//! ETD1 and ETDRK2 time steps.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::etd::{combine, nonlinear_n_into, PhiTable, Term};
use crate::grid::{Grid, SpectralField, TensorField};
use crate::hstf::FrameTable;
use crate::params::StabilizedParams;
use crate::spectral::{dealias, Fft3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Etd1,
    Etdrk2,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::Etd1 => 1,
            Scheme::Etdrk2 => 2,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Etd1 => "etd1",
            Scheme::Etdrk2 => "etdrk2",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "etd1" => Ok(Scheme::Etd1),
            "etdrk2" => Ok(Scheme::Etdrk2),
            other => Err(Error::Config { key: "scheme".into(), reason: format!("unknown scheme `{other}`") }),
        }
    }
}

/// Scratch storage for one grid; contents are meaningless between calls.
#[derive(Debug)]
pub struct StepWorkspace {
    fft: Fft3,
    q_hat: SpectralField,
    n_hat: SpectralField,
    tilde_hat: SpectralField,
    nt_hat: SpectralField,
    out_hat: SpectralField,
    n_phys: TensorField,
    tilde: TensorField,
    dealias: bool,
}

impl StepWorkspace {
    pub fn new(grid: Grid) -> Self {
        StepWorkspace {
            fft: Fft3::new(grid),
            q_hat: SpectralField::zeros(grid),
            n_hat: SpectralField::zeros(grid),
            tilde_hat: SpectralField::zeros(grid),
            nt_hat: SpectralField::zeros(grid),
            out_hat: SpectralField::zeros(grid),
            n_phys: TensorField::zeros(grid),
            tilde: TensorField::zeros(grid),
            dealias: false,
        }
    }

    /// Enables 2/3-rule truncation of the transformed nonlinear term.
    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    pub fn fft(&self) -> &Fft3 {
        &self.fft
    }

    fn grid(&self) -> &Grid {
        self.fft.grid()
    }
}

fn check(q: &TensorField, frames: &FrameTable, phi: &PhiTable, ws: &StepWorkspace) -> Result<f64> {
    if q.grid() != frames.grid() || q.grid() != ws.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(phi.tau())
}

/// Predictor stage shared by both schemes; leaves `Q̂`, `N̂(Q)` and the
/// ETD1 result in the workspace.
fn predictor(q: &TensorField, frames: &FrameTable, phi: &PhiTable, ws: &mut StepWorkspace) -> Result<()> {
    let tau = check(q, frames, phi, ws)?;
    nonlinear_n_into(q, frames.params(), &mut ws.n_phys);
    ws.fft.forward_two(q, &ws.n_phys, &mut ws.q_hat, &mut ws.n_hat)?;
    if ws.dealias {
        dealias(&mut ws.n_hat);
    }
    let terms = [Term::new(&ws.q_hat, Some(0), 1.0), Term::new(&ws.n_hat, Some(1), tau)];
    combine(frames, phi, &terms, &mut ws.tilde_hat)
}

/// `Q⁺ = φ₀(τL)Q + τφ₁(τL)N(Q)`.
pub fn etd1_step(q: &TensorField, frames: &FrameTable, phi: &PhiTable, ws: &mut StepWorkspace) -> Result<TensorField> {
    let mut out = TensorField::zeros(*q.grid());
    etd1_step_into(q, frames, phi, ws, &mut out)?;
    Ok(out)
}

pub fn etd1_step_into(
    q: &TensorField,
    frames: &FrameTable,
    phi: &PhiTable,
    ws: &mut StepWorkspace,
    out: &mut TensorField,
) -> Result<()> {
    predictor(q, frames, phi, ws)?;
    ws.fft.inverse_into(&ws.tilde_hat, out)
}

/// ETD1 predictor `Q̃` plus the corrector `τφ₂(τL)(N(Q̃) − N(Q))`.
pub fn etdrk2_step(
    q: &TensorField,
    frames: &FrameTable,
    phi: &PhiTable,
    ws: &mut StepWorkspace,
) -> Result<TensorField> {
    let mut out = TensorField::zeros(*q.grid());
    etdrk2_step_into(q, frames, phi, ws, &mut out)?;
    Ok(out)
}

pub fn etdrk2_step_into(
    q: &TensorField,
    frames: &FrameTable,
    phi: &PhiTable,
    ws: &mut StepWorkspace,
    out: &mut TensorField,
) -> Result<()> {
    let tau = phi.tau();
    predictor(q, frames, phi, ws)?;
    ws.fft.inverse_into(&ws.tilde_hat, &mut ws.tilde)?;
    nonlinear_n_into(&ws.tilde, frames.params(), &mut ws.n_phys);
    ws.fft.forward_into(&ws.n_phys, &mut ws.nt_hat)?;
    if ws.dealias {
        dealias(&mut ws.nt_hat);
    }
    let terms =
        [Term::new(&ws.tilde_hat, None, 1.0), Term::new(&ws.nt_hat, Some(2), tau), Term::new(&ws.n_hat, Some(2), -tau)];
    combine(frames, phi, &terms, &mut ws.out_hat)?;
    ws.fft.inverse_into(&ws.out_hat, out)
}

/// Frames, φ table and workspace bundled for repeated stepping.
#[derive(Debug)]
pub struct Stepper {
    scheme: Scheme,
    frames: FrameTable,
    phi: PhiTable,
    ws: StepWorkspace,
    next: TensorField,
}

impl Stepper {
    pub fn new(grid: Grid, params: &StabilizedParams, scheme: Scheme, tau: f64, dealias: bool) -> Result<Self> {
        let frames = FrameTable::new(grid, params)?;
        let phi = PhiTable::new(&frames, tau)?;
        Ok(Stepper {
            scheme,
            frames,
            phi,
            ws: StepWorkspace::new(grid).with_dealias(dealias),
            next: TensorField::zeros(grid),
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn tau(&self) -> f64 {
        self.phi.tau()
    }

    pub fn frames(&self) -> &FrameTable {
        &self.frames
    }

    /// Rebuilds the φ table for a new step size.
    pub fn set_tau(&mut self, tau: f64) -> Result<()> {
        self.phi = PhiTable::new(&self.frames, tau)?;
        Ok(())
    }

    /// Advances `q` by one step in place.
    pub fn step(&mut self, q: &mut TensorField) -> Result<()> {
        match self.scheme {
            Scheme::Etd1 => etd1_step_into(q, &self.frames, &self.phi, &mut self.ws, &mut self.next)?,
            Scheme::Etdrk2 => etdrk2_step_into(q, &self.frames, &self.phi, &mut self.ws, &mut self.next)?,
        }
        std::mem::swap(q, &mut self.next);
        Ok(())
    }
}
