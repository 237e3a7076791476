//! Closed-form initial conditions.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Grid, TensorField};
use crate::qtensor::QTensor5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcKind {
    /// Diagonal `cos x − cos y, cos y − cos z, cos z − cos x`.
    A,
    /// Diagonal `cos x + cos y − 2cos z` and cyclic permutations.
    B,
}

impl IcKind {
    pub fn default_amplitude(self) -> f64 {
        match self {
            IcKind::A => 1.0 / 3.0,
            IcKind::B => 0.2,
        }
    }
}

impl fmt::Display for IcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IcKind::A => "ic-a",
            IcKind::B => "ic-b",
        })
    }
}

impl FromStr for IcKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ic-a" | "a" => Ok(IcKind::A),
            "ic-b" | "b" => Ok(IcKind::B),
            other => Err(Error::Config { key: "ic".into(), reason: format!("unknown initial condition `{other}`") }),
        }
    }
}

/// Value of the initial condition at one point.
pub fn initial_value(kind: IcKind, x: [f64; 3], c: f64) -> QTensor5 {
    let [(sx, cx), (sy, cy), (sz, cz)] = x.map(f64::sin_cos);
    let (q11, q22) = match kind {
        IcKind::A => (cx - cy, cy - cz),
        IcKind::B => (cx + cy - 2.0 * cz, cy + cz - 2.0 * cx),
    };
    QTensor5::new(q11, q22, sx * sy, sx * sz, sy * sz) * c
}

pub fn initial_condition(kind: IcKind, grid: Grid, c: f64) -> TensorField {
    TensorField::from_fn(grid, |x| initial_value(kind, x, c))
}
