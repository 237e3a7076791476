//! Pointwise algebra of symmetric traceless 3×3 tensors.
//!
//! A Q-tensor is stored by its five independent entries
//! `(q11, q22, q12, q13, q23)`; `q33 = -(q11 + q22)` and the lower triangle
//! are implied, so symmetry and tracelessness hold by construction.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// The five independent degrees of freedom of a symmetric traceless tensor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QTensor5 {
    pub q11: f64,
    pub q22: f64,
    pub q12: f64,
    pub q13: f64,
    pub q23: f64,
}

/// A general 3×3 real matrix, used as an intermediate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Full3x3(pub [[f64; 3]; 3]);

impl QTensor5 {
    pub const ZERO: QTensor5 = QTensor5 { q11: 0.0, q22: 0.0, q12: 0.0, q13: 0.0, q23: 0.0 };

    pub const fn new(q11: f64, q22: f64, q12: f64, q13: f64, q23: f64) -> Self {
        QTensor5 { q11, q22, q12, q13, q23 }
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        QTensor5::new(a[0], a[1], a[2], a[3], a[4])
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.q11, self.q22, self.q12, self.q13, self.q23]
    }

    #[inline]
    pub fn q33(&self) -> f64 {
        -(self.q11 + self.q22)
    }

    /// Uniaxial tensor `s (n ⊗ n - I/3)`; `n` is normalized internally.
    pub fn uniaxial(s: f64, n: [f64; 3]) -> Self {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let n = [n[0] / norm, n[1] / norm, n[2] / norm];
        QTensor5::new(
            s * (n[0] * n[0] - 1.0 / 3.0),
            s * (n[1] * n[1] - 1.0 / 3.0),
            s * n[0] * n[1],
            s * n[0] * n[2],
            s * n[1] * n[2],
        )
    }

    pub fn to_full(self) -> Full3x3 {
        Full3x3([[self.q11, self.q12, self.q13], [self.q12, self.q22, self.q23], [self.q13, self.q23, self.q33()]])
    }

    /// Frobenius inner product of the implied full matrices.
    #[inline]
    pub fn frob_dot(&self, b: &QTensor5) -> f64 {
        2.0 * (self.q11 * b.q11 + self.q22 * b.q22)
            + self.q11 * b.q22
            + self.q22 * b.q11
            + 2.0 * (self.q12 * b.q12 + self.q13 * b.q13 + self.q23 * b.q23)
    }

    #[inline]
    pub fn frob_norm_sq(&self) -> f64 {
        self.frob_dot(self)
    }

    #[inline]
    pub fn frobenius_norm(&self) -> f64 {
        self.frob_norm_sq().sqrt()
    }

    /// `tr(Q³)`, which equals `3 det Q` for traceless `Q`.
    #[inline]
    pub fn trace_cube(&self) -> f64 {
        3.0 * self.det()
    }

    #[inline]
    pub fn det(&self) -> f64 {
        let (a, b, c) = (self.q11, self.q22, self.q33());
        let (d, e, f) = (self.q12, self.q13, self.q23);
        a * (b * c - f * f) - d * (d * c - f * e) + e * (d * f - b * e)
    }

    /// Traceless part of `Q²`, i.e. `Q² - tr(Q²) I / 3`, together with `tr(Q²)`.
    #[inline]
    pub fn square_deviator(&self) -> (QTensor5, f64) {
        let (a, b, c) = (self.q11, self.q22, self.q33());
        let (d, e, f) = (self.q12, self.q13, self.q23);
        let s11 = a * a + d * d + e * e;
        let s22 = d * d + b * b + f * f;
        let s33 = e * e + f * f + c * c;
        let tr = s11 + s22 + s33;
        let third = tr / 3.0;
        (
            QTensor5::new(
                s11 - third,
                s22 - third,
                a * d + d * b + e * f,
                a * e + d * f + e * c,
                d * e + b * f + f * c,
            ),
            tr,
        )
    }
}

impl Full3x3 {
    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn transpose(&self) -> Full3x3 {
        let m = &self.0;
        Full3x3([[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]])
    }

    /// Extracts the five independent entries, rejecting matrices that are not
    /// symmetric traceless within `tol`.
    pub fn to_qtensor(&self, tol: f64) -> Result<QTensor5> {
        let m = &self.0;
        let mut asym = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                asym = asym.max((m[i][j] - m[j][i]).abs());
            }
        }
        if asym > tol {
            return Err(Error::Asymmetric(asym));
        }
        let tr = self.trace();
        if tr.abs() > tol {
            return Err(Error::NotTraceless(tr.abs()));
        }
        Ok(QTensor5::new(m[0][0], m[1][1], m[0][1], m[0][2], m[1][2]))
    }
}

impl Add for QTensor5 {
    type Output = QTensor5;
    #[inline]
    fn add(self, o: QTensor5) -> QTensor5 {
        QTensor5::new(self.q11 + o.q11, self.q22 + o.q22, self.q12 + o.q12, self.q13 + o.q13, self.q23 + o.q23)
    }
}

impl AddAssign for QTensor5 {
    #[inline]
    fn add_assign(&mut self, o: QTensor5) {
        *self = *self + o;
    }
}

impl Sub for QTensor5 {
    type Output = QTensor5;
    #[inline]
    fn sub(self, o: QTensor5) -> QTensor5 {
        self + (-o)
    }
}

impl Neg for QTensor5 {
    type Output = QTensor5;
    #[inline]
    fn neg(self) -> QTensor5 {
        self * -1.0
    }
}

impl Mul<f64> for QTensor5 {
    type Output = QTensor5;
    #[inline]
    fn mul(self, s: f64) -> QTensor5 {
        QTensor5::new(self.q11 * s, self.q22 * s, self.q12 * s, self.q13 * s, self.q23 * s)
    }
}

pub fn to_full(q: QTensor5) -> Full3x3 {
    q.to_full()
}

pub fn from_full(m: &Full3x3, tol: f64) -> Result<QTensor5> {
    m.to_qtensor(tol)
}

pub fn frob_dot(a: &QTensor5, b: &QTensor5) -> f64 {
    a.frob_dot(b)
}

/// Bulk thermodynamic force `f(Q) = -αQ + β(Q² - tr(Q²)I/3) - γ tr(Q²) Q`.
#[inline]
pub fn bulk_force(q: &QTensor5, alpha: f64, beta: f64, gamma: f64) -> QTensor5 {
    let (sq, tr) = q.square_deviator();
    *q * (-alpha - gamma * tr) + sq * beta
}

/// Eigenvalues of the symmetric traceless tensor, ascending.
///
/// Closed-form trigonometric solution of the characteristic cubic.
pub fn eigenvalues_sym3(q: &QTensor5) -> [f64; 3] {
    let p2 = q.frob_norm_sq();
    // p is the standard deviation of the eigenvalues (up to a constant); for
    // p below this floor all three eigenvalues agree to 1e-14.
    let p = (p2 / 6.0).sqrt();
    if p < 1e-15 {
        return [0.0, 0.0, 0.0];
    }
    let r = (q.det() / (p * p * p) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    // Take the isolated root from the branch whose cosine is stationary at
    // the degenerate end; the pair then follows from the trace and ‖Q‖².
    let x = if r >= 0.0 { 2.0 * p * phi.cos() } else { 2.0 * p * (phi + 2.0 * PI / 3.0).cos() };
    let half_gap = 0.5 * (2.0 * p2 - 3.0 * x * x).max(0.0).sqrt();
    let mut ev = [x, -0.5 * x - half_gap, -0.5 * x + half_gap];
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Scalar order parameter `s = 3/2 λ_max`.
pub fn scalar_order(q: &QTensor5) -> f64 {
    1.5 * eigenvalues_sym3(q)[2]
}

/// Biaxiality `β_b = sqrt(1 - 6 (tr Q³)² / (tr Q²)³)`, zero for vanishing order.
pub fn biaxiality(q: &QTensor5) -> f64 {
    let tr2 = q.frob_norm_sq();
    if tr2 < 1e-24 {
        return 0.0;
    }
    let tr3 = q.trace_cube();
    let b2 = 1.0 - 6.0 * tr3 * tr3 / (tr2 * tr2 * tr2);
    b2.clamp(0.0, 1.0).sqrt()
}
