//! Small complex 3×3 helpers shared by the spectral, HSTF and oracle code.

use num_complex::Complex64;

pub type C64 = Complex64;
pub type CVec3 = [C64; 3];
pub type CMat3 = [[C64; 3]; 3];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn zeros() -> CMat3 {
    [[ZERO; 3]; 3]
}

/// Expands stored `(q11, q22, q12, q13, q23)` coefficients to a full matrix.
#[inline]
pub fn from5(v: &[C64; 5]) -> CMat3 {
    [[v[0], v[2], v[3]], [v[2], v[1], v[4]], [v[3], v[4], -(v[0] + v[1])]]
}

#[inline]
pub fn to5(m: &CMat3) -> [C64; 5] {
    [m[0][0], m[1][1], m[0][1], m[0][2], m[1][2]]
}

/// Hermitian Frobenius product `Σ a_ij conj(b_ij)` of the implied full matrices.
#[inline]
pub fn herm_dot5(a: &[C64; 5], b: &[C64; 5]) -> C64 {
    let two = 2.0;
    (a[0] * b[0].conj() + a[1] * b[1].conj()) * two
        + a[0] * b[1].conj()
        + a[1] * b[0].conj()
        + (a[2] * b[2].conj() + a[3] * b[3].conj() + a[4] * b[4].conj()) * two
}

#[inline]
pub fn norm_sq5(a: &[C64; 5]) -> f64 {
    herm_dot5(a, a).re
}

#[inline]
pub fn herm_dot(a: &CMat3, b: &CMat3) -> C64 {
    let mut s = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            s += a[i][j] * b[i][j].conj();
        }
    }
    s
}

pub fn frob_norm(a: &CMat3) -> f64 {
    herm_dot(a, a).re.sqrt()
}

#[inline]
pub fn transpose(a: &CMat3) -> CMat3 {
    let mut t = zeros();
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

#[inline]
pub fn add(a: &CMat3, b: &CMat3) -> CMat3 {
    let mut s = zeros();
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = a[i][j] + b[i][j];
        }
    }
    s
}

#[inline]
pub fn sub(a: &CMat3, b: &CMat3) -> CMat3 {
    let mut s = zeros();
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = a[i][j] - b[i][j];
        }
    }
    s
}

#[inline]
pub fn scale(a: &CMat3, s: C64) -> CMat3 {
    let mut out = zeros();
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][j] * s;
        }
    }
    out
}

pub fn conj(a: &CMat3) -> CMat3 {
    let mut out = zeros();
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][j].conj();
        }
    }
    out
}

#[inline]
pub fn outer(a: &CVec3, b: &CVec3) -> CMat3 {
    let mut m = zeros();
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i] * b[j];
        }
    }
    m
}

#[inline]
pub fn real_vec(v: [f64; 3]) -> CVec3 {
    [c(v[0]), c(v[1]), c(v[2])]
}

/// `k × v` for real `k` and complex `v`.
#[inline]
pub fn cross(k: [f64; 3], v: &CVec3) -> CVec3 {
    [v[2] * k[1] - v[1] * k[2], v[0] * k[2] - v[2] * k[0], v[1] * k[0] - v[0] * k[1]]
}

pub fn trace(a: &CMat3) -> C64 {
    a[0][0] + a[1][1] + a[2][2]
}

pub fn max_asymmetry(a: &CMat3) -> f64 {
    let mut m = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            m = m.max((a[i][j] - a[j][i]).norm());
        }
    }
    m
}
