//! Periodic grid, physical-space tensor fields and their Fourier coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qtensor::QTensor5;

/// Uniform periodic grid on the box `[0, lx) × [0, ly) × [0, lz)`.
///
/// Point `(i, j, k)` sits at `(i hx, j hy, k hz)` and is stored at linear
/// index `(i ny + j) nz + k`. Fourier index `i` maps to the integer
/// wavenumber `n ∈ (-N/2, N/2]`, wavevector component `2π n / L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
}

impl Grid {
    pub fn new(n: [usize; 3], lengths: [f64; 3]) -> Result<Self> {
        for (axis, &ni) in n.iter().enumerate() {
            if ni < 2 || ni % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "N along axis {axis} must be a positive even number, got {ni}"
                )));
            }
        }
        for (axis, &l) in lengths.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("domain length along axis {axis} must be positive, got {l}")));
            }
        }
        Ok(Grid { nx: n[0], ny: n[1], nz: n[2], lx: lengths[0], ly: lengths[1], lz: lengths[2] })
    }

    /// `n³` points on the `(0, 2π)³` box.
    pub fn cube(n: usize) -> Result<Self> {
        Grid::new([n; 3], [2.0 * PI; 3])
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    #[inline]
    pub fn lengths(&self) -> [f64; 3] {
        [self.lx, self.ly, self.lz]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn spacing(&self) -> [f64; 3] {
        [self.lx / self.nx as f64, self.ly / self.ny as f64, self.lz / self.nz as f64]
    }

    /// `hx hy hz`, the quadrature weight of one grid point.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h[0] * h[1] * h[2]
    }

    #[inline]
    pub fn volume(&self) -> f64 {
        self.lx * self.ly * self.lz
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.ny + j) * self.nz + k
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.nz;
        let rest = idx / self.nz;
        [rest / self.ny, rest % self.ny, k]
    }

    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unravel(idx);
        let h = self.spacing();
        [i as f64 * h[0], j as f64 * h[1], k as f64 * h[2]]
    }

    /// Integer wavenumbers `(n1, n2, n3)` of a Fourier index.
    #[inline]
    pub fn wavenumbers(&self, idx: usize) -> [i64; 3] {
        let [i, j, k] = self.unravel(idx);
        [signed_wavenumber(i, self.nx), signed_wavenumber(j, self.ny), signed_wavenumber(k, self.nz)]
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let n = self.wavenumbers(idx);
        [2.0 * PI * n[0] as f64 / self.lx, 2.0 * PI * n[1] as f64 / self.ly, 2.0 * PI * n[2] as f64 / self.lz]
    }

    /// Fourier index of the wavenumber `(n1, n2, n3)`, taken modulo N.
    pub fn index_of_wavenumbers(&self, n: [i64; 3]) -> usize {
        let wrap = |v: i64, m: usize| v.rem_euclid(m as i64) as usize;
        self.index(wrap(n[0], self.nx), wrap(n[1], self.ny), wrap(n[2], self.nz))
    }

    /// Fourier index holding the coefficient of `-k` (aliased at Nyquist).
    #[inline]
    pub fn negated_index(&self, idx: usize) -> usize {
        let [i, j, k] = self.unravel(idx);
        let neg = |v: usize, m: usize| (m - v) % m;
        self.index(neg(i, self.nx), neg(j, self.ny), neg(k, self.nz))
    }

    /// True if any wavenumber component sits at `N/2`.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let [i, j, k] = self.unravel(idx);
        i == self.nx / 2 || j == self.ny / 2 || k == self.nz / 2
    }
}

#[inline]
fn signed_wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Real Q-tensor field sampled on the grid, one array per stored component.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    grid: Grid,
    pub(crate) data: [Vec<f64>; 5],
}

impl TensorField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        TensorField { grid, data: std::array::from_fn(|_| vec![0.0; n]) }
    }

    pub fn from_components(grid: Grid, data: [Vec<f64>; 5]) -> Result<Self> {
        if data.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::GridMismatch);
        }
        Ok(TensorField { grid, data })
    }

    /// Samples `f(x, y, z)` at every grid point.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn([f64; 3]) -> QTensor5 + Sync,
    {
        let values: Vec<QTensor5> = (0..grid.len()).into_par_iter().map(|idx| f(grid.point(idx))).collect();
        let mut field = TensorField::zeros(grid);
        for (idx, q) in values.into_iter().enumerate() {
            field.set(idx, q);
        }
        field
    }

    pub fn constant(grid: Grid, q: QTensor5) -> Self {
        let a = q.to_array();
        TensorField { grid, data: std::array::from_fn(|c| vec![a[c]; grid.len()]) }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn component(&self, c: usize) -> &[f64] {
        &self.data[c]
    }

    #[inline]
    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.data[c]
    }

    pub fn components(&self) -> &[Vec<f64>; 5] {
        &self.data
    }

    pub fn into_components(self) -> [Vec<f64>; 5] {
        self.data
    }

    #[inline]
    pub fn get(&self, idx: usize) -> QTensor5 {
        let d = &self.data;
        QTensor5::new(d[0][idx], d[1][idx], d[2][idx], d[3][idx], d[4][idx])
    }

    #[inline]
    pub fn set(&mut self, idx: usize, q: QTensor5) {
        for (c, v) in q.to_array().into_iter().enumerate() {
            self.data[c][idx] = v;
        }
    }

    /// Applies `f` pointwise, writing into a new field.
    pub fn map<F>(&self, f: F) -> TensorField
    where
        F: Fn(QTensor5) -> QTensor5 + Sync,
    {
        let mut out = TensorField::zeros(self.grid);
        self.map_into(&mut out, f);
        out
    }

    /// Applies `f` pointwise into `out`, reusing its storage.
    pub fn map_into<F>(&self, out: &mut TensorField, f: F)
    where
        F: Fn(QTensor5) -> QTensor5 + Sync,
    {
        const CHUNK: usize = 4096;
        let [o0, o1, o2, o3, o4] = &mut out.data;
        o0.par_chunks_mut(CHUNK)
            .zip(o1.par_chunks_mut(CHUNK))
            .zip(o2.par_chunks_mut(CHUNK))
            .zip(o3.par_chunks_mut(CHUNK))
            .zip(o4.par_chunks_mut(CHUNK))
            .enumerate()
            .for_each(|(chunk, ((((a, b), c), d), e))| {
                let base = chunk * CHUNK;
                for off in 0..a.len() {
                    let q = f(self.get(base + off));
                    a[off] = q.q11;
                    b[off] = q.q22;
                    c[off] = q.q12;
                    d[off] = q.q13;
                    e[off] = q.q23;
                }
            });
    }

    /// Pointwise scalar derived from the local tensor.
    pub fn scalar_map<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(QTensor5) -> f64 + Sync,
    {
        (0..self.grid.len()).into_par_iter().map(|idx| f(self.get(idx))).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }

    /// Component-wise `self - other`.
    pub fn sub(&self, other: &TensorField) -> Result<TensorField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let data = std::array::from_fn(|c| self.data[c].iter().zip(&other.data[c]).map(|(a, b)| a - b).collect());
        Ok(TensorField { grid: self.grid, data })
    }

    /// Circular shift by whole grid cells.
    pub fn shifted(&self, shift: [usize; 3]) -> TensorField {
        let g = self.grid;
        let mut out = TensorField::zeros(g);
        for idx in 0..g.len() {
            let [i, j, k] = g.unravel(idx);
            let dst = g.index((i + shift[0]) % g.nx, (j + shift[1]) % g.ny, (k + shift[2]) % g.nz);
            out.set(dst, self.get(idx));
        }
        out
    }
}

/// Complex Fourier coefficients of a tensor field, stored per component.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    pub(crate) data: [Vec<Complex64>; 5],
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        SpectralField { grid, data: std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n]) }
    }

    pub fn from_components(grid: Grid, data: [Vec<Complex64>; 5]) -> Result<Self> {
        if data.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::GridMismatch);
        }
        Ok(SpectralField { grid, data })
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.data[c]
    }

    #[inline]
    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.data[c]
    }

    #[inline]
    pub fn get(&self, idx: usize) -> [Complex64; 5] {
        std::array::from_fn(|c| self.data[c][idx])
    }

    #[inline]
    pub fn set(&mut self, idx: usize, v: [Complex64; 5]) {
        for (c, x) in v.into_iter().enumerate() {
            self.data[c][idx] = x;
        }
    }

    /// Largest coefficient magnitude over all components.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().flat_map(|c| c.iter()).fold(0.0f64, |m, z| m.max(z.norm()))
    }
}
