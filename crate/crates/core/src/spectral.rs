//! 3-D discrete Fourier transforms of tensor fields and spectral symbols.
//!
//! Forward transforms are unnormalized sums `Σ_x f(x) e^{-ik·x}`; the inverse
//! divides by `NxNyNz`.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::cmat::{self, CMat3, C64, ZERO};
use crate::error::{Error, Result};
use crate::grid::{Grid, SpectralField, TensorField};
use crate::reduce::{ordered_sum, par_max};

/// Relative threshold on the imaginary residual of an inverse transform.
pub const HERMITIAN_TOL: f64 = 1e-8;

/// Planned 3-D complex FFT for one grid.
pub struct Fft3 {
    grid: Grid,
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("grid", &self.grid).finish()
    }
}

impl Fft3 {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let d = grid.dims();
        Fft3 {
            grid,
            fwd: std::array::from_fn(|a| planner.plan_fft_forward(d[a])),
            inv: std::array::from_fn(|a| planner.plan_fft_inverse(d[a])),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// In-place unnormalized 3-D transform of a row-major buffer.
    pub fn transform(&self, buf: &mut [C64], forward: bool) {
        let plans = if forward { &self.fwd } else { &self.inv };
        let [nx, ny, nz] = self.grid.dims();
        debug_assert_eq!(buf.len(), nx * ny * nz);

        let rows = (1 << 14) / nz + 1;
        let pz = &plans[2];
        buf.par_chunks_mut(nz * rows).for_each_init(
            || vec![ZERO; pz.get_inplace_scratch_len()],
            |scratch, chunk| pz.process_with_scratch(chunk, scratch),
        );

        let py = &plans[1];
        buf.par_chunks_mut(ny * nz).for_each_init(
            || (vec![ZERO; ny * nz], vec![ZERO; py.get_inplace_scratch_len()]),
            |(tmp, scratch), slab| {
                for j in 0..ny {
                    for k in 0..nz {
                        tmp[k * ny + j] = slab[j * nz + k];
                    }
                }
                py.process_with_scratch(tmp, scratch);
                for j in 0..ny {
                    for k in 0..nz {
                        slab[j * nz + k] = tmp[k * ny + j];
                    }
                }
            },
        );

        let px = &plans[0];
        let mut tmp = vec![ZERO; buf.len()];
        {
            let src: &[C64] = buf;
            tmp.par_chunks_mut(nx).enumerate().for_each(|(row, out)| {
                let (j, k) = (row / nz, row % nz);
                for (i, o) in out.iter_mut().enumerate() {
                    *o = src[(i * ny + j) * nz + k];
                }
            });
        }
        let rows = (1 << 14) / nx + 1;
        tmp.par_chunks_mut(nx * rows).for_each_init(
            || vec![ZERO; px.get_inplace_scratch_len()],
            |scratch, chunk| px.process_with_scratch(chunk, scratch),
        );
        buf.par_chunks_mut(nz).enumerate().for_each(|(row, out)| {
            let (i, j) = (row / ny, row % ny);
            for (k, o) in out.iter_mut().enumerate() {
                *o = tmp[(j * nz + k) * nx + i];
            }
        });
    }

    /// Forward transforms of real arrays, two per complex FFT.
    pub fn forward_real(&self, inputs: &[&[f64]], outputs: &mut [&mut [C64]]) {
        assert_eq!(inputs.len(), outputs.len());
        let g = self.grid;
        let mut buf = vec![ZERO; g.len()];
        for (ins, outs) in inputs.chunks(2).zip(outputs.chunks_mut(2)) {
            match (ins, outs) {
                ([a, b], [oa, ob]) => {
                    buf.par_iter_mut()
                        .zip(a.par_iter().zip(b.par_iter()))
                        .for_each(|(z, (&x, &y))| *z = C64::new(x, y));
                    self.transform(&mut buf, true);
                    let z = &buf;
                    oa.par_iter_mut().zip(ob.par_iter_mut()).enumerate().for_each(|(idx, (va, vb))| {
                        let zk = z[idx];
                        let zm = z[g.negated_index(idx)].conj();
                        *va = (zk + zm) * 0.5;
                        *vb = (zk - zm) * C64::new(0.0, -0.5);
                    });
                }
                ([a], [oa]) => {
                    oa.par_iter_mut().zip(a.par_iter()).for_each(|(z, &x)| *z = C64::new(x, 0.0));
                    self.transform(oa, true);
                }
                _ => unreachable!(),
            }
        }
    }

    /// Inverse transforms of Hermitian spectra to real arrays, two per FFT.
    ///
    /// Fails if the discarded imaginary part could exceed
    /// `HERMITIAN_TOL` times the output magnitude.
    pub fn inverse_real(&self, inputs: &[&[C64]], outputs: &mut [&mut [f64]]) -> Result<()> {
        assert_eq!(inputs.len(), outputs.len());
        let g = self.grid;
        let n = g.len();
        let inv_n = 1.0 / n as f64;
        let mut defect = 0.0f64;
        for s in inputs {
            let d = ordered_sum(n, |idx| {
                let m = g.negated_index(idx);
                0.5 * (s[idx] - s[m].conj()).norm()
            }) * inv_n;
            defect = defect.max(d);
        }
        let mut buf = vec![ZERO; n];
        for (ins, outs) in inputs.chunks(2).zip(outputs.chunks_mut(2)) {
            match ins {
                [a, b] => buf
                    .par_iter_mut()
                    .zip(a.par_iter().zip(b.par_iter()))
                    .for_each(|(z, (&x, &y))| *z = x + C64::new(-y.im, y.re)),
                [a] => buf.copy_from_slice(a),
                _ => unreachable!(),
            }
            self.transform(&mut buf, false);
            let (first, rest) = outs.split_at_mut(1);
            first[0].par_iter_mut().zip(buf.par_iter()).for_each(|(o, z)| *o = z.re * inv_n);
            if let Some(ob) = rest.first_mut() {
                ob.par_iter_mut().zip(buf.par_iter()).for_each(|(o, z)| *o = z.im * inv_n);
            }
        }
        let mag = outputs.iter().map(|o| par_max(o.len(), |i| o[i].abs())).fold(0.0, f64::max);
        let limit = HERMITIAN_TOL * mag.max(f64::MIN_POSITIVE);
        if defect > limit && defect > 1e-300 {
            return Err(Error::BrokenHermitian { residual: defect, limit });
        }
        Ok(())
    }

    pub fn forward_into(&self, f: &TensorField, out: &mut SpectralField) -> Result<()> {
        if f.grid() != &self.grid || out.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let ins: Vec<&[f64]> = f.data.iter().map(|c| c.as_slice()).collect();
        let mut outs: Vec<&mut [C64]> = out.data.iter_mut().map(|c| c.as_mut_slice()).collect();
        self.forward_real(&ins, &mut outs);
        Ok(())
    }

    pub fn forward(&self, f: &TensorField) -> Result<SpectralField> {
        let mut out = SpectralField::zeros(self.grid);
        self.forward_into(f, &mut out)?;
        Ok(out)
    }

    /// Transforms two fields with five complex FFTs in total.
    pub fn forward_two(
        &self,
        a: &TensorField,
        b: &TensorField,
        oa: &mut SpectralField,
        ob: &mut SpectralField,
    ) -> Result<()> {
        for g in [a.grid(), b.grid(), oa.grid(), ob.grid()] {
            if g != &self.grid {
                return Err(Error::GridMismatch);
            }
        }
        let ins: Vec<&[f64]> = a.data.iter().chain(b.data.iter()).map(|c| c.as_slice()).collect();
        let mut outs: Vec<&mut [C64]> =
            oa.data.iter_mut().chain(ob.data.iter_mut()).map(|c| c.as_mut_slice()).collect();
        self.forward_real(&ins, &mut outs);
        Ok(())
    }

    pub fn inverse_into(&self, s: &SpectralField, out: &mut TensorField) -> Result<()> {
        if s.grid() != &self.grid || out.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let ins: Vec<&[C64]> = s.data.iter().map(|c| c.as_slice()).collect();
        let mut outs: Vec<&mut [f64]> = out.data.iter_mut().map(|c| c.as_mut_slice()).collect();
        self.inverse_real(&ins, &mut outs)
    }

    pub fn inverse(&self, s: &SpectralField) -> Result<TensorField> {
        let mut out = TensorField::zeros(self.grid);
        self.inverse_into(s, &mut out)?;
        Ok(out)
    }
}

/// Forward transform with a one-off plan.
pub fn forward(f: &TensorField) -> SpectralField {
    Fft3::new(*f.grid()).forward(f).expect("grid matches its own plan")
}

/// Inverse transform with a one-off plan.
pub fn inverse(s: &SpectralField) -> Result<TensorField> {
    Fft3::new(*s.grid()).inverse(s)
}

/// `-|k|²`, Nyquist modes included.
pub fn laplacian_symbol(grid: &Grid, idx: usize) -> f64 {
    let k = grid.wavevector(idx);
    -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2])
}

/// Wavevector used by first-order symbols: zero at any Nyquist index.
pub fn odd_wavevector(grid: &Grid, idx: usize) -> [f64; 3] {
    if grid.is_nyquist(idx) {
        [0.0; 3]
    } else {
        grid.wavevector(idx)
    }
}

/// Row `r` of the result is `ik × (row r of m)`.
pub fn curl_rowwise_k(k: [f64; 3], m: &CMat3) -> CMat3 {
    std::array::from_fn(|r| {
        let v = cmat::cross(k, &m[r]);
        std::array::from_fn(|c| v[c] * cmat::I)
    })
}

/// Symmetrized curl symbol `ik ×_r M + (ik ×_r M)ᵀ`.
pub fn sym_curl_k(k: [f64; 3], m: &CMat3) -> CMat3 {
    let r = curl_rowwise_k(k, m);
    cmat::add(&r, &cmat::transpose(&r))
}

/// Row-wise curl of the mode at `idx` (zero at Nyquist indices).
pub fn curl_rowwise(s: &SpectralField, idx: usize) -> CMat3 {
    curl_rowwise_k(odd_wavevector(s.grid(), idx), &cmat::from5(&s.get(idx)))
}

/// Keep-mask of the 2/3-rule spherical truncation.
pub fn dealias_keep(grid: &Grid, idx: usize) -> bool {
    let n = grid.wavenumbers(idx);
    let d = grid.dims();
    let r2: f64 = (0..3)
        .map(|a| {
            let x = n[a] as f64 / (d[a] as f64 / 2.0);
            x * x
        })
        .sum();
    r2 <= (2.0f64 / 3.0).powi(2)
}

/// Zeroes every mode outside the 2/3 sphere.
pub fn dealias(s: &mut SpectralField) {
    let g = *s.grid();
    for c in s.data.iter_mut() {
        c.par_iter_mut().enumerate().for_each(|(idx, z)| {
            if !dealias_keep(&g, idx) {
                *z = ZERO;
            }
        });
    }
}

/// `h³ Σ_x (a(x), b(x))_F`.
pub fn discrete_l2_dot(a: &TensorField, b: &TensorField) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let g = a.grid();
    Ok(g.cell_volume() * ordered_sum(g.len(), |i| a.get(i).frob_dot(&b.get(i))))
}

pub fn l2_norm(f: &TensorField) -> f64 {
    discrete_l2_dot(f, f).expect("same grid").max(0.0).sqrt()
}

/// `max_x ‖f(x)‖_F`.
pub fn sup_norm(f: &TensorField) -> f64 {
    par_max(f.grid().len(), |i| f.get(i).frobenius_norm())
}

/// Parseval form of `discrete_l2_dot`: `h³/N Σ_k Re⟨â, b̂⟩_F`.
pub fn spectral_l2_dot(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let g = a.grid();
    let s = ordered_sum(g.len(), |i| cmat::herm_dot5(&a.get(i), &b.get(i)).re);
    Ok(g.cell_volume() * s / g.len() as f64)
}
