//! Observables of a state: discrete energy, norms, eigenvalue range,
//! order-parameter fields and the static structure factor.

use rayon::prelude::*;

use crate::cmat::{self, C64};
use crate::error::Result;
use crate::grid::{Grid, SpectralField, TensorField};
use crate::params::ModelParams;
use crate::qtensor::{biaxiality, eigenvalues_sym3, scalar_order};
use crate::reduce::ordered_sum;
use crate::spectral::{self, curl_rowwise, Fft3};

/// One row of the time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: u64,
    pub time: f64,
    pub energy: f64,
    pub sup_norm: f64,
    pub l2_norm: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl StepDiagnostics {
    pub const CSV_HEADER: &'static str = "step,t,energy,sup_norm,l2_norm,lambda_min,lambda_max";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.step, self.time, self.energy, self.sup_norm, self.l2_norm, self.lambda_min, self.lambda_max
        )
    }
}

/// Contributions to the discrete free energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub gradient: f64,
    pub curl: f64,
    pub bulk: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.gradient + self.curl + self.bulk
    }
}

/// `h³ Σ_x [α/2 trQ² − β/3 trQ³ + γ/4 (trQ²)²]`.
pub fn bulk_energy(f: &TensorField, p: &ModelParams) -> f64 {
    let g = f.grid();
    let s = ordered_sum(g.len(), |i| {
        let q = f.get(i);
        let t2 = q.frob_norm_sq();
        0.5 * p.alpha * t2 - p.beta / 3.0 * q.trace_cube() + 0.25 * p.gamma * t2 * t2
    });
    g.cell_volume() * s
}

/// Energy terms from the transform `s` of `f`; the elastic terms use
/// Parseval, the bulk term is summed pointwise.
pub fn energy_parts(f: &TensorField, s: &SpectralField, p: &ModelParams) -> EnergyParts {
    let g = *f.grid();
    let scale = g.cell_volume() / g.len() as f64;
    let grad = ordered_sum(g.len(), |idx| -spectral::laplacian_symbol(&g, idx) * cmat::norm_sq5(&s.get(idx)));
    let curl = ordered_sum(g.len(), |idx| {
        let q = cmat::from5(&s.get(idx));
        cmat::herm_dot(&curl_rowwise(s, idx), &q).re
    });
    EnergyParts { gradient: 0.5 * p.l1 * scale * grad, curl: 0.5 * p.l4 * scale * curl, bulk: bulk_energy(f, p) }
}

/// Discrete free energy `E_h[Q]`.
pub fn discrete_energy(f: &TensorField, p: &ModelParams, fft: &Fft3) -> Result<f64> {
    let s = fft.forward(f)?;
    Ok(energy_parts(f, &s, p).total())
}

/// `h³ Σ_x (Q, ∇_h × Q)_F` with the curl transformed back to physical space.
pub fn curl_pairing_physical(f: &TensorField, fft: &Fft3) -> Result<f64> {
    let g = *f.grid();
    let s = fft.forward(f)?;
    let mut rows: Vec<Vec<C64>> = vec![vec![cmat::ZERO; g.len()]; 9];
    for idx in 0..g.len() {
        let c = curl_rowwise(&s, idx);
        for (p, row) in rows.iter_mut().enumerate() {
            row[idx] = c[p / 3][p % 3];
        }
    }
    let ins: Vec<&[C64]> = rows.iter().map(|r| r.as_slice()).collect();
    let mut out: Vec<Vec<f64>> = vec![vec![0.0; g.len()]; 9];
    {
        let mut outs: Vec<&mut [f64]> = out.iter_mut().map(|r| r.as_mut_slice()).collect();
        fft.inverse_real(&ins, &mut outs)?;
    }
    let sum = ordered_sum(g.len(), |i| {
        let q = f.get(i).to_full().0;
        (0..9).map(|p| q[p / 3][p % 3] * out[p][i]).sum::<f64>()
    });
    Ok(g.cell_volume() * sum)
}

/// Global extremes of the pointwise eigenvalues.
pub fn eigen_range(f: &TensorField) -> (f64, f64) {
    (0..f.grid().len())
        .into_par_iter()
        .map(|i| {
            let e = eigenvalues_sym3(&f.get(i));
            (e[0], e[2])
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)))
}

/// `S(k) = ⟨Q̂_k, Q̂_k⟩_F` per Fourier index.
pub fn structure_factor(f: &TensorField, fft: &Fft3) -> Result<Vec<f64>> {
    let s = fft.forward(f)?;
    Ok(structure_factor_of(&s))
}

pub fn structure_factor_of(s: &SpectralField) -> Vec<f64> {
    (0..s.grid().len()).into_par_iter().map(|idx| cmat::norm_sq5(&s.get(idx))).collect()
}

pub fn order_parameter_field(f: &TensorField) -> Vec<f64> {
    f.scalar_map(|q| scalar_order(&q))
}

pub fn biaxiality_field(f: &TensorField) -> Vec<f64> {
    f.scalar_map(|q| biaxiality(&q))
}

/// Shell statistics of a structure factor binned by `|k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellMetrics {
    /// Bin width in `|k|`: the smallest wavevector spacing.
    pub dk: f64,
    /// Mean of S per bin, bin `b` covering `[(b − ½)dk, (b + ½)dk)`.
    pub radial_mean: Vec<f64>,
    pub counts: Vec<usize>,
    /// Bin with the largest mean among fully resolved shells.
    pub peak_bin: usize,
    /// Standard deviation over mean of S within the peak bin.
    pub angular_cv: f64,
    /// `0 < peak_bin < N_min/2`: neither the DC mode nor the Nyquist shell.
    pub interior: bool,
}

pub fn shell_metrics(grid: &Grid, s: &[f64]) -> ShellMetrics {
    let l = grid.lengths();
    let dk = (0..3).map(|a| 2.0 * std::f64::consts::PI / l[a]).fold(f64::INFINITY, f64::min);
    let nyq_bin =
        (0..3).map(|a| (std::f64::consts::PI * grid.dims()[a] as f64 / l[a] / dk).round() as usize).min().unwrap_or(0);
    let bin_of = |idx: usize| {
        let k = grid.wavevector(idx);
        ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt() / dk).round() as usize
    };
    let mut sums = vec![0.0; nyq_bin + 1];
    let mut counts = vec![0usize; nyq_bin + 1];
    for (idx, &v) in s.iter().enumerate() {
        let b = bin_of(idx);
        if b <= nyq_bin {
            sums[b] += v;
            counts[b] += 1;
        }
    }
    let radial_mean: Vec<f64> =
        sums.iter().zip(&counts).map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect();
    let peak_bin = radial_mean
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (b, &m)| if m > acc.1 { (b, m) } else { acc })
        .0;
    let mean = radial_mean[peak_bin];
    let var =
        s.iter().enumerate().filter(|(idx, _)| bin_of(*idx) == peak_bin).map(|(_, &v)| (v - mean).powi(2)).sum::<f64>()
            / counts[peak_bin].max(1) as f64;
    ShellMetrics {
        dk,
        angular_cv: if mean > 0.0 { var.sqrt() / mean } else { f64::INFINITY },
        interior: peak_bin > 0 && peak_bin < nyq_bin,
        radial_mean,
        counts,
        peak_bin,
    }
}

/// Evaluates [`StepDiagnostics`] with a shared transform plan.
#[derive(Debug)]
pub struct Diagnostics {
    fft: Fft3,
    params: ModelParams,
}

impl Diagnostics {
    pub fn new(grid: Grid, params: ModelParams) -> Self {
        Diagnostics { fft: Fft3::new(grid), params }
    }

    pub fn fft(&self) -> &Fft3 {
        &self.fft
    }

    pub fn energy(&self, f: &TensorField) -> Result<f64> {
        discrete_energy(f, &self.params, &self.fft)
    }

    pub fn evaluate(&self, f: &TensorField, step: u64, time: f64) -> Result<StepDiagnostics> {
        let (lambda_min, lambda_max) = eigen_range(f);
        Ok(StepDiagnostics {
            step,
            time,
            energy: self.energy(f)?,
            sup_norm: spectral::sup_norm(f),
            l2_norm: spectral::l2_norm(f),
            lambda_min,
            lambda_max,
        })
    }
}
