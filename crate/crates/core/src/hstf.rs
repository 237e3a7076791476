//! Helmholtz symmetric trace-free (HSTF) basis.
//!
//! For each nonzero wavevector the five tensors `T0, T+k, T-k, T+2k, T-2k`
//! are Hermitian-orthonormal, symmetric and traceless, and diagonalize both
//! the Laplacian and the symmetrized-curl symbols. Basis elements are
//! indexed `0..5` in that order; [`HELICITY`] gives the curl eigenvalue
//! of each in units of `|k|`.

use std::f64::consts::FRAC_1_SQRT_2;

use rayon::prelude::*;

use crate::cmat::{self, CMat3, CVec3, C64};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::StabilizedParams;
use crate::spectral;

/// Curl eigenvalue of each basis element over `|k|`, as established by
/// [`measured_helicities`].
pub const HELICITY: [f64; 5] = [0.0, 1.0, -1.0, 2.0, -2.0];

const SEED: [f64; 3] = [1.0, 0.0, 0.0];
const FALLBACK_SEED: [f64; 3] = [0.0, 1.0, 0.0];
const SEED_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    pub khat: [f64; 3],
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = dot(v, v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Right-handed frame `{e1, e2, k̂}` with `e2 = k̂ × e1`.
pub fn local_frame(k: [f64; 3]) -> Result<LocalFrame> {
    local_frame_with_seed(k, SEED)
}

/// As [`local_frame`] with a custom first seed vector.
pub fn local_frame_with_seed(k: [f64; 3], seed: [f64; 3]) -> Result<LocalFrame> {
    let kn = dot(k, k).sqrt();
    if !(kn > 0.0 && kn.is_finite()) {
        return Err(Error::ZeroWavevector);
    }
    let khat = [k[0] / kn, k[1] / kn, k[2] / kn];
    let mut v = normalize(seed);
    if dot(v, khat).abs() > SEED_THRESHOLD {
        v = if dot(FALLBACK_SEED, khat).abs() > SEED_THRESHOLD { SEED } else { FALLBACK_SEED };
    }
    let p = dot(v, khat);
    let e1 = normalize([v[0] - p * khat[0], v[1] - p * khat[1], v[2] - p * khat[2]]);
    let e2 = cross(khat, e1);
    Ok(LocalFrame { e1, e2, khat })
}

/// `m± = (e1 ± i e2)/√2`.
pub fn helicity_vectors(f: &LocalFrame) -> (CVec3, CVec3) {
    let mp = std::array::from_fn(|i| C64::new(f.e1[i], f.e2[i]) * FRAC_1_SQRT_2);
    let mm = std::array::from_fn(|i| C64::new(f.e1[i], -f.e2[i]) * FRAC_1_SQRT_2);
    (mp, mm)
}

/// The five basis tensors in index order `T0, T+k, T-k, T+2k, T-2k`.
pub fn hstf_tensors(f: &LocalFrame) -> [CMat3; 5] {
    let (mp, mm) = helicity_vectors(f);
    let kh = cmat::real_vec(f.khat);
    let s6 = 1.0 / 6f64.sqrt();
    let mut t0 = cmat::scale(&cmat::outer(&kh, &kh), cmat::c(-3.0 * s6));
    for (i, row) in t0.iter_mut().enumerate() {
        row[i] += s6;
    }
    let side = |m: &CVec3| {
        let a = cmat::outer(m, &kh);
        cmat::scale(&cmat::add(&a, &cmat::transpose(&a)), cmat::c(FRAC_1_SQRT_2))
    };
    [t0, side(&mp), side(&mm), cmat::outer(&mp, &mp), cmat::outer(&mm, &mm)]
}

/// Basis tensors in 5-DOF storage.
pub fn hstf_tensors5(f: &LocalFrame) -> [[C64; 5]; 5] {
    hstf_tensors(f).map(|t| cmat::to5(&t))
}

/// Eigenvalues of the linear-operator symbol, indexed like the basis.
pub fn operator_eigenvalues(k: [f64; 3], p: &StabilizedParams) -> [f64; 5] {
    let kn = dot(k, k).sqrt();
    let m = &p.model;
    HELICITY.map(|h| -m.l1 * kn * kn - 0.5 * m.l4 * h * kn - p.kappa())
}

/// `c_j = ⟨mode, T_j⟩_F`.
pub fn project(mode: &CMat3, t: &[CMat3; 5]) -> [C64; 5] {
    std::array::from_fn(|j| cmat::herm_dot(mode, &t[j]))
}

/// `Σ_j c_j T_j`.
pub fn reconstruct(c: &[C64; 5], t: &[CMat3; 5]) -> CMat3 {
    let mut m = cmat::zeros();
    for (cj, tj) in c.iter().zip(t) {
        m = cmat::add(&m, &cmat::scale(tj, *cj));
    }
    m
}

/// `⟨Ĉ(k) T_j, T_j⟩ / |k|` for each basis element.
pub fn measured_helicities(k: [f64; 3], t: &[CMat3; 5]) -> [f64; 5] {
    let kn = dot(k, k).sqrt();
    std::array::from_fn(|j| cmat::herm_dot(&spectral::sym_curl_k(k, &t[j]), &t[j]).re / kn)
}

/// Largest `‖Ĉ(k) T_j − HELICITY_j |k| T_j‖_F / |k|` over the basis.
pub fn curl_relation_residual(k: [f64; 3], t: &[CMat3; 5]) -> f64 {
    let kn = dot(k, k).sqrt();
    (0..5)
        .map(|j| {
            let ct = spectral::sym_curl_k(k, &t[j]);
            let want = cmat::scale(&t[j], cmat::c(HELICITY[j] * kn));
            cmat::frob_norm(&cmat::sub(&ct, &want)) / kn
        })
        .fold(0.0, f64::max)
}

/// Linear operator restricted to one Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeOperator {
    /// Multiple of the identity: `k = 0` or any Nyquist index.
    Scalar(f64),
    Helical {
        frame: LocalFrame,
        lambda: [f64; 5],
    },
}

impl ModeOperator {
    pub fn eigenvalues(&self) -> [f64; 5] {
        match *self {
            ModeOperator::Scalar(l) => [l; 5],
            ModeOperator::Helical { lambda, .. } => lambda,
        }
    }
}

/// Per-mode frames and eigenvalues for one grid and parameter set.
#[derive(Debug, Clone)]
pub struct FrameTable {
    grid: Grid,
    params: StabilizedParams,
    modes: Vec<ModeOperator>,
}

impl FrameTable {
    /// Builds the table and checks the curl eigen-relations on a sample of
    /// modes (on every mode in debug builds).
    pub fn new(grid: Grid, p: &StabilizedParams) -> Result<Self> {
        let modes: Vec<ModeOperator> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let k = grid.wavevector(idx);
                if idx == 0 || grid.is_nyquist(idx) {
                    ModeOperator::Scalar(spectral::laplacian_symbol(&grid, idx) * p.model.l1 - p.kappa())
                } else {
                    let frame = local_frame(k).expect("nonzero wavevector");
                    ModeOperator::Helical { frame, lambda: operator_eigenvalues(k, p) }
                }
            })
            .collect();
        let table = FrameTable { grid, params: *p, modes };
        table.verify(if cfg!(debug_assertions) { 1 } else { 97 })?;
        Ok(table)
    }

    fn verify(&self, stride: usize) -> Result<()> {
        let worst = (0..self.grid.len())
            .into_par_iter()
            .step_by(stride)
            .map(|idx| match &self.modes[idx] {
                ModeOperator::Scalar(_) => 0.0,
                ModeOperator::Helical { frame, .. } => {
                    curl_relation_residual(self.grid.wavevector(idx), &hstf_tensors(frame))
                }
            })
            .reduce(|| 0.0, f64::max);
        if worst > 1e-10 {
            return Err(Error::InvalidParameter {
                name: "frames",
                reason: format!("curl eigen-relation residual {worst:e}"),
            });
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &StabilizedParams {
        &self.params
    }

    #[inline]
    pub fn mode(&self, idx: usize) -> &ModeOperator {
        &self.modes[idx]
    }

    pub fn modes(&self) -> &[ModeOperator] {
        &self.modes
    }

    /// Largest eigenvalue over all modes.
    pub fn max_eigenvalue(&self) -> f64 {
        self.modes.iter().flat_map(|m| m.eigenvalues()).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;
    use proptest::prelude::*;

    fn params() -> StabilizedParams {
        StabilizedParams::unchecked(ModelParams::mbp_test(), 8.0, 0.5, 2.0)
    }

    fn direction() -> impl Strategy<Value = [f64; 3]> {
        prop::array::uniform3(-5.0f64..5.0).prop_filter("nonzero", |k| dot(*k, *k) > 1e-6)
    }

    fn stf_mode() -> impl Strategy<Value = CMat3> {
        prop::array::uniform10(-1.0f64..1.0).prop_map(|v| {
            let z = |a, b| C64::new(a, b);
            let a = [z(v[0], v[1]), z(v[2], v[3]), z(v[4], v[5]), z(v[6], v[7]), z(v[8], v[9])];
            cmat::from5(&a)
        })
    }

    #[test]
    fn frame_examples() {
        let f = local_frame([0.0, 0.0, 5.0]).unwrap();
        assert_eq!(f.khat, [0.0, 0.0, 1.0]);
        assert_eq!(f.e1, [1.0, 0.0, 0.0]);
        assert_eq!(f.e2, [0.0, 1.0, 0.0]);
        let f = local_frame([2.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.khat, [1.0, 0.0, 0.0]);
        assert!(dot(f.e1, f.khat).abs() < 1e-14 && dot(f.e2, f.khat).abs() < 1e-14);
        assert!(matches!(local_frame([0.0; 3]), Err(Error::ZeroWavevector)));
    }

    #[test]
    fn tensor_examples_along_z() {
        let f = local_frame([0.0, 0.0, 1.0]).unwrap();
        let (mp, mm) = helicity_vectors(&f);
        let r = FRAC_1_SQRT_2;
        assert_eq!(mp, [C64::new(r, 0.0), C64::new(0.0, r), cmat::ZERO]);
        assert_eq!(mm, mp.map(|z| z.conj()));
        let t = hstf_tensors(&f);
        let s6 = 1.0 / 6f64.sqrt();
        for (i, d) in [s6, s6, -2.0 * s6].into_iter().enumerate() {
            assert!((t[0][i][i] - cmat::c(d)).norm() < 1e-15);
        }
        let want = [
            [C64::new(0.5, 0.0), C64::new(0.0, 0.5), cmat::ZERO],
            [C64::new(0.0, 0.5), C64::new(-0.5, 0.0), cmat::ZERO],
            [cmat::ZERO; 3],
        ];
        assert!(cmat::frob_norm(&cmat::sub(&t[3], &want)) < 1e-15);
    }

    #[test]
    fn eigenvalue_examples() {
        let p = params();
        assert_eq!(operator_eigenvalues([0.0; 3], &p), [-8.5; 5]);
        let mut l = operator_eigenvalues([0.0, 1.0, 0.0], &p);
        l.sort_by(f64::total_cmp);
        let want = [-9.75, -9.625, -9.5, -9.375, -9.25];
        for (a, b) in l.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        let achiral = StabilizedParams::unchecked(ModelParams { l4: 0.0, ..ModelParams::mbp_test() }, 8.0, 0.5, 2.0);
        assert_eq!(operator_eigenvalues([0.0, 0.0, 2.0], &achiral), [-12.5; 5]);
    }

    #[test]
    fn project_reconstruct_examples() {
        let f = local_frame([1.0, 2.0, 3.0]).unwrap();
        let t = hstf_tensors(&f);
        let c = project(&t[0], &t);
        assert!((c[0] - cmat::c(1.0)).norm() < 1e-14);
        assert!(c[1..].iter().all(|z| z.norm() < 1e-14));
        assert_eq!(project(&cmat::zeros(), &t), [cmat::ZERO; 5]);
        assert_eq!(reconstruct(&[cmat::ZERO; 5], &t), cmat::zeros());
    }

    #[test]
    fn table_dissipative_at_minimal_kappa2() {
        let m = ModelParams::mbp_test();
        let k2 = crate::params::kappa2_min(&m);
        let p = StabilizedParams::unchecked(m, 3.0, k2, 2.0);
        let t = FrameTable::new(Grid::cube(16).unwrap(), &p).unwrap();
        assert!(t.max_eigenvalue() + p.kappa1 <= 1e-14);
    }

    proptest! {
        #[test]
        fn frame_is_orthonormal(k in direction()) {
            let f = local_frame(k).unwrap();
            for (a, b, want) in [
                (f.e1, f.e1, 1.0), (f.e2, f.e2, 1.0), (f.khat, f.khat, 1.0),
                (f.e1, f.e2, 0.0), (f.e1, f.khat, 0.0), (f.e2, f.khat, 0.0),
            ] {
                prop_assert!((dot(a, b) - want).abs() < 1e-14);
            }
        }

        #[test]
        fn helicity_vectors_are_curl_eigenvectors(k in direction()) {
            let (mp, mm) = helicity_vectors(&local_frame(k).unwrap());
            let kn = dot(k, k).sqrt();
            let kp = cmat::cross(k, &mp);
            let km = cmat::cross(k, &mm);
            for i in 0..3 {
                prop_assert!((kp[i] + cmat::I * kn * mp[i]).norm() < 1e-13 * kn.max(1.0));
                prop_assert!((km[i] - cmat::I * kn * mm[i]).norm() < 1e-13 * kn.max(1.0));
            }
        }

        #[test]
        fn basis_is_orthonormal_stf(k in direction()) {
            let t = hstf_tensors(&local_frame(k).unwrap());
            for j in 0..5 {
                prop_assert!(cmat::max_asymmetry(&t[j]) < 1e-14);
                prop_assert!(cmat::trace(&t[j]).norm() < 1e-14);
                for l in 0..5 {
                    let want = if j == l { 1.0 } else { 0.0 };
                    prop_assert!((cmat::herm_dot(&t[j], &t[l]) - cmat::c(want)).norm() < 1e-12);
                }
            }
            prop_assert!(cmat::frob_norm(&cmat::sub(&cmat::conj(&t[1]), &t[2])) < 1e-15);
            prop_assert!(cmat::frob_norm(&cmat::sub(&cmat::conj(&t[3]), &t[4])) < 1e-15);
        }

        #[test]
        fn curl_diagonalized_with_fixed_labels(k in direction()) {
            let t = hstf_tensors(&local_frame(k).unwrap());
            prop_assert!(curl_relation_residual(k, &t) < 1e-11);
            let h = measured_helicities(k, &t);
            for j in 0..5 {
                prop_assert!((h[j] - HELICITY[j]).abs() < 1e-12);
            }
        }

        #[test]
        fn completeness(k in direction(), m in stf_mode()) {
            let t = hstf_tensors(&local_frame(k).unwrap());
            let back = reconstruct(&project(&m, &t), &t);
            prop_assert!(cmat::frob_norm(&cmat::sub(&back, &m)) < 1e-12 * cmat::frob_norm(&m).max(1e-300));
        }

        #[test]
        fn observables_are_gauge_independent(k in direction(), m in stf_mode(),
                                             seed in prop::array::uniform3(-1.0f64..1.0)) {
            prop_assume!(dot(seed, seed) > 1e-2);
            let t1 = hstf_tensors(&local_frame(k).unwrap());
            let t2 = hstf_tensors(&local_frame_with_seed(k, seed).unwrap());
            let p = params();
            let lam = operator_eigenvalues(k, &p);
            // φ-weighted reconstruction depends only on the eigenspaces.
            let apply = |t: &[CMat3; 5]| {
                let c = project(&m, t);
                reconstruct(&std::array::from_fn(|j| c[j] * lam[j]), t)
            };
            let d = cmat::frob_norm(&cmat::sub(&apply(&t1), &apply(&t2)));
            prop_assert!(d < 1e-12 * cmat::frob_norm(&m) * lam.iter().fold(0.0f64, |a, l| a.max(l.abs())));
            prop_assert_eq!(measured_helicities(k, &t2).map(|h| h.round()), HELICITY);
        }
    }
}
