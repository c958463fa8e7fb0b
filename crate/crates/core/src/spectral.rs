//! Fourier-lattice discretisation of `(1 - Δ)^{-d/4} M_f (1 - Δ)^{-d/4}`,
//! singular values, weak Schatten quasi-norms, submajorisation and
//! eigenvalue counting.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::fourier::Spectrum;
use crate::grid::SampledFunction;
use crate::orlicz::field_llogl_norm;
use crate::step::StepFunction;

/// Dense solves beyond this many rows are refused.
pub const MAX_ROWS: usize = 4096;

/// Modes `n ∈ ℤ^d` with `|n|_∞ ≤ N`, ordered by `(|n|², n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierLattice {
    pub dim: usize,
    pub cutoff: usize,
    pub modes: Vec<Vec<i64>>,
}

impl FourierLattice {
    pub fn new(dim: usize, cutoff: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let width = 2 * cutoff + 1;
        let size = width.pow(dim as u32);
        if size > MAX_ROWS {
            return Err(Error::InvalidInput(format!("lattice of {size} modes exceeds {MAX_ROWS}")));
        }
        let mut modes: Vec<Vec<i64>> = (0..size)
            .map(|i| {
                let mut rest = i;
                let mut m = vec![0i64; dim];
                for a in (0..dim).rev() {
                    m[a] = (rest % width) as i64 - cutoff as i64;
                    rest /= width;
                }
                m
            })
            .collect();
        modes.sort_by(|a, b| {
            let na: i64 = a.iter().map(|v| v * v).sum();
            let nb: i64 = b.iter().map(|v| v * v).sum();
            na.cmp(&nb).then_with(|| a.cmp(b))
        });
        Ok(Self { dim, cutoff, modes })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `|ξ_n|²` for frequencies `ξ = n π / L`.
    pub fn freq_sq(&self, idx: usize, half_width: f64) -> f64 {
        let s = PI / half_width;
        self.modes[idx].iter().map(|&v| (v as f64 * s).powi(2)).sum()
    }
}

/// `T[m, n] = w_m f̂(m - n) w_n` with `w_n = (1 + |ξ_n|²)^{-d/4}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CwikelMatrix {
    pub lattice: FourierLattice,
    pub half_width: f64,
    pub entries: DMatrix<Complex64>,
}

fn alias_guard(f: &SampledFunction, cutoff: usize) -> Result<()> {
    let required = 2 * (2 * cutoff + 1);
    if f.resolution() < required {
        return Err(Error::AliasError { resolution: f.resolution(), max_mode: cutoff, required });
    }
    Ok(())
}

/// Matrix of `M_f` on the lattice: `f̂(m - n)`.
pub fn multiplication_matrix(f: &SampledFunction, lattice: &FourierLattice) -> Result<DMatrix<Complex64>> {
    if f.dim() != lattice.dim {
        return Err(Error::GridMismatch);
    }
    alias_guard(f, lattice.cutoff)?;
    let spec = Spectrum::of(f);
    let n = lattice.len();
    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut diff = vec![0i64; lattice.dim];
            (0..n)
                .map(|j| {
                    for (a, d) in diff.iter_mut().enumerate() {
                        *d = lattice.modes[i][a] - lattice.modes[j][a];
                    }
                    spec.coefficient(&diff)
                })
                .collect()
        })
        .collect();
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Assembles the symmetrised operator on `|n|_∞ ≤ cutoff`. Torus grids use
/// frequencies `n`; box grids of half-width `L` model `ℝ^d` periodically with
/// frequencies `n π / L`.
pub fn assemble_cwikel(f: &SampledFunction, cutoff: usize) -> Result<CwikelMatrix> {
    let lattice = FourierLattice::new(f.dim(), cutoff)?;
    let half_width = f.domain().half_width();
    let mut m = multiplication_matrix(f, &lattice)?;
    let d = f.dim() as f64;
    let w: Vec<f64> = (0..lattice.len()).map(|i| (1.0 + lattice.freq_sq(i, half_width)).powf(-d / 4.0)).collect();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            m[(i, j)] *= w[i] * w[j];
        }
    }
    Ok(CwikelMatrix { lattice, half_width, entries: m })
}

fn real_part_if_real(m: &DMatrix<Complex64>) -> Option<DMatrix<f64>> {
    let scale = m.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if m.iter().all(|c| c.im.abs() <= 1e-14 * scale.max(1e-300)) {
        Some(m.map(|c| c.re))
    } else {
        None
    }
}

/// Eigenvalues of a Hermitian matrix, nonincreasing.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = match real_part_if_real(m) {
        Some(r) => r.symmetric_eigenvalues().iter().copied().collect(),
        None => m.symmetric_eigenvalues().iter().copied().collect(),
    };
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Nonincreasing singular values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.iter_mut().for_each(|v| *v = v.abs());
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values }
    }

    pub fn to_step(&self) -> StepFunction {
        StepFunction::from_sequence(&self.values)
    }

    /// CSV with columns `k,mu_k,(k+1)*mu_k`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,mu_k,(k+1)*mu_k")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(w, "{k},{v:e},{:e}", (k + 1) as f64 * v)?;
        }
        Ok(())
    }
}

/// Singular values of the (Hermitian) Cwikel matrix.
pub fn singular_values(t: &CwikelMatrix) -> SingularSpectrum {
    SingularSpectrum::new(hermitian_eigenvalues(&t.entries))
}

/// Singular values of an arbitrary square complex matrix.
pub fn singular_values_general(m: &DMatrix<Complex64>) -> SingularSpectrum {
    SingularSpectrum::new(m.singular_values().iter().copied().collect())
}

/// `sup_k (k + 1)^{1/p} μ(k)` over the available `k`.
pub fn weak_quasinorm(s: &SingularSpectrum, p: f64) -> f64 {
    s.values.iter().enumerate().map(|(k, &v)| ((k + 1) as f64).powf(1.0 / p) * v).fold(0.0, f64::max)
}

/// `‖T_N‖_{1,∞} / ‖f‖_{L log L}`.
pub fn cwikel_ratio(f: &SampledFunction, cutoff: usize) -> Result<f64> {
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let t = assemble_cwikel(f, cutoff)?;
    Ok(weak_quasinorm(&singular_values(&t), 1.0) / field_llogl_norm(f))
}

/// `‖M_{f^{1/2}} (1 - Δ)^{-d/4}‖_{2,∞}` on the lattice: its singular values
/// are the square roots of the eigenvalues of the Cwikel matrix of `f`.
pub fn half_operator_quasinorm(f: &SampledFunction, cutoff: usize) -> Result<f64> {
    if f.values().iter().any(|&v| v < 0.0) {
        return Err(Error::NegativeFunction);
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    let t = assemble_cwikel(f, cutoff)?;
    let ev = hermitian_eigenvalues(&t.entries);
    let s = SingularSpectrum::new(ev.into_iter().map(|v| v.max(0.0).sqrt()).collect());
    Ok(weak_quasinorm(&s, 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorizationReport {
    /// Prefix sums of `μ(⊕ p_k T p_k)` never exceed those of `μ(T)`.
    pub prefix_ok: bool,
    /// Largest prefix-sum excess, `≤ 0` when the check passes.
    pub worst_excess: f64,
    pub block_2inf: f64,
    pub full_2inf: f64,
    /// `‖⊕ p_k T p_k‖_{2,∞} ≤ 2 ‖T‖_{2,∞}`.
    pub two_inf_ok: bool,
}

/// Compares the block-diagonal compression `⊕ p_k T p_k` (blocks given as
/// disjoint index sets) with `T`.
pub fn diagonal_majorization_check(t: &DMatrix<Complex64>, blocks: &[Vec<usize>]) -> Result<MajorizationReport> {
    let n = t.nrows();
    let mut seen = vec![false; n];
    for &i in blocks.iter().flatten() {
        if i >= n || seen[i] {
            return Err(Error::InvalidInput("blocks must be disjoint index sets".into()));
        }
        seen[i] = true;
    }
    let full = singular_values_general(t);
    let mut parts = Vec::new();
    for b in blocks {
        let sub = DMatrix::from_fn(b.len(), b.len(), |i, j| t[(b[i], b[j])]);
        parts.extend(singular_values_general(&sub).values);
    }
    let block = SingularSpectrum::new(parts);
    let scale = full.values.first().copied().unwrap_or(0.0);
    let (mut acc_b, mut acc_f, mut worst) = (0.0, 0.0, f64::NEG_INFINITY);
    for k in 0..n {
        acc_b += block.values.get(k).copied().unwrap_or(0.0);
        acc_f += full.values[k];
        worst = worst.max(acc_b - acc_f);
    }
    let tol = 1e-10 * scale * n as f64;
    let block_2inf = weak_quasinorm(&block, 2.0);
    let full_2inf = weak_quasinorm(&full, 2.0);
    Ok(MajorizationReport {
        prefix_ok: worst <= tol,
        worst_excess: worst,
        block_2inf,
        full_2inf,
        two_inf_ok: block_2inf <= 2.0 * full_2inf + tol,
    })
}

/// Checks `μ(n + m, T S) ≤ μ(n, T) μ(m, S)` for every `n, m`; returns the
/// largest violation relative to `‖T‖ ‖S‖` (`≤ 0` means it holds).
pub fn weak_holder_violation(t: &DMatrix<Complex64>, s: &DMatrix<Complex64>) -> f64 {
    let mt = singular_values_general(t).values;
    let ms = singular_values_general(s).values;
    let mp = singular_values_general(&(t * s)).values;
    let scale = (mt[0] * ms[0]).max(1e-300);
    let mut worst = f64::NEG_INFINITY;
    for (n, a) in mt.iter().enumerate() {
        for (m, b) in ms.iter().enumerate() {
            if let Some(p) = mp.get(n + m) {
                worst = worst.max((p - a * b) / scale);
            }
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountPair {
    /// Eigenvalues of the Cwikel matrix of `f / t` above 1.
    pub cwikel: usize,
    /// Negative eigenvalues of `diag((1 + |ξ|²)^{d/2}) - M_{f/t}`.
    pub schrodinger: usize,
}

/// Both sides of the Birman–Schwinger count on the lattice.
pub fn birman_schwinger_count(f: &SampledFunction, t: f64, cutoff: usize) -> Result<CountPair> {
    if f.values().iter().any(|&v| v < 0.0) {
        return Err(Error::NegativeFunction);
    }
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("coupling {t} must be positive")));
    }
    let g = f.map(|v| v / t);
    let lattice = FourierLattice::new(f.dim(), cutoff)?;
    let b = multiplication_matrix(&g, &lattice)?;
    let hw = f.domain().half_width();
    let d = f.dim() as f64;
    let mut a = -b;
    for i in 0..lattice.len() {
        a[(i, i)] += (1.0 + lattice.freq_sq(i, hw)).powf(d / 2.0);
    }
    let t_mat = assemble_cwikel(&g, cutoff)?;
    let cwikel = hermitian_eigenvalues(&t_mat.entries).iter().filter(|&&v| v > 1.0).count();
    let schrodinger = hermitian_eigenvalues(&a).iter().filter(|&&v| v < 0.0).count();
    Ok(CountPair { cwikel, schrodinger })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_is_sorted_by_norm() {
        let l = FourierLattice::new(1, 2).unwrap();
        assert_eq!(l.modes, vec![vec![0], vec![-1], vec![1], vec![-2], vec![2]]);
        assert_eq!(FourierLattice::new(2, 3).unwrap().len(), 49);
        assert!(FourierLattice::new(3, 8).is_err());
    }

    #[test]
    fn constant_gives_diagonal_weights() {
        let f = SampledFunction::torus(1, 16, |_| 1.0).unwrap();
        let t = assemble_cwikel(&f, 2).unwrap();
        let expected: [f64; 5] = [1.0, 0.5, 0.5, 0.2, 0.2];
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { expected[i].sqrt() } else { 0.0 };
                assert!((t.entries[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-14);
            }
        }
        let s = singular_values(&t);
        assert!((weak_quasinorm(&s, 1.0) - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn alias_guard_triggers() {
        let f = SampledFunction::torus(1, 9, |_| 1.0).unwrap();
        assert_eq!(
            assemble_cwikel(&f, 2).map(|_| ()),
            Err(Error::AliasError { resolution: 9, max_mode: 2, required: 10 })
        );
    }

    #[test]
    fn weak_quasinorm_examples() {
        let harmonic = SingularSpectrum::new((0..10).map(|k| 1.0 / (k + 1) as f64).collect());
        assert!((weak_quasinorm(&harmonic, 1.0) - 1.0).abs() < 1e-15);
        let single = SingularSpectrum::new(vec![0.3]);
        for p in [0.5, 1.0, 2.0] {
            assert_eq!(weak_quasinorm(&single, p), 0.3);
        }
    }

    #[test]
    fn rank_one_spectrum() {
        let u = DMatrix::from_fn(4, 1, |i, _| Complex64::new(i as f64 + 1.0, 0.0));
        let v = DMatrix::from_fn(4, 1, |i, _| Complex64::new(1.0, i as f64));
        let s = singular_values_general(&(&u * v.adjoint()));
        let nu = 30f64.sqrt();
        let nv = (4.0 + 14.0f64).sqrt();
        assert!((s.values[0] - nu * nv).abs() < 1e-10);
        assert!(s.values[1..].iter().all(|&x| x < 1e-10));
    }

    #[test]
    fn one_mode_counts() {
        for c in [0.5, 2.0] {
            let f = SampledFunction::torus(1, 8, |_| c).unwrap();
            let pair = birman_schwinger_count(&f, 1.0, 0).unwrap();
            let expected = (c > 1.0) as usize;
            assert_eq!(pair, CountPair { cwikel: expected, schrodinger: expected });
        }
    }

    #[test]
    fn negative_function_rejected() {
        let f = SampledFunction::torus(1, 8, |x| x[0]).unwrap();
        assert_eq!(half_operator_quasinorm(&f, 1), Err(Error::NegativeFunction));
        assert_eq!(birman_schwinger_count(&f, 1.0, 1), Err(Error::NegativeFunction));
    }
}
