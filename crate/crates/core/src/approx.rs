//! Polynomial projections on cubes, the finite-rank approximant built from an
//! equal-budget covering, and the homogeneous Sobolev seminorms that control
//! its error.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::covering::{build_equal_j_covering, Covering, DEFAULT_TOL};
use crate::cube::TorusCube;
use crate::error::{Error, Result};
use crate::fourier::spectral_gradient;
use crate::grid::{Domain, SampledFunction};
use crate::orlicz::j_cube;
use crate::profiles::band_limited;

/// Largest polynomial degree strictly below `d / 2`.
pub fn projection_degree(dim: usize) -> usize {
    (dim - 1) / 2
}

/// Exponents of all monomials of total degree `≤ degree`, by degree then
/// lexicographically.
pub fn monomials(dim: usize, degree: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for total in 0..=degree as u32 {
        let mut level = Vec::new();
        for a in 0..=total {
            for b in 0..=total - a {
                for c in 0..=total - a - b {
                    let e = [a, b, c];
                    if e[..dim].iter().sum::<u32>() == total && e[dim..].iter().all(|&x| x == 0) {
                        level.push(e);
                    }
                }
            }
        }
        level.sort_unstable_by(|x, y| y.cmp(x));
        level.dedup();
        out.extend(level);
    }
    out
}

fn monomial(e: &[u32; 3], y: &[f64]) -> f64 {
    y.iter().zip(e).map(|(&v, &k)| v.powi(k as i32)).product()
}

/// A quadrature node: cell index, Lebesgue weight, scaled position in
/// `[-1, 1]^d` relative to the cube.
#[derive(Debug, Clone)]
struct Node {
    idx: usize,
    weight: f64,
    y: [f64; 3],
}

fn scaled_position(cube: &TorusCube, grid: &SampledFunction, idx: usize) -> [f64; 3] {
    let p = grid.point(idx);
    let half = PI * cube.side;
    let mut y = [0.0; 3];
    for a in 0..grid.dim() {
        y[a] = 2.0 * PI * cube.offset(a, p[a]) / half;
    }
    y
}

fn nodes(cube: &TorusCube, grid: &SampledFunction) -> Vec<Node> {
    let vol = grid.cell_volume();
    cube.region(grid)
        .cells()
        .iter()
        .map(|&(idx, w)| Node { idx, weight: w * vol, y: scaled_position(cube, grid, idx) })
        .collect()
}

/// Orthogonal projection in `L₂(Π)` onto polynomials of degree `< d/2`,
/// with the midpoint rule on the data grid as inner product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellProjector {
    pub cube: TorusCube,
    pub exponents: Vec<[u32; 3]>,
    /// Row `i` holds the monomial coefficients of the `i`-th orthonormal
    /// basis polynomial, in coordinates scaled to `[-1, 1]^d`.
    pub basis: Vec<Vec<f64>>,
}

impl CellProjector {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn basis_at(&self, y: &[f64]) -> Vec<f64> {
        let mono: Vec<f64> = self.exponents.iter().map(|e| monomial(e, y)).collect();
        self.basis.iter().map(|c| c.iter().zip(&mono).map(|(a, b)| a * b).sum()).collect()
    }

    /// Coefficients of `P u` in the orthonormal basis.
    pub fn coefficients(&self, u: &SampledFunction) -> Vec<f64> {
        let dim = u.dim();
        let mut acc = vec![0.0; self.dim()];
        for node in nodes(&self.cube, u) {
            let phi = self.basis_at(&node.y[..dim]);
            let v = node.weight * u.values()[node.idx];
            for (a, p) in acc.iter_mut().zip(phi) {
                *a += v * p;
            }
        }
        acc
    }

    /// `(P u)(x)` for a cell of `grid`, from precomputed coefficients.
    pub fn eval_at_cell(&self, coeffs: &[f64], grid: &SampledFunction, idx: usize) -> f64 {
        let y = scaled_position(&self.cube, grid, idx);
        self.basis_at(&y[..grid.dim()]).iter().zip(coeffs).map(|(p, a)| p * a).sum()
    }

    /// `P u` on the cells of the cube, as `(cell, value)`.
    pub fn project(&self, u: &SampledFunction) -> Vec<(usize, f64)> {
        let c = self.coefficients(u);
        nodes(&self.cube, u).iter().map(|n| (n.idx, self.eval_at_cell(&c, u, n.idx))).collect()
    }

    /// Gram matrix of the basis under the cube quadrature.
    pub fn gram(&self, grid: &SampledFunction) -> Vec<Vec<f64>> {
        let k = self.dim();
        let mut g = vec![vec![0.0; k]; k];
        for node in nodes(&self.cube, grid) {
            let phi = self.basis_at(&node.y[..grid.dim()]);
            for i in 0..k {
                for j in 0..k {
                    g[i][j] += node.weight * phi[i] * phi[j];
                }
            }
        }
        g
    }
}

/// Orthonormal basis of polynomials of degree `< d/2` on `cube` by
/// Gram–Schmidt (applied twice) on monomials.
pub fn poly_projector(cube: &TorusCube, grid: &SampledFunction) -> Result<CellProjector> {
    let dim = grid.dim();
    let exponents = monomials(dim, projection_degree(dim));
    let nodes = nodes(cube, grid);
    let needed = exponents.len();
    if nodes.len() < needed {
        return Err(Error::DegenerateCube { cells: nodes.len(), needed });
    }
    let values: Vec<Vec<f64>> =
        exponents.iter().map(|e| nodes.iter().map(|n| monomial(e, &n.y[..dim])).collect()).collect();
    let inner =
        |a: &[f64], b: &[f64]| -> f64 { nodes.iter().zip(a.iter().zip(b)).map(|(n, (x, y))| n.weight * x * y).sum() };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(needed);
    let mut basis_vals: Vec<Vec<f64>> = Vec::with_capacity(needed);
    for i in 0..needed {
        let mut c = vec![0.0; needed];
        c[i] = 1.0;
        let mut v = values[i].clone();
        let start = inner(&v, &v).sqrt();
        for _ in 0..2 {
            for (bc, bv) in basis.iter().zip(&basis_vals) {
                let proj = inner(&v, bv);
                for (x, y) in v.iter_mut().zip(bv) {
                    *x -= proj * y;
                }
                for (x, y) in c.iter_mut().zip(bc) {
                    *x -= proj * y;
                }
            }
        }
        let norm = inner(&v, &v).sqrt();
        if !(norm > 1e-10 * start) {
            return Err(Error::DegenerateCube { cells: nodes.len(), needed });
        }
        v.iter_mut().for_each(|x| *x /= norm);
        c.iter_mut().for_each(|x| *x /= norm);
        basis.push(c);
        basis_vals.push(v);
    }
    Ok(CellProjector { cube: cube.clone(), exponents, basis })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnCell {
    /// Cells of the disjoint piece `Δ_k ⊆ Π_k`.
    pub cells: Vec<usize>,
    pub projector: CellProjector,
}

/// `K_n = Σ_k M_{Δ_k} P_k` with `Δ_k = Π_k ∖ ∪_{l<k} Π_l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteRankOperator {
    pub dim: usize,
    pub resolution: usize,
    pub cells: Vec<KnCell>,
}

impl FiniteRankOperator {
    /// `Σ_k dim(P_k)` over the nonempty pieces.
    pub fn rank_bound(&self) -> usize {
        self.cells.iter().map(|c| c.projector.dim()).sum()
    }

    fn check_grid(&self, u: &SampledFunction) -> Result<()> {
        if u.dim() != self.dim || u.resolution() != self.resolution || u.domain() != Domain::Torus {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Builds `K_n` from the equal-budget covering of `f`.
pub fn build_kn(f: &SampledFunction, n: usize) -> Result<FiniteRankOperator> {
    let cov = build_equal_j_covering(f, n, DEFAULT_TOL)?;
    kn_from_covering(f, &cov)
}

pub fn kn_from_covering(f: &SampledFunction, cov: &Covering) -> Result<FiniteRankOperator> {
    let mut owner = vec![usize::MAX; f.len()];
    let mut p = vec![0.0; f.dim()];
    for (k, cube) in cov.cubes.iter().enumerate() {
        for &(idx, _) in cube.region(f).cells() {
            if owner[idx] != usize::MAX {
                continue;
            }
            f.point_into(idx, &mut p);
            if cube.contains(&p) {
                owner[idx] = k;
            }
        }
    }
    if owner.contains(&usize::MAX) {
        return Err(Error::InvalidInput("covering leaves cells uncovered".into()));
    }
    let mut pieces = vec![Vec::new(); cov.cubes.len()];
    for (idx, &k) in owner.iter().enumerate() {
        pieces[k].push(idx);
    }
    let cells = cov
        .cubes
        .par_iter()
        .zip(pieces)
        .filter(|(_, cells)| !cells.is_empty())
        .map(|(cube, cells)| Ok(KnCell { cells, projector: poly_projector(cube, f)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(FiniteRankOperator { dim: f.dim(), resolution: f.resolution(), cells })
}

pub fn apply_kn(k: &FiniteRankOperator, u: &SampledFunction) -> Result<SampledFunction> {
    k.check_grid(u)?;
    let parts: Vec<Vec<(usize, f64)>> = k
        .cells
        .par_iter()
        .map(|cell| {
            let c = cell.projector.coefficients(u);
            cell.cells.iter().map(|&idx| (idx, cell.projector.eval_at_cell(&c, u, idx))).collect()
        })
        .collect();
    let mut out = vec![0.0; u.len()];
    for (idx, v) in parts.into_iter().flatten() {
        out[idx] = v;
    }
    u.with_values(out)
}

/// `∫ f |u - K u|²` with Lebesgue cell volumes.
pub fn weighted_error(f: &SampledFunction, u: &SampledFunction, k: &FiniteRankOperator) -> Result<f64> {
    if f.values().iter().any(|&v| v < 0.0) {
        return Err(Error::NegativeWeight);
    }
    if !f.same_grid(u) {
        return Err(Error::GridMismatch);
    }
    let ku = apply_kn(k, u)?;
    let vol = u.cell_volume();
    Ok(vol
        * f.values()
            .iter()
            .zip(u.values().iter().zip(ku.values()))
            .map(|(w, (a, b))| w * (a - b) * (a - b))
            .sum::<f64>())
}

/// A seminorm value with the size of what the quadrature could not resolve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormEstimate {
    pub value: f64,
    /// Estimated contribution of the excluded diagonal band to the squared
    /// seminorm (zero for spectral evaluation).
    pub diagonal_band: f64,
}

/// `‖u‖_{W^{d/2,2}_hom(Π)}` on a cube (`TorusCube::whole` for the torus,
/// read as the interval or square `[-π, π]^d`).
///
/// `d = 2`: `(∫_Π |∇u|²)^{1/2}` with spectral derivatives of the periodic
/// field. `d = 1`: the Gagliardo double integral
/// `∫∫ |u(x) - u(y)|² / |x - y|²` over pairs of distinct cells, distances
/// measured inside the cube.
pub fn hom_seminorm(u: &SampledFunction, s: f64, domain: &TorusCube) -> Result<SeminormEstimate> {
    let dim = u.dim();
    if dim >= 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    if (s - 0.5 * dim as f64).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("seminorm order {s} must equal d/2")));
    }
    if u.domain() != Domain::Torus {
        return Err(Error::InvalidInput("seminorms are evaluated on torus grids".into()));
    }
    let nodes = nodes(domain, u);
    let vals = u.values();
    if dim == 2 {
        let g = spectral_gradient(u);
        let sq: f64 = nodes.iter().map(|n| n.weight * (g[0][n.idx] * g[0][n.idx] + g[1][n.idx] * g[1][n.idx])).sum();
        return Ok(SeminormEstimate { value: sq.sqrt(), diagonal_band: 0.0 });
    }
    let h = u.spacing();
    let half = PI * domain.side;
    let pos: Vec<f64> = nodes.iter().map(|n| n.y[0] * half).collect();
    let rows: Vec<f64> = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let (ui, xi, wi) = (vals[nodes[i].idx], pos[i], nodes[i].weight);
            let mut acc = 0.0;
            for j in 0..nodes.len() {
                if j == i {
                    continue;
                }
                let du = ui - vals[nodes[j].idx];
                let dx = xi - pos[j];
                acc += nodes[j].weight * du * du / (dx * dx);
            }
            wi * acc
        })
        .collect();
    let sq: f64 = rows.iter().sum();
    // same-cell squares: ∫∫ |u'|² over h × h blocks ≈ h ∫ |u'|²
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| pos[a].total_cmp(&pos[b]));
    let band: f64 = order
        .windows(2)
        .filter(|w| (pos[w[1]] - pos[w[0]] - h).abs() < 1e-9 * h)
        .map(|w| {
            let du = vals[nodes[w[1]].idx] - vals[nodes[w[0]].idx];
            du * du
        })
        .sum();
    Ok(SeminormEstimate { value: sq.sqrt(), diagonal_band: band })
}

/// `u - P_Π u` as a field on the whole grid. For `d ≤ 2` the projection is a
/// constant, subtracted everywhere so spectral derivatives are unaffected.
pub fn orthogonalize_on(u: &SampledFunction, cube: &TorusCube) -> Result<SampledFunction> {
    if u.dim() > 2 {
        return Err(Error::UnsupportedDimension(u.dim()));
    }
    let proj = poly_projector(cube, u)?;
    let c = proj.coefficients(u)[0] * proj.basis[0][0];
    Ok(u.map(|v| v - c))
}

/// `(‖u‖²_{L₂(Π)} + ‖u‖²_hom)^{1/2} / ‖u‖_hom` for `u` already orthogonal to
/// constants on `Π`.
pub fn sobolev_ratio(u: &SampledFunction, domain: &TorusCube) -> Result<f64> {
    let hom = hom_seminorm(u, 0.5 * u.dim() as f64, domain)?.value;
    if !(hom > 0.0) {
        return Err(Error::ZeroSeminorm);
    }
    let l2sq: f64 = nodes(domain, u).iter().map(|n| n.weight * u.values()[n.idx].powi(2)).sum();
    Ok((l2sq + hom * hom).sqrt() / hom)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// Largest `‖u‖_{W^{d/2,2}(Π)} / ‖u‖_hom` over `trials` seeded band-limited
/// fields, each orthogonalised against constants on `Π`.
pub fn comparison_constant_probe(
    dim: usize,
    resolution: usize,
    domain: &TorusCube,
    band: i64,
    trials: usize,
    seed: u64,
) -> Result<ProbeResult> {
    if dim > 2 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let ratios = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let u = band_limited(dim, resolution, band, seed.wrapping_add(t))?;
            sobolev_ratio(&orthogonalize_on(&u, domain)?, domain)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(ProbeResult { ratios, max_ratio })
}

/// `∫_Π |f| |ũ|² / (J_f(Π) ‖ũ‖²_hom)` with `ũ = u - P_Π u`.
pub fn scaled_holder_check(f: &SampledFunction, u: &SampledFunction, cube: &TorusCube) -> Result<f64> {
    if !f.same_grid(u) {
        return Err(Error::GridMismatch);
    }
    let v = orthogonalize_on(u, cube)?;
    let scale = u.values().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let hom = hom_seminorm(&v, 0.5 * u.dim() as f64, cube)?.value;
    if !(hom > 1e-12 * scale.max(1e-300)) || scale == 0.0 {
        return Err(Error::ZeroSeminorm);
    }
    let lhs: f64 = nodes(cube, f).iter().map(|n| n.weight * f.values()[n.idx].abs() * v.values()[n.idx].powi(2)).sum();
    if lhs == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs / (j_cube(f, cube) * hom * hom))
}
