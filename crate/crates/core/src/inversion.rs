//! Inversion in the unit sphere on box grids, the weighted `ℝ^d` norm, and
//! the ball-union family whose Cwikel quasi-norms grow while every
//! rearrangement-invariant norm stays fixed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::check::Check;
use crate::cube::Region;
use crate::error::{Error, Result};
use crate::grid::{Domain, SampledFunction};
use crate::orlicz::{field_llogl_norm, llogl_norm, marcinkiewicz_psi_norm, restricted_rearrangement};
use crate::spectral::{assemble_cwikel, half_operator_quasinorm, hermitian_eigenvalues};
use crate::step::StepFunction;

fn radius(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Volume of the unit ball in dimension `d ≤ 3`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    use std::f64::consts::PI;
    match dim {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => f64::NAN,
    }
}

fn require_box(f: &SampledFunction) -> Result<f64> {
    match f.domain() {
        Domain::Box { half_width } => Ok(half_width),
        Domain::Torus => Err(Error::InvalidInput("inversion needs a box grid".into())),
    }
}

/// Cells whose centre lies strictly inside the unit ball.
pub fn unit_ball_region(f: &SampledFunction) -> Region {
    let mut x = vec![0.0; f.dim()];
    Region::from_cells((0..f.len()).filter(|&i| {
        f.point_into(i, &mut x);
        radius(&x) < 1.0
    }))
}

/// `f` with every cell centred inside the unit ball zeroed.
pub fn exterior_part(f: &SampledFunction) -> SampledFunction {
    let mut x = vec![0.0; f.dim()];
    let vals = (0..f.len())
        .map(|i| {
            f.point_into(i, &mut x);
            if radius(&x) < 1.0 {
                0.0
            } else {
                f.values()[i]
            }
        })
        .collect();
    f.with_values(vals).expect("same grid")
}

/// `f` with every cell centred outside the unit ball zeroed.
pub fn interior_part(f: &SampledFunction) -> SampledFunction {
    let mut x = vec![0.0; f.dim()];
    let vals = (0..f.len())
        .map(|i| {
            f.point_into(i, &mut x);
            if radius(&x) < 1.0 {
                f.values()[i]
            } else {
                0.0
            }
        })
        .collect();
    f.with_values(vals).expect("same grid")
}

/// Result of an inversion on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Inverted {
    pub field: SampledFunction,
    /// Cells within one spacing of the origin, set to zero.
    pub masked_cells: usize,
    /// Mass of the input beyond `|s| > 1/h`, which lands in the masked cells.
    pub origin_defect: f64,
    /// Mass of the input inside `|s| < 1/L`, which lands outside the box.
    pub far_defect: f64,
}

/// `|t|^{-weight} f(t / |t|²)` at one point. Points closer to the origin than
/// one cell are refused.
pub fn invert_point(f: &SampledFunction, t: &[f64], weight: f64) -> Result<f64> {
    require_box(f)?;
    let r = radius(t);
    if r < f.spacing() {
        return Err(Error::OriginSingularity { radius: r });
    }
    let s: Vec<f64> = t.iter().map(|v| v / (r * r)).collect();
    Ok(r.powf(-weight) * f.interpolate(&s))
}

/// Shared kernel: `weight` is the power of `1/|t|`, `p` the exponent in which
/// the defect masses are measured.
fn invert(f: &SampledFunction, weight: f64, p: i32) -> Result<Inverted> {
    let half_width = require_box(f)?;
    let h = f.spacing();
    let dim = f.dim();
    let vals: Vec<(f64, bool)> = (0..f.len())
        .into_par_iter()
        .map_init(
            || (vec![0.0; dim], vec![0.0; dim]),
            |(t, s), i| {
                f.point_into(i, t);
                let r = radius(t);
                if r < h {
                    return (0.0, true);
                }
                for (sa, ta) in s.iter_mut().zip(t.iter()) {
                    *sa = ta / (r * r);
                }
                (r.powf(-weight) * f.interpolate(s), false)
            },
        )
        .collect();
    let masked_cells = vals.iter().filter(|v| v.1).count();
    let mut origin_defect = 0.0;
    let mut far_defect = 0.0;
    let mut x = vec![0.0; dim];
    for (i, &v) in f.values().iter().enumerate() {
        f.point_into(i, &mut x);
        let r = radius(&x);
        let m = v.abs().powi(p) * f.cell_volume();
        if r * h > 1.0 {
            origin_defect += m;
        } else if r * half_width < 1.0 {
            far_defect += m;
        }
    }
    let field = f.with_values(vals.into_iter().map(|v| v.0).collect())?;
    Ok(Inverted { field, masked_cells, origin_defect, far_defect })
}

/// `(Vf)(t) = |t|^{-2d} f(t/|t|²)`, an isometry of `L₁`.
pub fn inversion_v(f: &SampledFunction) -> Result<Inverted> {
    invert(f, 2.0 * f.dim() as f64, 1)
}

/// `(Uξ)(t) = |t|^{-d} ξ(t/|t|²)`, unitary on `L₂`; defects are in `|ξ|²`.
pub fn inversion_u(xi: &SampledFunction) -> Result<Inverted> {
    invert(xi, xi.dim() as f64, 2)
}

/// `∫ |f(s)| log(1 + |s|) ds`.
pub fn log_weighted_mass(g: &SampledFunction) -> f64 {
    let mut x = vec![0.0; g.dim()];
    let mut acc = 0.0;
    for (i, &v) in g.values().iter().enumerate() {
        if v != 0.0 {
            g.point_into(i, &mut x);
            acc += v.abs() * radius(&x).ln_1p();
        }
    }
    acc * g.cell_volume()
}

/// `‖f‖_{L log L(ℝ^d)} + ∫ |f(s)| log(1 + |s|) ds`.
pub fn rd_rhs_norm(g: &SampledFunction) -> f64 {
    if g.is_zero() {
        return 0.0;
    }
    field_llogl_norm(g) + log_weighted_mass(g)
}

fn ball_norm(g: &SampledFunction, ball: &Region) -> f64 {
    let mu = restricted_rearrangement(g, ball);
    if mu.is_zero() {
        return 0.0;
    }
    llogl_norm(&mu).expect("finite atoms")
}

/// `‖f χ_B‖ + ‖(Vf) χ_B‖` in `L log L`.
pub fn split_norm(g: &SampledFunction) -> Result<f64> {
    let ball = unit_ball_region(g);
    let inner = ball_norm(g, &ball);
    let v = inversion_v(g)?;
    Ok(inner + ball_norm(&v.field, &ball))
}

/// The three comparisons between an exterior function and its inversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionChecks {
    pub upper: Check,
    pub lower: Check,
    /// `∫ |f| log(1 + |s|) / ‖Vf‖_{L log L(B)}`; zero when both vanish.
    pub weight_constant: f64,
    pub weighted_mass: f64,
    pub inverted_norm: f64,
}

impl InversionChecks {
    pub fn holds(&self) -> bool {
        self.upper.holds && self.lower.holds
    }
}

/// Slack granted to the two explicit-constant comparisons.
pub const INVERSION_SLACK: f64 = 0.05;

/// Restricts `f` to the exterior of the unit ball and evaluates
/// `‖Vf‖_B ≤ (2d+2)(‖f‖ + ∫|f| log(1+|s|))`, `‖f‖ ≤ ‖Vf‖_B`, and the ratio
/// `∫|f| log(1+|s|) / ‖Vf‖_B`.
pub fn exterior_inversion_checks(g: &SampledFunction) -> Result<InversionChecks> {
    let ext = exterior_part(g);
    let c = 2.0 * g.dim() as f64 + 2.0;
    let norm = if ext.is_zero() { 0.0 } else { field_llogl_norm(&ext) };
    let weighted = log_weighted_mass(&ext);
    let v = inversion_v(&ext)?;
    let inverted = ball_norm(&v.field, &unit_ball_region(g));
    let upper = Check::le(
        "inversion upper: ‖Vf‖_B ≤ (2d+2)(‖f‖ + ∫|f|log(1+|s|))",
        inverted,
        c * (norm + weighted),
        INVERSION_SLACK,
    );
    let lower = Check::le("inversion lower: ‖f‖_ext ≤ ‖Vf‖_B", norm, inverted, INVERSION_SLACK);
    let weight_constant = if inverted > 0.0 { weighted / inverted } else { 0.0 };
    Ok(InversionChecks { upper, lower, weight_constant, weighted_mass: weighted, inverted_norm: inverted })
}

/// Union of `n^d` balls of radius `1/n` centred at `k + offset`,
/// `k ∈ {0,…,n-1}^d`, sampled at cell centres.
fn ball_union(n: usize, dim: usize, half_width: f64, resolution: usize, offset: f64) -> Result<SampledFunction> {
    if n < 2 {
        return Err(Error::InvalidInput("need n ≥ 2".into()));
    }
    let required = (n + 1) as f64;
    if half_width < required {
        return Err(Error::BoxTooSmall { half_width, required });
    }
    let rad = 1.0 / n as f64;
    SampledFunction::boxed(dim, half_width, resolution, |x| {
        let mut d2 = 0.0;
        for &xa in x {
            let k = (xa - offset).round().clamp(0.0, (n - 1) as f64);
            d2 += (xa - offset - k).powi(2);
        }
        (d2 < rad * rad) as u8 as f64
    })
}

/// `f_n = Σ_{k ∈ {0,…,n-1}^d} χ_{k + B/n}` on the box `[-L, L)^d`.
pub fn counterexample_family(n: usize, dim: usize, half_width: f64, resolution: usize) -> Result<SampledFunction> {
    ball_union(n, dim, half_width, resolution, 0.0)
}

/// The same family translated so its centre of mass sits at the origin. The
/// spectrum is unchanged and the Fourier data becomes real.
pub fn centered_counterexample(n: usize, dim: usize, half_width: f64, resolution: usize) -> Result<SampledFunction> {
    ball_union(n, dim, half_width, resolution, -((n - 1) as f64) / 2.0)
}

/// Measured `‖M_{f_n^{1/2}}(1 - Δ)^{-d/4}‖_{2,∞}` against `n`, with an ordinary
/// least-squares fit `q ≈ a + b √log n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRecord {
    pub dim: usize,
    pub cutoff: usize,
    pub half_width: f64,
    pub resolution: usize,
    pub ns: Vec<usize>,
    pub q: Vec<f64>,
    /// `‖f_n‖_{L log L}` on the grid.
    pub llogl: Vec<f64>,
    pub intercept: f64,
    pub slope: f64,
    pub fit: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl GrowthRecord {
    pub fn strictly_increasing(&self) -> bool {
        self.q.windows(2).all(|w| w[1] > w[0])
    }

    pub fn spread(&self) -> f64 {
        let max = self.q.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.q.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }

    /// Largest `|residual|` as a fraction of `max q - min q`.
    pub fn relative_residual(&self) -> f64 {
        let max = self.q.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.q.iter().cloned().fold(f64::MAX, f64::min);
        let worst = self.residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
        if max > min {
            worst / (max - min)
        } else {
            f64::INFINITY
        }
    }

    /// `(max - min) / min` of the `L log L` norms.
    pub fn norm_variation(&self) -> f64 {
        let max = self.llogl.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.llogl.iter().cloned().fold(f64::MAX, f64::min);
        (max - min) / min
    }

    /// CSV with columns `n,q_n,fit,residual`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,q_n,fit,residual")?;
        for i in 0..self.ns.len() {
            writeln!(w, "{},{:.12e},{:.12e},{:.12e}", self.ns[i], self.q[i], self.fit[i], self.residuals[i])?;
        }
        Ok(())
    }
}

/// Ordinary least squares `y ≈ a + b x`; returns `(a, b)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

/// Runs the ball-union family on a box of half-width `max n + 1`. Each `n` is
/// independent and they run in parallel.
pub fn counterexample_growth(ns: &[usize], dim: usize, cutoff: usize, resolution: usize) -> Result<GrowthRecord> {
    if ns.is_empty() || ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("ns must be nonempty and strictly increasing".into()));
    }
    let half_width = (*ns.last().unwrap() + 1) as f64;
    let runs: Vec<(f64, f64)> = ns
        .par_iter()
        .map(|&n| {
            let fnc = centered_counterexample(n, dim, half_width, resolution)?;
            Ok((half_operator_quasinorm(&fnc, cutoff)?, field_llogl_norm(&fnc)))
        })
        .collect::<Result<_>>()?;
    let q: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let llogl = runs.iter().map(|r| r.1).collect();
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln().sqrt()).collect();
    let (intercept, slope) = ols(&x, &q);
    let fit: Vec<f64> = x.iter().map(|xi| intercept + slope * xi).collect();
    let residuals = q.iter().zip(&fit).map(|(a, b)| a - b).collect();
    Ok(GrowthRecord {
        dim,
        cutoff,
        half_width,
        resolution,
        ns: ns.to_vec(),
        q,
        llogl,
        intercept,
        slope,
        fit,
        residuals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallBallRow {
    pub radius: f64,
    pub operator_norm: f64,
    /// `‖χ_{(0, Vol(rB))}‖_{M_ψ}`.
    pub marcinkiewicz: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallBallReport {
    pub dim: usize,
    pub cutoff: usize,
    pub rows: Vec<SmallBallRow>,
    pub min_ratio: f64,
}

/// Operator norm of the lattice Cwikel matrix of `χ_{rB}` against the
/// Marcinkiewicz norm of its rearrangement, for each radius.
pub fn small_ball_lower_bound(
    radii: &[f64],
    dim: usize,
    cutoff: usize,
    half_width: f64,
    resolution: usize,
) -> Result<SmallBallReport> {
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(Error::InvalidInput(format!("radius {r} not in (0, 1)")));
    }
    let rows = radii
        .par_iter()
        .map(|&r| {
            let ball = SampledFunction::boxed(dim, half_width, resolution, |x| (radius(x) < r) as u8 as f64)?;
            let t = assemble_cwikel(&ball, cutoff)?;
            let top = hermitian_eigenvalues(&t.entries).first().copied().unwrap_or(0.0).max(0.0);
            let u = unit_ball_volume(dim) * r.powi(dim as i32);
            let marcinkiewicz = marcinkiewicz_psi_norm(&StepFunction::indicator(u, 1.0));
            Ok(SmallBallRow { radius: r, operator_norm: top, marcinkiewicz, ratio: top / marcinkiewicz })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    Ok(SmallBallReport { dim, cutoff, rows, min_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orlicz::decreasing_rearrangement;

    fn shell(dim: usize, l: f64, r: usize, a: f64, b: f64) -> SampledFunction {
        SampledFunction::boxed(dim, l, r, |x| {
            let s = radius(x);
            (s > a && s < b) as u8 as f64
        })
        .unwrap()
    }

    #[test]
    fn v_maps_shell_to_inverse_square_profile() {
        let g = shell(1, 4.0, 8192, 1.0, 2.0);
        let v = inversion_v(&g).unwrap();
        assert!((v.field.l1_norm() - 2.0).abs() < 0.02);
        for &t in &[0.6, 0.75, -0.9] {
            let i = ((t + 4.0) / v.field.spacing()) as usize;
            let x = v.field.point(i)[0];
            assert!((v.field.values()[i] - x.powi(-2)).abs() < 1e-9, "{x}");
        }
        // nothing lands outside the closed unit ball
        let mut x = vec![0.0];
        for (i, &val) in v.field.values().iter().enumerate() {
            v.field.point_into(i, &mut x);
            if x[0].abs() > 1.0 + v.field.spacing() {
                assert_eq!(val, 0.0);
            }
        }
    }

    #[test]
    fn u_sends_power_tail_to_ball_indicator() {
        let l = 4.0;
        let xi = SampledFunction::boxed(2, l, 256, |x| {
            let s = radius(x);
            if s > 1.0 {
                s.powi(-2)
            } else {
                0.0
            }
        })
        .unwrap();
        let u = inversion_u(&xi).unwrap();
        let h = u.field.spacing();
        let mut x = vec![0.0; 2];
        for (i, &val) in u.field.values().iter().enumerate() {
            u.field.point_into(i, &mut x);
            let t = radius(&x);
            // interior points whose image and stencil stay inside the box
            if t < 1.0 - 2.0 * h && t > 1.5 / l && x.iter().all(|c| c.abs() * l > t * t * 1.5) {
                assert!((val - 1.0).abs() < 0.05, "{x:?} {val}");
            }
            if t > 1.0 + 2.0 * h {
                assert_eq!(val, 0.0);
            }
        }
    }

    #[test]
    fn point_evaluation_refuses_the_origin() {
        let g = shell(1, 4.0, 64, 1.0, 2.0);
        assert!(matches!(invert_point(&g, &[0.01], 2.0), Err(Error::OriginSingularity { .. })));
        assert!((invert_point(&g, &[0.7], 2.0).unwrap() - 0.7f64.powi(-2)).abs() < 1e-12);
    }

    #[test]
    fn rhs_of_unit_interval() {
        let g = SampledFunction::boxed(1, 4.0, 8000, |x| (x[0].abs() < 1.0) as u8 as f64).unwrap();
        let weighted = 2.0 * (2.0 * 2f64.ln() - 1.0);
        assert!((log_weighted_mass(&g) - weighted).abs() < 1e-6);
        let norm = llogl_norm(&StepFunction::indicator(2.0, 1.0)).unwrap();
        assert!((rd_rhs_norm(&g) - norm - weighted).abs() < 1e-6);
        assert_eq!(rd_rhs_norm(&g.map(|_| 0.0)), 0.0);
    }

    #[test]
    fn split_norm_of_interior_function_is_its_norm() {
        let g = SampledFunction::boxed(2, 3.0, 96, |x| (0.8 - radius(x)).max(0.0)).unwrap();
        let s = split_norm(&g).unwrap();
        assert!((s - field_llogl_norm(&g)).abs() < 1e-12);
    }

    #[test]
    fn exterior_shell_satisfies_both_comparisons() {
        let g = shell(1, 4.0, 8192, 1.0, 2.0);
        let c = exterior_inversion_checks(&g).unwrap();
        assert!(c.holds(), "{c:?}");
        let c2 = exterior_inversion_checks(&g.map(|v| 2.0 * v)).unwrap();
        assert!((c2.weight_constant - c.weight_constant).abs() < 1e-9);
        assert!((c2.upper.lhs / c.upper.lhs - 2.0).abs() < 1e-9);
        let z = exterior_inversion_checks(&g.map(|_| 0.0)).unwrap();
        assert!(z.holds() && z.upper.lhs == 0.0 && z.lower.rhs == 0.0);
    }

    #[test]
    fn two_touching_intervals() {
        let g = counterexample_family(2, 1, 3.0, 1200).unwrap();
        assert!((g.l1_norm() - 2.0).abs() < 1e-9);
        let mu = decreasing_rearrangement(&g);
        assert!((mu.support() - 2.0).abs() < 1e-9);
        assert!(matches!(counterexample_family(4, 1, 4.5, 64), Err(Error::BoxTooSmall { .. })));
    }

    #[test]
    fn ols_recovers_a_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 1.5 - 0.25 * v).collect();
        let (a, b) = ols(&x, &y);
        assert!((a - 1.5).abs() < 1e-12 && (b + 0.25).abs() < 1e-12);
    }
}
