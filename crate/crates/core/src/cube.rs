//! Axis-parallel cubes on the torus and weighted cell regions.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Domain, SampledFunction};

const GEOM_EPS: f64 = 1e-12;

/// Wraps a normalised offset into `[-1/2, 1/2)`.
fn wrap_unit(x: f64) -> f64 {
    (x + 0.5).rem_euclid(1.0) - 0.5
}

/// A cube in `𝕋^d`: a product of arcs of equal length.
///
/// `center` is in torus coordinates `[-π, π)^d`; `side` is the arc length as
/// a fraction of the circumference, so the cube has normalised measure
/// `side^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusCube {
    pub center: Vec<f64>,
    pub side: f64,
}

impl TorusCube {
    pub fn new(center: Vec<f64>, side: f64) -> Result<Self> {
        if center.is_empty() || center.len() > 3 {
            return Err(Error::UnsupportedDimension(center.len()));
        }
        if !(side > 0.0 && side <= 1.0) {
            return Err(Error::InvalidInput(format!("cube side {side} outside (0, 1]")));
        }
        let center = center.into_iter().map(|x| (x + PI).rem_euclid(2.0 * PI) - PI).collect();
        Ok(Self { center, side })
    }

    pub fn whole(dim: usize) -> Self {
        Self { center: vec![0.0; dim], side: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn measure(&self) -> f64 {
        self.side.powi(self.dim() as i32)
    }

    pub fn is_whole(&self) -> bool {
        self.side >= 1.0
    }

    /// Side length in radians.
    pub fn side_radians(&self) -> f64 {
        2.0 * PI * self.side
    }

    /// Normalised signed offset of `x` from the centre along `axis`.
    pub fn offset(&self, axis: usize, x: f64) -> f64 {
        wrap_unit((x - self.center[axis]) / (2.0 * PI))
    }

    /// Closed containment.
    pub fn contains(&self, p: &[f64]) -> bool {
        if self.is_whole() {
            return true;
        }
        let half = 0.5 * self.side + GEOM_EPS;
        (0..self.dim()).all(|a| self.offset(a, p[a]).abs() <= half)
    }

    /// True when the interiors intersect (positive-measure overlap).
    pub fn overlaps(&self, other: &TorusCube) -> bool {
        if self.is_whole() || other.is_whole() {
            return true;
        }
        let reach = 0.5 * (self.side + other.side) - GEOM_EPS;
        (0..self.dim()).all(|a| {
            let d = wrap_unit((other.center[a] - self.center[a]) / (2.0 * PI));
            d.abs() < reach
        })
    }

    /// Position of a point relative to the centre, unwrapped, in radians.
    pub fn local_coords(&self, p: &[f64], out: &mut [f64]) {
        for a in 0..self.dim() {
            out[a] = 2.0 * PI * self.offset(a, p[a]);
        }
    }

    /// Fraction of each grid cell (along one axis) lying in the arc.
    fn axis_weights(&self, axis: usize, resolution: usize) -> Vec<(usize, f64)> {
        if self.is_whole() {
            return (0..resolution).map(|j| (j, 1.0)).collect();
        }
        let r = resolution as f64;
        let c = (self.center[axis] + PI) / (2.0 * PI);
        let lo = c - 0.5 * self.side;
        let hi = c + 0.5 * self.side;
        let first = (lo * r).floor() as i64;
        let last = (hi * r).ceil() as i64;
        let mut acc = vec![0.0; resolution];
        for j in first..last {
            let a = (j as f64 / r).max(lo);
            let b = ((j + 1) as f64 / r).min(hi);
            if b > a {
                acc[j.rem_euclid(resolution as i64) as usize] += (b - a) * r;
            }
        }
        acc.into_iter().enumerate().filter(|&(_, w)| w > GEOM_EPS).map(|(j, w)| (j, w.min(1.0))).collect()
    }

    /// The cube as a weighted set of cells of `grid`.
    pub fn region(&self, grid: &SampledFunction) -> Region {
        debug_assert!(matches!(grid.domain(), Domain::Torus));
        let dim = grid.dim();
        let res = grid.resolution();
        let axes: Vec<Vec<(usize, f64)>> = (0..dim).map(|a| self.axis_weights(a, res)).collect();
        let mut cells = Vec::with_capacity(axes.iter().map(Vec::len).product());
        let mut multi = [0usize; 3];
        fn rec(
            axes: &[Vec<(usize, f64)>],
            axis: usize,
            w: f64,
            multi: &mut [usize; 3],
            grid: &SampledFunction,
            out: &mut Vec<(usize, f64)>,
        ) {
            if axis == axes.len() {
                out.push((grid.flat_index(&multi[..axes.len()]), w));
                return;
            }
            for &(j, wj) in &axes[axis] {
                multi[axis] = j;
                rec(axes, axis + 1, w * wj, multi, grid, out);
            }
        }
        rec(&axes, 0, 1.0, &mut multi, grid, &mut cells);
        cells.sort_unstable_by_key(|c| c.0);
        Region { cells }
    }
}

/// A measurable set on a grid: each cell carries the fraction of it that
/// belongs to the set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Region {
    cells: Vec<(usize, f64)>,
}

impl Region {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn whole(grid: &SampledFunction) -> Self {
        Self { cells: (0..grid.len()).map(|i| (i, 1.0)).collect() }
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self { cells: mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| (i, 1.0)).collect() }
    }

    pub fn from_cells<I: IntoIterator<Item = usize>>(cells: I) -> Self {
        let mut cells: Vec<(usize, f64)> = cells.into_iter().map(|i| (i, 1.0)).collect();
        cells.sort_unstable_by_key(|c| c.0);
        cells.dedup_by_key(|c| c.0);
        Self { cells }
    }

    /// Builds a region from explicit fractions; entries outside `(0, 1]` are
    /// rejected.
    pub fn from_weights(cells: Vec<(usize, f64)>) -> Result<Self> {
        if cells.iter().any(|&(_, w)| !(w > 0.0 && w <= 1.0)) {
            return Err(Error::InvalidInput("cell fractions must lie in (0, 1]".into()));
        }
        Ok(Self { cells })
    }

    pub fn cells(&self) -> &[(usize, f64)] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Measure under the grid's declared measure.
    pub fn measure(&self, grid: &SampledFunction) -> f64 {
        grid.cell_measure() * self.cells.iter().map(|c| c.1).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(dim: usize, r: usize) -> SampledFunction {
        SampledFunction::torus(dim, r, |_| 1.0).unwrap()
    }

    #[test]
    fn region_measure_is_side_power() {
        let g = grid(2, 16);
        for side in [0.05, 0.3, 0.77, 1.0] {
            let c = TorusCube::new(vec![0.4, -2.9], side).unwrap();
            let m = c.region(&g).measure(&g);
            assert!((m - side * side).abs() < 1e-12, "{side}: {m}");
        }
    }

    #[test]
    fn wrapping_arc_covers_both_ends() {
        let g = grid(1, 8);
        let c = TorusCube::new(vec![-PI], 0.25).unwrap();
        let cells: Vec<usize> = c.region(&g).cells().iter().map(|c| c.0).collect();
        assert_eq!(cells, vec![0, 7]);
    }

    #[test]
    fn touching_arcs_do_not_overlap() {
        let a = TorusCube::new(vec![0.0], 0.25).unwrap();
        let b = TorusCube::new(vec![PI / 2.0], 0.25).unwrap();
        let c = TorusCube::new(vec![PI / 4.0], 0.25).unwrap();
        assert!(!a.overlaps(&b));
        assert!(a.overlaps(&c));
        assert!(a.contains(&[PI / 4.0]));
    }

    #[test]
    fn rejects_bad_side() {
        assert!(TorusCube::new(vec![0.0], 0.0).is_err());
        assert!(TorusCube::new(vec![0.0], 1.5).is_err());
    }
}
