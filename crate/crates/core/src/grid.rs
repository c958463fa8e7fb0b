//! Uniform grids on the torus `[-π, π)^d` and on boxes `[-L, L)^d`.
//!
//! Values live at cell centres and the data model is piecewise constant:
//! cell `j` along an axis covers `[lo + j h, lo + (j + 1) h)` and carries the
//! sample taken at `lo + (j + 1/2) h`. Flat indices are row-major with axis 0
//! slowest.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Torus,
    Box { half_width: f64 },
}

impl Domain {
    /// Half of the period along each axis: π on the torus, `L` on a box.
    pub fn half_width(&self) -> f64 {
        match *self {
            Domain::Torus => PI,
            Domain::Box { half_width } => half_width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    /// Total mass one (normalised Haar measure on the torus).
    Normalized,
    Lebesgue,
}

/// A scalar field sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    dim: usize,
    domain: Domain,
    resolution: usize,
    measure: Measure,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(dim: usize, domain: Domain, resolution: usize, measure: Measure, values: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if resolution == 0 {
            return Err(Error::InvalidInput("resolution must be positive".into()));
        }
        if let Domain::Box { half_width } = domain {
            if !(half_width > 0.0 && half_width.is_finite()) {
                return Err(Error::InvalidInput(format!("bad box half-width {half_width}")));
            }
        }
        let expected = resolution.pow(dim as u32);
        if values.len() != expected {
            return Err(Error::InvalidInput(format!("expected {expected} values, got {}", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample {v}")));
        }
        Ok(Self { dim, domain, resolution, measure, values })
    }

    /// Samples `f` at cell centres. Torus grids get the normalised measure,
    /// boxes get Lebesgue measure.
    pub fn from_fn<F>(dim: usize, domain: Domain, resolution: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let measure = match domain {
            Domain::Torus => Measure::Normalized,
            Domain::Box { .. } => Measure::Lebesgue,
        };
        Self::from_fn_with_measure(dim, domain, resolution, measure, f)
    }

    pub fn from_fn_with_measure<F>(
        dim: usize,
        domain: Domain,
        resolution: usize,
        measure: Measure,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let len = resolution.pow(dim as u32);
        let probe = Self { dim, domain, resolution, measure, values: Vec::new() };
        let mut x = vec![0.0; dim];
        let values = (0..len)
            .map(|idx| {
                probe.point_into(idx, &mut x);
                f(&x)
            })
            .collect();
        Self::new(dim, domain, resolution, measure, values)
    }

    pub fn torus<F: Fn(&[f64]) -> f64>(dim: usize, resolution: usize, f: F) -> Result<Self> {
        Self::from_fn(dim, Domain::Torus, resolution, f)
    }

    pub fn boxed<F: Fn(&[f64]) -> f64>(dim: usize, half_width: f64, resolution: usize, f: F) -> Result<Self> {
        Self::from_fn(dim, Domain::Box { half_width }, resolution, f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn domain(&self) -> Domain {
        self.domain
    }
    pub fn resolution(&self) -> usize {
        self.resolution
    }
    pub fn measure(&self) -> Measure {
        self.measure
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Grid spacing along each axis.
    pub fn spacing(&self) -> f64 {
        2.0 * self.domain.half_width() / self.resolution as f64
    }

    /// Lebesgue volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Mass of one cell under the declared measure.
    pub fn cell_measure(&self) -> f64 {
        match self.measure {
            Measure::Normalized => 1.0 / self.len() as f64,
            Measure::Lebesgue => self.cell_volume(),
        }
    }

    pub fn total_measure(&self) -> f64 {
        self.cell_measure() * self.len() as f64
    }

    /// Coordinate of cell `j` along any axis.
    pub fn coordinate(&self, j: usize) -> f64 {
        -self.domain.half_width() + (j as f64 + 0.5) * self.spacing()
    }

    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rest = idx;
        for axis in (0..self.dim).rev() {
            out[axis] = rest % self.resolution;
            rest /= self.resolution;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi[..self.dim].iter().fold(0, |acc, &i| acc * self.resolution + i)
    }

    pub fn point_into(&self, idx: usize, out: &mut [f64]) {
        let m = self.multi_index(idx);
        for axis in 0..self.dim {
            out[axis] = self.coordinate(m[axis]);
        }
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        self.point_into(idx, &mut x);
        x
    }

    pub fn same_grid(&self, other: &SampledFunction) -> bool {
        self.dim == other.dim && self.domain == other.domain && self.resolution == other.resolution
    }

    /// A new field on the same grid.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.dim, self.domain, self.resolution, self.measure, values)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(), ..self.clone() })
    }

    pub fn with_measure(&self, measure: Measure) -> Self {
        Self { measure, ..self.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `∫ |f|` under the declared measure.
    pub fn l1_norm(&self) -> f64 {
        self.cell_measure() * self.values.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Lebesgue `L₂` norm.
    pub fn l2_norm(&self) -> f64 {
        (self.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Multilinear interpolation between cell centres. Points outside the
    /// domain (boxes only) evaluate to zero; inside, the edge half-cells
    /// carry the edge sample.
    pub fn interpolate(&self, p: &[f64]) -> f64 {
        let h = self.spacing();
        let lw = self.domain.half_width();
        let r = self.resolution;
        let periodic = matches!(self.domain, Domain::Torus);
        let mut lower = [0usize; 3];
        let mut upper = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for axis in 0..self.dim {
            let mut x = p[axis];
            if periodic {
                x = (x + lw).rem_euclid(2.0 * lw) - lw;
            } else if x < -lw || x >= lw {
                return 0.0;
            }
            let s = (x + lw) / h - 0.5;
            let fl = s.floor();
            let t = s - fl;
            let i = fl as i64;
            let (lo, hi) = if periodic {
                (i.rem_euclid(r as i64) as usize, (i + 1).rem_euclid(r as i64) as usize)
            } else {
                let clamp = |k: i64| k.clamp(0, r as i64 - 1) as usize;
                (clamp(i), clamp(i + 1))
            };
            lower[axis] = lo;
            upper[axis] = hi;
            frac[axis] = t;
        }
        let mut acc = 0.0;
        let mut idx = [0usize; 3];
        for corner in 0..(1usize << self.dim) {
            let mut w = 1.0;
            for axis in 0..self.dim {
                if corner >> axis & 1 == 1 {
                    idx[axis] = upper[axis];
                    w *= frac[axis];
                } else {
                    idx[axis] = lower[axis];
                    w *= 1.0 - frac[axis];
                }
            }
            if w != 0.0 {
                acc += w * self.values[self.flat_index(&idx)];
            }
        }
        acc
    }
}
