//! Nonincreasing step functions on `(0, ∞)`.
//!
//! This is where decreasing rearrangements live, and singular value
//! sequences through the usual identification `Σ μ(k) χ_(k, k+1)`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// A nonnegative, nonincreasing, right-continuous step function on `(0, ∞)`.
///
/// Piece `i` takes `values[i]` on `(ends[i-1], ends[i])` with `ends[-1] = 0`.
/// The last end may be `+∞`; the function vanishes beyond the last end.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    ends: Vec<f64>,
    values: Vec<f64>,
}

const MERGE_TOL: f64 = 0.0;

impl StepFunction {
    pub fn new(ends: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if ends.len() != values.len() {
            return Err(Error::InvalidInput("ends and values differ in length".into()));
        }
        let mut prev = 0.0;
        for &e in &ends {
            if !(e > prev) || e.is_nan() {
                return Err(Error::InvalidInput("breakpoints must increase strictly from 0".into()));
            }
            prev = e;
        }
        if ends.iter().rev().skip(1).any(|e| e.is_infinite()) {
            return Err(Error::InvalidInput("only the last breakpoint may be infinite".into()));
        }
        let mut last = f64::INFINITY;
        for &v in &values {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("bad value {v}")));
            }
            if v > last {
                return Err(Error::InvalidInput("values must be nonincreasing".into()));
            }
            last = v;
        }
        Ok(Self::merged(ends, values))
    }

    pub fn zero() -> Self {
        Self { ends: Vec::new(), values: Vec::new() }
    }

    /// `height · χ_(0, width)`.
    pub fn indicator(width: f64, height: f64) -> Self {
        if width <= 0.0 || height == 0.0 {
            return Self::zero();
        }
        Self { ends: vec![width], values: vec![height.abs()] }
    }

    /// Decreasing rearrangement of a finite family of atoms `(value, mass)`.
    /// Values enter through their absolute value; zero-mass atoms are ignored.
    pub fn rearrange<I>(atoms: I) -> Self
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut atoms: Vec<(f64, f64)> =
            atoms.into_iter().filter(|&(_, m)| m > 0.0).map(|(v, m)| (v.abs(), m)).collect();
        atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut ends = Vec::with_capacity(atoms.len());
        let mut values = Vec::with_capacity(atoms.len());
        let mut t = 0.0;
        for (v, m) in atoms {
            t += m;
            ends.push(t);
            values.push(v);
        }
        Self::merged(ends, values)
    }

    /// Identifies a sequence with `Σ s_k χ_(k, k+1)` after sorting it.
    pub fn from_sequence(seq: &[f64]) -> Self {
        Self::rearrange(seq.iter().map(|&v| (v, 1.0)))
    }

    fn merged(ends: Vec<f64>, values: Vec<f64>) -> Self {
        let mut out_e: Vec<f64> = Vec::with_capacity(ends.len());
        let mut out_v: Vec<f64> = Vec::with_capacity(values.len());
        for (e, v) in ends.into_iter().zip(values) {
            match out_v.last() {
                Some(&last) if (last - v).abs() <= MERGE_TOL => {
                    *out_e.last_mut().unwrap() = e;
                }
                _ => {
                    out_e.push(e);
                    out_v.push(v);
                }
            }
        }
        // trailing zeros carry no information
        while out_v.last() == Some(&0.0) {
            out_v.pop();
            out_e.pop();
        }
        Self { ends: out_e, values: out_v }
    }

    pub fn ends(&self) -> &[f64] {
        &self.ends
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Measure of the support.
    pub fn support(&self) -> f64 {
        self.ends.last().copied().unwrap_or(0.0)
    }

    pub fn has_infinite_support(&self) -> bool {
        self.support().is_infinite()
    }

    /// `(t_left, t_right, value)` triples.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.ends.iter().zip(&self.values).scan(0.0, |left, (&e, &v)| {
            let l = *left;
            *left = e;
            Some((l, e, v))
        })
    }

    /// `(value, width)` pairs, the form the modular integrals consume.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pieces().map(|(l, r, v)| (v, r - l))
    }

    pub fn sup(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Right-continuous evaluation at `t > 0`.
    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.ends.partition_point(|&e| e <= t);
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// `∫₀ᵗ g`.
    pub fn integral_to(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (l, r, v) in self.pieces() {
            if t <= l {
                break;
            }
            acc += v * (r.min(t) - l);
        }
        acc
    }

    pub fn integral(&self) -> f64 {
        self.integral_to(f64::INFINITY)
    }

    /// `(σ_u g)(t) = g(t / u)`.
    pub fn dilate(&self, u: f64) -> Self {
        assert!(u > 0.0, "dilation factor must be positive");
        Self { ends: self.ends.iter().map(|e| e * u).collect(), values: self.values.clone() }
    }

    pub fn scale(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        Self { ends: self.ends.clone(), values: self.values.iter().map(|v| v * c.abs()).collect() }
    }

    /// `g · χ_(0, t)`.
    pub fn truncate_at(&self, t: f64) -> Self {
        let mut ends = Vec::new();
        let mut values = Vec::new();
        for (l, r, v) in self.pieces() {
            if l >= t {
                break;
            }
            ends.push(r.min(t));
            values.push(v);
        }
        Self::merged(ends, values)
    }

    /// Cuts an infinite tail at `horizon` and reports the height of what was
    /// dropped (an upper bound for the discarded values).
    pub fn truncate_tail(&self, horizon: f64) -> (Self, f64) {
        let tail = self.value_at(horizon);
        (self.truncate_at(horizon), tail)
    }

    /// Rearrangement of the disjoint sum `⊕ g_k`.
    pub fn disjoint_sum<'a, I>(parts: I) -> Self
    where
        I: IntoIterator<Item = &'a StepFunction>,
    {
        Self::rearrange(parts.into_iter().flat_map(|g| g.atoms().collect::<Vec<_>>()))
    }

    /// CSV with columns `t_left,t_right,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t_left,t_right,value")?;
        for (l, r, v) in self.pieces() {
            writeln!(w, "{l:e},{r:e},{v:e}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut ends = Vec::new();
        let mut values = Vec::new();
        let mut expect_left = 0.0;
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with("t_left")) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 columns", n + 1)));
            }
            let parse = |s: &str| -> Result<f64> {
                match s {
                    "inf" | "Infinity" => Ok(f64::INFINITY),
                    _ => s.parse().map_err(|e| Error::Parse(format!("line {}: {e}", n + 1))),
                }
            };
            let (l, r, v) = (parse(cols[0])?, parse(cols[1])?, parse(cols[2])?);
            if (l - expect_left).abs() > 1e-12 * expect_left.max(1.0) {
                return Err(Error::Parse(format!("line {}: pieces must be contiguous", n + 1)));
            }
            expect_left = r;
            ends.push(r);
            values.push(v);
        }
        Self::new(ends, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rearrangement_sorts_cell_values() {
        let g = StepFunction::rearrange([0.125, 0.375, 0.625, 0.875].map(|v| (v, 0.25)));
        assert_eq!(g.values(), &[0.875, 0.625, 0.375, 0.125]);
        assert_eq!(g.ends(), &[0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn dilation_identity_and_doubling() {
        let g = StepFunction::indicator(1.0, 1.0);
        assert_eq!(g.dilate(1.0), g);
        assert_eq!(g.dilate(2.0), StepFunction::indicator(2.0, 1.0));
    }

    #[test]
    fn equal_neighbours_merge_and_zero_tail_drops() {
        let g = StepFunction::new(vec![1.0, 2.0, 3.0], vec![2.0, 2.0, 0.0]).unwrap();
        assert_eq!(g.ends(), &[2.0]);
        assert_eq!(g.integral(), 4.0);
    }

    #[test]
    fn rejects_increasing_values() {
        assert!(StepFunction::new(vec![1.0, 2.0], vec![1.0, 2.0]).is_err());
        assert!(StepFunction::new(vec![1.0, 1.0], vec![2.0, 1.0]).is_err());
    }

    #[test]
    fn prefix_integrals_and_evaluation() {
        let g = StepFunction::new(vec![1.0, 3.0], vec![3.0, 1.0]).unwrap();
        assert_eq!(g.integral_to(0.5), 1.5);
        assert_eq!(g.integral_to(2.0), 4.0);
        assert_eq!(g.value_at(1.0), 1.0);
        assert_eq!(g.value_at(0.999), 3.0);
        assert_eq!(g.value_at(5.0), 0.0);
    }

    #[test]
    fn tail_truncation_reports_dropped_height() {
        let g = StepFunction::new(vec![1.0, f64::INFINITY], vec![2.0, 1.0]).unwrap();
        let (h, tail) = g.truncate_tail(1e6);
        assert_eq!(tail, 1.0);
        assert_eq!(h.support(), 1e6);
    }

    #[test]
    fn csv_round_trip() {
        let g = StepFunction::new(vec![0.5, 1.5], vec![3.0, 0.25]).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = StepFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(g, back);
    }
}
