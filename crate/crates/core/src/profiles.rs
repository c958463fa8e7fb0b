//! Named test fields and seeded random generators.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, SampledFunction};

/// Closed-form fields used across experiments. Coordinates are those of the
/// grid (radians on the torus).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `a + b Π cos(x_i)`.
    Cosine {
        offset: f64,
        amplitude: f64,
    },
    /// `|x|^{-exponent}`, sampled at cell centres.
    Power {
        exponent: f64,
    },
    /// `log(e + 1/|x|)`.
    LogSingular,
    /// Sum of Gaussians `exp(-|x - c|² / w²)` plus a floor.
    Bumps {
        centers: Vec<Vec<f64>>,
        width: f64,
        floor: f64,
    },
    /// Indicator of the ball of radius `radius` around the origin.
    Ball {
        radius: f64,
    },
    /// Indicator of `{ r_in < |x| < r_out }`.
    Shell {
        r_in: f64,
        r_out: f64,
    },
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl Profile {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Cosine { offset, amplitude } => offset + amplitude * x.iter().map(|v| v.cos()).product::<f64>(),
            Profile::Power { exponent } => norm(x).powf(-exponent),
            Profile::LogSingular => (std::f64::consts::E + 1.0 / norm(x)).ln(),
            Profile::Bumps { centers, width, floor } => {
                floor
                    + centers
                        .iter()
                        .map(|c| {
                            let d2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                            (-d2 / (width * width)).exp()
                        })
                        .sum::<f64>()
            }
            Profile::Ball { radius } => (norm(x) < *radius) as u8 as f64,
            Profile::Shell { r_in, r_out } => {
                let r = norm(x);
                (r > *r_in && r < *r_out) as u8 as f64
            }
        }
    }

    pub fn sample(&self, dim: usize, domain: Domain, resolution: usize) -> Result<SampledFunction> {
        let f = SampledFunction::from_fn(dim, domain, resolution, |x| self.eval(x))?;
        if f.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("profile is not finite at a cell centre".into()));
        }
        Ok(f)
    }
}

/// Band-limited mean-zero field on the torus: `Σ a_k cos(k·x) + b_k sin(k·x)`
/// over `0 < |k|_∞ ≤ band`, with standard Gaussian coefficients from a seeded
/// stream.
pub fn band_limited(dim: usize, resolution: usize, band: i64, seed: u64) -> Result<SampledFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = (2 * band + 1) as usize;
    let modes: Vec<(Vec<i64>, f64, f64)> = (0..width.pow(dim as u32))
        .filter_map(|i| {
            let mut rest = i;
            let k: Vec<i64> = (0..dim)
                .map(|_| {
                    let v = (rest % width) as i64 - band;
                    rest /= width;
                    v
                })
                .collect();
            if k.iter().all(|&v| v == 0) {
                return None;
            }
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            Some((k, a, b))
        })
        .collect();
    SampledFunction::torus(dim, resolution, |x| {
        modes
            .iter()
            .map(|(k, a, b)| {
                let ph: f64 = k.iter().zip(x).map(|(&ki, &xi)| ki as f64 * xi).sum();
                a * ph.cos() + b * ph.sin()
            })
            .sum()
    })
}

/// Positive field `exp(scale · g)` for a band-limited `g` normalised to unit
/// maximum.
pub fn random_density(dim: usize, resolution: usize, band: i64, scale: f64, seed: u64) -> Result<SampledFunction> {
    let g = band_limited(dim, resolution, band, seed)?;
    let top = g.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    Ok(g.map(|v| (scale * v / top).exp()))
}
