//! Discrete Fourier helpers on uniform grids.
//!
//! Mode `k` on a grid of half-width `L` is the exponential `e^{i k π x / L}`.
//! Coefficients are normalised as averages, `f̂(k) = (2L)^{-d} ∫ f e^{-i k π x / L}`,
//! evaluated with the midpoint rule on cell centres.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::grid::SampledFunction;

/// Signed wavenumber of FFT bin `j`; the Nyquist bin of an even grid maps to
/// `None`.
pub fn wavenumber(j: usize, r: usize) -> Option<i64> {
    let (j, r) = (j as i64, r as i64);
    if 2 * j < r {
        Some(j)
    } else if 2 * j == r {
        None
    } else {
        Some(j - r)
    }
}

/// In-place unnormalised transform along every axis of a row-major cube of
/// side `r`. `inverse` selects the `e^{+2πi jk/r}` kernel.
pub fn fft_nd(data: &mut [Complex64], dim: usize, r: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(r) } else { planner.plan_fft_forward(r) };
    let mut line = vec![Complex64::new(0.0, 0.0); r];
    for axis in 0..dim {
        let stride = r.pow((dim - 1 - axis) as u32);
        for start in 0..data.len() {
            // lines along `axis` start where that coordinate is zero
            if !(start / stride).is_multiple_of(r) {
                continue;
            }
            for (t, slot) in line.iter_mut().enumerate() {
                *slot = data[start + t * stride];
            }
            fft.process(&mut line);
            for (t, v) in line.iter().enumerate() {
                data[start + t * stride] = *v;
            }
        }
    }
}

/// Averaged Fourier coefficients of a sampled field, indexed by FFT bin.
pub struct Spectrum {
    dim: usize,
    resolution: usize,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn of(f: &SampledFunction) -> Self {
        let dim = f.dim();
        let r = f.resolution();
        let mut coeffs: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut coeffs, dim, r, false);
        let norm = 1.0 / f.len() as f64;
        // samples sit at x_j = -L + (j + 1/2) h, so bin k picks up the phase
        // e^{i π k (1 - 1/r)} per axis relative to a grid starting at 0
        for (idx, c) in coeffs.iter_mut().enumerate() {
            let m = f.multi_index(idx);
            let mut phase = 0.0;
            for &j in &m[..dim] {
                let k = wavenumber(j, r).unwrap_or((r / 2) as i64);
                phase += PI * k as f64 * (1.0 - 1.0 / r as f64);
            }
            *c *= Complex64::from_polar(norm, phase);
        }
        Self { dim, resolution: r, coeffs }
    }

    /// Largest `|k|_∞` represented without aliasing onto the Nyquist bin.
    pub fn max_mode(&self) -> i64 {
        (self.resolution as i64 - 1) / 2
    }

    /// `f̂(k)`; `k` must satisfy `|k|_∞ ≤ max_mode()`.
    pub fn coefficient(&self, k: &[i64]) -> Complex64 {
        let r = self.resolution as i64;
        let idx = k[..self.dim].iter().fold(0usize, |acc, &ka| acc * self.resolution + ka.rem_euclid(r) as usize);
        self.coeffs[idx]
    }
}

/// Spectral partial derivatives of a periodic field, one array per axis. The
/// Nyquist bin is dropped.
pub fn spectral_gradient(u: &SampledFunction) -> Vec<Vec<f64>> {
    let dim = u.dim();
    let r = u.resolution();
    let scale = PI / u.domain().half_width();
    let mut hat: Vec<Complex64> = u.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut hat, dim, r, false);
    let norm = 1.0 / u.len() as f64;
    (0..dim)
        .map(|axis| {
            let mut d: Vec<Complex64> = hat
                .iter()
                .enumerate()
                .map(|(idx, &c)| {
                    let m = u.multi_index(idx);
                    if m[..dim].iter().any(|&j| wavenumber(j, r).is_none()) {
                        return Complex64::new(0.0, 0.0);
                    }
                    let k = wavenumber(m[axis], r).unwrap() as f64 * scale;
                    c * Complex64::new(0.0, k) * norm
                })
                .collect();
            fft_nd(&mut d, dim, r, true);
            d.into_iter().map(|c| c.re).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_has_unit_half_coefficients() {
        let f = SampledFunction::torus(1, 32, |x| 2.0 * x[0].cos()).unwrap();
        let s = Spectrum::of(&f);
        assert!((s.coefficient(&[1]) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((s.coefficient(&[-1]) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(s.coefficient(&[0]).norm() < 1e-14);
        assert!(s.coefficient(&[2]).norm() < 1e-14);
    }

    #[test]
    fn coefficients_match_direct_sum() {
        let f = SampledFunction::torus(2, 12, |x| (x[0] - 0.3 * x[1]).exp().sin() + x[1]).unwrap();
        let s = Spectrum::of(&f);
        for k in [[0i64, 0], [1, -2], [-3, 4], [5, 5]] {
            let mut direct = Complex64::new(0.0, 0.0);
            for idx in 0..f.len() {
                let x = f.point(idx);
                let ph = -(k[0] as f64 * x[0] + k[1] as f64 * x[1]);
                direct += Complex64::from_polar(f.values()[idx], ph);
            }
            direct /= f.len() as f64;
            assert!((direct - s.coefficient(&k)).norm() < 1e-12, "{k:?}");
        }
    }

    #[test]
    fn box_modes_use_the_box_period() {
        let l = 3.0;
        let f = SampledFunction::boxed(1, l, 64, |x| (2.0 * PI * x[0] / l).cos()).unwrap();
        let s = Spectrum::of(&f);
        assert!((s.coefficient(&[2]).re - 0.5).abs() < 1e-13);
    }

    #[test]
    fn gradient_of_trig_field() {
        let u = SampledFunction::torus(2, 32, |x| x[0].sin() * (2.0 * x[1]).cos()).unwrap();
        let g = spectral_gradient(&u);
        for idx in [0usize, 17, 300, 1000] {
            let x = u.point(idx);
            assert!((g[0][idx] - x[0].cos() * (2.0 * x[1]).cos()).abs() < 1e-12);
            assert!((g[1][idx] + 2.0 * x[0].sin() * (2.0 * x[1]).sin()).abs() < 1e-12);
        }
    }
}
