//! Discrete Fourier helpers on uniform periodic grids.
//!
//! Coefficient vectors use the normalized convention
//! `c_j = (1/m) Σ_k v_k e^{-2πi jk/m}`, so that `v_k = Σ_j c_j e^{2πi jk/m}`.
//! Index `j` of a length-`m` coefficient vector holds the signed mode
//! [`signed_mode`]`(j, m)`.

use rustfft::FftPlanner;

use crate::C64;

pub fn is_power_of_two(m: usize) -> bool {
    m != 0 && m & (m - 1) == 0
}

/// Signed frequency of the `j`-th DFT bin on an `m`-point grid; the Nyquist
/// bin of an even grid is reported as `+m/2`.
pub fn signed_mode(j: usize, m: usize) -> i64 {
    if 2 * j <= m {
        j as i64
    } else {
        j as i64 - m as i64
    }
}

/// Normalized forward transform.
pub fn dft(values: &[C64]) -> Vec<C64> {
    let m = values.len();
    if m == 0 {
        return Vec::new();
    }
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Inverse of [`dft`].
pub fn idft(coeffs: &[C64]) -> Vec<C64> {
    let m = coeffs.len();
    if m == 0 {
        return Vec::new();
    }
    let mut buf = coeffs.to_vec();
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    buf
}

pub fn dft_real(values: &[f64]) -> Vec<C64> {
    let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
    dft(&v)
}

/// Taylor coefficients of a disc from its values at the `m`-th roots of
/// unity `e^{2πik/m}`. Exact for polynomials of degree `< m`.
pub fn cauchy_coeffs(values: &[C64]) -> Vec<C64> {
    dft(values)
}

/// Nodes `e^{2πik/m}` scaled by `radius`.
pub fn circle_nodes(m: usize, radius: f64) -> Vec<C64> {
    (0..m)
        .map(|k| C64::from_polar(radius, std::f64::consts::TAU * k as f64 / m as f64))
        .collect()
}

/// Zeroes every mode with `|mode| > max_mode` of a periodic complex signal.
pub fn truncate_modes(values: &[C64], max_mode: usize) -> Vec<C64> {
    let m = values.len();
    let mut c = dft(values);
    for (j, cj) in c.iter_mut().enumerate() {
        if signed_mode(j, m).unsigned_abs() as usize > max_mode {
            *cj = C64::new(0.0, 0.0);
        }
    }
    idft(&c)
}

/// Real trigonometric series `a_0 + 2 Re Σ_{m≥1} a_m e^{imθ}`.
///
/// Stores `a_0..=a_M`; evaluating a real signal sampled on a grid and
/// truncated to `M` modes reproduces it through [`TrigSeries::eval`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSeries {
    pub coeffs: Vec<C64>,
}

impl TrigSeries {
    /// Band-limited fit of real samples on the uniform grid `2πa/len`.
    pub fn from_samples(samples: &[f64], max_mode: usize) -> Self {
        let m = samples.len();
        let c = dft_real(samples);
        let top = max_mode.min(m / 2);
        let mut coeffs: Vec<C64> = c[..=top].to_vec();
        coeffs[0].im = 0.0;
        // The Nyquist bin is shared between +m/2 and -m/2.
        if 2 * top == m {
            coeffs[top] *= 0.5;
            coeffs[top].im = 0.0;
        }
        TrigSeries { coeffs }
    }

    pub fn constant(value: f64) -> Self {
        TrigSeries {
            coeffs: vec![C64::new(value, 0.0)],
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut acc = self.coeffs[0].re;
        let e = C64::from_polar(1.0, theta);
        let mut p = e;
        for c in &self.coeffs[1..] {
            acc += 2.0 * (c * p).re;
            p *= e;
        }
        acc
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        let e = C64::from_polar(1.0, theta);
        let mut p = e;
        let mut acc = 0.0;
        for (m, c) in self.coeffs.iter().enumerate().skip(1) {
            acc += 2.0 * (C64::new(0.0, m as f64) * c * p).re;
            p *= e;
        }
        acc
    }
}
