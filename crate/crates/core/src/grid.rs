//! Periodic grids standing in for the real line, and fields kept in both
//! physical and spectral form.
//!
//! Conventions: `x_j = -L + 2Lj/N` for `j = 0..N`, so the origin sits at index
//! `N/2` and the reflection `x -> -x` is the index map `j -> (N - j) mod N`.
//! Spectral coefficients are the unnormalized DFT of the samples, stored in
//! FFT order; index `k` carries the signed wavenumber `ξ = π k_s / L` with
//! `k_s ∈ [-N/2, N/2)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_length: f64,
    n: usize,
}

impl Grid {
    pub fn new(half_length: f64, n: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::Input(format!(
                "grid half-length must be positive, got {half_length}"
            )));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Input(format!(
                "grid size must be a power of two >= 16, got {n}"
            )));
        }
        Ok(Self { half_length, n })
    }

    /// `L = 200`, `N = 2^16`.
    pub fn default_line() -> Self {
        Self {
            half_length: 200.0,
            n: 1 << 16,
        }
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_length + self.spacing() * j as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn origin_index(&self) -> usize {
        self.n / 2
    }

    /// Signed mode number of FFT slot `k`.
    pub fn mode(&self, k: usize) -> i64 {
        if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        }
    }

    pub fn xi(&self, k: usize) -> f64 {
        PI * self.mode(k) as f64 / self.half_length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.xi(k)).collect()
    }

    pub fn xi_max(&self) -> f64 {
        PI * self.n as f64 / (2.0 * self.half_length)
    }

    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Same half-length, twice the points.
    pub fn refined(&self) -> Self {
        Self {
            half_length: self.half_length,
            n: 2 * self.n,
        }
    }

    /// Nearest grid index to `x`, wrapping periodically.
    pub fn nearest_index(&self, x: f64) -> usize {
        let h = self.spacing();
        let j = ((x + self.half_length) / h).round() as i64;
        j.rem_euclid(self.n as i64) as usize
    }

    /// Index reached from `j` after `offset` steps, wrapping periodically.
    pub fn wrap(&self, j: i64) -> usize {
        j.rem_euclid(self.n as i64) as usize
    }
}

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Unnormalized forward DFT in place.
pub fn fft_forward(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

/// Inverse DFT in place, normalized by `1/N`.
pub fn fft_inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    plan(n, true).process(buf);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= s);
}

pub fn forward_real(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_forward(&mut buf);
    buf
}

pub fn inverse_real(coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    fft_inverse(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// A real function on a [`Grid`] with samples and DFT coefficients that are
/// always consistent with each other.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    values: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Input(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample at index {j}")));
        }
        let coeffs = forward_real(&values);
        Ok(Self {
            grid,
            values,
            coeffs,
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|j| f(grid.x(j))).collect();
        Self::from_values(grid, values)
    }

    /// Builds the field from (Hermitian) coefficients; any imaginary residue of
    /// the inverse transform is discarded.
    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Input(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        let values = inverse_real(&coeffs);
        Self::from_values(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inf(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Leftmost index attaining the maximum.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = j;
            }
        }
        best
    }

    /// Trapezoid (= rectangle, periodic) integral `h Σ f_j`.
    pub fn integral(&self) -> f64 {
        self.grid.spacing() * self.values.iter().sum::<f64>()
    }

    /// Largest of the two boundary samples in absolute value.
    pub fn boundary_magnitude(&self) -> f64 {
        let n = self.values.len();
        self.values[0].abs().max(self.values[n - 1].abs())
    }

    /// Applies a real even multiplier `s(ξ)` in spectral space.
    pub fn apply_multiplier(&self, symbol: impl Fn(f64) -> f64) -> Result<Self> {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &z)| z * symbol(self.grid.xi(k)))
            .collect();
        Self::from_coeffs(self.grid, coeffs)
    }

    /// Spectral derivative of the given order. The Nyquist mode is dropped
    /// for odd orders.
    pub fn derivative(&self, order: u32) -> Result<Self> {
        let nyq = self.grid.nyquist_index();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &z)| {
                if k == nyq && order % 2 == 1 {
                    return Complex64::new(0.0, 0.0);
                }
                z * Complex64::new(0.0, self.grid.xi(k)).powu(order)
            })
            .collect();
        Self::from_coeffs(self.grid, coeffs)
    }

    /// `x -> f(x - d)` by phase shift.
    pub fn shifted(&self, d: f64) -> Result<Self> {
        let coeffs = shift_coeffs(&self.grid, &self.coeffs, d);
        Self::from_coeffs(self.grid, coeffs)
    }

    /// `x -> f(2λ - x)` by spectral reflection and phase shift.
    pub fn reflected_about(&self, lambda: f64) -> Result<Self> {
        let conj: Vec<Complex64> = self.coeffs.iter().map(|z| z.conj()).collect();
        let coeffs = shift_coeffs(&self.grid, &conj, 2.0 * lambda);
        Self::from_coeffs(self.grid, coeffs)
    }

    /// Physical samples of `f(2λ - x)` without building a full field.
    pub fn reflection_values(&self, lambda: f64) -> Vec<f64> {
        let conj: Vec<Complex64> = self.coeffs.iter().map(|z| z.conj()).collect();
        inverse_real(&shift_coeffs(&self.grid, &conj, 2.0 * lambda))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn add_scalar(&self, a: f64) -> Result<Self> {
        self.map(|v| v + a)
    }

    pub fn scale(&self, a: f64) -> Result<Self> {
        self.map(|v| a * v)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Input("fields live on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_values(self.grid, values)
    }

    /// `sup |f - g|` over the grid.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest disagreement between the samples and the inverse transform of
    /// the stored coefficients.
    pub fn consistency_error(&self) -> f64 {
        inverse_real(&self.coeffs)
            .iter()
            .zip(&self.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Trigonometric interpolant evaluated at an arbitrary point.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.grid.len() as f64;
        let nyq = self.grid.nyquist_index();
        let l = self.grid.half_length();
        let mut acc = 0.0;
        for (k, z) in self.coeffs.iter().enumerate() {
            let xi = self.grid.xi(k);
            // e^{iξ(x + L)} undoes the grid offset x_0 = -L
            let phase = xi * (x + l);
            let term = z * Complex64::new(phase.cos(), phase.sin());
            acc += if k == nyq {
                z.re * phase.cos()
            } else {
                term.re
            };
        }
        acc / n
    }
}

fn shift_coeffs(grid: &Grid, coeffs: &[Complex64], d: f64) -> Vec<Complex64> {
    let nyq = grid.nyquist_index();
    coeffs
        .iter()
        .enumerate()
        .map(|(k, &z)| {
            let phase = -grid.xi(k) * d;
            if k == nyq {
                z * phase.cos()
            } else {
                z * Complex64::new(phase.cos(), phase.sin())
            }
        })
        .collect()
}

/// Dealiased square: coefficients of `f²` computed on a grid padded by a
/// factor two and truncated back to `N` modes.
pub fn dealiased_square_coeffs(grid: &Grid, coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = grid.len();
    let big = 2 * n;
    let half = n / 2;
    let mut pad = vec![Complex64::new(0.0, 0.0); big];
    for k in 0..half {
        pad[k] = 2.0 * coeffs[k];
    }
    for k in half + 1..n {
        pad[big - (n - k)] = 2.0 * coeffs[k];
    }
    // split the Nyquist mode symmetrically
    pad[half] = coeffs[half];
    pad[big - half] = coeffs[half];
    fft_inverse(&mut pad);
    for z in pad.iter_mut() {
        *z = Complex64::new(z.re * z.re, 0.0);
    }
    fft_forward(&mut pad);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..half {
        out[k] = 0.5 * pad[k];
    }
    for k in half + 1..n {
        out[k] = 0.5 * pad[big - (n - k)];
    }
    out[half] = 0.25 * (pad[half] + pad[big - half]);
    out
}
