//! Solitary waves of `-cφ + φ² + K∗φ = 0`.
//!
//! The equation is solved in Fourier space as `(c - m(ξ)) φ̂ = F(φ²)` by
//! Petviashvili's stabilized fixed-point iteration, and checked afterwards in
//! two independent ways: spectrally in the original form and by direct
//! quadrature against `H_c` in the resolvent form `φ(c - φ) = H_c ∗ φ²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Grid, SpectralField};
use crate::kernels::{self, synthesize_kernel, KernelTable, SPECTRAL_FLOOR};
use crate::symbols::{whitham, Multiplier, WaveSpeed};

pub const MAX_ITERATIONS: usize = 500;
pub const MIN_TOLERANCE: f64 = 1e-13;
pub const MAX_SPEED: f64 = 3.0;
/// Required distance of the stabilizing factor from 1 at convergence.
pub const MULTIPLIER_TOLERANCE: f64 = 1e-10;

/// Elevation shift `γ` acting as `(φ, c, B) ↦ (φ + γ, c + 2γ, B + γ(1 - c - γ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GalileanShift {
    pub gamma: f64,
}

impl GalileanShift {
    pub fn apply(&self, phi: &SpectralField, c: f64, b: f64) -> Result<(SpectralField, f64, f64)> {
        let g = self.gamma;
        Ok((phi.add_scalar(g)?, c + 2.0 * g, b + g * (1.0 - c - g)))
    }

    pub fn inverse(&self) -> Self {
        Self { gamma: -self.gamma }
    }
}

/// Shifts `(φ, c, B)` to the equivalent triple with `B = 0`, taking the root
/// of `γ² + (c - 1)γ - B = 0` of smaller magnitude.
pub fn normalize_galilean(
    phi: &SpectralField,
    c: f64,
    b: f64,
) -> Result<(SpectralField, f64, f64, GalileanShift)> {
    let p = c - 1.0;
    let disc = p * p + 4.0 * b;
    if !(disc >= 0.0) {
        return Err(Error::NoRealShift {
            c,
            b,
            discriminant: disc,
        });
    }
    // q is the root of larger magnitude; the other is -B/q (Vieta)
    let q = -0.5 * (p + p.signum() * disc.sqrt());
    let gamma = if b == 0.0 {
        0.0
    } else if q == 0.0 {
        0.5 * disc.sqrt()
    } else {
        -b / q
    };
    let shift = GalileanShift { gamma };
    let (phi, c, _) = shift.apply(phi, c, b)?;
    Ok((phi, c, 0.0, shift))
}

/// A solved profile with its diagnostics.
#[derive(Debug, Clone)]
pub struct SolitaryWave {
    pub grid: Grid,
    pub phi: SpectralField,
    pub c: WaveSpeed,
    pub residual_physical: f64,
    pub residual_convolution: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final stabilizing factor (tends to 1).
    pub stabilizer: f64,
}

impl SolitaryWave {
    pub fn amplitude(&self) -> f64 {
        self.phi.sup()
    }

    /// Rebuilds a wave from stored samples (e.g. a profile read back from
    /// disk), recomputing both residuals.
    pub fn from_profile(phi: SpectralField, c: WaveSpeed) -> Result<Self> {
        let table = synthesize_kernel(Multiplier::Resolvent { c }, *phi.grid())?;
        let (rp, rc) = residuals_of(&phi, c, Some(&table))?;
        Ok(Self {
            grid: *phi.grid(),
            phi,
            c,
            residual_physical: rp,
            residual_convolution: rc,
            iterations: 0,
            converged: false,
            stabilizer: f64::NAN,
        })
    }

    /// Window `[x_lo, x_hi]` on `x > crest` where the profile is in its clean
    /// exponential tail: below `1e-3 sup φ` and above `100x` the spectral floor.
    pub fn tail_window(&self) -> Option<(f64, f64)> {
        let g = &self.grid;
        let sup = self.phi.sup();
        let crest = self.phi.argmax();
        let v = self.phi.values();
        let floor = 100.0 * SPECTRAL_FLOOR * sup;
        let lo = (crest..g.len()).find(|&j| v[j] < 1e-3 * sup)?;
        let hi = (lo..g.len()).take_while(|&j| v[j] > floor).last()?;
        (hi > lo + 10).then(|| (g.x(lo), g.x(hi)))
    }

    /// Exponential decay rate of the right tail fitted on `window`
    /// (defaults to [`Self::tail_window`]).
    pub fn decay_rate(&self, window: Option<(f64, f64)>) -> Result<f64> {
        let window = match window.or_else(|| self.tail_window()) {
            Some(w) => w,
            None => return Err(Error::Domain("profile has no resolved exponential tail".into())),
        };
        let samples: Vec<(f64, f64)> = self
            .grid
            .points()
            .into_iter()
            .zip(self.phi.values().iter().copied())
            .collect();
        kernels::fit_decay_rate(&samples, window)
    }
}

/// `(sup|-cφ + φ² + K∗φ|, sup|φ(c - φ) - H_c∗φ²|)` of a solved wave.
pub fn residual(wave: &SolitaryWave, table: Option<&KernelTable>) -> Result<(f64, f64)> {
    residuals_of(&wave.phi, wave.c, table)
}

/// Both residuals of an arbitrary field. The second needs the `H_c` table.
pub fn residuals_of(phi: &SpectralField, c: WaveSpeed, table: Option<&KernelTable>) -> Result<(f64, f64)> {
    let table = table.ok_or_else(|| Error::Dependency("resolvent kernel table required".into()))?;
    if table.symbol() != Some(Multiplier::Resolvent { c }) {
        return Err(Error::Dependency(format!(
            "kernel table {} does not match c = {}",
            table.label(),
            c.get()
        )));
    }
    let consistency = phi.consistency_error();
    if consistency > 1e-12 * phi.sup_abs().max(1.0) {
        return Err(Error::Input(format!(
            "field samples and coefficients disagree by {consistency:e}"
        )));
    }
    let cv = c.get();
    let k_phi = phi.apply_multiplier(whitham)?;
    let physical = phi
        .values()
        .iter()
        .zip(k_phi.values())
        .fold(0.0f64, |m, (&p, &kp)| m.max((-cv * p + p * p + kp).abs()));
    let sq = phi.map(|p| p * p)?;
    let h_sq = table.convolve(&sq)?;
    let convolution = phi
        .values()
        .iter()
        .zip(h_sq.values())
        .fold(0.0f64, |m, (&p, &hs)| m.max((p * (cv - p) - hs).abs()));
    Ok((physical, convolution))
}

/// Small-amplitude long-wave guess `A sech²(kx)` with `A = 3(c-1)/2`, `k = √A`.
pub fn kdv_guess(c: WaveSpeed, grid: Grid) -> Result<SpectralField> {
    let a = 1.5 * (c.get() - 1.0);
    let k = a.sqrt();
    SpectralField::from_fn(grid, |x| a / (k * x).cosh().powi(2))
}

/// Petviashvili iteration for the solitary wave of speed `c`.
pub fn petviashvili_solve(
    c: WaveSpeed,
    grid: Grid,
    init: Option<&SpectralField>,
    tol: f64,
) -> Result<SolitaryWave> {
    let table = synthesize_kernel(Multiplier::Resolvent { c }, grid)?;
    petviashvili_solve_with(c, grid, init, tol, &table)
}

/// As [`petviashvili_solve`], reusing a prebuilt `H_c` table for the
/// independent residual.
pub fn petviashvili_solve_with(
    c: WaveSpeed,
    grid: Grid,
    init: Option<&SpectralField>,
    tol: f64,
    table: &KernelTable,
) -> Result<SolitaryWave> {
    let out = petviashvili_profile(c, grid, init, tol)?;
    let (rp, rc) = residuals_of(&out.phi, c, Some(table))?;
    Ok(SolitaryWave {
        grid,
        phi: out.phi,
        c,
        residual_physical: rp,
        residual_convolution: rc,
        iterations: out.iterations,
        converged: true,
        stabilizer: out.stabilizer,
    })
}

/// Result of the bare iteration, before any kernel-table check.
#[derive(Debug, Clone)]
pub struct Iterate {
    pub phi: SpectralField,
    pub iterations: usize,
    pub stabilizer: f64,
    /// Spectral residual at the last iterate.
    pub residual: f64,
}

/// The Petviashvili iteration alone, crest-centred at `x = 0`. Works on any
/// grid (no kernel table is built).
pub fn petviashvili_profile(
    c: WaveSpeed,
    grid: Grid,
    init: Option<&SpectralField>,
    tol: f64,
) -> Result<Iterate> {
    if c.get() > MAX_SPEED {
        return Err(Error::Input(format!("speed {} outside (1, {MAX_SPEED}]", c.get())));
    }
    if !(tol >= MIN_TOLERANCE) {
        return Err(Error::Input(format!("tolerance {tol:e} below {MIN_TOLERANCE:e}")));
    }
    let start = match init {
        Some(f) => {
            if f.grid() != &grid {
                return Err(Error::Input("initial guess lives on a different grid".into()));
            }
            if f.sup_abs() == 0.0 {
                return Err(Error::Input("zero initial guess is a trivial fixed point".into()));
            }
            f.clone()
        }
        None => kdv_guess(c, grid)?,
    };
    let cv = c.get();
    let lin: Vec<f64> = (0..grid.len()).map(|k| cv - whitham(grid.xi(k))).collect();
    let mut coeffs: Vec<Complex64> = start.coeffs().to_vec();
    let mut stabilizer = f64::NAN;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        let sq = grid::dealiased_square_coeffs(&grid, &coeffs);
        // residual of the current iterate, -(c - m)φ̂ + F(φ²), in physical space
        let res: Vec<Complex64> = coeffs
            .iter()
            .zip(&sq)
            .zip(&lin)
            .map(|((p, s), l)| s - p * *l)
            .collect();
        residual = grid::inverse_real(&res).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !residual.is_finite() {
            break;
        }
        if residual <= tol && (stabilizer - 1.0).abs() <= MULTIPLIER_TOLERANCE {
            converged = true;
            break;
        }
        let num: f64 = coeffs.iter().zip(&lin).map(|(p, l)| l * p.norm_sqr()).sum();
        let den: f64 = coeffs.iter().zip(&sq).map(|(p, s)| (p.conj() * s).re).sum();
        stabilizer = num / den;
        if !(stabilizer.is_finite() && den > 0.0) {
            break;
        }
        let s2 = stabilizer * stabilizer;
        coeffs = sq.iter().zip(&lin).map(|(s, l)| s * (s2 / l)).collect();
        iterations += 1;
    }
    if !converged {
        return Err(Error::NonConvergence { iterations, residual });
    }
    let phi = SpectralField::from_coeffs(grid, coeffs)?;
    let crest = grid.x(phi.argmax());
    let phi = if crest == 0.0 { phi } else { phi.shifted(-crest)? };
    Ok(Iterate {
        phi,
        iterations,
        stabilizer,
        residual,
    })
}

/// Solves along ascending speeds, warm-starting each solve from the last.
pub fn continuation_sweep(c_values: &[f64], grid: Grid, tol: f64) -> Result<Vec<SolitaryWave>> {
    if c_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input("speeds must be strictly ascending".into()));
    }
    let mut out: Vec<SolitaryWave> = Vec::with_capacity(c_values.len());
    for &cv in c_values {
        let c = WaveSpeed::new(cv)?;
        let init = out.last().map(|w| w.phi.clone());
        let wave = petviashvili_solve(c, grid, init.as_ref(), tol).map_err(|e| Error::SweepFailure {
            c: cv,
            source: Box::new(e),
        })?;
        out.push(wave);
    }
    Ok(out)
}
