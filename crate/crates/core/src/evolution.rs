//! Pseudospectral RK4 integrator for `u_t + 2uu_x + K∗u_x = 0`.
//!
//! In Fourier variables `û_t = -iξ (P F(u²) + m(ξ) û)`, where `P` keeps the
//! modes `|k| ≤ N/3` (two-thirds rule). The zero mode is never touched, so
//! the mass `∫u` is conserved to rounding.

use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use crate::analysis::CREST_THRESHOLD;
use crate::error::{Error, Result};
use crate::grid::{Grid, SpectralField};
use crate::steady::SolitaryWave;
use crate::symbols::whitham;

/// Number of snapshot intervals per run.
pub const SNAPSHOTS: usize = 50;

/// A second crest at or above this fraction of the highest one makes the
/// crest ambiguous.
pub const DOMINANCE: f64 = 0.9;

/// `0.5 h / (sup|2u| + 1)`.
pub fn time_step_bound(u: &SpectralField) -> f64 {
    bound_for(u.grid(), u.sup_abs())
}

/// Right-hand side on the half spectrum `k = 0..=N/2` with real transforms.
struct Operator {
    grid: Grid,
    n: usize,
    // -iξ_k, with the Nyquist mode removed
    deriv: Vec<Complex64>,
    symbol: Vec<f64>,
    keep: Vec<bool>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
}

impl Operator {
    fn new(grid: Grid) -> Self {
        let n = grid.len();
        let half = n / 2 + 1;
        let cutoff = n / 3;
        let mut planner = RealFftPlanner::<f64>::new();
        Self {
            grid,
            n,
            deriv: (0..half)
                .map(|k| {
                    if k == n / 2 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(0.0, -grid.xi(k))
                    }
                })
                .collect(),
            symbol: (0..half).map(|k| whitham(grid.xi(k))).collect(),
            keep: (0..half).map(|k| k <= cutoff).collect(),
            r2c: planner.plan_fft_forward(n),
            c2r: planner.plan_fft_inverse(n),
        }
    }

    fn half_of(&self, u: &SpectralField) -> Vec<Complex64> {
        u.coeffs()[..=self.n / 2].to_vec()
    }

    fn values(&self, half: &[Complex64]) -> Vec<f64> {
        let mut spec = half.to_vec();
        spec[0].im = 0.0;
        spec[self.n / 2].im = 0.0;
        let mut out = vec![0.0; self.n];
        self.c2r
            .process(&mut spec, &mut out)
            .expect("buffer sizes match the plan");
        let s = 1.0 / self.n as f64;
        out.iter_mut().for_each(|v| *v *= s);
        out
    }

    fn field(&self, half: &[Complex64]) -> Result<SpectralField> {
        SpectralField::from_values(self.grid, self.values(half))
    }

    /// Returns the right-hand side and `sup |u|` of the input state.
    fn rhs(&self, coeffs: &[Complex64]) -> (Vec<Complex64>, f64) {
        let u = self.values(coeffs);
        let sup = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut sq: Vec<f64> = u.iter().map(|v| v * v).collect();
        let mut w = self.r2c.make_output_vec();
        self.r2c
            .process(&mut sq, &mut w)
            .expect("buffer sizes match the plan");
        let out = (0..coeffs.len())
            .map(|k| {
                let nl = if self.keep[k] { w[k] } else { Complex64::new(0.0, 0.0) };
                self.deriv[k] * (nl + coeffs[k] * self.symbol[k])
            })
            .collect();
        (out, sup)
    }

    /// One RK4 step; also returns `sup |u|` of the starting state.
    fn rk4(&self, c: &[Complex64], dt: f64) -> (Vec<Complex64>, f64) {
        let axpy = |a: &[Complex64], k: &[Complex64], s: f64| -> Vec<Complex64> {
            a.iter().zip(k).map(|(x, y)| x + y * s).collect()
        };
        let (k1, sup) = self.rhs(c);
        let (k2, _) = self.rhs(&axpy(c, &k1, 0.5 * dt));
        let (k3, _) = self.rhs(&axpy(c, &k2, 0.5 * dt));
        let (k4, _) = self.rhs(&axpy(c, &k3, dt));
        let next = (0..c.len())
            .map(|i| c[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0))
            .collect();
        (next, sup)
    }
}

fn bound_for(grid: &Grid, sup: f64) -> f64 {
    0.5 * grid.spacing() / (2.0 * sup + 1.0)
}

fn check_dt(grid: &Grid, sup: f64, dt: f64) -> Result<()> {
    let bound = bound_for(grid, sup);
    if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
        return Err(Error::TimeStep { dt, bound });
    }
    Ok(())
}

/// One classical RK4 step.
pub fn step(u: &SpectralField, dt: f64) -> Result<SpectralField> {
    check_dt(u.grid(), u.sup_abs(), dt)?;
    let op = Operator::new(*u.grid());
    let (next, _) = op.rk4(&op.half_of(u), dt);
    op.field(&next).map_err(|_| Error::BlowUp { t: dt })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InvariantSample {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
}

impl InvariantSample {
    fn of(t: f64, u: &SpectralField) -> Self {
        let h = u.grid().spacing();
        Self {
            t,
            mass: u.integral(),
            momentum: h * u.values().iter().map(|v| v * v).sum::<f64>(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub t: f64,
    pub u: SpectralField,
    pub invariants_log: Vec<InvariantSample>,
}

impl EvolutionState {
    fn drift(&self, pick: fn(&InvariantSample) -> f64) -> f64 {
        let first = self.invariants_log.first().map(pick).unwrap_or(0.0);
        let scale = if first == 0.0 { 1.0 } else { first.abs() };
        self.invariants_log
            .iter()
            .fold(0.0f64, |m, s| m.max((pick(s) - first).abs() / scale))
    }

    /// Largest relative change of `∫u` over the log.
    pub fn mass_drift(&self) -> f64 {
        self.drift(|s| s.mass)
    }

    /// Largest relative change of `∫u²` over the log.
    pub fn momentum_drift(&self) -> f64 {
        self.drift(|s| s.momentum)
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub u: SpectralField,
}

/// Integrates to time `T` with the largest step `≤ dt` that divides the run
/// into a whole number of steps per snapshot interval.
pub fn evolve(u0: &SpectralField, t_end: f64, dt: f64) -> Result<(EvolutionState, Vec<Snapshot>)> {
    evolve_with(u0, t_end, dt, SNAPSHOTS)
}

pub fn evolve_with(
    u0: &SpectralField,
    t_end: f64,
    dt: f64,
    snapshots: usize,
) -> Result<(EvolutionState, Vec<Snapshot>)> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Input(format!("final time {t_end} must be finite and >= 0")));
    }
    if !(dt > 0.0) || snapshots == 0 {
        return Err(Error::Input("dt > 0 and at least one snapshot required".into()));
    }
    let mut log = vec![InvariantSample::of(0.0, u0)];
    let mut frames = vec![Snapshot {
        t: 0.0,
        u: u0.clone(),
    }];
    if t_end == 0.0 {
        let state = EvolutionState {
            t: 0.0,
            u: u0.clone(),
            invariants_log: log,
        };
        return Ok((state, frames));
    }
    let per_frame = ((t_end / dt) / snapshots as f64).ceil().max(1.0) as usize;
    let total = per_frame * snapshots;
    let h = t_end / total as f64;
    let grid = *u0.grid();
    let op = Operator::new(grid);
    let mut coeffs = op.half_of(u0);
    let mut u = u0.clone();
    for s in 0..total {
        let t = (s + 1) as f64 * h;
        let (next, sup) = op.rk4(&coeffs, h);
        check_dt(&grid, sup, h)?;
        if next.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::BlowUp { t });
        }
        coeffs = next;
        if (s + 1) % per_frame == 0 {
            u = op.field(&coeffs).map_err(|_| Error::BlowUp { t })?;
            log.push(InvariantSample::of(t, &u));
            frames.push(Snapshot { t, u: u.clone() });
        }
    }
    let state = EvolutionState {
        t: t_end,
        u,
        invariants_log: log,
    };
    Ok((state, frames))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisTrack {
    pub times: Vec<f64>,
    pub lambda: Vec<f64>,
    pub symmetry_error: Vec<f64>,
    /// Least-squares slope of `λ(t)`; absent with fewer than two snapshots.
    pub axis_speed_fit: Option<f64>,
}

fn reflection_error(u: &SpectralField, lambda: f64, scale: f64) -> f64 {
    u.reflection_values(lambda)
        .iter()
        .zip(u.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / scale
}

/// Axis of best reflection symmetry of one profile: golden-section search in
/// `±2h` around the discrete crest. Returns `(λ, error)`.
pub fn symmetry_axis(u: &SpectralField) -> (f64, f64) {
    let g = u.grid();
    let h = g.spacing();
    let centre = g.x(u.argmax());
    let scale = u.sup_abs().max(f64::MIN_POSITIVE);
    let f = |l: f64| reflection_error(u, l, scale);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (centre - 2.0 * h, centre + 2.0 * h);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-9 * h {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = f(x2);
        }
    }
    let l = 0.5 * (a + b);
    (l, f(l))
}

/// Crest positions above the crest threshold, highest first.
fn crests(u: &SpectralField) -> Vec<(f64, f64)> {
    let v = u.values();
    let g = u.grid();
    let thr = CREST_THRESHOLD * u.sup();
    let mut out: Vec<(f64, f64)> = (1..v.len() - 1)
        .filter(|&j| v[j] > thr && v[j] > v[j - 1] && v[j] > v[j + 1])
        .map(|j| (g.x(j), v[j]))
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out
}

pub fn symmetry_axis_track(snapshots: &[Snapshot]) -> Result<AxisTrack> {
    let mut times = Vec::with_capacity(snapshots.len());
    let mut lambda = Vec::with_capacity(snapshots.len());
    let mut symmetry_error = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        let cr = crests(&s.u);
        if cr.is_empty() {
            return Err(Error::AmbiguousCrest { t: s.t, crests: vec![] });
        }
        if cr.len() > 1 && cr[1].1 >= DOMINANCE * cr[0].1 {
            return Err(Error::AmbiguousCrest {
                t: s.t,
                crests: cr.iter().map(|c| c.0).collect(),
            });
        }
        let (l, e) = symmetry_axis(&s.u);
        times.push(s.t);
        lambda.push(l);
        symmetry_error.push(e);
    }
    let axis_speed_fit = (times.len() >= 2).then(|| least_squares_slope(&times, &lambda));
    Ok(AxisTrack {
        times,
        lambda,
        symmetry_error,
        axis_speed_fit,
    })
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (sxy, sxx) = x
        .iter()
        .zip(y)
        .fold((0.0, 0.0), |(a, b), (xi, yi)| (a + (xi - mx) * (yi - my), b + (xi - mx).powi(2)));
    sxy / sxx
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionReport {
    pub c: f64,
    pub t_end: f64,
    pub dt: f64,
    pub traveling_error: f64,
    /// Absent when some snapshot has no dominant crest (see `axis_error`).
    pub axis: Option<AxisTrack>,
    pub axis_error: Option<String>,
    pub mass_drift: f64,
    pub momentum_drift: f64,
}

/// Evolves a solved wave and compares with its rigid translate.
pub fn verify_traveling(wave: &SolitaryWave, t_end: f64, dt: f64) -> Result<EvolutionReport> {
    let c = wave.c.get();
    if c * t_end > 0.25 * wave.grid.half_length() {
        return Err(Error::Input(format!(
            "travel distance c*T = {} exceeds L/4 = {}",
            c * t_end,
            0.25 * wave.grid.half_length()
        )));
    }
    let (state, frames) = evolve(&wave.phi, t_end, dt)?;
    let exact = if t_end == 0.0 {
        wave.phi.clone()
    } else {
        wave.phi.shifted(c * t_end)?
    };
    let traveling_error = state.u.max_abs_diff(&exact) / wave.phi.sup();
    let (axis, axis_error) = match symmetry_axis_track(&frames) {
        Ok(a) => (Some(a), None),
        Err(e @ Error::AmbiguousCrest { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    Ok(EvolutionReport {
        c,
        t_end,
        dt,
        traveling_error,
        axis,
        axis_error,
        mass_drift: state.mass_drift(),
        momentum_drift: state.momentum_drift(),
    })
}

/// Symmetry-error history of arbitrary data (for the contrapositive check
/// that generic even data do not stay symmetric).
pub fn symmetry_history(u0: &SpectralField, t_end: f64, dt: f64) -> Result<(AxisTrack, EvolutionState)> {
    let (state, frames) = evolve(u0, t_end, dt)?;
    Ok((symmetry_axis_track(&frames)?, state))
}

/// Exact solution of the linearized flow `u_t + K∗u_x = 0`.
pub fn linear_solution(u0: &SpectralField, t: f64) -> Result<SpectralField> {
    let g = *u0.grid();
    let nyq = g.nyquist_index();
    let coeffs = u0
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, z)| {
            if k == nyq {
                return *z;
            }
            let xi = g.xi(k);
            let ph = -xi * whitham(xi) * t;
            z * Complex64::new(ph.cos(), ph.sin())
        })
        .collect();
    SpectralField::from_coeffs(g, coeffs)
}
