//! Certificates for symmetry, ordering and decay of profiles, plus
//! brute-force oracles for the auxiliary inequalities used in the decay
//! theory.

use num_bigint::BigUint;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Grid, SpectralField};
use crate::kernels::{KernelTable, SPECTRAL_FLOOR};
use crate::par;
use crate::quad::{self, Tolerance};
use crate::steady::SolitaryWave;
use crate::symbols::strip_halfwidth;

/// Relative slack of pointwise comparisons in the moving-plane scan.
pub const EPS_NUM: f64 = 1e-10;

/// Relative height below which local maxima are not counted as crests.
pub const CREST_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub crest_location: f64,
    pub reflection_error: f64,
    pub crest_count: usize,
    pub monotone_tail: bool,
    pub moving_plane_sup: f64,
    pub moving_plane_degenerate: bool,
    pub grid_spacing: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Crest, reflection symmetry, crest count, monotone tail and moving-plane
/// limit of a profile.
pub fn verify_symmetry(phi: &SpectralField, tol: f64) -> Result<SymmetryReport> {
    let sup = phi.sup();
    if !(sup > phi.inf()) {
        return Err(Error::Degenerate("flat profile".into()));
    }
    if !(sup > 0.0) {
        return Err(Error::Degenerate("profile has no positive crest".into()));
    }
    let grid = phi.grid();
    let h = grid.spacing();
    let crest = crest_location(phi);
    let reflected = phi.reflection_values(crest);
    let reflection_error = reflected
        .iter()
        .zip(phi.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / sup;
    let crest_count = count_crests(phi.values(), CREST_THRESHOLD * sup);
    let monotone_tail = monotone_right_tail(phi, crest, EPS_NUM * sup);
    let scan = moving_plane_scan(phi)?;
    let pass = reflection_error <= tol
        && crest_count == 1
        && monotone_tail
        && !scan.degenerate
        && (scan.lambda_star - crest).abs() <= h;
    Ok(SymmetryReport {
        crest_location: crest,
        reflection_error,
        crest_count,
        monotone_tail,
        moving_plane_sup: scan.lambda_star,
        moving_plane_degenerate: scan.degenerate,
        grid_spacing: h,
        tolerance: tol,
        pass,
    })
}

/// Sub-grid crest from the parabola through the discrete maximum and its
/// two neighbours.
pub fn crest_location(phi: &SpectralField) -> f64 {
    let grid = phi.grid();
    let v = phi.values();
    let j = phi.argmax();
    let n = v.len();
    let (a, b, c) = (v[(j + n - 1) % n], v[j], v[(j + 1) % n]);
    let denom = a - 2.0 * b + c;
    let offset = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    grid.x(j) + offset.clamp(-0.5, 0.5) * grid.spacing()
}

/// Strict interior local maxima above `threshold`.
pub fn count_crests(v: &[f64], threshold: f64) -> usize {
    (1..v.len().saturating_sub(1))
        .filter(|&j| v[j] > threshold && v[j] > v[j - 1] && v[j] > v[j + 1])
        .count()
}

fn monotone_right_tail(phi: &SpectralField, crest: f64, slack: f64) -> bool {
    let grid = phi.grid();
    let v = phi.values();
    let end = crest + 0.5 * grid.half_length();
    let first = (0..grid.len()).find(|&j| grid.x(j) >= crest).unwrap_or(grid.len());
    (first..grid.len() - 1)
        .take_while(|&j| grid.x(j + 1) <= end)
        .all(|j| v[j + 1] <= v[j] + slack)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovingPlane {
    pub lambda_star: f64,
    /// No interior crest: the plane cannot start moving.
    pub degenerate: bool,
}

/// Moves the plane `x = λ` in from the left over grid and half-grid
/// positions and returns the last `λ` for which `φ(x) ≥ φ(2λ - x) - ε` holds
/// for every grid `x > λ` (zero extension off the grid), and for all earlier
/// positions.
pub fn moving_plane_scan(phi: &SpectralField) -> Result<MovingPlane> {
    let grid = phi.grid();
    let v = phi.values();
    let n = grid.len();
    let sup = phi.sup();
    let j_max = phi.argmax();
    if j_max == 0 || j_max == n - 1 || count_crests(v, CREST_THRESHOLD * sup) == 0 {
        return Ok(MovingPlane {
            lambda_star: grid.x(0),
            degenerate: true,
        });
    }
    let limit = 1e-8 * sup;
    if phi.boundary_magnitude() > limit {
        return Err(Error::Truncation {
            boundary: phi.boundary_magnitude(),
            limit,
        });
    }
    let eps = EPS_NUM * sup;
    // only points with φ > ε can break the inequality as reflected sources
    let support: Vec<usize> = (0..n).filter(|&j| v[j] > eps).collect();
    let first = support.first().copied().unwrap_or(0);
    let last = support.last().copied().unwrap_or(n - 1);
    // plane positions λ = x_0 + k h/2; reflection maps x_i to x_{k - i}
    let holds = |k: usize| -> bool {
        support.iter().all(|&s| {
            // s = k - i  ⇒  i = k - s must lie strictly right of λ: 2i > k
            if k < s {
                return true;
            }
            let i = k - s;
            if 2 * i <= k {
                return true;
            }
            i >= n || v[i] >= v[s] - eps
        })
    };
    let mut star = None;
    for k in 2 * first..=2 * last {
        if !holds(k) {
            break;
        }
        star = Some(k);
    }
    Ok(match star {
        Some(k) => MovingPlane {
            lambda_star: grid.x(0) + 0.5 * k as f64 * grid.spacing(),
            degenerate: false,
        },
        None => MovingPlane {
            lambda_star: grid.x(0),
            degenerate: true,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Touching {
    IdenticallyEqual,
    StrictlyOrdered,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TouchingReport {
    pub verdict: Touching,
    pub lambda: f64,
    /// Smallest `H_c ∗ (φ₁² - φ₂²)` over grid points of `[λ, λ + L]`.
    pub min_integral: f64,
    pub max_gap: f64,
    pub max_sum: f64,
    pub c: f64,
}

/// `H_c ∗ f` at grid points of the half-line `[λ, λ + L]` for `f` odd about
/// `λ`, computed by the corrected quadrature of the kernel table. On the
/// periodic box the reflection about `λ` also fixes `λ + L`, so points past
/// it belong to the mirrored side.
pub fn half_line_integral(table: &KernelTable, f: &SpectralField, lambda: f64) -> Result<Vec<(f64, f64)>> {
    let conv = table.convolve(f)?;
    let g = table.grid();
    Ok(half_line(g, lambda)
        .into_iter()
        .map(|j| (g.x(j), conv.values()[j]))
        .collect())
}

fn half_line(g: &Grid, lambda: f64) -> Vec<usize> {
    let end = lambda + g.half_length();
    (0..g.len()).filter(|&j| g.x(j) >= lambda && g.x(j) <= end).collect()
}

/// Dichotomy for an ordered pair on the half-line `[λ, ∞)`: either equal
/// there, or strictly ordered with `φ₁ + φ₂ < c`.
pub fn touching_check(
    phi1: &SpectralField,
    phi2: &SpectralField,
    lambda: f64,
    table: &KernelTable,
) -> Result<TouchingReport> {
    let c = table
        .symbol()
        .and_then(|s| s.speed())
        .ok_or_else(|| Error::Dependency("touching check needs a resolvent kernel table".into()))?;
    if phi1.grid() != table.grid() || phi2.grid() != table.grid() {
        return Err(Error::Input("fields and kernel live on different grids".into()));
    }
    let g = table.grid();
    let scale = phi1.sup_abs().max(phi2.sup_abs()).max(f64::MIN_POSITIVE);
    let eps = EPS_NUM * scale;
    let right = half_line(g, lambda);
    let (a, b) = (phi1.values(), phi2.values());
    if let Some(&j) = right.iter().find(|&&j| a[j] < b[j] - eps) {
        return Err(Error::Hypothesis(format!(
            "phi1 >= phi2 fails at x = {} by {:e}",
            g.x(j),
            b[j] - a[j]
        )));
    }
    let f = phi1.zip_with(phi2, |p, q| p * p - q * q)?;
    let mirrored = f.reflection_values(lambda);
    let odd = f
        .values()
        .iter()
        .zip(&mirrored)
        .fold(0.0f64, |m, (u, w)| m.max((u + w).abs()));
    if odd > eps * scale.max(1.0) {
        return Err(Error::Hypothesis(format!(
            "phi1^2 - phi2^2 not odd about lambda = {lambda} (defect {odd:e})"
        )));
    }
    let integral = half_line_integral(table, &f, lambda)?;
    let min_integral = integral.iter().fold(f64::INFINITY, |m, p| m.min(p.1));
    let max_gap = right.iter().fold(0.0f64, |m, &j| m.max((a[j] - b[j]).abs()));
    let max_sum = right.iter().fold(f64::NEG_INFINITY, |m, &j| m.max(a[j] + b[j]));
    let verdict = if max_gap <= eps {
        Touching::IdenticallyEqual
    } else if max_sum < c.get() && min_integral >= -eps {
        Touching::StrictlyOrdered
    } else {
        Touching::Inconclusive
    };
    Ok(TouchingReport {
        verdict,
        lambda,
        min_integral,
        max_gap,
        max_sum,
        c: c.get(),
    })
}

/// `(h Σ |x_j|^{lq} |φ_j|^q)^{1/q}` for finite `q`, `max |x_j|^l |φ_j|` for
/// `q = ∞`.
pub fn weighted_norm(phi: &SpectralField, l: f64, q: f64) -> Result<f64> {
    if !(l >= 0.0) || !(q >= 1.0) {
        return Err(Error::Input(format!("weighted norm needs l >= 0, q >= 1 (got {l}, {q})")));
    }
    let g = phi.grid();
    let terms = g.points().into_iter().zip(phi.values().iter().copied());
    let weight = |x: f64| if l == 0.0 { 1.0 } else { x.abs().powf(l) };
    if q.is_infinite() {
        return Ok(terms.fold(0.0f64, |m, (x, v)| m.max(weight(x) * v.abs())));
    }
    let sum: f64 = terms.map(|(x, v)| (weight(x) * v.abs()).powf(q)).sum();
    Ok((g.spacing() * sum).powf(1.0 / q))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedNormEntry {
    pub l: f64,
    pub q: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub fitted_rate: f64,
    pub reference_rate: f64,
    pub window: (f64, f64),
    pub weighted_norms: Vec<WeightedNormEntry>,
    pub pass: bool,
}

/// Default `(l, q)` battery of weighted norms.
pub fn default_norm_battery() -> Vec<(f64, f64)> {
    let mut v = Vec::new();
    for &l in &[0.0, 1.0, 2.0, 4.0] {
        for &q in &[2.5, 3.0, f64::INFINITY] {
            v.push((l, q));
        }
    }
    v
}

/// Tail rate against `δ_c` and the requested weighted norms.
pub fn verify_decay(
    wave: &SolitaryWave,
    window: Option<(f64, f64)>,
    norms: &[(f64, f64)],
) -> Result<DecayReport> {
    let window = match window.or_else(|| wave.tail_window()) {
        Some(w) => w,
        None => return Err(Error::Domain("profile has no resolved exponential tail".into())),
    };
    let fitted_rate = wave.decay_rate(Some(window))?;
    let reference_rate = strip_halfwidth(wave.c);
    let weighted_norms = norms
        .iter()
        .map(|&(l, q)| {
            Ok(WeightedNormEntry {
                l,
                q,
                value: weighted_norm(&wave.phi, l, q)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = fitted_rate >= 0.9 * reference_rate && weighted_norms.iter().all(|e| e.value.is_finite());
    Ok(DecayReport {
        fitted_rate,
        reference_rate,
        window,
        weighted_norms,
        pass,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileBounds {
    pub min: f64,
    pub max: f64,
    pub c: f64,
    /// Samples with `|φ|` below this are rounding noise.
    pub floor: f64,
    /// `φ > 0` wherever `φ` exceeds the floor, `|φ| ≤ floor` elsewhere,
    /// and `max φ < c`.
    pub pass: bool,
}

/// `0 < φ < c` on the grid, resolved down to the spectral floor.
pub fn profile_bounds(phi: &SpectralField, c: f64) -> ProfileBounds {
    let max = phi.sup();
    let min = phi.inf();
    let floor = SPECTRAL_FLOOR * phi.sup_abs();
    let pass = max < c && max > 0.0 && phi.values().iter().all(|&v| v > 0.0 || v.abs() <= floor);
    ProfileBounds {
        min,
        max,
        c,
        floor,
        pass,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrestRemark {
    pub strictly_decreasing_tail: bool,
    /// `max φ` over `[λ₀ + h, ∞)`.
    pub max_off_crest: f64,
    pub half_speed: f64,
    pub pass: bool,
}

/// `φ' < 0` on the right tail (down to the spectral floor) and `φ < c/2`
/// away from the crest point itself.
pub fn crest_remark_check(wave: &SolitaryWave) -> CrestRemark {
    let g = &wave.grid;
    let v = wave.phi.values();
    let j0 = wave.phi.argmax();
    let floor = 100.0 * SPECTRAL_FLOOR * wave.phi.sup();
    let strictly_decreasing_tail = (j0..g.len() - 1)
        .take_while(|&j| v[j + 1] > floor)
        .all(|j| v[j + 1] < v[j]);
    let max_off_crest = v[j0 + 1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let half_speed = 0.5 * wave.c.get();
    CrestRemark {
        strictly_decreasing_tail,
        max_off_crest,
        half_speed,
        pass: strictly_decreasing_tail && max_off_crest < half_speed,
    }
}

/// Exact comparison `(qn)! ≤ (qⁿ n!)^q` for `n ≤ 20`, `1 ≤ q ≤ 5`.
pub fn factorial_inequality_holds(n: u32, q: u32) -> Result<bool> {
    if n > 20 || q == 0 || q > 5 {
        return Err(Error::Input(format!("factorial check needs n <= 20, 1 <= q <= 5 (got n={n}, q={q})")));
    }
    let fact = |k: u32| (1..=k).fold(BigUint::from(1u32), |a, i| a * i);
    let lhs = fact(q * n);
    let inner = BigUint::from(q).pow(n) * fact(n);
    Ok(lhs <= inner.pow(q))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MomentDeviation {
    pub deviation: f64,
    pub lhs_sup: f64,
}

impl MomentDeviation {
    pub fn relative(&self) -> f64 {
        if self.lhs_sup == 0.0 {
            self.deviation
        } else {
            self.deviation / self.lhs_sup
        }
    }
}

/// Discrete linear convolution `(f∗g)(x_i) = h Σ_j f(x_j) g(x_i - x_j)`
/// with zero extension, by zero-padded FFT.
pub fn linear_convolution(grid: &Grid, f: &[f64], g: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let big = 2 * n;
    let pad = |v: &[f64]| {
        let mut b = vec![Complex64::new(0.0, 0.0); big];
        for (slot, &x) in b.iter_mut().zip(v) {
            *slot = Complex64::new(x, 0.0);
        }
        grid::fft_forward(&mut b);
        b
    };
    let (ff, gg) = (pad(f), pad(g));
    let mut prod: Vec<Complex64> = ff.iter().zip(&gg).map(|(a, b)| a * b).collect();
    grid::fft_inverse(&mut prod);
    // x_j + x_k = x_{j+k-N/2}
    let h = grid.spacing();
    (0..n).map(|i| h * prod[i + n / 2].re).collect()
}

/// [`linear_convolution`] by direct summation over the support of `f`.
/// Rounding then scales with the terms at each point rather than with the
/// global FFT magnitude, which matters when large moments cancel.
pub fn linear_convolution_direct(grid: &Grid, f: &[f64], g: &[f64]) -> Vec<f64> {
    let n = grid.len() as i64;
    let h = grid.spacing();
    let support: Vec<usize> = (0..f.len()).filter(|&j| f[j] != 0.0).collect();
    par::map_indexed(grid.len(), |i| {
        // x_i - x_j = x_{i - j + N/2}
        h * support
            .iter()
            .filter_map(|&j| {
                let k = i as i64 - j as i64 + n / 2;
                (0..n).contains(&k).then(|| f[j] * g[k as usize])
            })
            .sum::<f64>()
    })
}

/// `sup |xⁿ (f∗g) - Σ_j C(n,j) (x^{n-j} f) ∗ (x^j g)|` on the grid.
pub fn convolution_moment_identity(f: &SpectralField, g: &SpectralField, n: u32) -> Result<MomentDeviation> {
    if n > 6 {
        return Err(Error::Input(format!("moment order {n} exceeds 6")));
    }
    if f.grid() != g.grid() {
        return Err(Error::Input("fields live on different grids".into()));
    }
    for field in [f, g] {
        let limit = 1e-8 * field.sup_abs();
        if field.boundary_magnitude() > limit {
            return Err(Error::Truncation {
                boundary: field.boundary_magnitude(),
                limit,
            });
        }
    }
    let grid = f.grid();
    let xs = grid.points();
    let moment = |v: &[f64], k: u32| -> Vec<f64> { v.iter().zip(&xs).map(|(a, x)| a * x.powi(k as i32)).collect() };
    let base = linear_convolution_direct(grid, f.values(), g.values());
    let lhs: Vec<f64> = base.iter().zip(&xs).map(|(v, x)| v * x.powi(n as i32)).collect();
    let mut rhs = vec![0.0; grid.len()];
    for j in 0..=n {
        let binom = (0..j).fold(1.0, |a, i| a * (n - i) as f64 / (i + 1) as f64);
        let conv = linear_convolution_direct(grid, &moment(f.values(), n - j), &moment(g.values(), j));
        rhs.iter_mut().zip(&conv).for_each(|(r, v)| *r += binom * v);
    }
    let deviation = lhs.iter().zip(&rhs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let lhs_sup = lhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(MomentDeviation { deviation, lhs_sup })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightProbe {
    pub x: f64,
    pub eps: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightReport {
    pub l: f64,
    pub m: f64,
    pub b_measured: f64,
    pub probes: Vec<WeightProbe>,
}

/// `(1+ε|x|)^m |x|^{-l} ∫ |y|^l (1+ε|y|)^{-m} (1+|x-y|)^{-m} dy`.
pub fn weight_ratio(l: f64, m: f64, x: f64, eps: f64) -> Result<f64> {
    // normalized so the integrand is O(1) at its peak y = x
    let norm = (1.0 + eps * x.abs()).powf(m) / x.abs().powf(l);
    let f = |y: f64| norm * y.abs().powf(l) / ((1.0 + eps * y.abs()).powf(m) * (1.0 + (x - y).abs()).powf(m));
    let tol = Tolerance::default();
    // by symmetry of the weights, integrate in u = sign(x) y so the peak sits at u = |x| > 0
    let s = x.signum();
    let g = |u: f64| f(s * u);
    let ax = x.abs();
    let w = ax.min(1.0);
    let behind = quad::integrate_to_inf(|t| g(-t), 0.0, tol)?;
    let inner = quad::integrate(g, 0.0, ax - w, tol)? + quad::integrate(g, ax - w, ax, tol)?;
    let outer = quad::integrate(g, ax, ax + 1.0, tol)? + quad::integrate_to_inf(|t| g(ax + 1.0 + t), 0.0, tol)?;
    Ok(behind + inner + outer)
}

/// Largest [`weight_ratio`] over the probe set.
pub fn weight_inequality_constant(l: f64, m: f64, xs: &[f64], eps_set: &[f64]) -> Result<WeightReport> {
    if !(l > 0.0 && l < m - 1.0) {
        return Err(Error::Input(format!("need 0 < l < m - 1 (got l={l}, m={m})")));
    }
    if let Some(x) = xs.iter().find(|x| !(x.abs() >= 1.0)) {
        return Err(Error::Input(format!("probe |x| = {} below 1", x.abs())));
    }
    if let Some(e) = eps_set.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(Error::Input(format!("epsilon {e} outside (0, 1)")));
    }
    let mut probes = Vec::new();
    for &x in xs {
        for &eps in eps_set {
            probes.push(WeightProbe {
                x,
                eps,
                ratio: weight_ratio(l, m, x, eps)?,
            });
        }
    }
    let b_measured = probes.iter().fold(0.0f64, |a, p| a.max(p.ratio));
    Ok(WeightReport {
        l,
        m,
        b_measured,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid() -> Grid {
        Grid::new(40.0, 1 << 12).unwrap()
    }

    fn sech2(x: f64) -> f64 {
        1.0 / x.cosh().powi(2)
    }

    #[test]
    fn shifted_crest_is_located() {
        let g = grid();
        let phi = SpectralField::from_fn(g, |x| sech2(x - 3.0)).unwrap();
        let r = verify_symmetry(&phi, 1e-7).unwrap();
        assert!((r.crest_location - 3.0).abs() <= g.spacing() / 10.0);
        assert_eq!(r.crest_count, 1);
    }

    #[test]
    fn two_crests_fail() {
        let g = grid();
        let phi = SpectralField::from_fn(g, |x| sech2(x) + 0.5 * sech2(x - 5.0)).unwrap();
        let r = verify_symmetry(&phi, 1e-7).unwrap();
        assert_eq!(r.crest_count, 2);
        assert!(!r.pass);
    }

    #[test]
    fn flat_profile_is_degenerate() {
        let g = grid();
        let phi = SpectralField::from_values(g, vec![0.2; g.len()]).unwrap();
        assert!(matches!(verify_symmetry(&phi, 1e-7), Err(Error::Degenerate(_))));
    }

    #[test]
    fn even_profile_scan() {
        let g = grid();
        let phi = SpectralField::from_fn(g, sech2).unwrap();
        let s = moving_plane_scan(&phi).unwrap();
        assert!(!s.degenerate);
        assert!(s.lambda_star.abs() <= g.spacing());
    }

    #[test]
    fn ramp_is_degenerate() {
        let g = grid();
        let l = g.half_length();
        let phi = SpectralField::from_fn(g, |x| (l - x) / (2.0 * l)).unwrap();
        let s = moving_plane_scan(&phi).unwrap();
        assert!(s.degenerate);
        assert_eq!(s.lambda_star, g.x(0));
    }

    #[test]
    fn undecayed_profile_is_truncated() {
        let g = grid();
        let phi = SpectralField::from_fn(g, |x| sech2(x) + 0.1).unwrap();
        assert!(matches!(moving_plane_scan(&phi), Err(Error::Truncation { .. })));
    }

    #[test]
    fn weighted_norm_examples() {
        let g = Grid::new(40.0, 1 << 14).unwrap();
        let phi = SpectralField::from_fn(g, |x| (-x.abs()).exp()).unwrap();
        assert_abs_diff_eq!(weighted_norm(&phi, 0.0, f64::INFINITY).unwrap(), 1.0, epsilon = 1e-15);
        let e = (-1.0f64).exp();
        assert_abs_diff_eq!(weighted_norm(&phi, 1.0, f64::INFINITY).unwrap(), e, epsilon = 1e-5);
        // ∫ e^{-2|x|} = 1
        assert_abs_diff_eq!(weighted_norm(&phi, 0.0, 2.0).unwrap(), 1.0, epsilon = 1e-4);
        assert!(weighted_norm(&phi, -1.0, 2.0).is_err());
    }

    #[test]
    fn factorial_examples() {
        assert!(factorial_inequality_holds(1, 1).unwrap());
        assert!(factorial_inequality_holds(2, 2).unwrap());
        assert!(factorial_inequality_holds(3, 3).unwrap());
        assert!(factorial_inequality_holds(0, 1).unwrap());
        assert!(factorial_inequality_holds(21, 1).is_err());
        assert!(factorial_inequality_holds(2, 6).is_err());
        assert!(factorial_inequality_holds(2, 0).is_err());
    }

    #[test]
    fn linear_convolution_matches_direct_sum() {
        let g = Grid::new(10.0, 256).unwrap();
        let f: Vec<f64> = g.points().iter().map(|x| (-x * x).exp()).collect();
        let k: Vec<f64> = g.points().iter().map(|x| (-(x - 1.0).powi(2)).exp() * x).collect();
        let fast = linear_convolution(&g, &f, &k);
        let direct = linear_convolution_direct(&g, &f, &k);
        for (a, b) in fast.iter().zip(&direct) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn moment_identity_examples() {
        let g = Grid::new(20.0, 1 << 10).unwrap();
        let f = SpectralField::from_fn(g, |x| (-x * x).exp()).unwrap();
        assert_eq!(convolution_moment_identity(&f, &f, 0).unwrap().deviation, 0.0);
        assert!(convolution_moment_identity(&f, &f, 2).unwrap().relative() <= 1e-8);
        assert!(convolution_moment_identity(&f, &f, 7).is_err());
        let wide = SpectralField::from_fn(g, |x| 1.0 / (1.0 + x * x)).unwrap();
        assert!(matches!(
            convolution_moment_identity(&wide, &f, 1),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn weight_constant_preconditions() {
        assert!(weight_inequality_constant(2.0, 3.0, &[1.0], &[0.5]).is_err());
        assert!(weight_inequality_constant(1.0, 3.0, &[0.5], &[0.5]).is_err());
        let r = weight_inequality_constant(1.0, 3.0, &[1.0, 10.0, 100.0], &[0.01, 0.5, 0.99]).unwrap();
        assert!(r.b_measured.is_finite());
        assert!(r.probes.iter().all(|p| p.ratio <= r.b_measured));
    }

    #[test]
    fn weight_ratio_far_field_limit() {
        // for |x| → ∞ the ratio tends to ∫ (1+|t|)^{-m} dt = 2/(m-1)
        for (l, m) in [(1.0, 3.0), (2.0, 4.0)] {
            for eps in [1e-3, 0.5, 0.9] {
                for x in [1e5, -1e5] {
                    let r = weight_ratio(l, m, x, eps).unwrap();
                    assert!((r - 2.0 / (m - 1.0)).abs() <= 1e-3, "l={l} m={m} eps={eps} x={x}: {r}");
                }
            }
        }
    }
}
