//! Kernel synthesis and kernel certificates.
//!
//! A symbol `s` with far-field expansion `Σ_j α_j |ξ|^{-j/2}` is split as
//!
//! ```text
//! s(ξ) = Σ_k b_k (1+ξ²)^{-k/4} + r(ξ),      r(ξ) = O(|ξ|^{-5})
//! ```
//!
//! The model sum carries the whole `|x|^{-1/2}`/log singularity and is
//! inverted in closed form (Bessel potentials, see [`crate::special`]); the
//! remainder `r` is integrable and inverted by the DFT on the grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, Grid, SpectralField};
use crate::par;
use crate::special::{model_coefficients, BesselModel, SingularExpansion, FAR_FIELD_TERMS};
use crate::symbols::{strip_halfwidth, whitham, Multiplier, WaveSpeed};

/// Minimum `ξ_max = πN/(2L)` for kernel synthesis.
pub const MIN_XI_MAX: f64 = 100.0;

/// Relative double-precision noise floor of transformed data.
pub const SPECTRAL_FLOOR: f64 = 1e-13;

/// Default tail window for kernel rate fits.
pub const KERNEL_TAIL_WINDOW: (f64, f64) = (2.0, 8.0);

/// Sampled kernel on a grid, with its singular structure made explicit.
#[derive(Debug, Clone)]
pub struct KernelTable {
    grid: Grid,
    symbol: Option<Multiplier>,
    label: String,
    remainder_symbol: Vec<f64>,
    regular: Vec<f64>,
    singular: Vec<f64>,
    model: BesselModel,
    expansion: SingularExpansion,
    singular_coefficient: f64,
    origin_finite_part: f64,
    fitted_tail_rate: f64,
}

/// Builds the table for one of the two kernels of the equation.
pub fn synthesize_kernel(symbol: Multiplier, grid: Grid) -> Result<KernelTable> {
    let alpha = symbol.far_field(FAR_FIELD_TERMS);
    let label = match symbol {
        Multiplier::Whitham => "K".to_string(),
        Multiplier::Resolvent { c } => format!("H_c(c={})", c.get()),
    };
    build(move |xi| symbol.eval(xi), &alpha, grid, Some(symbol), label)
}

/// Builds a table for an arbitrary even symbol whose far field is
/// `Σ_j far_field[j-1] |ξ|^{-j/2}` (pass an empty slice for none).
pub fn synthesize_custom<F>(symbol: F, far_field: &[f64], grid: Grid, label: &str) -> Result<KernelTable>
where
    F: Fn(f64) -> f64,
{
    let mut alpha = far_field.to_vec();
    alpha.resize(FAR_FIELD_TERMS.max(alpha.len()), 0.0);
    build(symbol, &alpha, grid, None, label.to_string())
}

fn build<F>(
    symbol: F,
    alpha: &[f64],
    grid: Grid,
    multiplier: Option<Multiplier>,
    label: String,
) -> Result<KernelTable>
where
    F: Fn(f64) -> f64,
{
    if grid.xi_max() < MIN_XI_MAX {
        return Err(Error::Resolution {
            xi_max: grid.xi_max(),
            required: MIN_XI_MAX,
        });
    }
    let n = grid.len();
    let h = grid.spacing();
    let model = BesselModel::new(model_coefficients(alpha));

    let mut remainder_symbol = Vec::with_capacity(n);
    let mut spectrum = Vec::with_capacity(n);
    for k in 0..n {
        let xi = grid.xi(k);
        let s = symbol(xi);
        if !s.is_finite() {
            return Err(Error::Domain(format!("symbol not finite at xi = {xi}")));
        }
        let r = s - model.symbol(xi);
        remainder_symbol.push(r);
        let sign = if grid.mode(k) % 2 == 0 { 1.0 } else { -1.0 };
        spectrum.push(Complex64::new(sign * r, 0.0));
    }
    grid::fft_inverse(&mut spectrum);
    let regular: Vec<f64> = spectrum.iter().map(|z| z.re / h).collect();

    // singular part is even; evaluate x > 0 once and mirror
    let origin = grid.origin_index();
    let mut positive = vec![0.0; n / 2];
    par::fill(&mut positive, |i| model.eval(h * (i + 1) as f64));
    let mut singular = vec![0.0; n];
    singular[origin] = if alpha.iter().any(|&a| a != 0.0) {
        f64::INFINITY
    } else {
        model.finite_part_at_origin()
    };
    for i in 0..n / 2 {
        if origin + i + 1 < n {
            singular[origin + i + 1] = positive[i];
        }
        singular[origin - i - 1] = positive[i];
    }

    let origin_finite_part = regular[origin] + model.finite_part_at_origin();
    let mut table = KernelTable {
        grid,
        symbol: multiplier,
        label,
        remainder_symbol,
        regular,
        singular,
        model,
        expansion: SingularExpansion::from_far_field(alpha),
        singular_coefficient: alpha.first().copied().unwrap_or(0.0),
        origin_finite_part,
        fitted_tail_rate: f64::NAN,
    };
    table.fitted_tail_rate = table.tail_rate(KERNEL_TAIL_WINDOW).unwrap_or(f64::NAN);
    Ok(table)
}

impl KernelTable {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn symbol(&self) -> Option<Multiplier> {
        self.symbol
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Smooth remainder sampled on the grid.
    pub fn regular_part(&self) -> &[f64] {
        &self.regular
    }

    /// Closed-form singular part on the grid (`+∞` at the origin when the
    /// symbol has a far field).
    pub fn singular_part(&self) -> &[f64] {
        &self.singular
    }

    /// Coefficient of the far-field term `|ξ|^{-1/2}` of the symbol.
    pub fn singular_coefficient(&self) -> f64 {
        self.singular_coefficient
    }

    /// Coefficient of `|x|^{-1/2}` in the kernel near the origin.
    pub fn origin_singularity(&self) -> f64 {
        self.expansion.inverse_sqrt_coefficient()
    }

    pub fn expansion(&self) -> &SingularExpansion {
        &self.expansion
    }

    pub fn model_coefficients(&self) -> &[f64] {
        self.model.coefs()
    }

    /// Value at the origin once the singular terms are removed.
    pub fn origin_finite_part(&self) -> f64 {
        self.origin_finite_part
    }

    pub fn fitted_tail_rate(&self) -> f64 {
        self.fitted_tail_rate
    }

    pub fn value(&self, j: usize) -> f64 {
        self.regular[j] + self.singular[j]
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|j| self.value(j)).collect()
    }

    /// Kernel value at an arbitrary `x != 0`: trigonometric interpolation of
    /// the remainder plus the closed-form singular part.
    pub fn value_at(&self, x: f64) -> f64 {
        self.regular_at(x) + self.model.eval(x)
    }

    pub fn regular_at(&self, x: f64) -> f64 {
        let sum: f64 = self
            .remainder_symbol
            .iter()
            .enumerate()
            .map(|(k, r)| r * (self.grid.xi(k) * x).cos())
            .sum();
        sum / (2.0 * self.grid.half_length())
    }

    /// Largest |value| over grid points other than the origin.
    pub fn max_abs_off_origin(&self) -> f64 {
        let o = self.grid.origin_index();
        (0..self.grid.len())
            .filter(|&j| j != o)
            .fold(0.0, |m, j| m.max(self.value(j).abs()))
    }

    /// `(x, value)` for grid points with `x > 0`.
    pub fn positive_samples(&self) -> Vec<(f64, f64)> {
        (self.grid.origin_index() + 1..self.grid.len())
            .map(|j| (self.grid.x(j), self.value(j)))
            .collect()
    }

    /// Exponential rate fitted on `window`, clipped to the part of the window
    /// where the samples stay `100x` above the spectral floor.
    pub fn tail_rate(&self, window: (f64, f64)) -> Result<f64> {
        let floor = 100.0 * SPECTRAL_FLOOR * self.max_abs_off_origin();
        let samples: Vec<(f64, f64)> = self
            .positive_samples()
            .into_iter()
            .filter(|&(x, _)| x >= window.0 && x <= window.1)
            .take_while(|&(_, v)| v > floor)
            .collect();
        let hi = samples.last().map(|s| s.0).unwrap_or(window.0);
        fit_decay_rate(&samples, (window.0, hi))
    }

    /// `∫ H(y) g(x - y) dy` on the grid by the punctured trapezoid rule with
    /// zeta-function corrections at the singularity.
    pub fn convolve(&self, g: &SpectralField) -> Result<SpectralField> {
        if g.grid() != &self.grid {
            return Err(Error::Input("field and kernel live on different grids".into()));
        }
        let n = self.grid.len();
        let h = self.grid.spacing();
        let origin = self.grid.origin_index();
        // kernel rearranged so that y = 0 sits at slot 0
        let mut k: Vec<Complex64> = (0..n)
            .map(|d| {
                let j = (origin + d) % n;
                let v = if j == origin {
                    self.origin_finite_part
                } else {
                    self.value(j)
                };
                Complex64::new(v, 0.0)
            })
            .collect();
        grid::fft_forward(&mut k);
        let mut prod: Vec<Complex64> = k.iter().zip(g.coeffs()).map(|(a, b)| a * b).collect();
        grid::fft_inverse(&mut prod);

        let w = self.expansion.trapezoid_corrections(h)?;
        let g2 = g.derivative(2)?;
        let g4 = g.derivative(4)?;
        let values = (0..n)
            .map(|i| {
                h * prod[i].re
                    - (w[0] * g.values()[i] + w[1] * g2.values()[i] + w[2] * g4.values()[i])
            })
            .collect();
        SpectralField::from_values(self.grid, values)
    }
}

/// `c e^{-δ_c x} / M'(δ_c)` with `M(y) = (tan y / y)^{1/2}`: the residue of
/// `m/(c-m)` at its pole `iδ_c`, i.e. the leading large-`x` behaviour of `H_c`.
pub fn pole_asymptote(c: WaveSpeed, x: f64) -> f64 {
    let d = strip_halfwidth(c);
    let m = (d.tan() / d).sqrt();
    let dm = (1.0 / (d.cos().powi(2) * d) - d.tan() / (d * d)) / (2.0 * m);
    c.get() * (-d * x.abs()).exp() / dm
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositivityReport {
    pub kernel: String,
    pub positive: bool,
    pub monotone: bool,
    pub pass: bool,
    /// First grid point where positivity or strict decrease fails.
    pub first_violation: Option<f64>,
    /// Largest x checked: `L/2`, or where the samples reach the floor.
    pub checked_up_to: f64,
    pub floor: f64,
    /// `H(x) / pole_asymptote(x)` at `checked_up_to` (resolvent kernels only).
    pub pole_ratio_at_end: Option<f64>,
}

/// Positivity and strict decrease of the sampled kernel on `(0, L/2]`.
///
/// Samples below the spectral floor carry no information; positivity is
/// checked down to the floor and strict decrease down to `100x` the floor.
pub fn kernel_positivity_monotonicity(table: &KernelTable) -> PositivityReport {
    let grid = table.grid();
    let scale = table.max_abs_off_origin();
    let floor = SPECTRAL_FLOOR * scale;
    let mono_floor = 100.0 * floor;
    let limit = 0.5 * grid.half_length();
    let mut positive = true;
    let mut monotone = true;
    let mut first_violation = None;
    let mut checked_up_to = 0.0;
    let mut prev: Option<f64> = None;
    for j in grid.origin_index() + 1..grid.len() {
        let x = grid.x(j);
        if x > limit {
            break;
        }
        let v = table.value(j);
        if v < -floor || (v <= 0.0 && v.abs() > floor) {
            positive = false;
            first_violation.get_or_insert(x);
            break;
        }
        if v.abs() <= floor {
            break;
        }
        if let Some(p) = prev {
            if v > mono_floor && v >= p {
                monotone = false;
                first_violation.get_or_insert(x);
                break;
            }
        }
        prev = Some(v);
        checked_up_to = x;
    }
    let pole_ratio_at_end = table
        .symbol()
        .and_then(|s| s.speed())
        .filter(|_| checked_up_to > 0.0)
        .map(|c| table.value(grid.nearest_index(checked_up_to)) / pole_asymptote(c, checked_up_to));
    PositivityReport {
        kernel: table.label().to_string(),
        positive,
        monotone,
        pass: positive && monotone,
        first_violation,
        checked_up_to,
        floor,
        pole_ratio_at_end,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CmViolation {
    pub x: f64,
    pub order: usize,
    /// `(-1)^n f^{(n)}` estimate.
    pub signed_derivative: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompleteMonotoneReport {
    pub n_max: usize,
    pub points: usize,
    pub pass: bool,
    pub violations: Vec<CmViolation>,
    /// Smallest `(-1)^n f^{(n)}` seen for each order `n = 0..=n_max`.
    pub min_signed_derivative: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Ratio between neighbouring nodes of the geometric stencil.
pub const CM_STENCIL_RATIO: f64 = 1.05;
const CM_MIN_WIDTH: f64 = 1e-7;

/// `h(x) = m(√x) / (c - m(√x))`, whose complete monotonicity on `(0, ∞)`
/// makes `H_c` positive and decreasing.
pub fn cm_generator(c: WaveSpeed) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        let m = whitham(x.sqrt());
        m / (c.get() - m)
    }
}

/// Finite-difference complete-monotonicity battery for `h` of [`cm_generator`].
pub fn check_complete_monotone(
    c: WaveSpeed,
    n_max: usize,
    points: &[f64],
) -> Result<CompleteMonotoneReport> {
    if let Some(&x) = points.iter().find(|&&x| !(x > 0.0 && x <= 50.0)) {
        return Err(Error::Input(format!("probe point {x} outside (0, 50]")));
    }
    check_complete_monotone_fn(cm_generator(c), n_max, points)
}

/// Checks `(-1)^n n! f[x_0..x_n] ≥ -tol_n` on geometric stencils
/// `x_i = x q^{i - n/2}`; by the mean-value property of divided differences
/// this is necessary for complete monotonicity.
pub fn check_complete_monotone_fn<F>(f: F, n_max: usize, points: &[f64]) -> Result<CompleteMonotoneReport>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    if n_max > 6 {
        return Err(Error::Input(format!("n_max = {n_max} exceeds 6")));
    }
    if let Some(&x) = points.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Input(format!("probe point {x} not in (0, ∞)")));
    }
    struct PointResult {
        x: f64,
        signed: Vec<(usize, f64, f64)>,
        max_abs: f64,
        reduced: Option<usize>,
    }
    let results = par::map(points, |&x| {
        let mut signed = Vec::new();
        let mut max_abs = 0.0f64;
        let mut reduced = None;
        for n in 0..=n_max {
            let nodes: Vec<f64> = (0..=n)
                .map(|i| x * CM_STENCIL_RATIO.powf(i as f64 - n as f64 / 2.0))
                .collect();
            let width = nodes[n] - nodes[0];
            if n >= 2 && width < CM_MIN_WIDTH {
                reduced.get_or_insert(n - 1);
                break;
            }
            let vals: Vec<f64> = nodes.iter().map(|&t| f(t)).collect();
            max_abs = vals.iter().fold(max_abs, |m, v| m.max(v.abs()));
            let dd = divided_difference(&nodes, &vals);
            let fact = (1..=n).fold(1.0, |a, k| a * k as f64);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            signed.push((n, sign * fact * dd, width));
        }
        PointResult {
            x,
            signed,
            max_abs,
            reduced,
        }
    });
    let scale = results.iter().fold(0.0f64, |m, r| m.max(r.max_abs));
    let mut violations = Vec::new();
    let mut min_signed = vec![f64::INFINITY; n_max + 1];
    let mut warnings = Vec::new();
    for r in &results {
        if let Some(order) = r.reduced {
            warnings.push(format!(
                "stencil underflow at x = {:e}: checked orders <= {order}",
                r.x
            ));
        }
        for &(n, v, width) in &r.signed {
            min_signed[n] = min_signed[n].min(v);
            let tol = 1e-8 * width.powi(-(n as i32)) * scale;
            let tol = if n == 0 { 1e-8 * scale } else { tol };
            if v < -tol {
                violations.push(CmViolation {
                    x: r.x,
                    order: n,
                    signed_derivative: v,
                    tolerance: tol,
                });
            }
        }
    }
    Ok(CompleteMonotoneReport {
        n_max,
        points: points.len(),
        pass: violations.is_empty(),
        violations,
        min_signed_derivative: min_signed,
        warnings,
    })
}

fn divided_difference(nodes: &[f64], vals: &[f64]) -> f64 {
    let mut table = vals.to_vec();
    let n = nodes.len();
    for level in 1..n {
        for i in 0..n - level {
            table[i] = (table[i + 1] - table[i]) / (nodes[i + level] - nodes[i]);
        }
    }
    table[0]
}

/// `-slope` of the least-squares line through `(x, log v)` on `window`.
pub fn fit_decay_rate(samples: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::Input(format!("empty fit window [{lo}, {hi}]")));
    }
    let inside: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(x, _)| x >= lo && x <= hi)
        .collect();
    if inside.len() < 10 {
        return Err(Error::Input(format!(
            "need at least 10 samples in [{lo}, {hi}], got {}",
            inside.len()
        )));
    }
    if let Some(&(x, v)) = inside.iter().find(|&&(_, v)| !(v > 0.0)) {
        return Err(Error::Domain(format!("non-positive value {v:e} at x = {x}")));
    }
    let n = inside.len() as f64;
    let mx = inside.iter().map(|p| p.0).sum::<f64>() / n;
    let my = inside.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (sxy, sxx) = inside.iter().fold((0.0, 0.0), |(sxy, sxx), &(x, v)| {
        let dx = x - mx;
        (sxy + dx * (v.ln() - my), sxx + dx * dx)
    });
    Ok(-sxy / sxx)
}

/// Discrete weighted norm `h Σ |x_j|^α |k(x_j)|^p` over grid points `x ≠ 0`.
pub fn weighted_kernel_sum(table: &KernelTable, alpha: f64, p: f64) -> f64 {
    let g = table.grid();
    let h = g.spacing();
    let o = g.origin_index();
    (0..g.len())
        .filter(|&j| j != o)
        .map(|j| h * g.x(j).abs().powf(alpha) * table.value(j).abs().powf(p))
        .sum()
}

/// Unit-mass style check: `h Σ k(x_j)` with the origin sample replaced by the
/// corrected singular weight, which should reproduce the symbol at `ξ = 0`.
pub fn discrete_mass(table: &KernelTable) -> Result<f64> {
    let g = table.grid();
    let one = SpectralField::from_values(*g, vec![1.0; g.len()])?;
    Ok(table.convolve(&one)?.values()[0])
}

/// `√x H(x)` near the origin, the quantity whose limit is the `|x|^{-1/2}`
/// coefficient.
pub fn near_origin_profile(table: &KernelTable, xs: &[f64]) -> Vec<f64> {
    par::map(xs, |&x| x.sqrt() * table.value_at(x))
}
