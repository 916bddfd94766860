//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel: (estimate, error estimate).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = r * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * r, ((kron - gauss) * r).abs())
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-13,
            rel: 1e-11,
            max_panels: 20_000,
        }
    }
}

/// Adaptive integral of `f` over `[a, b]`, bisecting the worst panel until
/// the summed error estimate meets the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut panels = vec![(a, b, gk15(&f, a, b))];
    loop {
        let (total, err) = panels
            .iter()
            .fold((0.0, 0.0), |(s, e), p| (s + p.2 .0, e + p.2 .1));
        if !total.is_finite() {
            return Err(Error::Domain("non-finite integrand".into()));
        }
        if err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= tol.max_panels {
            return Err(Error::NonConvergence {
                iterations: panels.len(),
                residual: err,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        panels.push((lo, mid, gk15(&f, lo, mid)));
        panels.push((mid, hi, gk15(&f, mid, hi)));
    }
}

/// Integral over `[a, ∞)` through `x = a + t/(1-t)`.
pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> Result<f64> {
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let one_minus = 1.0 - t;
            let x = a + t / one_minus;
            let v = f(x) / (one_minus * one_minus);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Sum of adaptive integrals over consecutive breakpoints.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: Tolerance) -> Result<f64> {
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += integrate(&f, w[0], w[1], tol)?;
    }
    Ok(total)
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums; returns
/// the last even-column estimate and the change from the previous one.
pub fn wynn_epsilon(partial_sums: &[f64]) -> (f64, f64) {
    let n = partial_sums.len();
    if n < 3 {
        let last = partial_sums.last().copied().unwrap_or(0.0);
        return (last, f64::INFINITY);
    }
    // e[k] holds column k of the table, aligned at the newest entries
    let mut prev = vec![0.0; n + 1];
    let mut cur = partial_sums.to_vec();
    let mut best = (cur[n - 1], (cur[n - 1] - cur[n - 2]).abs());
    let mut col = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 {
                // converged exactly
                return (cur[i + 1], 0.0);
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        col += 1;
        if col % 2 == 0 && cur.len() >= 2 {
            let m = cur.len();
            let est = cur[m - 1];
            let err = (cur[m - 1] - cur[m - 2]).abs();
            if err.is_finite() && err < best.1 {
                best = (est, err);
            }
        }
    }
    best
}

/// `(1/π) ∫_0^∞ f(ξ) cos(xξ) dξ` for `x > 0` and `f` slowly decaying:
/// adaptive panels between consecutive zeros of `cos(xξ)`, whose alternating
/// partial sums are accelerated by [`wynn_epsilon`].
pub fn cosine_transform<F: Fn(f64) -> f64>(f: F, x: f64, panels: usize, tol: Tolerance) -> Result<(f64, f64)> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Input(format!("cosine transform needs x > 0, got {x}")));
    }
    let g = |xi: f64| f(xi) * (x * xi).cos();
    let period = std::f64::consts::PI / x;
    let mut edge = 0.5 * period;
    let mut sum = integrate(g, 0.0, edge, tol)?;
    let mut partial = vec![sum];
    for _ in 0..panels {
        sum += integrate(g, edge, edge + period, tol)?;
        edge += period;
        partial.push(sum);
    }
    let (v, err) = wynn_epsilon(&partial);
    Ok((v / std::f64::consts::PI, err / std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_and_exponential() {
        let v = integrate(|x| x * x * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert_abs_diff_eq!(v, 4.0, epsilon = 1e-13);
        let v = integrate_to_inf(|x| (-x).exp(), 0.0, Tolerance::default()).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-11);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-1/2} = 2
        let v = integrate(|x| x.powf(-0.5), 0.0, 1.0, Tolerance::default()).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn epsilon_accelerates_alternating_series() {
        // Σ (-1)^k / (k+1) = ln 2
        let mut s = 0.0;
        let partial: Vec<f64> = (0..20)
            .map(|k| {
                s += if k % 2 == 0 { 1.0 } else { -1.0 } / (k as f64 + 1.0);
                s
            })
            .collect();
        let (v, _) = wynn_epsilon(&partial);
        assert_abs_diff_eq!(v, std::f64::consts::LN_2, epsilon = 1e-12);
    }

    #[test]
    fn cosine_transform_of_slow_decay() {
        // (1/π)∫_0^∞ ξ^{-1/2} cos(xξ) dξ = (2πx)^{-1/2}
        let x = 0.3;
        let (v, _) = cosine_transform(|t: f64| t.powf(-0.5), x, 40, Tolerance::default()).unwrap();
        assert_abs_diff_eq!(v, 1.0 / (2.0 * std::f64::consts::PI * x).sqrt(), epsilon = 1e-8);
        // (1/π)∫ cos(xξ)/(1+ξ²) = e^{-x}/2
        let (v, _) = cosine_transform(|t: f64| 1.0 / (1.0 + t * t), 2.0, 40, Tolerance::default()).unwrap();
        assert_abs_diff_eq!(v, 0.5 * (-2.0f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn algebraic_tail() {
        let v = integrate_to_inf(|x| 1.0 / (1.0 + x * x), 0.0, Tolerance::default()).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::FRAC_PI_2, epsilon = 1e-10);
    }
}
