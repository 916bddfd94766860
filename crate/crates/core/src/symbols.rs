//! Fourier multipliers of the normalized Whitham equation.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized wave speed, strictly supercritical.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct WaveSpeed(f64);

impl WaveSpeed {
    pub fn new(c: f64) -> Result<Self> {
        if c.is_finite() && c > 1.0 {
            Ok(Self(c))
        } else {
            Err(Error::Subcritical(c))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Below this |ξ| the even Taylor series is used.
pub const SERIES_SWITCH: f64 = 0.05;

// (tanh ξ / ξ)^{1/2} = Σ a_n ξ^{2n}
const SERIES: [f64; 5] = [
    1.0,
    -1.0 / 6.0,
    19.0 / 360.0,
    -55.0 / 3024.0,
    11813.0 / 1814400.0,
];

pub(crate) fn whitham_series(xi: f64) -> f64 {
    let t = xi * xi;
    SERIES.iter().rev().fold(0.0, |acc, a| acc * t + a)
}

pub(crate) fn whitham_closed(xi: f64) -> f64 {
    (xi.tanh() / xi).sqrt()
}

/// `m(ξ) = (tanh ξ / ξ)^{1/2}`.
pub fn whitham_symbol(xi: f64) -> Result<f64> {
    if !xi.is_finite() {
        return Err(Error::Domain(format!("whitham symbol at non-finite xi = {xi}")));
    }
    Ok(whitham(xi))
}

/// Unchecked evaluation of `m`, for hot loops over finite frequencies.
#[inline]
pub fn whitham(xi: f64) -> f64 {
    let a = xi.abs();
    if a < SERIES_SWITCH {
        whitham_series(a)
    } else {
        whitham_closed(a)
    }
}

/// `m(ξ) / (c - m(ξ))`, the symbol of `H_c`.
pub fn resolvent_symbol(xi: f64, c: WaveSpeed) -> Result<f64> {
    let m = whitham_symbol(xi)?;
    Ok(m / (c.get() - m))
}

/// Root of `tan δ / δ = c²` on `(0, π/2)`: the widest strip `|Im z| ≤ δ` on
/// which `sup |m(z)| < c`.
pub fn strip_halfwidth(c: WaveSpeed) -> f64 {
    let target = c.get() * c.get();
    let f = |d: f64| d.tan() / d - target;
    let mut lo = 1e-15;
    let mut hi = FRAC_PI_2 - 1e-12;
    // f(lo) < 0 < f(hi) for every c > 1 representable here
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Which kernel a table or operator refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Multiplier {
    /// `m`, the symbol of `K`.
    Whitham,
    /// `m / (c - m)`, the symbol of `H_c`.
    Resolvent { c: WaveSpeed },
}

impl Multiplier {
    pub fn eval(&self, xi: f64) -> f64 {
        let m = whitham(xi);
        match self {
            Multiplier::Whitham => m,
            Multiplier::Resolvent { c } => m / (c.get() - m),
        }
    }

    /// Coefficients `α_j` (j = 1, 2, ...) of the far-field expansion
    /// `s(ξ) ~ Σ α_j |ξ|^{-j/2}`, exact up to exponentially small terms.
    pub fn far_field(&self, terms: usize) -> Vec<f64> {
        match self {
            Multiplier::Whitham => (1..=terms).map(|j| if j == 1 { 1.0 } else { 0.0 }).collect(),
            Multiplier::Resolvent { c } => (1..=terms)
                .map(|j| c.get().powi(-(j as i32)))
                .collect(),
        }
    }

    pub fn at_origin(&self) -> f64 {
        self.eval(0.0)
    }

    pub fn speed(&self) -> Option<WaveSpeed> {
        match self {
            Multiplier::Whitham => None,
            Multiplier::Resolvent { c } => Some(*c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    // sqrt(tanh 1), 30-digit reference
    const M_AT_ONE: f64 = 0.872_693_620_897_829_6;

    #[test]
    fn value_at_origin_is_one() {
        assert_eq!(whitham_symbol(0.0).unwrap(), 1.0);
        assert_eq!(whitham_symbol(-0.0).unwrap(), 1.0);
    }

    #[test]
    fn value_at_one() {
        assert_abs_diff_eq!(whitham_symbol(1.0).unwrap(), M_AT_ONE, epsilon = 1e-15);
        assert_abs_diff_eq!(whitham_symbol(1.0).unwrap(), 0.87270, epsilon = 1e-5);
    }

    #[test]
    fn resolvent_values() {
        let c2 = WaveSpeed::new(2.0).unwrap();
        assert_abs_diff_eq!(resolvent_symbol(0.0, c2).unwrap(), 1.0, epsilon = 1e-15);
        let c = WaveSpeed::new(1.3).unwrap();
        assert_eq!(resolvent_symbol(-5.0, c).unwrap(), resolvent_symbol(5.0, c).unwrap());
        let c = WaveSpeed::new(1.5).unwrap();
        let expected = M_AT_ONE / (1.5 - M_AT_ONE);
        assert_abs_diff_eq!(resolvent_symbol(1.0, c).unwrap(), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 1.391_176_066_385_406, epsilon = 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(whitham_symbol(f64::NAN).is_err());
        assert!(whitham_symbol(f64::INFINITY).is_err());
        assert!(WaveSpeed::new(1.0).is_err());
        assert!(WaveSpeed::new(0.9).is_err());
        assert!(WaveSpeed::new(f64::NAN).is_err());
    }

    #[test]
    fn evenness_is_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let c = WaveSpeed::new(1.7).unwrap();
        let mult = Multiplier::Resolvent { c };
        for _ in 0..10_000 {
            let xi: f64 = rng.gen_range(-1e3..1e3);
            assert_eq!(whitham(xi), whitham(-xi));
            assert_eq!(mult.eval(xi), mult.eval(-xi));
        }
    }

    #[test]
    fn strictly_decreasing_on_log_grid() {
        let pts: Vec<f64> = (0..=4000).map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / 4000.0)).collect();
        for w in pts.windows(2) {
            assert!(whitham(w[1]) < whitham(w[0]), "not decreasing at {}", w[0]);
        }
    }

    #[test]
    fn far_field_rate() {
        let xi = 1e8;
        assert_abs_diff_eq!(whitham(xi) * xi.sqrt(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn branches_agree_near_switch() {
        for i in 0..=200 {
            let xi = SERIES_SWITCH * (0.5 + i as f64 / 200.0);
            let d = (whitham_series(xi) - whitham_closed(xi)).abs();
            assert!(d <= 1e-13, "branch mismatch {d:e} at {xi}");
        }
    }

    #[test]
    fn strip_halfwidth_examples() {
        let near_one = WaveSpeed::new(1.0 + 1e-6).unwrap();
        assert!(strip_halfwidth(near_one) < 1e-2);
        let c = WaveSpeed::new((1f64.tan()).sqrt()).unwrap();
        assert_abs_diff_eq!(c.get(), 1.24796, epsilon = 1e-5);
        assert_abs_diff_eq!(strip_halfwidth(c), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn strip_halfwidth_root_certificate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let c: f64 = rng.gen_range(1.0001..=3.0);
            let d = strip_halfwidth(WaveSpeed::new(c).unwrap());
            assert!(d > 0.0 && d < FRAC_PI_2);
            assert!((d.tan() / d - c * c).abs() <= 1e-10, "c = {c}");
        }
    }

    proptest! {
        #[test]
        fn strip_halfwidth_increasing(a in 1.0001f64..2.9, gap in 1e-3f64..0.1) {
            let lo = strip_halfwidth(WaveSpeed::new(a).unwrap());
            let hi = strip_halfwidth(WaveSpeed::new(a + gap).unwrap());
            prop_assert!(hi > lo);
        }

        #[test]
        fn bounds(xi in -1e6f64..1e6, c in 1.0001f64..3.0) {
            let m = whitham(xi);
            prop_assert!(m > 0.0 && m <= 1.0);
            let r = Multiplier::Resolvent { c: WaveSpeed::new(c).unwrap() }.eval(xi);
            prop_assert!(r > 0.0 && r <= 1.0 / (c - 1.0) * (1.0 + 1e-12));
        }
    }
}
