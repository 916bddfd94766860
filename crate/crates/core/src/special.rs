//! Special functions behind the singular part of the kernels.
//!
//! The kernels are split as `s(ξ) = Σ_k b_k (1+ξ²)^{-k/4} + r(ξ)`. Each model
//! term is a Bessel potential with the closed form
//!
//! ```text
//! (1/π) ∫_0^∞ (1+ξ²)^{-σ} cos(xξ) dξ = (x/2)^{σ-1/2} K_{σ-1/2}(x) / (√π Γ(σ))
//! ```
//!
//! and `K_ν(x) = ∫_0^∞ exp(-x cosh t) cosh(νt) dt` is evaluated by the
//! trapezoid rule, which converges geometrically for this integrand.
//!
//! The same far-field coefficients also fix the power/log singularities of
//! the kernel at the origin; [`SingularExpansion`] turns them into the
//! endpoint corrections of the punctured trapezoid rule (zeta-function
//! corrections for `|y|^s g(y)` and `|y|^{2n} log|y| g(y)`).

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Number of far-field terms removed from each symbol.
pub const FAR_FIELD_TERMS: usize = 9;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

/// ζ(1/2 - i) for i = 0..=9.
const ZETA_HALF: [f64; 10] = [
    -1.460_354_508_809_586_8,
    -0.207_886_224_977_354_57,
    -0.025_485_201_889_833_036,
    0.008_516_928_777_850_331,
    0.004_441_011_335_479_432,
    -0.003_091_669_247_215_833_8,
    -0.002_671_458_019_899_224_4,
    0.002_746_767_939_536_868_7,
    0.003_269_039_572_600_22,
    -0.004_416_032_873_004_89,
];

/// ζ'(-2i) for i = 0..=4.
const ZETA_PRIME_EVEN: [f64; 5] = [
    -0.918_938_533_204_672_8,
    -0.030_448_457_058_393_27,
    0.007_983_811_450_268_625,
    -0.005_899_759_143_515_937,
    0.008_316_161_985_602_248,
];

/// ζ at a non-positive odd integer `-(2i+1)`, i = 0..=3.
const ZETA_NEG_ODD: [f64; 4] = [-1.0 / 12.0, 1.0 / 120.0, -1.0 / 252.0, 1.0 / 240.0];

fn zeta_at(s: f64) -> f64 {
    // s is either 1/2 - i or a negative integer here
    let twice = (2.0 * s).round() as i64;
    if twice % 2 != 0 {
        let i = ((0.5 - s).round()) as usize;
        return ZETA_HALF[i];
    }
    let k = -(s.round() as i64);
    if k == 0 {
        -0.5
    } else if k % 2 == 0 {
        0.0
    } else {
        ZETA_NEG_ODD[((k - 1) / 2) as usize]
    }
}

/// Generalized binomial coefficient `C(a, i)`.
pub fn binomial(a: f64, i: usize) -> f64 {
    (0..i).fold(1.0, |acc, l| acc * (a - l as f64) / (l as f64 + 1.0))
}

/// Coefficients `b_k` of `Σ_k b_k (1+ξ²)^{-k/4}` whose large-|ξ| expansion
/// agrees with `Σ_j α_j |ξ|^{-j/2}` through `j = α.len()`.
pub fn model_coefficients(alpha: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; alpha.len()];
    for j in 1..=alpha.len() {
        let mut v = alpha[j - 1];
        let mut i = 1;
        while 4 * i < j {
            let k = j - 4 * i;
            v -= b[k - 1] * binomial(-(k as f64) / 4.0, i);
            i += 1;
        }
        b[j - 1] = v;
    }
    b
}

/// `Σ_k b_k (1+ξ²)^{-k/4}` together with its inverse transform.
#[derive(Debug, Clone)]
pub struct BesselModel {
    coefs: Vec<f64>,
    // ν_k = k/4 - 1/2
    orders: Vec<f64>,
    // b_k / (√π Γ(k/4))
    scales: Vec<f64>,
}

impl BesselModel {
    pub fn new(coefs: Vec<f64>) -> Self {
        let orders: Vec<f64> = (1..=coefs.len()).map(|k| k as f64 / 4.0 - 0.5).collect();
        let scales = coefs
            .iter()
            .enumerate()
            .map(|(i, b)| b / (PI.sqrt() * gamma((i + 1) as f64 / 4.0)))
            .collect();
        Self {
            coefs,
            orders,
            scales,
        }
    }

    pub fn coefs(&self) -> &[f64] {
        &self.coefs
    }

    pub fn symbol(&self, xi: f64) -> f64 {
        let q = 1.0 + xi * xi;
        self.coefs
            .iter()
            .enumerate()
            .map(|(i, b)| b * q.powf(-((i + 1) as f64) / 4.0))
            .sum()
    }

    /// Inverse transform at `x != 0` (even in `x`).
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        if x == 0.0 {
            return f64::INFINITY;
        }
        if x > 700.0 {
            return 0.0;
        }
        let k_vals = bessel_k_family(&self.orders, x);
        let half = 0.5 * x;
        self.scales
            .iter()
            .zip(&self.orders)
            .zip(&k_vals)
            .map(|((s, nu), kv)| s * half.powf(*nu) * kv)
            .sum()
    }

    /// Value at the origin after removing the power/log singular terms.
    pub fn finite_part_at_origin(&self) -> f64 {
        self.scales
            .iter()
            .zip(&self.orders)
            .map(|(s, &nu)| {
                let f = if nu.abs() < 1e-12 {
                    std::f64::consts::LN_2 - EULER_GAMMA
                } else if (nu - nu.round()).abs() < 1e-12 && nu > 0.0 {
                    0.5 * gamma(nu)
                } else {
                    PI / (2.0 * (nu * PI).sin() * gamma(1.0 - nu))
                };
                s * f
            })
            .sum()
    }
}

/// `K_ν(x)` for several orders at one `x > 0`.
pub fn bessel_k_family(orders: &[f64], x: f64) -> Vec<f64> {
    let tau = if x <= 4.0 { 0.125 } else { 0.25 / x.sqrt() };
    let mut acc = vec![0.0; orders.len()];
    let growth: Vec<f64> = orders.iter().map(|nu| (nu.abs() * tau).exp()).collect();
    let mut pow: Vec<f64> = vec![1.0; orders.len()];
    let nu_max = orders.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut i = 0usize;
    loop {
        let t = tau * i as f64;
        let arg = x * t.cosh();
        let e = (-arg).exp();
        let w = if i == 0 { 0.5 } else { 1.0 };
        for ((a, p), _) in acc.iter_mut().zip(&pow).zip(orders) {
            *a += w * e * 0.5 * (p + 1.0 / p);
        }
        for (p, g) in pow.iter_mut().zip(&growth) {
            *p *= g;
        }
        // past the peak the integrand falls double-exponentially
        if arg > 1.0 && arg - nu_max * t > 45.0 {
            break;
        }
        if e == 0.0 {
            break;
        }
        i += 1;
    }
    acc.iter().map(|a| a * tau).collect()
}

/// One singular term of a kernel at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingularTerm {
    /// `coef · |x|^s` with `s` not an even integer.
    Power { coef: f64, s: f64 },
    /// `coef · |x|^{2n} log|x|`.
    Log { coef: f64, n: u32 },
}

/// Power/log terms of `F^{-1}(Σ α_j |ξ|^{-j/2})` near the origin.
#[derive(Debug, Clone, Default)]
pub struct SingularExpansion {
    terms: Vec<SingularTerm>,
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

impl SingularExpansion {
    pub fn from_far_field(alpha: &[f64]) -> Self {
        let mut terms = Vec::new();
        for (i, &a_j) in alpha.iter().enumerate() {
            if a_j == 0.0 {
                continue;
            }
            let j = i + 1;
            let a = j as f64 / 2.0;
            let term = if j % 2 == 1 {
                SingularTerm::Power {
                    coef: a_j * gamma(1.0 - a) * (PI * a / 2.0).sin() / PI,
                    s: a - 1.0,
                }
            } else if j % 4 == 0 {
                let n = (j / 4) as u32;
                let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                SingularTerm::Power {
                    coef: a_j * sign / (2.0 * factorial(2 * n - 1)),
                    s: (2 * n - 1) as f64,
                }
            } else {
                let n = ((j - 2) / 4) as u32;
                let sign = if n.is_multiple_of(2) { -1.0 } else { 1.0 };
                SingularTerm::Log {
                    coef: a_j * sign / (PI * factorial(2 * n)),
                    n,
                }
            };
            terms.push(term);
        }
        Self { terms }
    }

    pub fn terms(&self) -> &[SingularTerm] {
        &self.terms
    }

    /// Leading coefficient of `|x|^{-1/2}` (zero if absent).
    pub fn inverse_sqrt_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .find_map(|t| match *t {
                SingularTerm::Power { coef, s } if (s + 0.5).abs() < 1e-12 => Some(coef),
                _ => None,
            })
            .unwrap_or(0.0)
    }

    /// Weights `w_{2m}`, m = 0..3, such that for smooth decaying `g`
    ///
    /// `h Σ_{j≠0} H(jh) g(jh) = ∫ (H - H_fin(0)) g + Σ_m w_{2m} g^{(2m)}(0) + ...`
    ///
    /// where the punctured sum is over the singular terms only.
    pub fn trapezoid_corrections(&self, h: f64) -> Result<[f64; 3]> {
        if !(h > 0.0) {
            return Err(Error::Input("grid spacing must be positive".into()));
        }
        let mut w = [0.0; 3];
        let log_h = h.ln();
        for term in &self.terms {
            for (m, slot) in w.iter_mut().enumerate() {
                let mm = 2 * m as u32;
                let denom = factorial(mm);
                match *term {
                    SingularTerm::Power { coef, s } => {
                        let arg = -s - mm as f64;
                        *slot += coef * 2.0 * zeta_at(arg) * h.powf(s + mm as f64 + 1.0) / denom;
                    }
                    SingularTerm::Log { coef, n } => {
                        let e = 2 * n + mm;
                        let zp = ZETA_PRIME_EVEN
                            .get((e / 2) as usize)
                            .copied()
                            .ok_or_else(|| Error::Input("log term order out of range".into()))?;
                        let z = if e == 0 { -0.5 } else { 0.0 };
                        *slot += coef * 2.0 * (-zp + z * log_h) * h.powi(e as i32 + 1) / denom;
                    }
                }
            }
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bessel_half_order_is_elementary() {
        // K_{1/2}(x) = sqrt(π/(2x)) e^{-x}
        for &x in &[1e-6, 1e-3, 0.1, 1.0, 5.0, 30.0, 120.0] {
            let k = bessel_k_family(&[0.5], x)[0];
            let exact = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert_relative_eq!(k, exact, max_relative = 1e-13);
        }
    }

    #[test]
    fn bessel_k0_and_k1_reference_values() {
        // Abramowitz & Stegun table values
        let k = bessel_k_family(&[0.0, 1.0], 1.0);
        assert_relative_eq!(k[0], 0.421_024_438_240_708_3, max_relative = 1e-13);
        assert_relative_eq!(k[1], 0.601_907_230_197_234_6, max_relative = 1e-13);
    }

    #[test]
    fn unit_order_model_is_half_exponential() {
        // (1/π)∫(1+ξ²)^{-1} cos(xξ) dξ = e^{-|x|}/2
        let model = BesselModel::new(vec![0.0, 0.0, 0.0, 1.0]);
        for &x in &[1e-4, 0.3, 2.0, 10.0] {
            assert_relative_eq!(model.eval(x), 0.5 * (-x).exp(), max_relative = 1e-13);
        }
        assert_relative_eq!(model.finite_part_at_origin(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn leading_model_term_matches_singular_coefficient() {
        let model = BesselModel::new(vec![1.0]);
        let exp = SingularExpansion::from_far_field(&[1.0]);
        let a = exp.inverse_sqrt_coefficient();
        assert_relative_eq!(a, 1.0 / (2.0 * PI).sqrt(), max_relative = 1e-14);
        let x = 1e-10;
        let fin = model.eval(x) - a / x.sqrt();
        assert_relative_eq!(fin, model.finite_part_at_origin(), max_relative = 1e-5);
    }

    #[test]
    fn model_coefficients_cancel_far_field() {
        let alpha: Vec<f64> = (1..=9).map(|j| 1.3f64.powi(-j)).collect();
        let b = model_coefficients(&alpha);
        let model = BesselModel::new(b);
        for &xi in &[1e2f64, 1e3, 1e4] {
            let series: f64 = alpha
                .iter()
                .enumerate()
                .map(|(i, a)| a * xi.powf(-((i + 1) as f64) / 2.0))
                .sum();
            let d = (model.symbol(xi) - series).abs();
            assert!(d < 5.0 * xi.powf(-5.0) + 1e-15 * series, "xi = {xi}: {d:e}");
        }
    }

    #[test]
    fn punctured_trapezoid_with_inverse_sqrt() {
        // ∫ |y|^{-1/2} e^{-y²} dy = Γ(1/4)
        let exp = SingularExpansion::from_far_field(&[(2.0 * PI).sqrt()]);
        assert_relative_eq!(exp.inverse_sqrt_coefficient(), 1.0, max_relative = 1e-14);
        let h = 0.01;
        let sum: f64 = (1..4000)
            .map(|j| {
                let y = j as f64 * h;
                2.0 * h * y.powf(-0.5) * (-(y * y)).exp()
            })
            .sum();
        let w = exp.trapezoid_corrections(h).unwrap();
        // g = e^{-y²}: g(0) = 1, g''(0) = -2, g''''(0) = 12
        let corrected = sum - (w[0] - 2.0 * w[1] + 12.0 * w[2]);
        assert_relative_eq!(corrected, gamma(0.25), max_relative = 1e-11);
    }

    #[test]
    fn punctured_trapezoid_with_log() {
        // ∫ log|y| e^{-y²} dy = -(√π/2)(γ + 2 ln 2)
        let exp = SingularExpansion::from_far_field(&[0.0, -PI]);
        let h = 0.01;
        let sum: f64 = (1..4000)
            .map(|j| {
                let y = j as f64 * h;
                2.0 * h * y.ln() * (-(y * y)).exp()
            })
            .sum();
        let w = exp.trapezoid_corrections(h).unwrap();
        let corrected = sum - (w[0] - 2.0 * w[1] + 12.0 * w[2]);
        let exact = -(PI.sqrt() / 2.0) * (EULER_GAMMA + 2.0 * std::f64::consts::LN_2);
        assert_relative_eq!(corrected, exact, max_relative = 1e-11);
    }
}
