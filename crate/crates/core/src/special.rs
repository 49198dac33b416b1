//! Small special-function helpers shared by the density formulas.

use std::f64::consts::PI;

/// sin(πx) with exact argument reduction, so that `sin_pi(n) == 0` for
/// every integer `n`.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    // r in [-1, 1]; the subtraction is exact for representable x.
    let r = x - 2.0 * (x / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0_f64.copysign(r);
    }
    if r.abs() == 0.5 {
        return r.signum();
    }
    // Reflect into [-1/2, 1/2] for full relative accuracy near the zeros.
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

/// cos(πx) with exact argument reduction.
pub fn cos_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let r = (x - 2.0 * (x / 2.0).round()).abs();
    if r <= 0.5 {
        sin_pi(0.5 - r)
    } else {
        -sin_pi(r - 0.5)
    }
}

/// sin(π·θ·F) where the cdf value `cdf` is close to 1 and its complement
/// `sf = 1 - cdf` is known more accurately than `cdf` itself.
pub fn sin_pi_scaled_cdf(theta: f64, cdf: f64, sf: f64) -> f64 {
    if cdf <= 0.5 {
        sin_pi(theta * cdf)
    } else {
        // sin(πθ - πθ·sf)
        sin_pi(theta) * cos_pi(theta * sf) - cos_pi(theta) * sin_pi(theta * sf)
    }
}

/// Euler gamma function (Lanczos approximation, relative error below 1e-14
/// on the positive axis).
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// 1 - (1-x)^a for 0 <= x <= 1, accurate for small x.
pub fn one_minus_pow_complement(x: f64, a: f64) -> f64 {
    -((a * (-x).ln_1p()).exp_m1())
}

/// c·ln(c)/(c−1), with its removable singularity at c = 1 evaluated by a
/// series when |c−1| < 1e-4.
pub fn c_log_c_over_c_minus_1(c: f64) -> f64 {
    let d = c - 1.0;
    if d.abs() < 1e-4 {
        // (1+d)·log(1+d)/d = 1 + d/2 − d²/6 + d³/12 − d⁴/20 + …
        1.0 + d * (0.5 + d * (-1.0 / 6.0 + d * (1.0 / 12.0 - d / 20.0)))
    } else {
        c * c.ln() / d
    }
}

/// Beta function B(a, b).
pub fn beta_fn(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_pi_exact_at_integers() {
        for n in -6..=6 {
            assert_eq!(sin_pi(n as f64), 0.0);
        }
        assert_eq!(sin_pi(0.5), 1.0);
        assert_eq!(sin_pi(1.5), -1.0);
        assert!((sin_pi(0.25) - (PI / 4.0).sin()).abs() < 1e-16);
        assert!((sin_pi(1e-20) - PI * 1e-20).abs() < 1e-35);
    }

    #[test]
    fn cos_pi_matches_std() {
        for k in 0..200 {
            let x = -5.0 + k as f64 * 0.0517;
            assert!((cos_pi(x) - (PI * x).cos()).abs() < 1e-14, "x = {x}");
        }
        assert_eq!(cos_pi(0.0), 1.0);
        assert_eq!(cos_pi(1.0), -1.0);
        assert_eq!(cos_pi(2.0), 1.0);
        assert_eq!(cos_pi(0.5).abs(), 0.0);
    }

    #[test]
    fn scaled_cdf_sine_uses_complement() {
        // θ = 2, F = 1 - 1e-12: sin(2π(1-1e-12)) = -sin(2π·1e-12)
        let s = sin_pi_scaled_cdf(2.0, 1.0 - 1e-12, 1e-12);
        assert!((s + (2.0 * PI * 1e-12)).abs() < 1e-25);
        let s = sin_pi_scaled_cdf(0.7, 0.3, 0.7);
        assert!((s - (PI * 0.21).sin()).abs() < 1e-15);
        let s = sin_pi_scaled_cdf(0.7, 0.8, 0.2);
        assert!((s - (PI * 0.56).sin()).abs() < 1e-15);
    }

    #[test]
    fn gamma_half() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
    }

    #[test]
    fn removable_singularity_branch_is_continuous() {
        for &c in &[1.0 - 1.1e-4, 1.0 - 0.9e-4, 1.0, 1.0 + 0.9e-4, 1.0 + 1.1e-4] {
            let direct = if c == 1.0 { 1.0 } else { c * f64::ln(c) / (c - 1.0) };
            assert!((c_log_c_over_c_minus_1(c) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn pow_complement_small_x() {
        let v = one_minus_pow_complement(1e-18, 0.5);
        assert!((v - 0.5e-18).abs() < 1e-32);
        assert!((one_minus_pow_complement(1.0, 0.5) - 1.0).abs() < 1e-15);
    }
}
