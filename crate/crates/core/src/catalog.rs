//! Closed-form laws: the Lamperti family, the 𝕌_{α,0} mean and its beta
//! scalings, the uniform and exponential-ratio mean densities, and the
//! stable-subordinator family built on 𝔾_α.
//!
//! Every closed form here also has a generic route through
//! [`transforms`](crate::transforms) on the matching [`DistributionSpec`];
//! [`CatalogEntry::generic`] exposes it so the two can be compared.

use std::f64::consts::{E, PI};
use std::sync::Arc;

use rand::RngCore;

use crate::dist::{
    exp_ratio, lamperti_cdf, lamperti_density, lamperti_sf, uniform01, Arg, DistributionSpec, SpecBuilder, Support,
};
use crate::error::{Error, Result};
use crate::montecarlo::{beta_draw, lamperti_draw};
use crate::quadrature::{self, Node, QuadratureConfig};
use crate::special::{c_log_c_over_c_minus_1, cos_pi, gamma, one_minus_pow_complement, sin_pi};
use crate::transforms::{
    ggc_component_density, scaled_mean_density, scaled_tilted_density, tilted_ggc_density, GgcLaw,
};

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha must lie in (0,1), got {alpha}")))
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("sigma must lie in (0,1], got {sigma}")))
    }
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("c must be positive, got {c}")))
    }
}

/// sin(πy) evaluated from whichever of y, 1−y is smaller.
fn sin_pi_unit(y: f64, om: f64) -> f64 {
    if y <= 0.5 {
        sin_pi(y)
    } else {
        sin_pi(om)
    }
}

/// x·ln x with 0·ln 0 = 0.
fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

// ---------------------------------------------------------------------------
// Lamperti identities

/// The two sine identities of the Lamperti cdf: returns
/// (z·sin πα / √(z²+2z cos πα+1), (sin 2πα + 2z sin πα)/(1+2z cos πα+z²)),
/// which equal sin(πα·F(z)) and sin(2πα·(1−F(z))).
pub fn sin_identities(alpha: f64, z: f64) -> (f64, f64) {
    let (s, c) = (sin_pi(alpha), cos_pi(alpha));
    let q = z * z + 2.0 * z * c + 1.0;
    (z * s / q.sqrt(), (sin_pi(2.0 * alpha) + 2.0 * z * s) / q)
}

// ---------------------------------------------------------------------------
// 𝕌_{α,0} = V/(V+1), V = Z_α^{1/(α+1)}

fn u_denominator(alpha: f64, t: f64, om: f64) -> f64 {
    let a1 = alpha + 1.0;
    t.powf(2.0 * a1) + 2.0 * (t * om).powf(a1) * cos_pi(alpha) + om.powf(2.0 * a1)
}

fn u_alpha0_parts(alpha: f64, t: f64, om: f64) -> f64 {
    if t <= 0.0 || om <= 0.0 {
        return 0.0;
    }
    sin_pi(alpha) / (alpha * PI) * (alpha + 1.0) * (t * om).powf(alpha) / u_denominator(alpha, t, om)
}

/// Density of 𝕌_{α,0} on (0,1).
pub fn u_alpha0_density(alpha: f64, t: f64) -> f64 {
    u_alpha0_parts(alpha, t, 1.0 - t)
}

fn u_alpha0_sf(alpha: f64, t: f64, om: f64) -> f64 {
    lamperti_sf(alpha, (t / om).powf(alpha + 1.0))
}

/// Φ of 𝕌_{α,0}: (1/(2α))·log D(t) − (1/α)·log(α+1).
pub fn phi_u_alpha0(alpha: f64, t: f64) -> f64 {
    u_denominator(alpha, t, 1.0 - t).ln() / (2.0 * alpha) - (alpha + 1.0).ln() / alpha
}

/// ψ of 𝕌_{α,0}, from E[e^{−λΥ_α(1)}] = λ(α+1)/((λ+1)^{α+1} − 1) = e^{−αψ(λ)}.
pub fn psi_u_alpha0(alpha: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    -upsilon_laplace(alpha, lambda).ln() / alpha
}

/// E[e^{−λΥ_α(1)}] = λ(α+1)/((λ+1)^{α+1} − 1).
pub fn upsilon_laplace(alpha: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 1.0;
    }
    lambda * (alpha + 1.0) / (((alpha + 1.0) * lambda.ln_1p()).exp_m1())
}

/// Law of 𝕌_{α,0}.
pub fn u_alpha0_spec(alpha: f64) -> Result<DistributionSpec> {
    check_alpha(alpha)?;
    SpecBuilder::new(
        format!("u_alpha0({alpha})"),
        Support::new(0.0, 1.0),
        Arc::new(move |t: f64| {
            if t <= 0.0 {
                0.0
            } else if t >= 1.0 {
                1.0
            } else {
                lamperti_cdf(alpha, (t / (1.0 - t)).powf(alpha + 1.0))
            }
        }),
        Arc::new(move |t: f64| {
            if t <= 0.0 {
                1.0
            } else if t >= 1.0 {
                0.0
            } else {
                u_alpha0_sf(alpha, t, 1.0 - t)
            }
        }),
    )
    .density(Arc::new(move |a: Arg| u_alpha0_parts(alpha, a.x, a.below_upper)))
    .sampler(Arc::new(move |rng: &mut dyn RngCore| {
        let v = lamperti_draw(alpha, rng).powf(1.0 / (alpha + 1.0));
        v / (1.0 + v)
    }))
    .scale(0.5)
    .build()
}

/// Law of Z_α^{1/(α+1)}.
pub fn lamperti_root_spec(alpha: f64) -> Result<DistributionSpec> {
    check_alpha(alpha)?;
    let a1 = alpha + 1.0;
    SpecBuilder::new(
        format!("lamperti_root({alpha})"),
        Support::new(0.0, f64::INFINITY),
        Arc::new(move |x: f64| lamperti_cdf(alpha, x.max(0.0).powf(a1))),
        Arc::new(move |x: f64| lamperti_sf(alpha, x.max(0.0).powf(a1))),
    )
    .density(Arc::new(move |a: Arg| {
        if a.x <= 0.0 {
            0.0
        } else {
            a1 * a.x.powf(alpha) * lamperti_density(alpha, a.x.powf(a1))
        }
    }))
    .sampler(Arc::new(move |rng: &mut dyn RngCore| lamperti_draw(alpha, rng).powf(1.0 / a1)))
    .build()
}

/// Density of β_{σ,1−σ}·M_σ(F_{𝕌_{α,0}}) on (0,1).
pub fn upsilon_component_density(alpha: f64, sigma: f64, y: f64) -> f64 {
    upsilon_component_parts(alpha, sigma, y, 1.0 - y)
}

fn upsilon_component_parts(alpha: f64, sigma: f64, y: f64, om: f64) -> f64 {
    if y <= 0.0 || om <= 0.0 {
        return 0.0;
    }
    let s = sin_pi(sigma * u_alpha0_sf(alpha, y, om));
    let l = sigma / alpha * (alpha + 1.0).ln() + (sigma - 1.0) * y.ln()
        - sigma / (2.0 * alpha) * u_denominator(alpha, y, om).ln();
    s * l.exp() / PI
}

/// The σ = α case: density of β_{α,1−α}·𝕌_{α,α}.
pub fn upsilon_component_at_alpha(alpha: f64, y: f64) -> f64 {
    upsilon_at_alpha_parts(alpha, y, 1.0 - y)
}

fn upsilon_at_alpha_parts(alpha: f64, y: f64, om: f64) -> f64 {
    if y <= 0.0 || om <= 0.0 {
        return 0.0;
    }
    sin_pi(alpha) / PI * (alpha + 1.0) * y.powf(alpha - 1.0) * om.powf(alpha + 1.0) / u_denominator(alpha, y, om)
}

fn v_denominator(alpha: f64, x: f64) -> f64 {
    let w = x.powf(alpha + 1.0);
    w * w + 2.0 * w * cos_pi(alpha) + 1.0
}

/// Density of M_1(F_{Y_σ Z_α^{1/(α+1)}}) on (0,∞).
pub fn upsilon_ddag_component_density(alpha: f64, sigma: f64, x: f64) -> f64 {
    if x <= 0.0 || x.is_infinite() {
        return 0.0;
    }
    let s = sin_pi(sigma * lamperti_sf(alpha, x.powf(alpha + 1.0)));
    let l = (sigma - 1.0) * x.ln() + sigma / alpha * x.ln_1p() - sigma / (2.0 * alpha) * v_denominator(alpha, x).ln();
    s * l.exp() / PI
}

/// The σ = α case of [`upsilon_ddag_component_density`].
pub fn upsilon_ddag_at_alpha(alpha: f64, x: f64) -> f64 {
    if x <= 0.0 || x.is_infinite() {
        return 0.0;
    }
    sin_pi(alpha) / PI * x.powf(alpha - 1.0) * (1.0 + x) / v_denominator(alpha, x)
}

/// The σ = 2α case (α ≤ 1/2), written with the double-angle identity.
pub fn upsilon_ddag_at_two_alpha(alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::domain(format!("the sigma = 2 alpha case needs alpha <= 1/2, got {alpha}")));
    }
    if x <= 0.0 || x.is_infinite() {
        return Ok(0.0);
    }
    let e = v_denominator(alpha, x);
    let w = x.powf(alpha + 1.0);
    Ok(2.0 * sin_pi(alpha) * x.powf(2.0 * alpha - 1.0) * (1.0 + x).powi(2) * (cos_pi(alpha) + w) / (PI * e * e))
}

// ---------------------------------------------------------------------------
// Uniform and exponential-ratio bases

/// Φ of the uniform law on (0,1).
pub fn phi_uniform(t: f64) -> f64 {
    xlogx(t) - xlogx((t - 1.0).abs()) * (t - 1.0).signum() - 1.0
}

/// ψ of the uniform law: ((1+λ)log(1+λ))/λ − 1.
pub fn psi_uniform(lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    (1.0 + lambda) * lambda.ln_1p() / lambda - 1.0
}

/// Φ of W = G/G': x·log x/(1+x).
pub fn phi_exp_ratio(x: f64) -> f64 {
    xlogx(x) / (1.0 + x)
}

/// ψ of W: λ·log λ/(λ−1).
pub fn psi_exp_ratio(lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    c_log_c_over_c_minus_1(lambda)
}

/// Density of M_1(F_U): (e/π)sin(πy)y^{−y}(1−y)^{−(1−y)}.
pub fn dk_mean_density(y: f64) -> f64 {
    dk_parts(y, 1.0 - y)
}

fn dk_parts(y: f64, om: f64) -> f64 {
    if y <= 0.0 || om <= 0.0 {
        return 0.0;
    }
    E / PI * sin_pi_unit(y, om) * (-xlogx(y) - xlogx(om)).exp()
}

/// Density of M_1(F_W): (1/π)sin(πx/(1+x))x^{−x/(1+x)}.
pub fn w_mean_density(x: f64) -> f64 {
    w_component_density(1.0, x)
}

/// Density of β_{σ,1−σ}·M_σ(F_U).
pub fn dk_component_density(sigma: f64, y: f64) -> f64 {
    dk_component_parts(sigma, y, 1.0 - y)
}

fn dk_component_parts(sigma: f64, y: f64, om: f64) -> f64 {
    if y <= 0.0 || om <= 0.0 {
        return 0.0;
    }
    let l = sigma + (sigma * om - 1.0) * y.ln() - sigma * xlogx(om);
    sin_pi(sigma * om) * l.exp() / PI
}

/// Density of β_{σ,1−σ}·M_σ(F_W): (1/π)sin(πσ/(1+x))x^{σ/(1+x)−1}.
pub fn w_component_density(sigma: f64, x: f64) -> f64 {
    if x <= 0.0 || x.is_infinite() {
        return 0.0;
    }
    let q = 1.0 / (1.0 + x);
    sin_pi(sigma * q) * ((sigma * q - 1.0) * x.ln()).exp() / PI
}

// ---------------------------------------------------------------------------
// 𝔾_α, 1/𝔾_α = 1 + Z_{1−α}^{1/α}, and the stable subordinator family

fn g_parts(alpha: f64, u: f64, om: f64) -> f64 {
    if u <= 0.0 || om <= 0.0 {
        return 0.0;
    }
    let (ua, oa) = (u.powf(alpha), om.powf(alpha));
    let den = ua * ua - 2.0 * ua * oa * cos_pi(alpha) + oa * oa;
    alpha * sin_pi(alpha) / ((1.0 - alpha) * PI) * (u * om).powf(alpha - 1.0) / den
}

/// Density of 𝔾_α on (0,1).
pub fn bertoin_g_density(alpha: f64, u: f64) -> f64 {
    g_parts(alpha, u, 1.0 - u)
}

/// P(𝔾_α <= u).
pub fn bertoin_g_cdf(alpha: f64, u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        lamperti_sf(1.0 - alpha, ((1.0 - u) / u).powf(alpha))
    }
}

/// Density of Z_{1−α}^{1/α} at v > 0, which is the density of 1/𝔾_α at 1+v.
fn lamperti_power_density(alpha: f64, v: f64) -> f64 {
    if v <= 0.0 || v.is_infinite() {
        return 0.0;
    }
    alpha * v.powf(alpha - 1.0) * lamperti_density(1.0 - alpha, v.powf(alpha))
}

/// Density of 1/𝔾_α on (1,∞).
pub fn inv_bertoin_g_density(alpha: f64, x: f64) -> f64 {
    lamperti_power_density(alpha, x - 1.0)
}

/// P(1/𝔾_α > x) = F_{Z_{1−α}}((x−1)^{−α}) for x > 1.
pub fn inv_bertoin_g_sf(alpha: f64, x: f64) -> f64 {
    if x <= 1.0 {
        1.0
    } else {
        lamperti_sf(1.0 - alpha, (x - 1.0).powf(alpha))
    }
}

fn phi_inv_g_parts(alpha: f64, x: f64, xm1: f64) -> f64 {
    if xm1 > 0.0 {
        let v = xm1.powf(alpha);
        let den = v * v - 2.0 * v * cos_pi(alpha) + 1.0;
        (2.0 * x.ln() - den.ln()) / (2.0 * (1.0 - alpha))
    } else {
        (x.ln() - one_minus_pow_complement(x, alpha).ln()) / (1.0 - alpha)
    }
}

/// Φ of 1/𝔾_α, in two branches split at x = 1.
pub fn phi_inv_g(alpha: f64, x: f64) -> f64 {
    phi_inv_g_parts(alpha, x, x - 1.0)
}

/// ψ of 1/𝔾_α: −(1/(1−α))·log((λ+1)^α − λ^α).
pub fn psi_inv_g(alpha: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    -((lambda + 1.0).powf(alpha) - lambda.powf(alpha)).ln() / (1.0 - alpha)
}

/// ψ of 𝔾_α, from G_{1−α}M_{1−α}(F_{𝔾_α}) = G_{1−α}U:
/// e^{−(1−α)ψ(λ)} = ((λ+1)^α − 1)/(αλ).
pub fn psi_bertoin_g(alpha: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    -((alpha * lambda.ln_1p()).exp_m1() / (alpha * lambda)).ln() / (1.0 - alpha)
}

/// Φ of Z_{1−α}^{1/α} at z, equal to Φ_{1/𝔾_α}(z+1).
pub fn phi_lamperti_power(alpha: f64, z: f64) -> f64 {
    phi_inv_g_parts(alpha, z + 1.0, z)
}

/// Density of B_α = β_{1−α,α}/β_{α,1}.
pub fn b_alpha_density(alpha: f64, x: f64) -> f64 {
    if x <= 0.0 || x.is_infinite() {
        return 0.0;
    }
    let tail = if x <= 1.0 { one_minus_pow_complement(x, alpha) } else { 1.0 };
    sin_pi(alpha) / PI * x.powf(-alpha - 1.0) * tail
}

/// Density of Σ_α(1): αx^{−α−1}(1−e^{−x})/Γ(1−α).
pub fn sigma_alpha_density(alpha: f64, x: f64) -> f64 {
    if x <= 0.0 || x.is_infinite() {
        return 0.0;
    }
    alpha * x.powf(-alpha - 1.0) * (-(-x).exp_m1()) / gamma(1.0 - alpha)
}

/// Density of Σ†_{α,c}(1)/c.
pub fn sigma_dagger_density(alpha: f64, c: f64, x: f64) -> f64 {
    if x <= 0.0 || x.is_infinite() {
        return 0.0;
    }
    let k = (c + 1.0).powf(alpha) - c.powf(alpha);
    alpha * x.powf(-alpha - 1.0) * (-c * x).exp() * (-(-x).exp_m1()) / (k * gamma(1.0 - alpha))
}

/// 𝒮_{α,σ}(z) = sin(πσF_{Z_{1−α}}(z^{−α}))·[z^{2α} − 2z^α cos πα + 1]^{σ/(2(1−α))}.
pub fn s_function(alpha: f64, sigma: f64, z: f64) -> f64 {
    if z <= 0.0 {
        return sin_pi(sigma);
    }
    let v = z.powf(alpha);
    let s = sin_pi(sigma * lamperti_sf(1.0 - alpha, v));
    s * (v * v - 2.0 * v * cos_pi(alpha) + 1.0).powf(sigma / (2.0 * (1.0 - alpha)))
}

/// 𝒟_{α,σ}(x): sin(πσ)[1−(1−x)^α]^{σ/(1−α)} for x ≤ 1, 𝒮_{α,σ}(x−1) above.
pub fn d_function(alpha: f64, sigma: f64, x: f64) -> f64 {
    if x <= 1.0 {
        sin_pi(sigma) * one_minus_pow_complement(x.max(0.0), alpha).powf(sigma / (1.0 - alpha))
    } else {
        s_function(alpha, sigma, x - 1.0)
    }
}

/// Density of M_1(F_{Y_σ/𝔾_α}): (1/π)x^{−(σα/(1−α)+1)}𝒟_{α,σ}(x).
pub fn bertoin_component_density(alpha: f64, sigma: f64, x: f64) -> f64 {
    if x <= 0.0 || x.is_infinite() {
        return 0.0;
    }
    let k = sigma * alpha / (1.0 - alpha);
    x.powf(-(k + 1.0)) * d_function(alpha, sigma, x) / PI
}

/// Density of β_{σ,1−σ}·M_σ(F_{A_c}) for the base 1/𝔾_α, on (0,1).
pub fn bertoin_tilted_component_density(alpha: f64, sigma: f64, c: f64, y: f64) -> f64 {
    bertoin_tilted_parts(alpha, sigma, c, y, 1.0 - y)
}

fn bertoin_tilted_parts(alpha: f64, sigma: f64, c: f64, y: f64, om: f64) -> f64 {
    if y <= 0.0 || om <= 0.0 {
        return 0.0;
    }
    let k = sigma * alpha / (1.0 - alpha);
    let x = y / (c * om);
    let den = ((c + 1.0).powf(alpha) - c.powf(alpha)).powf(sigma / (1.0 - alpha));
    let l = k * (c * om).ln() - (k + 1.0) * y.ln();
    l.exp() * d_function(alpha, sigma, x) / (PI * den)
}

/// Density of M_1(F_{Y_σ Z_{1−α}^{1/α}}) on (0,∞).
pub fn z_subordinator_component_density(alpha: f64, sigma: f64, z: f64) -> f64 {
    if z <= 0.0 || z.is_infinite() {
        return 0.0;
    }
    let l = (sigma - 1.0) * z.ln() - sigma / (1.0 - alpha) * z.ln_1p();
    l.exp() * s_function(alpha, sigma, z) / PI
}

/// Density of β_{σ,1−σ}·M_σ(F_{A_1}) for the base Z_{1−α}^{1/α}, on (0,1).
pub fn z_dagger_component_density(alpha: f64, sigma: f64, y: f64) -> f64 {
    z_dagger_parts(alpha, sigma, y, 1.0 - y)
}

fn z_dagger_parts(alpha: f64, sigma: f64, y: f64, om: f64) -> f64 {
    if y <= 0.0 || om <= 0.0 {
        return 0.0;
    }
    let k = sigma * alpha / (1.0 - alpha);
    let l = -sigma / (1.0 - alpha) * alpha.ln() + (sigma - 1.0) * y.ln() + k * om.ln();
    l.exp() * s_function(alpha, sigma, y / om) / PI
}

/// Law of 𝔾_α.
pub fn bertoin_g_spec(alpha: f64) -> Result<DistributionSpec> {
    check_alpha(alpha)?;
    SpecBuilder::new(
        format!("bertoin_g({alpha})"),
        Support::new(0.0, 1.0),
        Arc::new(move |u: f64| bertoin_g_cdf(alpha, u)),
        Arc::new(move |u: f64| bertoin_g_cdf(alpha, 1.0 - u)),
    )
    .density(Arc::new(move |a: Arg| g_parts(alpha, a.x, a.below_upper)))
    .sampler(Arc::new(move |rng: &mut dyn RngCore| {
        1.0 / (1.0 + lamperti_draw(1.0 - alpha, rng).powf(1.0 / alpha))
    }))
    .scale(0.5)
    .build()
}

/// Law of 1/𝔾_α on (1,∞).
pub fn inv_bertoin_g_spec(alpha: f64) -> Result<DistributionSpec> {
    check_alpha(alpha)?;
    SpecBuilder::new(
        format!("inv_bertoin_g({alpha})"),
        Support::new(1.0, f64::INFINITY),
        Arc::new(move |x: f64| 1.0 - inv_bertoin_g_sf(alpha, x)),
        Arc::new(move |x: f64| inv_bertoin_g_sf(alpha, x)),
    )
    .density(Arc::new(move |a: Arg| lamperti_power_density(alpha, a.above_lower)))
    .sampler(Arc::new(move |rng: &mut dyn RngCore| {
        1.0 + lamperti_draw(1.0 - alpha, rng).powf(1.0 / alpha)
    }))
    .build()
}

/// Law of Z_{1−α}^{1/α} on (0,∞).
pub fn lamperti_power_spec(alpha: f64) -> Result<DistributionSpec> {
    check_alpha(alpha)?;
    SpecBuilder::new(
        format!("lamperti_power({alpha})"),
        Support::new(0.0, f64::INFINITY),
        Arc::new(move |z: f64| 1.0 - lamperti_sf(1.0 - alpha, z.max(0.0).powf(alpha))),
        Arc::new(move |z: f64| lamperti_sf(1.0 - alpha, z.max(0.0).powf(alpha))),
    )
    .density(Arc::new(move |a: Arg| lamperti_power_density(alpha, a.x)))
    .sampler(Arc::new(move |rng: &mut dyn RngCore| {
        lamperti_draw(1.0 - alpha, rng).powf(1.0 / alpha)
    }))
    .build()
}

/// The arcsine law β_{1/2,1/2}.
pub fn arcsine_spec() -> DistributionSpec {
    SpecBuilder::new(
        "arcsine",
        Support::new(0.0, 1.0),
        Arc::new(|x: f64| if x <= 0.0 { 0.0 } else if x >= 1.0 { 1.0 } else { 2.0 / PI * x.sqrt().asin() }),
        Arc::new(|x: f64| if x <= 0.0 { 1.0 } else if x >= 1.0 { 0.0 } else { 2.0 / PI * (1.0 - x).sqrt().asin() }),
    )
    .density(Arc::new(|a: Arg| {
        if a.above_lower <= 0.0 || a.below_upper <= 0.0 {
            0.0
        } else {
            1.0 / (PI * (a.above_lower * a.below_upper).sqrt())
        }
    }))
    .sampler(Arc::new(|rng: &mut dyn RngCore| beta_draw(0.5, 0.5, rng)))
    .scale(0.5)
    .build()
    .expect("valid arcsine spec")
}

// ---------------------------------------------------------------------------
// Entries

/// Parameters of a catalog entry. Entries read only the ones they need.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Params {
    pub alpha: Option<f64>,
    pub sigma: Option<f64>,
    pub c: Option<f64>,
}

impl Params {
    fn alpha(&self) -> Result<f64> {
        let a = self.alpha.ok_or_else(|| Error::domain("parameter alpha is required"))?;
        check_alpha(a)?;
        Ok(a)
    }

    fn sigma(&self) -> Result<f64> {
        let s = self.sigma.ok_or_else(|| Error::domain("parameter sigma is required"))?;
        check_sigma(s)?;
        Ok(s)
    }

    fn c(&self) -> Result<f64> {
        let c = self.c.ok_or_else(|| Error::domain("parameter c is required"))?;
        check_c(c)?;
        Ok(c)
    }
}

pub type ClosedForm = Arc<dyn Fn(Arg) -> f64 + Send + Sync>;
pub type PointFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type GenericFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Static description of a catalog entry.
#[derive(Clone, Copy, Debug)]
pub struct EntryInfo {
    pub name: &'static str,
    pub params: &'static [&'static str],
    /// Parameters used when the catalog is swept with defaults.
    pub defaults: Params,
    pub notes: &'static str,
}

const A: Params = Params { alpha: Some(0.5), sigma: None, c: None };
const AS: Params = Params { alpha: Some(0.5), sigma: Some(0.5), c: None };
const ASC: Params = Params { alpha: Some(0.5), sigma: Some(0.5), c: Some(1.0) };
const S: Params = Params { alpha: None, sigma: Some(0.4), c: None };
const NONE: Params = Params { alpha: None, sigma: None, c: None };

pub const ENTRIES: &[EntryInfo] = &[
    EntryInfo {
        name: "lamperti",
        params: &["alpha"],
        defaults: A,
        notes: "Lamperti law Z_alpha, ratio of independent positive stable variables raised to alpha",
    },
    EntryInfo {
        name: "u_alpha0",
        params: &["alpha"],
        defaults: A,
        notes: "U_{alpha,0} = V/(V+1) with V = Z_alpha^{1/(alpha+1)}; base of the Upsilon subordinator",
    },
    EntryInfo {
        name: "lamperti_root",
        params: &["alpha"],
        defaults: A,
        notes: "Z_alpha^{1/(alpha+1)}; base of the Upsilon-ddag subordinator",
    },
    EntryInfo {
        name: "upsilon_component",
        params: &["alpha", "sigma"],
        defaults: Params { alpha: Some(0.5), sigma: Some(0.3), c: None },
        notes: "beta_{sigma,1-sigma} M_sigma over U_{alpha,0}",
    },
    EntryInfo {
        name: "upsilon_component_at_alpha",
        params: &["alpha"],
        defaults: A,
        notes: "beta_{alpha,1-alpha} U_{alpha,alpha}, the sigma = alpha case of upsilon_component",
    },
    EntryInfo {
        name: "upsilon_ddag_component",
        params: &["alpha", "sigma"],
        defaults: Params { alpha: Some(0.5), sigma: Some(0.3), c: None },
        notes: "beta_{sigma,1-sigma} M_sigma over Z_alpha^{1/(alpha+1)}",
    },
    EntryInfo {
        name: "upsilon_ddag_at_alpha",
        params: &["alpha"],
        defaults: A,
        notes: "sigma = alpha case of upsilon_ddag_component",
    },
    EntryInfo {
        name: "upsilon_ddag_at_two_alpha",
        params: &["alpha"],
        defaults: Params { alpha: Some(0.25), sigma: None, c: None },
        notes: "sigma = 2 alpha case of upsilon_ddag_component via the double-angle identity; alpha <= 1/2",
    },
    EntryInfo {
        name: "dk_mean",
        params: &[],
        defaults: NONE,
        notes: "M_1 over the uniform law",
    },
    EntryInfo {
        name: "w_mean",
        params: &[],
        defaults: NONE,
        notes: "M_1 over W = G/G', a ratio of independent unit exponentials",
    },
    EntryInfo {
        name: "dk_component",
        params: &["sigma"],
        defaults: S,
        notes: "beta_{sigma,1-sigma} M_sigma over the uniform law",
    },
    EntryInfo {
        name: "w_component",
        params: &["sigma"],
        defaults: S,
        notes: "beta_{sigma,1-sigma} M_sigma over W",
    },
    EntryInfo {
        name: "bertoin_g",
        params: &["alpha"],
        defaults: A,
        notes: "G_alpha = 1/(1 + Z_{1-alpha}^{1/alpha}) on (0,1); arcsine at alpha = 1/2",
    },
    EntryInfo {
        name: "inv_bertoin_g",
        params: &["alpha"],
        defaults: A,
        notes: "1/G_alpha on (1,inf); base of the stable subordinator family",
    },
    EntryInfo {
        name: "lamperti_power",
        params: &["alpha"],
        defaults: A,
        notes: "Z_{1-alpha}^{1/alpha}; Phi is that of 1/G_alpha shifted by one",
    },
    EntryInfo {
        name: "b_alpha",
        params: &["alpha"],
        defaults: A,
        notes: "B_alpha = beta_{1-alpha,alpha}/beta_{alpha,1}, equal to M_1 over Y_{1-alpha}/G_alpha",
    },
    EntryInfo {
        name: "sigma_alpha",
        params: &["alpha"],
        defaults: A,
        notes: "Sigma_alpha(1), the GGC(1-alpha) law over 1/G_alpha",
    },
    EntryInfo {
        name: "sigma_dagger",
        params: &["alpha", "c"],
        defaults: Params { alpha: Some(0.5), sigma: None, c: Some(1.0) },
        notes: "Sigma-dagger_{alpha,c}(1)/c, the exponentially tilted Sigma_alpha",
    },
    EntryInfo {
        name: "bertoin_component",
        params: &["alpha", "sigma"],
        defaults: AS,
        notes: "M_1 over Y_sigma/G_alpha, written with the D function",
    },
    EntryInfo {
        name: "bertoin_tilted_component",
        params: &["alpha", "sigma", "c"],
        defaults: ASC,
        notes: "beta_{sigma,1-sigma} M_sigma over the tilt A_c of 1/G_alpha",
    },
    EntryInfo {
        name: "z_subordinator_component",
        params: &["alpha", "sigma"],
        defaults: AS,
        notes: "M_1 over Y_sigma Z_{1-alpha}^{1/alpha}, written with the S function",
    },
    EntryInfo {
        name: "z_dagger_component",
        params: &["alpha", "sigma"],
        defaults: AS,
        notes: "beta_{sigma,1-sigma} M_sigma over the tilt A_1 of Z_{1-alpha}^{1/alpha}",
    },
    EntryInfo {
        name: "arcsine",
        params: &[],
        defaults: NONE,
        notes: "beta_{1/2,1/2}",
    },
];

pub fn info(name: &str) -> Result<&'static EntryInfo> {
    ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::domain(format!("unknown catalog entry '{name}'")))
}

/// A closed-form law with its generic counterpart.
#[derive(Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: Params,
    pub support: Support,
    /// Interior points where the density has a kink or a branch switch.
    pub breakpoints: Vec<f64>,
    pub density: ClosedForm,
    pub cdf: Option<PointFn>,
    pub phi: Option<PointFn>,
    /// The same density computed by the generic transforms on a
    /// [`DistributionSpec`].
    pub generic: Option<GenericFn>,
    /// The law as a [`DistributionSpec`], for entries that serve as bases.
    pub spec: Option<DistributionSpec>,
    pub notes: &'static str,
}

impl std::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("support", &self.support)
            .finish()
    }
}

impl CatalogEntry {
    pub fn eval(&self, x: f64) -> f64 {
        if !self.support.contains(x) {
            return 0.0;
        }
        (self.density)(Arg::within(x, self.support))
    }

    /// ∫ density over the support.
    pub fn mass(&self, quad: &QuadratureConfig) -> Result<f64> {
        let s = self.support;
        let pts = quadrature::split_points(s.lower, s.upper, &self.breakpoints);
        let mut total = 0.0;
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let est = quadrature::integrate(|n: Node| Ok((self.density)(Arg::from_node(n, a, b, s))), a, b, quad)?;
            total += est.require(quad, "catalog density mass")?;
        }
        Ok(total)
    }

    /// `n` interior points spread over the support; half-lines use a
    /// logarithmic spread around 1.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let s = self.support;
        (1..=n)
            .map(|i| {
                let u = i as f64 / (n + 1) as f64;
                if s.upper.is_finite() {
                    s.lower + (s.upper - s.lower) * u
                } else {
                    s.lower + (8.0 * (u - 0.5)).exp()
                }
            })
            .collect()
    }
}

fn unit() -> Support {
    Support::new(0.0, 1.0)
}

fn half_line() -> Support {
    Support::new(0.0, f64::INFINITY)
}

/// Builds the named entry.
pub fn entry(name: &str, params: &Params) -> Result<CatalogEntry> {
    let info = info(name)?;
    let quad = QuadratureConfig::default();
    let mut e = CatalogEntry {
        name: info.name,
        params: *params,
        support: half_line(),
        breakpoints: Vec::new(),
        density: Arc::new(|_| 0.0),
        cdf: None,
        phi: None,
        generic: None,
        spec: None,
        notes: info.notes,
    };
    fn scaled(base: DistributionSpec, sigma: f64, quad: QuadratureConfig) -> GenericFn {
        Arc::new(move |x| scaled_mean_density(&base, sigma, x, &quad))
    }
    fn tilted(base: DistributionSpec, sigma: f64, c: f64, quad: QuadratureConfig) -> GenericFn {
        Arc::new(move |y| {
            if y <= 0.0 || y >= 1.0 {
                return Ok(0.0);
            }
            scaled_tilted_density(&base, sigma, c, y, &quad)
        })
    }
    fn spec_density(spec: DistributionSpec) -> GenericFn {
        Arc::new(move |x| Ok(spec.density(x).unwrap_or(0.0)))
    }
    match name {
        "lamperti" => {
            let a = params.alpha()?;
            e.density = Arc::new(move |g: Arg| lamperti_density(a, g.x));
            e.cdf = Some(Arc::new(move |z| lamperti_cdf(a, z)));
            e.spec = Some(crate::dist::lamperti(a)?);
        }
        "u_alpha0" => {
            let a = params.alpha()?;
            e.support = unit();
            e.density = Arc::new(move |g: Arg| u_alpha0_parts(a, g.x, g.below_upper));
            e.cdf = Some(Arc::new(move |t| if t <= 0.0 { 0.0 } else { 1.0 - u_alpha0_sf(a, t, 1.0 - t) }));
            e.phi = Some(Arc::new(move |t| phi_u_alpha0(a, t)));
            let push = crate::dist::pushforward_monotone(
                &crate::dist::lamperti(a)?,
                Arc::new(move |z: f64| {
                    let v = z.powf(1.0 / (a + 1.0));
                    if v.is_infinite() {
                        1.0
                    } else {
                        v / (1.0 + v)
                    }
                }),
                Arc::new(move |t: f64| (t / (1.0 - t)).powf(a + 1.0)),
                Some(Arc::new(move |t: f64| {
                    let om = 1.0 - t;
                    (a + 1.0) * (t / om).powf(a) / (om * om)
                })),
            )?;
            e.generic = Some(spec_density(push));
            e.spec = Some(u_alpha0_spec(a)?);
        }
        "lamperti_root" => {
            let a = params.alpha()?;
            let spec = lamperti_root_spec(a)?;
            let s2 = spec.clone();
            e.density = Arc::new(move |g: Arg| s2.density_arg(g).unwrap_or(0.0));
            e.spec = Some(spec);
        }
        "upsilon_component" => {
            let (a, s) = (params.alpha()?, params.sigma()?);
            e.support = unit();
            e.density = Arc::new(move |g: Arg| upsilon_component_parts(a, s, g.x, g.below_upper));
            e.generic = Some(scaled(u_alpha0_spec(a)?, s, quad));
        }
        "upsilon_component_at_alpha" => {
            let a = params.alpha()?;
            e.support = unit();
            e.density = Arc::new(move |g: Arg| upsilon_at_alpha_parts(a, g.x, g.below_upper));
            e.generic = Some(scaled(u_alpha0_spec(a)?, a, quad));
        }
        "upsilon_ddag_component" => {
            let (a, s) = (params.alpha()?, params.sigma()?);
            e.density = Arc::new(move |g: Arg| upsilon_ddag_component_density(a, s, g.x));
            e.generic = Some(scaled(lamperti_root_spec(a)?, s, quad));
        }
        "upsilon_ddag_at_alpha" => {
            let a = params.alpha()?;
            e.density = Arc::new(move |g: Arg| upsilon_ddag_at_alpha(a, g.x));
            e.generic = Some(scaled(lamperti_root_spec(a)?, a, quad));
        }
        "upsilon_ddag_at_two_alpha" => {
            let a = params.alpha()?;
            upsilon_ddag_at_two_alpha(a, 1.0)?;
            e.density = Arc::new(move |g: Arg| upsilon_ddag_at_two_alpha(a, g.x).unwrap_or(0.0));
            e.generic = Some(scaled(lamperti_root_spec(a)?, 2.0 * a, quad));
        }
        "dk_mean" => {
            e.support = unit();
            e.density = Arc::new(|g: Arg| dk_parts(g.x, g.below_upper));
            e.phi = Some(Arc::new(phi_uniform));
            e.generic = Some(scaled(uniform01(), 1.0, quad));
        }
        "w_mean" => {
            e.density = Arc::new(|g: Arg| w_mean_density(g.x));
            e.phi = Some(Arc::new(phi_exp_ratio));
            e.generic = Some(scaled(exp_ratio(), 1.0, quad));
        }
        "dk_component" => {
            let s = params.sigma()?;
            e.support = unit();
            e.density = Arc::new(move |g: Arg| dk_component_parts(s, g.x, g.below_upper));
            e.generic = Some(scaled(uniform01(), s, quad));
        }
        "w_component" => {
            let s = params.sigma()?;
            e.density = Arc::new(move |g: Arg| w_component_density(s, g.x));
            e.generic = Some(scaled(exp_ratio(), s, quad));
        }
        "bertoin_g" => {
            let a = params.alpha()?;
            e.support = unit();
            e.density = Arc::new(move |g: Arg| g_parts(a, g.x, g.below_upper));
            e.cdf = Some(Arc::new(move |u| bertoin_g_cdf(a, u)));
            // 𝔾_α is symmetric about 1/2, so it is also the law of
            // V/(1+V) with V = Z_{1−α}^{1/α}.
            let push = crate::dist::pushforward_monotone(
                &crate::dist::lamperti(1.0 - a)?,
                Arc::new(move |z: f64| {
                    let v = z.powf(1.0 / a);
                    if v.is_infinite() {
                        1.0
                    } else {
                        v / (1.0 + v)
                    }
                }),
                Arc::new(move |u: f64| (u / (1.0 - u)).powf(a)),
                Some(Arc::new(move |u: f64| {
                    let om = 1.0 - u;
                    a * (u / om).powf(a - 1.0) / (om * om)
                })),
            )?;
            e.generic = Some(spec_density(push));
            e.spec = Some(bertoin_g_spec(a)?);
        }
        "inv_bertoin_g" => {
            let a = params.alpha()?;
            e.support = Support::new(1.0, f64::INFINITY);
            e.density = Arc::new(move |g: Arg| lamperti_power_density(a, g.above_lower));
            e.cdf = Some(Arc::new(move |x| 1.0 - inv_bertoin_g_sf(a, x)));
            e.phi = Some(Arc::new(move |x| phi_inv_g(a, x)));
            e.spec = Some(inv_bertoin_g_spec(a)?);
        }
        "lamperti_power" => {
            let a = params.alpha()?;
            e.density = Arc::new(move |g: Arg| lamperti_power_density(a, g.x));
            e.cdf = Some(Arc::new(move |z| 1.0 - lamperti_sf(1.0 - a, z.max(0.0).powf(a))));
            e.phi = Some(Arc::new(move |z| phi_lamperti_power(a, z)));
            e.spec = Some(lamperti_power_spec(a)?);
        }
        "b_alpha" => {
            let a = params.alpha()?;
            e.breakpoints = vec![1.0];
            e.density = Arc::new(move |g: Arg| b_alpha_density(a, g.x));
            e.generic = Some(scaled(inv_bertoin_g_spec(a)?, 1.0 - a, quad));
        }
        "sigma_alpha" => {
            let a = params.alpha()?;
            e.density = Arc::new(move |g: Arg| sigma_alpha_density(a, g.x));
            let base = inv_bertoin_g_spec(a)?;
            e.generic = Some(Arc::new(move |x| ggc_component_density(&base, 1.0 - a, x, &quad)));
        }
        "sigma_dagger" => {
            let (a, c) = (params.alpha()?, params.c()?);
            e.density = Arc::new(move |g: Arg| sigma_dagger_density(a, c, g.x));
            let ggc = GgcLaw::new(1.0 - a, inv_bertoin_g_spec(a)?, quad)?;
            e.generic = Some(Arc::new(move |x| Ok(c * tilted_ggc_density(&ggc, c, c * x)?)));
        }
        "bertoin_component" => {
            let (a, s) = (params.alpha()?, params.sigma()?);
            e.breakpoints = vec![1.0];
            e.density = Arc::new(move |g: Arg| bertoin_component_density(a, s, g.x));
            e.generic = Some(scaled(inv_bertoin_g_spec(a)?, s, quad));
        }
        "bertoin_tilted_component" => {
            let (a, s, c) = (params.alpha()?, params.sigma()?, params.c()?);
            e.support = unit();
            e.breakpoints = vec![c / (1.0 + c)];
            e.density = Arc::new(move |g: Arg| bertoin_tilted_parts(a, s, c, g.x, g.below_upper));
            e.generic = Some(tilted(inv_bertoin_g_spec(a)?, s, c, quad));
        }
        "z_subordinator_component" => {
            let (a, s) = (params.alpha()?, params.sigma()?);
            e.density = Arc::new(move |g: Arg| z_subordinator_component_density(a, s, g.x));
            e.generic = Some(scaled(lamperti_power_spec(a)?, s, quad));
        }
        "z_dagger_component" => {
            let (a, s) = (params.alpha()?, params.sigma()?);
            e.support = unit();
            e.density = Arc::new(move |g: Arg| z_dagger_parts(a, s, g.x, g.below_upper));
            e.generic = Some(tilted(lamperti_power_spec(a)?, s, 1.0, quad));
        }
        "arcsine" => {
            let spec = arcsine_spec();
            let s2 = spec.clone();
            e.support = unit();
            e.density = Arc::new(move |g: Arg| s2.density_arg(g).unwrap_or(0.0));
            e.cdf = Some(Arc::new(|x| 2.0 / PI * x.clamp(0.0, 1.0).sqrt().asin()));
            e.spec = Some(spec);
        }
        _ => unreachable!("every listed entry is handled"),
    }
    Ok(e)
}

/// All entries at their default parameters.
pub fn all_default() -> Result<Vec<CatalogEntry>> {
    ENTRIES.iter().map(|i| entry(i.name, &i.defaults)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        assert!((u_alpha0_density(0.5, 0.5) - 6.0 / PI).abs() < 1e-14);
        assert!((dk_mean_density(0.5) - 2.0 * E / PI).abs() < 1e-14);
        assert!((w_mean_density(1.0) - 1.0 / PI).abs() < 1e-15);
        assert!((bertoin_g_density(0.5, 0.5) - 2.0 / PI).abs() < 1e-14);
        assert!((b_alpha_density(0.5, 4.0) - 1.0 / (8.0 * PI)).abs() < 1e-15);
        assert!((lamperti_cdf(0.3, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sine_identities() {
        let (s1, _) = sin_identities(0.5, 1.0);
        assert!((s1 - 0.5f64.sqrt()).abs() < 1e-15);
        for &a in &[0.2, 0.5, 0.7] {
            for &z in &[0.1, 1.0, 7.0] {
                let (s1, s2) = sin_identities(a, z);
                assert!((s1 - sin_pi(a * lamperti_cdf(a, z))).abs() < 1e-12);
                if a <= 0.5 {
                    let direct = sin_pi(2.0 * a * lamperti_sf(a, z));
                    assert!((s2 - direct).abs() < 1e-12, "{a} {z}");
                    let alt = 2.0 * sin_pi(a) * (cos_pi(a) + z) / (z * z + 2.0 * z * cos_pi(a) + 1.0);
                    assert!((s2 - alt).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn branch_continuity() {
        for &a in &[0.3, 0.5, 0.8] {
            assert!(phi_inv_g(a, 1.0).abs() < 1e-15);
            // both branches vanish like (x−1)^α
            let bound = 10.0 * 1e-12f64.powf(a);
            assert!(phi_inv_g(a, 1.0 + 1e-12).abs() < bound);
            assert!(phi_inv_g(a, 1.0 - 1e-12).abs() < bound);
            for &s in &[0.3, 1.0] {
                let l = d_function(a, s, 1.0);
                let r = d_function(a, s, 1.0 + 1e-14);
                assert!((l - r).abs() < 10.0 * 1e-14f64.powf(a));
            }
        }
    }

    #[test]
    fn phi_uniform_closed_form() {
        assert!((phi_uniform(0.5) - (0.5f64.ln() - 1.0)).abs() < 1e-15);
        // t > 1: t ln t − (t−1) ln(t−1) − 1
        let t: f64 = 2.5;
        let want = t * t.ln() - 1.5 * 1.5f64.ln() - 1.0;
        assert!((phi_uniform(t) - want).abs() < 1e-14);
    }

    #[test]
    fn reductions_at_sigma_one() {
        for &y in &[0.1, 0.5, 0.9] {
            assert!((dk_component_density(1.0, y) - dk_mean_density(y)).abs() < 1e-14);
        }
        for &x in &[0.1, 1.0, 9.0] {
            assert!((w_component_density(1.0, x) - w_mean_density(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn special_cases_match_general_forms() {
        let a = 0.4;
        for &y in &[0.05, 0.3, 0.7, 0.95] {
            let g = upsilon_component_density(a, a, y);
            let p = upsilon_component_at_alpha(a, y);
            assert!((g - p).abs() < 1e-10 * p.max(1.0), "{y}: {g} vs {p}");
        }
        for &x in &[0.05, 0.5, 2.0, 20.0] {
            let g = upsilon_ddag_component_density(a, a, x);
            let p = upsilon_ddag_at_alpha(a, x);
            assert!((g - p).abs() < 1e-10 * p.max(1.0), "{x}: {g} vs {p}");
            let a4 = 0.25;
            let g = upsilon_ddag_component_density(a4, 2.0 * a4, x);
            let p = upsilon_ddag_at_two_alpha(a4, x).unwrap();
            assert!((g - p).abs() < 1e-10 * p.max(1.0), "{x}: {g} vs {p}");
        }
        assert!(upsilon_ddag_at_two_alpha(0.6, 1.0).is_err());
        for &x in &[0.2, 0.9, 1.5, 6.0] {
            let a = bertoin_component_density(0.5, 0.5, x);
            let b = b_alpha_density(0.5, x);
            assert!((a - b).abs() < 1e-10, "{x}: {a} vs {b}");
        }
    }

    #[test]
    fn unknown_entry_and_missing_params() {
        assert!(entry("nope", &Params::default()).is_err());
        assert!(matches!(entry("u_alpha0", &Params::default()), Err(Error::Domain(_))));
        assert!(entry("u_alpha0", &Params { alpha: Some(1.5), ..Params::default() }).is_err());
    }
}
