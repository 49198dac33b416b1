//! Beta scaling and exponential tilting of Dirichlet means, and the density
//! maps they induce.

use std::f64::consts::PI;

use crate::dist::{thin, DistributionSpec, Support};
use crate::error::{Error, Result};
use crate::functionals::{existence_check, phi, psi};
use crate::mean_laws::{mean_density, DensityFn, MeanDensity, MeanLaw};
use crate::quadrature::{self, Node, QuadratureConfig};
use crate::special::{gamma, ln_gamma, sin_pi};

/// GGC(θ, F): the law of G_θ·M_θ(F), equivalently T_θ of the subordinator.
#[derive(Clone, Debug)]
pub struct GgcLaw {
    pub theta: f64,
    pub base: DistributionSpec,
    pub quad: QuadratureConfig,
}

impl GgcLaw {
    pub fn new(theta: f64, base: DistributionSpec, quad: QuadratureConfig) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::domain(format!("theta must be positive, got {theta}")));
        }
        quad.validate()?;
        if !existence_check(&base, &quad) {
            return Err(Error::Existence(format!(
                "E[log(1+X)] diverges for '{}'",
                base.label
            )));
        }
        Ok(GgcLaw { theta, base, quad })
    }

    /// E[e^{−λT_θ}] = e^{−θψ(λ)}.
    pub fn laplace(&self, lambda: f64) -> Result<f64> {
        Ok((-self.theta * psi(&self.base, lambda, &self.quad)?).exp())
    }

    /// Density g_{θ,F}(x).
    pub fn density(&self, x: f64) -> Result<f64> {
        ggc_density(self, x)
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

fn check_unit(y: f64) -> Result<()> {
    if y > 0.0 && y < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("y must lie in (0,1), got {y}")))
    }
}

/// Both sides of β_{θσ,θ(1−σ)}·M_{θσ}(F) = M_θ(F_{XY_σ}).
#[derive(Clone, Debug)]
pub struct BetaScalePair {
    /// M_{θσ}(F), before multiplication by the beta factor.
    pub left: MeanLaw,
    /// Parameters (a, b) of the beta factor; b = 0 means the factor is 1.
    pub beta: (f64, f64),
    /// M_θ(F_{XY_σ}).
    pub right: MeanLaw,
}

impl BetaScalePair {
    /// Laplace transforms of GGC(θσ, F) and GGC(θ, F_{XY_σ}) at λ.
    pub fn ggc_laplace_pair(&self, lambda: f64) -> Result<(f64, f64)> {
        let l = (-self.left.theta * self.left.psi(lambda)?).exp();
        let r = (-self.right.theta * self.right.psi(lambda)?).exp();
        Ok((l, r))
    }
}

pub fn beta_scale_identity(
    base: &DistributionSpec,
    theta: f64,
    sigma: f64,
    quad: &QuadratureConfig,
) -> Result<BetaScalePair> {
    check_sigma(sigma)?;
    let left = MeanLaw::new(theta * sigma, base.clone(), *quad)?;
    let right = MeanLaw::new(theta, thin(base, sigma)?.into_spec(), *quad)?;
    Ok(BetaScalePair {
        left,
        beta: (theta * sigma, theta * (1.0 - sigma)),
        right,
    })
}

/// log of x^{σ−1}·sin(πσ·P(X>x))·e^{−σΦ(x)}/π, or None where the density
/// vanishes.
fn log_scaled_density(base: &DistributionSpec, sigma: f64, x: f64, quad: &QuadratureConfig) -> Result<Option<f64>> {
    if x <= 0.0 {
        return Ok(None);
    }
    Ok(log_density_factor(base, sigma, x, quad)?.map(|l| (sigma - 1.0) * x.ln() + l))
}

/// The same without the power x^{σ−1}.
fn log_density_factor(base: &DistributionSpec, sigma: f64, x: f64, quad: &QuadratureConfig) -> Result<Option<f64>> {
    let s = sin_pi(sigma * base.sf(x));
    if s <= 0.0 {
        return Ok(None);
    }
    let p = phi(base, x, quad)?;
    Ok(Some(s.ln() - sigma * p - PI.ln()))
}

/// Density of β_{σ,1−σ}·M_σ(F), which is the θ = 1 mean density of F_{XY_σ}.
pub fn scaled_mean_density(base: &DistributionSpec, sigma: f64, x: f64, quad: &QuadratureConfig) -> Result<f64> {
    check_sigma(sigma)?;
    if x.is_nan() {
        return Err(Error::domain("x is NaN"));
    }
    if x <= 0.0 || x.is_infinite() {
        return Ok(0.0);
    }
    Ok(log_scaled_density(base, sigma, x, quad)?.map_or(0.0, f64::exp))
}

/// Split points for integrals over (0, ∞) against a functional of `base`.
fn base_pieces(base: &DistributionSpec) -> Vec<f64> {
    let mut extra: Vec<f64> = base.breakpoints().to_vec();
    extra.extend(base.atoms().iter().map(|a| a.location));
    let (s, ds) = (base.support(), base.density_support());
    extra.extend([s.lower, s.upper, ds.lower, ds.upper]);
    quadrature::split_points(0.0, f64::INFINITY, &extra)
}

/// GGC(σ, F) density g_σ(x) = ∫ e^{−x/y} y^{−1} ξ_{XY_σ}(y) dy.
pub fn ggc_component_density(base: &DistributionSpec, sigma: f64, x: f64, quad: &QuadratureConfig) -> Result<f64> {
    check_sigma(sigma)?;
    if x.is_nan() {
        return Err(Error::domain("x is NaN"));
    }
    if x <= 0.0 || x.is_infinite() {
        return Ok(0.0);
    }
    let atoms = base.atoms();
    if sigma == 1.0 && !base.has_density() && atoms.len() == 1 {
        let a = atoms[0].location;
        return Ok((-x / a).exp() / a);
    }
    // in v = y/x the kernel e^{−1/v}/v stays bounded for any x; the factor
    // x^{σ−1} is pulled out so tiny x does not overflow the integrand
    let lx = (sigma - 1.0) * x.ln();
    let mut pts: Vec<f64> = base_pieces(base)
        .iter()
        .map(|p| p / x)
        .filter(|v| *v < V_MAX)
        .collect();
    // the kernel peaks near v = 1; fill long gaps from there with decade splits
    let top = (base.scale() / x).min(V_MAX);
    let mut d = 1.0;
    while d < top {
        pts.push(d);
        d *= 1e3;
    }
    pts.push(f64::INFINITY);
    pts = quadrature::split_points(0.0, f64::INFINITY, &pts);
    let est = quadrature::integrate_pieces_scaled(
        &mut |n: Node| {
            let y = x * n.x;
            if y <= 0.0 {
                return Ok(0.0);
            }
            Ok(match log_density_factor(base, sigma, y, quad)? {
                Some(l) => (l + (sigma - 2.0) * n.x.ln() - 1.0 / n.x).exp(),
                None => 0.0,
            })
        },
        &pts,
        (base.scale() / x).clamp(1.0, V_MAX),
        quad,
    )?;
    let v = est.require(quad, "mixture integral for the GGC density")?;
    Ok(v * lx.exp())
}

/// Split points past this v = y/x are dropped; the mixture integrand there is
/// below any tolerance.
const V_MAX: f64 = 1e200;

/// g_{θ,F}(x) for any θ > 0. For θ ≤ 1 this is the exponential mixture;
/// for θ > 1 it is the gamma mixture ∫ f_{G_θ}(x/m)/m ξ_θ(m) dm.
pub fn ggc_density(ggc: &GgcLaw, x: f64) -> Result<f64> {
    if ggc.theta <= 1.0 {
        return ggc_component_density(&ggc.base, ggc.theta, x, &ggc.quad);
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    let law = MeanLaw::new(ggc.theta, ggc.base.clone(), ggc.quad)?;
    let th = ggc.theta;
    if let Some(a) = law.degenerate_at() {
        return Ok(gamma_log_density(th, x / a).exp() / a);
    }
    crate::mean_laws::integrate_against_density(&law, |m| {
        if m <= 0.0 {
            0.0
        } else {
            (gamma_log_density(th, x / m) - m.ln()).exp()
        }
    })
}

fn gamma_log_density(shape: f64, x: f64) -> f64 {
    (shape - 1.0) * x.ln() - x - ln_gamma(shape)
}

/// Residual of the identity
/// (sin πσ/π)∫_1^∞ ξ_{σF}(xy)(y−1)^{−σ} dy = ξ_{F_{XY_σ}}(x).
#[derive(Clone, Copy, Debug)]
pub struct IdentityResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

pub fn integral_identity_check(
    base: &DistributionSpec,
    sigma: f64,
    x: f64,
    quad: &QuadratureConfig,
) -> Result<IdentityResidual> {
    check_sigma(sigma)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("x must be positive, got {x}")));
    }
    let rhs = scaled_mean_density(base, sigma, x, quad)?;
    let law = MeanLaw::new(sigma, base.clone(), *quad)?;
    let lhs = if sigma == 1.0 {
        mean_density(&law, x)?
    } else {
        // y = 1 + u, split where x(1+u) crosses structural points of the base
        let s = base.support();
        let mut extra: Vec<f64> = base.breakpoints().to_vec();
        extra.extend([s.lower, s.upper, base.density_support().lower, base.density_support().upper]);
        let extra: Vec<f64> = extra.iter().map(|p| p / x - 1.0).collect();
        let hi = if s.upper.is_finite() { s.upper / x - 1.0 } else { f64::INFINITY };
        if hi <= 0.0 {
            0.0
        } else {
            let pts = quadrature::split_points(0.0, hi, &extra);
            let cfg = law.density_accuracy();
            let mut total = 0.0;
            for w in pts.windows(2) {
                let first = w[0] == 0.0;
                let est = quadrature::integrate_scaled(
                    &mut |n: Node| {
                        let u = if first { n.from_lower } else { n.x };
                        let m = x * (1.0 + u);
                        if !law.resolvable(m) {
                            return Ok(0.0);
                        }
                        let d = mean_density(&law, m)?;
                        Ok(d * u.powf(-sigma))
                    },
                    w[0],
                    w[1],
                    1.0,
                    &cfg,
                )?;
                total += est.require(&cfg, "identity integral")?;
            }
            sin_pi(sigma) / PI * total
        }
    };
    Ok(IdentityResidual {
        lhs,
        rhs,
        residual: lhs - rhs,
    })
}

/// Density of M_θ(F_{A_c}) at y from the density of M_θ(F) and ψ(c).
fn forward_value(xi: &DensityFn, theta: f64, c: f64, psi_c: f64, y: f64) -> Result<f64> {
    let om = 1.0 - y;
    let x = y / (c * om);
    let d = xi.eval(x)?;
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok((theta * psi_c + (theta - 2.0) * om.ln() - c.ln()).exp() * d)
}

/// Density of M_θ(F_{A_c}) at y ∈ (0,1), given the density of M_θ(F).
pub fn tilt_forward_density(
    base: &DistributionSpec,
    theta: f64,
    c: f64,
    xi_base: &DensityFn,
    y: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    check_c(c)?;
    check_unit(y)?;
    let psi_c = psi(base, c, quad)?;
    forward_value(xi_base, theta, c, psi_c, y)
}

/// The law of M_θ(F_{A_c}) from the law of M_θ(F). A point mass at a maps to
/// a point mass at ca/(1+ca).
pub fn tilt_forward(
    base: &DistributionSpec,
    theta: f64,
    c: f64,
    xi_base: &MeanDensity,
    quad: &QuadratureConfig,
) -> Result<MeanDensity> {
    check_c(c)?;
    match xi_base {
        MeanDensity::PointMass(a) => Ok(MeanDensity::PointMass(c * a / (1.0 + c * a))),
        MeanDensity::Density(xi) => {
            let psi_c = psi(base, c, quad)?;
            let xi = xi.clone();
            let tol = xi.tolerance;
            Ok(MeanDensity::Density(DensityFn::new(
                format!("tilt_forward({}, c={c})", xi.label),
                Support::new(0.0, 1.0),
                tol,
                move |y| {
                    if y <= 0.0 || y >= 1.0 {
                        return Ok(0.0);
                    }
                    forward_value(&xi, theta, c, psi_c, y)
                },
            )))
        }
    }
}

fn inverse_value(xi: &DensityFn, theta: f64, psi_1: f64, x: f64) -> Result<f64> {
    let d = xi.eval(x / (1.0 + x))?;
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok(((theta - 2.0) * x.ln_1p() - theta * psi_1).exp() * d)
}

/// Density of M_θ(F) at x > 0, given the density of M_θ(F_{A_1}).
pub fn tilt_inverse_density(
    base: &DistributionSpec,
    theta: f64,
    xi_a1: &DensityFn,
    x: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("x must be positive, got {x}")));
    }
    let psi_1 = psi(base, 1.0, quad)?;
    inverse_value(xi_a1, theta, psi_1, x)
}

/// The law of M_θ(F) from the law of M_θ(F_{A_1}).
pub fn tilt_inverse(
    base: &DistributionSpec,
    theta: f64,
    xi_a1: &MeanDensity,
    quad: &QuadratureConfig,
) -> Result<MeanDensity> {
    match xi_a1 {
        MeanDensity::PointMass(b) => {
            if *b >= 1.0 {
                return Err(Error::domain(format!("point mass at {b} is outside [0,1)")));
            }
            Ok(MeanDensity::PointMass(b / (1.0 - b)))
        }
        MeanDensity::Density(xi) => {
            let psi_1 = psi(base, 1.0, quad)?;
            let xi = xi.clone();
            let tol = xi.tolerance;
            Ok(MeanDensity::Density(DensityFn::new(
                format!("tilt_inverse({})", xi.label),
                Support::new(0.0, f64::INFINITY),
                tol,
                move |x| {
                    if x <= 0.0 || x.is_infinite() {
                        return Ok(0.0);
                    }
                    inverse_value(&xi, theta, psi_1, x)
                },
            )))
        }
    }
}

/// Esscher transform e^{−t}(1/c)g_{θ,F}(t/c)e^{θψ(c)} of the GGC density.
pub fn tilted_ggc_density(ggc: &GgcLaw, c: f64, t: f64) -> Result<f64> {
    check_c(c)?;
    if t <= 0.0 {
        return Ok(0.0);
    }
    let psi_c = psi(&ggc.base, c, &ggc.quad)?;
    let g = ggc_density(ggc, t / c)?;
    Ok((ggc.theta * psi_c - t - c.ln()).exp() * g)
}

/// Laplace transform of the tilted GGC law: e^{−θ[ψ(c(1+λ))−ψ(c)]}.
pub fn tilted_ggc_laplace(ggc: &GgcLaw, c: f64, lambda: f64) -> Result<f64> {
    check_c(c)?;
    let a = psi(&ggc.base, c * (1.0 + lambda), &ggc.quad)?;
    let b = psi(&ggc.base, c, &ggc.quad)?;
    Ok((-ggc.theta * (a - b)).exp())
}

/// Density of β_{σ,1−σ}·M_σ(F_{A_c}) at y ∈ (0,1), computed from functionals
/// of F at y/(c(1−y)).
pub fn scaled_tilted_density(
    base: &DistributionSpec,
    sigma: f64,
    c: f64,
    y: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    check_sigma(sigma)?;
    check_c(c)?;
    check_unit(y)?;
    let om = 1.0 - y;
    let x = y / (c * om);
    let s = sin_pi(sigma * base.sf(x));
    if s <= 0.0 {
        return Ok(0.0);
    }
    let psi_c = psi(base, c, quad)?;
    let p = phi(base, x, quad)?;
    let l = sigma * psi_c + (sigma - 1.0) * y.ln() - sigma * (c.ln() + om.ln()) + s.ln() - sigma * p;
    Ok(l.exp() / PI)
}

/// Φ of the tilt base at y from functionals of F:
/// Φ_F(y/(c(1−y))) − ψ(c) + log(c(1−y)).
pub fn phi_tilt(base: &DistributionSpec, c: f64, y: f64, quad: &QuadratureConfig) -> Result<f64> {
    check_c(c)?;
    check_unit(y)?;
    let x = y / (c * (1.0 - y));
    Ok(phi(base, x, quad)? - psi(base, c, quad)? + c.ln() + (-y).ln_1p())
}

/// Normalizing constant check helper: ∫ density over `pts` pieces.
pub fn density_mass<F>(density: F, pts: &[f64], scale: f64, quad: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let est = quadrature::integrate_pieces_scaled(&mut |n: Node| density(n.x), pts, scale, quad)?;
    est.require(quad, "density mass")
}

/// Beta(a, b) density, used by callers comparing against closed forms.
pub fn beta_density(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0) * gamma(a + b) / (gamma(a) * gamma(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{exp_ratio, point_mass, tilt_base, uniform01};
    use crate::mean_laws::mean_density_theta1;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn scaled_density_uniform_closed_form() {
        let u = uniform01();
        for &s in &[0.25, 0.5, 0.8] {
            for &y in &[0.1, 0.4, 0.9] {
                let v = scaled_mean_density(&u, s, y, &q()).unwrap();
                let c = s.exp() / PI
                    * sin_pi(s * (1.0 - y))
                    * y.powf(s * (1.0 - y) - 1.0)
                    * (1.0 - y).powf(-s * (1.0 - y));
                assert!((v - c).abs() < 1e-10 * c.max(1.0), "{s} {y}: {v} vs {c}");
            }
        }
    }

    #[test]
    fn sigma_one_is_theta1_density() {
        let law = MeanLaw::new(1.0, exp_ratio(), q()).unwrap();
        for &x in &[0.3, 1.0, 4.0] {
            let a = scaled_mean_density(&exp_ratio(), 1.0, x, &q()).unwrap();
            let b = mean_density_theta1(&law, x).unwrap();
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn point_mass_ggc_is_exponential() {
        let p = point_mass(1.0).unwrap();
        for &x in &[0.1, 1.0, 3.0] {
            let v = ggc_component_density(&p, 1.0, x, &q()).unwrap();
            assert!((v - (-x).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn point_mass_ggc_half_is_gamma_half() {
        let p = point_mass(1.0).unwrap();
        let x: f64 = 0.7;
        let v = ggc_component_density(&p, 0.5, x, &q()).unwrap();
        let g = x.powf(-0.5) * (-x).exp() / PI.sqrt();
        assert!((v - g).abs() < 1e-8, "{v} vs {g}");
    }

    #[test]
    fn phi_tilt_exp_ratio_at_one() {
        let v = phi_tilt(&exp_ratio(), 1.0, 0.5, &q()).unwrap();
        assert!((v - (0.5f64.ln() - 1.0)).abs() < 1e-9, "{v}");
    }

    #[test]
    fn phi_tilt_matches_generic() {
        let u = uniform01();
        let t = tilt_base(&u, 2.0).unwrap();
        for &y in &[0.1, 0.3, 0.5, 0.6] {
            let a = phi_tilt(&u, 2.0, y, &q()).unwrap();
            let b = phi(&t, y, &q()).unwrap();
            assert!((a - b).abs() < 1e-8, "{y}: {a} vs {b}");
        }
    }

    #[test]
    fn point_mass_tilts() {
        let p = point_mass(1.0).unwrap();
        let f = tilt_forward(&p, 1.0, 1.0, &MeanDensity::PointMass(1.0), &q()).unwrap();
        assert!(matches!(f, MeanDensity::PointMass(v) if v == 0.5));
        let b = tilt_inverse(&p, 1.0, &f, &q()).unwrap();
        assert!(matches!(b, MeanDensity::PointMass(v) if v == 1.0));
    }

    #[test]
    fn domain_checks() {
        let u = uniform01();
        assert!(scaled_mean_density(&u, 0.0, 0.5, &q()).is_err());
        assert!(scaled_tilted_density(&u, 0.5, 1.0, 1.0, &q()).is_err());
        assert!(phi_tilt(&u, -1.0, 0.5, &q()).is_err());
    }
}
