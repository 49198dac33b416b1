//! CDF and density of the Dirichlet mean M_θ(F) through the log-distance
//! functional Φ, plus the Cauchy–Stieltjes transform of order θ.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use crate::dist::{DistributionSpec, Support};
use crate::error::{Error, Result};
use crate::functionals::{existence_check, phi, psi};
use crate::quadrature::{self, Node, QuadratureConfig};
use crate::special::sin_pi_scaled_cdf;

/// Tolerance used for Φ inside numerical derivatives.
const DERIVATIVE_PHI_TOL: f64 = 1e-13;
/// Below a kink, the θ < 1 density is resolvable only down to this distance
/// (relative to the base scale): closer in, differences of Φ drown in noise.
const KINK_RESOLUTION: f64 = 1e-9;
/// Relative tolerance of the outer integral over the differentiated h.
const DERIVATIVE_OUTER_REL_TOL: f64 = 1e-8;

/// The law of M_θ(F).
#[derive(Clone)]
pub struct MeanLaw {
    pub theta: f64,
    pub base: DistributionSpec,
    pub quad: QuadratureConfig,
    density_cache: Arc<RwLock<HashMap<u64, f64>>>,
}

impl std::fmt::Debug for MeanLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MeanLaw")
            .field("theta", &self.theta)
            .field("base", &self.base.label)
            .finish()
    }
}

impl MeanLaw {
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
        Ok(MeanLaw {
            theta,
            base,
            quad,
            density_cache: Arc::default(),
        })
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        phi(&self.base, t, &self.quad)
    }

    pub fn psi(&self, lambda: f64) -> Result<f64> {
        psi(&self.base, lambda, &self.quad)
    }

    /// Support hull of M_θ(F), which is the hull of the base support.
    pub fn hull(&self) -> Support {
        self.base.support()
    }

    /// Location of the law when the base is a single point mass.
    pub fn degenerate_at(&self) -> Option<f64> {
        let atoms = self.base.atoms();
        if !self.base.has_density() && atoms.len() == 1 && (atoms[0].mass - 1.0).abs() < 1e-15 {
            Some(atoms[0].location)
        } else {
            None
        }
    }

    fn check_jumps(&self) -> Result<()> {
        for a in self.base.atoms() {
            if self.theta * a.mass >= 1.0 {
                return Err(Error::precondition(format!(
                    "atom at {} has mass {}; theta*mass = {} must be < 1",
                    a.location,
                    a.mass,
                    self.theta * a.mass
                )));
            }
        }
        Ok(())
    }

    /// sin(πθF(t))·e^{−θΦ(t)} with Φ at the given tolerance.
    fn h(&self, t: f64, quad: &QuadratureConfig) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let s = sin_pi_scaled_cdf(self.theta, self.base.cdf(t), self.base.sf(t));
        if s == 0.0 {
            return Ok(0.0);
        }
        let p = phi(&self.base, t, quad)?;
        Ok(s * (-self.theta * p).exp())
    }

    /// Tolerances matched to the accuracy of the density: the derivative
    /// route for θ < 1 is good to roughly 1e-9, so integrals over it and
    /// inside it ask for no more.
    pub(crate) fn density_accuracy(&self) -> QuadratureConfig {
        if self.theta >= 1.0 {
            return self.quad;
        }
        QuadratureConfig {
            rel_tol: self.quad.rel_tol.max(DERIVATIVE_OUTER_REL_TOL),
            abs_tol: self.quad.abs_tol.max(DERIVATIVE_OUTER_REL_TOL * 1e-2),
            ..self.quad
        }
    }

    /// Whether the density at x is within reach of its evaluator. Only the
    /// θ < 1 route has blind spots, just below kinks of the base.
    pub fn resolvable(&self, x: f64) -> bool {
        self.unresolved_kink(x).is_none()
    }

    /// Points where F or Φ is not smooth.
    fn kinks(&self) -> Vec<f64> {
        let s = self.hull();
        let ds = self.base.density_support();
        let mut kinks: Vec<f64> = self.base.breakpoints().to_vec();
        kinks.extend([s.lower, s.upper, ds.lower, ds.upper]);
        kinks.retain(|k| k.is_finite());
        kinks
    }

    /// For θ < 1, the kink just above x when x is closer to it than the
    /// derivative route can resolve.
    fn unresolved_kink(&self, x: f64) -> Option<f64> {
        if self.theta >= 1.0 {
            return None;
        }
        let reach = KINK_RESOLUTION * self.base.scale();
        self.kinks().into_iter().find(|&k| k > x && k - x < reach)
    }

    /// Split points of [L, x] for integrals of Δ_θ against a kernel in x−t.
    fn pieces_to(&self, x: f64) -> Vec<f64> {
        let lo = self.base.support().lower;
        let mut extra: Vec<f64> = self.base.breakpoints().to_vec();
        extra.extend(self.base.atoms().iter().map(|a| a.location));
        let ds = self.base.density_support();
        extra.push(ds.lower);
        extra.push(ds.upper);
        extra.push(self.base.support().upper);
        // far out, split by decades and at the midpoint so each piece is
        // well scaled for the rule
        let scale = self.base.scale();
        if x - lo > 20.0 * scale {
            let mut d = lo + scale;
            while d < 0.5 * (x - lo) {
                extra.push(d);
                d = lo + 10.0 * (d - lo);
            }
            extra.push(lo + 0.5 * (x - lo));
        }
        quadrature::split_points(lo, x, &extra)
    }

    /// ∫_L^x k(x−t)·g(t) dt where the kernel argument x−t is exact on the
    /// last piece.
    fn kernel_integral<K, G>(&self, x: f64, kernel: K, g: G) -> Result<f64>
    where
        K: Fn(f64) -> f64,
        G: FnMut(f64) -> Result<f64>,
    {
        self.kernel_integral_with(x, kernel, g, &self.quad)
    }

    fn kernel_integral_with<K, G>(&self, x: f64, kernel: K, mut g: G, quad: &QuadratureConfig) -> Result<f64>
    where
        K: Fn(f64) -> f64,
        G: FnMut(f64) -> Result<f64>,
    {
        let pts = self.pieces_to(x);
        let mut total = 0.0;
        let n = (pts.len() - 1).max(1) as f64;
        let cfg = QuadratureConfig {
            abs_tol: quad.abs_tol / n,
            ..*quad
        };
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let last = b == x;
            let mut f = |node: Node| -> Result<f64> {
                let v = g(node.x)?;
                if v == 0.0 {
                    return Ok(0.0);
                }
                let u = if last { node.to_upper } else { x - node.x };
                Ok(kernel(u) * v)
            };
            let est = quadrature::integrate_scaled(&mut f, a, b, self.base.scale(), &cfg)?;
            total += est.require(&cfg, "mean-law kernel integral")?;
        }
        Ok(total)
    }
}

/// Δ_θ(t) = (1/π)·sin(πθF(t))·e^{−θΦ(t)}.
pub fn delta_theta(law: &MeanLaw, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::domain(format!("t must be finite, got {t}")));
    }
    Ok(law.h(t, &law.quad)? / PI)
}

/// P(M_θ(F) <= x) = ∫_0^x (x−t)^{θ−1} Δ_θ(t) dt.
pub fn mean_cdf(law: &MeanLaw, x: f64) -> Result<f64> {
    law.check_jumps()?;
    if let Some(a) = law.degenerate_at() {
        return Ok(if x >= a { 1.0 } else { 0.0 });
    }
    let s = law.hull();
    if x <= s.lower {
        return Ok(0.0);
    }
    if law.theta == 1.0 && x >= s.upper {
        return Ok(1.0);
    }
    let th = law.theta;
    let v = law.kernel_integral(x, |u| u.powf(th - 1.0), |t| delta_theta(law, t))?;
    let tol = 1e-7;
    if v < -tol || v > 1.0 + tol {
        return Err(Error::quality(format!("cdf value {v} at x = {x} lies outside [0,1]"), v));
    }
    Ok(v)
}

/// θ = 1 density: Δ_1(x).
pub fn mean_density_theta1(law: &MeanLaw, x: f64) -> Result<f64> {
    if law.theta != 1.0 {
        return Err(Error::contract(format!(
            "theta = 1 density requested with theta = {}",
            law.theta
        )));
    }
    law.check_jumps()?;
    delta_theta(law, x)
}

/// θ > 1 density: (θ−1)∫_0^x (x−t)^{θ−2} Δ_θ(t) dt.
pub fn mean_density_theta_gt1(law: &MeanLaw, x: f64) -> Result<f64> {
    if !(law.theta > 1.0) {
        return Err(Error::contract(format!(
            "theta > 1 density requested with theta = {}",
            law.theta
        )));
    }
    law.check_jumps()?;
    if x <= law.hull().lower {
        return Ok(0.0);
    }
    let th = law.theta;
    let v = law.kernel_integral(x, |u| u.powf(th - 2.0), |t| delta_theta(law, t))?;
    nonnegative((th - 1.0) * v, 100.0 * law.quad.abs_tol, x)
}

/// Derivative of h at t by central differences, extrapolated to zero step
/// with a Richardson (Neville) tableau whose step shrinks by 1.4 per level.
/// Stops once the error estimate starts growing. Returns (estimate, error).
fn h_derivative(law: &MeanLaw, t: f64, step: f64, quad: &QuadratureConfig) -> Result<(f64, f64)> {
    const CON2: f64 = 1.4 * 1.4;
    const LEVELS: usize = 10;
    let d = |s: f64| -> Result<f64> { Ok((law.h(t + s, quad)? - law.h(t - s, quad)?) / (2.0 * s)) };
    let mut s = step;
    let mut prev = vec![d(s)?];
    let (mut best, mut err) = (prev[0], f64::INFINITY);
    for i in 1..LEVELS {
        s /= 1.4;
        let mut row = vec![d(s)?];
        let mut fac = CON2;
        for j in 1..=i {
            let v = (row[j - 1] * fac - prev[j - 1]) / (fac - 1.0);
            fac *= CON2;
            let e = (v - row[j - 1]).abs().max((v - prev[j - 1]).abs());
            if e <= err {
                err = e;
                best = v;
            }
            row.push(v);
        }
        if (row[i] - prev[i - 1]).abs() >= 2.0 * err {
            break;
        }
        prev = row;
    }
    Ok((best, err))
}

/// General-θ density: (1/π)∫_0^x (x−t)^{θ−1} h′(t) dt with
/// h(t) = sin(πθF(t))e^{−θΦ(t)} differentiated numerically.
pub fn mean_density_general(law: &MeanLaw, x: f64) -> Result<f64> {
    let s = law.hull();
    if x <= s.lower {
        return Ok(0.0);
    }
    for a in law.base.atoms() {
        if a.location < x {
            return Err(Error::precondition(format!(
                "derivative route needs an atomless base below x; atom at {}",
                a.location
            )));
        }
    }
    let kinks = law.kinks();
    let scale = law.base.scale();
    if let Some(k) = law.unresolved_kink(x) {
        return Err(Error::quality(
            format!("x = {x} lies too close below the kink at {k} for the derivative route"),
            k - x,
        ));
    }
    let quad = law.quad.tightened(DERIVATIVE_PHI_TOL, 1e-15);
    let th = law.theta;
    let outer = law.density_accuracy();
    let v = law.kernel_integral_with(
        x,
        |u| u.powf(th - 1.0),
        |t| {
            let dist = kinks
                .iter()
                .map(|k| (t - k).abs())
                .fold(f64::INFINITY, f64::min);
            // t − k carries too few bits this close to a kink at k ≠ 0
            if dist < 4096.0 * f64::EPSILON * t.abs().max(f64::MIN_POSITIVE) {
                return Ok(0.0);
            }
            let step = (0.05 * scale.max(t - s.lower)).min(0.25 * dist);
            let (d, err) = h_derivative(law, t, step, &quad)?;
            // Next to a kink the differences lose digits to rounding of t, but
            // the sliver they cover adds only about err·dist·(x−t)^(θ−1).
            let noisy = err > 1e-4 * (1.0 + d.abs());
            if noisy && err * dist * (x - t).powf(th - 1.0) > 1e-9 / scale {
                return Err(Error::quality(
                    format!("derivative of sin(πθF)e^(−θΦ) at t = {t} is unreliable"),
                    err,
                ));
            }
            Ok(d)
        },
        &outer,
    )?;
    nonnegative(v / PI, 100.0 * outer.abs_tol, x)
}

/// Clears a negative density that lies within quadrature noise of 0.
fn nonnegative(v: f64, tol: f64, x: f64) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v > -tol {
        Ok(0.0)
    } else {
        Err(Error::quality(format!("density at x = {x} came out negative"), v))
    }
}

/// Density of M_θ(F): the θ = 1 formula, the θ > 1 formula, or the
/// derivative route for θ < 1. Results are memoized per law.
pub fn mean_density(law: &MeanLaw, x: f64) -> Result<f64> {
    if let Some(v) = law.density_cache.read().unwrap().get(&x.to_bits()) {
        return Ok(*v);
    }
    if law.degenerate_at().is_some() {
        return Err(Error::contract("a degenerate mean law has no density"));
    }
    let hull = law.hull();
    if x.is_nan() {
        return Err(Error::domain("x is NaN"));
    }
    if x <= hull.lower || x >= hull.upper {
        return Ok(0.0);
    }
    let v = if law.theta == 1.0 {
        mean_density_theta1(law, x)?
    } else if law.theta > 1.0 {
        mean_density_theta_gt1(law, x)?
    } else {
        mean_density_general(law, x)?
    };
    let mut cache = law.density_cache.write().unwrap();
    if cache.len() > 1 << 20 {
        cache.clear();
    }
    cache.insert(x.to_bits(), v);
    Ok(v)
}

/// Mass beyond the cutoff of an infinite hull that [`integrate_against_density`]
/// may drop. The CDF is accurate to about 1e-10, so this is as far out as
/// the survival function can be resolved.
const MEAN_TAIL_MASS: f64 = 1e-9;

/// Upper cutoff T for an infinite hull: the first point of a geometric
/// sequence with weight(T)·P(M > T) below the tail tolerance.
fn tail_cutoff(law: &MeanLaw, weight: &dyn Fn(f64) -> f64) -> Result<f64> {
    let s = law.hull();
    let tol = law.quad.tail_delta.max(MEAN_TAIL_MASS);
    let mut x = s.lower + 4.0 * law.base.scale();
    for _ in 0..400 {
        let sf = 1.0 - mean_cdf(law, x)?;
        if sf.max(0.0) * weight(x) <= tol {
            return Ok(x);
        }
        x = s.lower + 4.0 * (x - s.lower);
    }
    Err(Error::quality(
        format!("no tail cutoff found for the mean law of '{}'", law.base.label),
        x,
    ))
}

/// ∫ g(m)·ξ(m) dm over the support hull of the mean law. On an infinite
/// hull the range stops where P(M > m) drops below the tail tolerance, so
/// g should be bounded there.
pub fn integrate_against_density<G>(law: &MeanLaw, g: G) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    integrate_with_cutoff(law, g, &|_| 1.0)
}

/// As [`integrate_against_density`], for a nonnegative g that is
/// nonincreasing on the tail: the range stops once g(m)·P(M > m) is small.
pub fn integrate_decreasing_against_density<G>(law: &MeanLaw, g: G) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let w = |m: f64| g(m);
    integrate_with_cutoff(law, &g, &w)
}

fn integrate_with_cutoff<G>(law: &MeanLaw, g: G, weight: &dyn Fn(f64) -> f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let s = law.hull();
    let mut extra: Vec<f64> = law.base.breakpoints().to_vec();
    extra.extend(law.base.atoms().iter().map(|a| a.location));
    let ds = law.base.density_support();
    extra.extend([ds.lower, ds.upper]);
    let cfg = law.density_accuracy();
    let integrand = |m: f64| -> Result<f64> {
        let w = g(m);
        // skips a sliver of width KINK_RESOLUTION·scale below a kink
        if w == 0.0 || law.unresolved_kink(m).is_some() {
            return Ok(0.0);
        }
        Ok(w * mean_density(law, m)?)
    };
    let (near_end, far_end) = if s.upper.is_infinite() {
        let t = tail_cutoff(law, weight)?;
        let near = s.lower + law.base.scale();
        (near.min(t), t)
    } else {
        (s.upper, s.upper)
    };
    let pts = quadrature::split_points(s.lower, near_end, &extra);
    let near = quadrature::integrate_pieces_scaled(
        &mut |n: Node| integrand(n.x),
        &pts,
        law.base.scale(),
        &cfg,
    )?;
    let mut total = near.require(&cfg, "integral against mean density")?;
    if far_end > near_end {
        // the far range in the variable log(m − L), where the density is tame
        let far_pts = quadrature::split_points(near_end, far_end, &extra);
        for w in far_pts.windows(2) {
            let failure = std::cell::RefCell::new(None);
            let est = quadrature::gauss_kronrod(
                |u: f64| {
                    let off = u.exp();
                    match integrand(s.lower + off) {
                        Ok(v) => v * off,
                        Err(e) => {
                            failure.borrow_mut().get_or_insert(e);
                            0.0
                        }
                    }
                },
                (w[0] - s.lower).ln(),
                (w[1] - s.lower).ln(),
                &cfg,
            );
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            total += est.require(&cfg, "tail integral against mean density")?;
        }
    }
    Ok(total)
}

/// E[(1+λM)^{−θ}] computed from the mean density.
pub fn cauchy_stieltjes(law: &MeanLaw, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("lambda must be >= 0, got {lambda}")));
    }
    if let Some(a) = law.degenerate_at() {
        return Ok((1.0 + lambda * a).powf(-law.theta));
    }
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let th = law.theta;
    integrate_decreasing_against_density(law, |m| (1.0 + lambda * m).powf(-th))
}

/// Left side E[(1+λM)^{−θ}] and right side e^{−θψ(λ)} of the transform
/// identity.
pub fn cauchy_stieltjes_check(law: &MeanLaw, lambda: f64) -> Result<(f64, f64)> {
    let lhs = cauchy_stieltjes(law, lambda)?;
    let rhs = (-law.theta * law.psi(lambda)?).exp();
    Ok((lhs, rhs))
}

/// A density handle carrying the tolerance it was computed to.
#[derive(Clone)]
pub struct DensityFn {
    pub label: String,
    pub support: Support,
    pub tolerance: f64,
    f: Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>,
}

impl std::fmt::Debug for DensityFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DensityFn")
            .field("label", &self.label)
            .field("support", &self.support)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

impl DensityFn {
    pub fn new<F>(label: impl Into<String>, support: Support, tolerance: f64, f: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        DensityFn {
            label: label.into(),
            support,
            tolerance,
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        (self.f)(x)
    }
}

/// Law of a mean functional: a density, or a point mass when the base is
/// degenerate.
#[derive(Clone, Debug)]
pub enum MeanDensity {
    PointMass(f64),
    Density(DensityFn),
}

impl MeanDensity {
    pub fn density(&self) -> Result<&DensityFn> {
        match self {
            MeanDensity::Density(d) => Ok(d),
            MeanDensity::PointMass(a) => Err(Error::contract(format!(
                "law is a point mass at {a} and has no density"
            ))),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.density()?.eval(x)
    }
}

impl MeanLaw {
    /// The law as a [`MeanDensity`].
    pub fn density_fn(&self) -> MeanDensity {
        if let Some(a) = self.degenerate_at() {
            return MeanDensity::PointMass(a);
        }
        let law = self.clone();
        let tol = if self.theta == 1.0 { self.quad.rel_tol } else { 1e-8 };
        MeanDensity::Density(DensityFn::new(
            format!("M_{}({})", self.theta, self.base.label),
            self.hull(),
            tol,
            move |x| mean_density(&law, x),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{exp_ratio, point_mass, uniform01};

    fn law(theta: f64, base: DistributionSpec) -> MeanLaw {
        MeanLaw::new(theta, base, QuadratureConfig::default()).unwrap()
    }

    #[test]
    fn delta_uniform_midpoint() {
        let l = law(1.0, uniform01());
        let v = delta_theta(&l, 0.5).unwrap();
        assert!((v - 2.0 * std::f64::consts::E / PI).abs() < 1e-12, "{v}");
        assert_eq!(delta_theta(&l, -0.5).unwrap(), 0.0);
        assert_eq!(delta_theta(&l, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn cdf_uniform_theta1() {
        let l = law(1.0, uniform01());
        assert!((mean_cdf(&l, 0.5).unwrap() - 0.5).abs() < 1e-10);
        assert!((mean_cdf(&l, 1.0 - 1e-9).unwrap() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn theta_guards() {
        let l = law(2.0, uniform01());
        assert!(matches!(mean_density_theta1(&l, 0.5), Err(Error::Contract(_))));
        let l = law(1.0, uniform01());
        assert!(matches!(mean_density_theta_gt1(&l, 0.5), Err(Error::Contract(_))));
        assert!(MeanLaw::new(0.0, uniform01(), QuadratureConfig::default()).is_err());
    }

    #[test]
    fn jump_precondition() {
        let t = crate::dist::thin(&uniform01(), 0.3).unwrap().into_spec();
        let l = law(2.0, t);
        assert!(matches!(mean_cdf(&l, 0.5), Err(Error::Precondition(_))));
    }

    #[test]
    fn point_mass_transform() {
        let l = law(1.0, point_mass(1.0).unwrap());
        for &lam in &[0.0, 0.5, 3.0] {
            let v = cauchy_stieltjes(&l, lam).unwrap();
            assert!((v - 1.0 / (1.0 + lam)).abs() < 1e-15);
        }
        assert!(matches!(l.density_fn(), MeanDensity::PointMass(a) if a == 1.0));
    }

    #[test]
    fn general_route_agrees_with_theta1_formula() {
        let l = law(1.0, uniform01());
        for &x in &[0.05, 0.3, 0.5, 0.8, 0.95] {
            let a = mean_density_theta1(&l, x).unwrap();
            let b = mean_density_general(&l, x).unwrap();
            assert!((a - b).abs() < 1e-6, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn general_route_agrees_with_theta_gt1_formula() {
        let l = law(1.5, uniform01());
        for &x in &[0.2, 0.5, 0.7] {
            let a = mean_density_theta_gt1(&l, x).unwrap();
            let b = mean_density_general(&l, x).unwrap();
            assert!((a - b).abs() < 1e-6, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn exp_ratio_theta1_known_density() {
        let l = law(1.0, exp_ratio());
        let v = mean_density(&l, 1.0).unwrap();
        assert!((v - 1.0 / PI).abs() < 1e-10, "{v}");
    }
}
