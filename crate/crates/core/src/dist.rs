//! Distribution descriptors for non-negative random variables.

use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;
use std::sync::{Arc, RwLock};

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::quadrature::{self, Node, QuadratureConfig};
use crate::special::sin_pi;

pub type CdfFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type DensityFnArg = Arc<dyn Fn(Arg) -> f64 + Send + Sync>;
pub type SamplerFn = Arc<dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync>;

/// A density argument together with its exact offsets from the ends of the
/// interval carrying the continuous part. Offsets let densities with
/// endpoint singularities keep full relative accuracy where `x` itself has
/// rounded onto the endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arg {
    pub x: f64,
    pub above_lower: f64,
    pub below_upper: f64,
}

impl Arg {
    pub fn within(x: f64, support: Support) -> Arg {
        Arg {
            x,
            above_lower: x - support.lower,
            below_upper: if support.upper.is_finite() {
                support.upper - x
            } else {
                f64::INFINITY
            },
        }
    }

    /// Builds the argument for a quadrature node on the piece `[a, b]`,
    /// using the node's exact offsets where the piece touches the support.
    pub fn from_node(node: Node, a: f64, b: f64, support: Support) -> Arg {
        let mut arg = Arg::within(node.x, support);
        if a == support.lower {
            arg.above_lower = node.from_lower;
        }
        if b == support.upper && b.is_finite() {
            arg.below_upper = node.to_upper;
        }
        arg
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// Closed interval hull `[lower, upper]`; `upper` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub fn new(lower: f64, upper: f64) -> Self {
        Support { lower, upper }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.upper.is_finite()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub(crate) enum CacheTag {
    Phi,
    Psi,
    Existence,
}

/// Memo of functional values, shared between clones of a spec.
#[derive(Default)]
pub(crate) struct FunctionalCache {
    map: RwLock<HashMap<(CacheTag, u64, u64), f64>>,
}

const CACHE_LIMIT: usize = 1 << 21;

impl FunctionalCache {
    pub(crate) fn get_or<F>(&self, tag: CacheTag, arg: f64, tol: f64, f: F) -> Result<f64>
    where
        F: FnOnce() -> Result<f64>,
    {
        let key = (tag, arg.to_bits(), tol.to_bits());
        if let Some(v) = self.map.read().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = f()?;
        let mut map = self.map.write().unwrap();
        if map.len() >= CACHE_LIMIT {
            map.clear();
        }
        map.insert(key, v);
        Ok(v)
    }
}

/// A non-negative distribution: CDF and survival function, an optional
/// density of the continuous part, atoms, and an optional sampler.
#[derive(Clone)]
pub struct DistributionSpec {
    pub label: String,
    cdf: CdfFn,
    sf: CdfFn,
    density: Option<DensityFnArg>,
    atoms: Vec<Atom>,
    support: Support,
    density_support: Support,
    breakpoints: Vec<f64>,
    sampler: Option<SamplerFn>,
    scale: f64,
    pub(crate) cache: Arc<FunctionalCache>,
}

impl fmt::Debug for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistributionSpec")
            .field("label", &self.label)
            .field("atoms", &self.atoms)
            .field("support", &self.support)
            .field("has_density", &self.density.is_some())
            .field("has_sampler", &self.sampler.is_some())
            .finish()
    }
}

/// Builder for specs with user-supplied handles.
pub struct SpecBuilder {
    spec: DistributionSpec,
}

impl SpecBuilder {
    pub fn new(label: impl Into<String>, support: Support, cdf: CdfFn, sf: CdfFn) -> Self {
        SpecBuilder {
            spec: DistributionSpec {
                label: label.into(),
                cdf,
                sf,
                density: None,
                atoms: Vec::new(),
                support,
                density_support: support,
                breakpoints: Vec::new(),
                sampler: None,
                scale: 1.0,
                cache: Arc::default(),
            },
        }
    }

    pub fn density(mut self, f: DensityFnArg) -> Self {
        self.spec.density = Some(f);
        self
    }

    pub fn density_support(mut self, s: Support) -> Self {
        self.spec.density_support = s;
        self
    }

    pub fn atoms(mut self, atoms: Vec<Atom>) -> Self {
        self.spec.atoms = atoms;
        self
    }

    pub fn breakpoints(mut self, b: Vec<f64>) -> Self {
        self.spec.breakpoints = b;
        self
    }

    pub fn sampler(mut self, s: SamplerFn) -> Self {
        self.spec.sampler = Some(s);
        self
    }

    pub fn scale(mut self, s: f64) -> Self {
        self.spec.scale = s;
        self
    }

    pub fn build(self) -> Result<DistributionSpec> {
        let s = &self.spec;
        if !(s.support.lower >= 0.0) || !(s.support.upper >= s.support.lower) {
            return Err(Error::domain(format!(
                "support must satisfy 0 <= lower <= upper, got [{}, {}]",
                s.support.lower, s.support.upper
            )));
        }
        let mut total = 0.0;
        for a in &s.atoms {
            if !(a.mass > 0.0 && a.mass <= 1.0) || !(a.location >= 0.0) {
                return Err(Error::domain(format!("invalid atom {a:?}")));
            }
            total += a.mass;
        }
        if total > 1.0 + 1e-12 {
            return Err(Error::domain(format!("atom masses sum to {total} > 1")));
        }
        if !(s.scale > 0.0 && s.scale.is_finite()) {
            return Err(Error::domain("scale must be positive"));
        }
        Ok(self.spec)
    }
}

impl DistributionSpec {
    /// P(X <= x).
    pub fn cdf(&self, x: f64) -> f64 {
        (self.cdf)(x)
    }

    /// P(X > x), accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        (self.sf)(x)
    }

    /// P(X < x).
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x) - self.atom_mass_at(x)
    }

    pub fn atom_mass_at(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.location == x)
            .map(|a| a.mass)
            .sum()
    }

    pub fn has_density(&self) -> bool {
        self.density.is_some()
    }

    /// Density of the continuous part at `x`, if a density handle exists.
    pub fn density(&self, x: f64) -> Option<f64> {
        self.density_arg(Arg::within(x, self.density_support))
    }

    pub fn density_arg(&self, arg: Arg) -> Option<f64> {
        let f = self.density.as_ref()?;
        if arg.x < self.density_support.lower || arg.x > self.density_support.upper {
            return Some(0.0);
        }
        Some(f(arg))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn support(&self) -> Support {
        self.support
    }

    /// Hull of the continuous part.
    pub fn density_support(&self) -> Support {
        self.density_support
    }

    /// Interior points where the density is singular or not smooth.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Length scale used when mapping an infinite support onto a finite one.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn has_sampler(&self) -> bool {
        self.sampler.is_some()
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Result<f64> {
        match &self.sampler {
            Some(s) => Ok(s(rng)),
            None => Err(Error::contract(format!(
                "distribution '{}' has no sampler",
                self.label
            ))),
        }
    }

    /// Split points of the continuous part: lower end, breakpoints, atom
    /// locations inside, upper end.
    pub fn density_pieces(&self) -> Vec<f64> {
        let ds = self.density_support;
        let mut extra: Vec<f64> = self.breakpoints.clone();
        extra.extend(self.atoms.iter().map(|a| a.location));
        quadrature::split_points(ds.lower, ds.upper, &extra)
    }

    /// Smallest x with P(X > x) <= delta (bisection on the survival
    /// function).
    pub fn upper_quantile(&self, delta: f64) -> f64 {
        if self.support.upper.is_finite() {
            let (mut lo, mut hi) = (self.support.lower, self.support.upper);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.sf(mid) <= delta {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return hi;
        }
        let mut hi = self.support.lower + self.scale;
        let mut n = 0;
        while self.sf(hi) > delta && n < 2000 {
            hi = self.support.lower + 2.0 * (hi - self.support.lower);
            n += 1;
        }
        let mut lo = self.support.lower;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sf(mid) <= delta {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Generalized inverse of the CDF, `inf{x : F(x) >= u}`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.support.lower;
        }
        let mut lo = self.support.lower;
        let mut hi = if self.support.upper.is_finite() {
            self.support.upper
        } else {
            let mut h = lo + self.scale;
            let mut n = 0;
            while self.cdf(h) < u && n < 2000 {
                h = lo + 2.0 * (h - lo);
                n += 1;
            }
            h
        };
        if self.cdf(lo) >= u {
            return lo;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Same law with an inverse-CDF sampler (bisection on the CDF).
    pub fn with_quantile_sampler(&self) -> DistributionSpec {
        let me = self.without_sampler();
        let inner = me.clone();
        let mut out = me;
        out.sampler = Some(Arc::new(move |rng: &mut dyn RngCore| {
            let u: f64 = rng.random();
            inner.quantile(u)
        }));
        out
    }

    fn without_sampler(&self) -> DistributionSpec {
        let mut out = self.clone();
        out.sampler = None;
        out
    }

    /// Same law with a fresh functional cache and a new label.
    pub fn relabeled(&self, label: impl Into<String>) -> DistributionSpec {
        let mut out = self.clone();
        out.label = label.into();
        out.cache = Arc::default();
        out
    }

    /// Same law, described by its CDF only.
    pub fn without_density(&self) -> DistributionSpec {
        let mut out = self.relabeled(format!("{} (cdf only)", self.label));
        out.density = None;
        out
    }

    /// Law of `c·X` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<DistributionSpec> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("scale factor must be positive, got {c}")));
        }
        let (b1, b2) = (self.clone(), self.clone());
        let density: Option<DensityFnArg> = self.density.clone().map(|f| {
            Arc::new(move |a: Arg| {
                f(Arg {
                    x: a.x / c,
                    above_lower: a.above_lower / c,
                    below_upper: a.below_upper / c,
                }) / c
            }) as DensityFnArg
        });
        let scale_support = |s: Support| Support::new(s.lower * c, s.upper * c);
        Ok(DistributionSpec {
            label: format!("{}*{}", c, self.label),
            cdf: Arc::new(move |x| b1.cdf(x / c)),
            sf: Arc::new(move |x| b2.sf(x / c)),
            density,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    location: a.location * c,
                    mass: a.mass,
                })
                .collect(),
            support: scale_support(self.support),
            density_support: scale_support(self.density_support),
            breakpoints: self.breakpoints.iter().map(|b| b * c).collect(),
            sampler: self.sampler.clone().map(|s| {
                Arc::new(move |rng: &mut dyn RngCore| c * s(rng)) as SamplerFn
            }),
            scale: self.scale * c,
            cache: Arc::default(),
        })
    }

    /// Law of `X + c` for `c >= 0`.
    pub fn shifted(&self, c: f64) -> Result<DistributionSpec> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("shift must be non-negative, got {c}")));
        }
        let (b1, b2) = (self.clone(), self.clone());
        let density: Option<DensityFnArg> = self.density.clone().map(|f| {
            Arc::new(move |a: Arg| {
                f(Arg {
                    x: a.x - c,
                    above_lower: a.above_lower,
                    below_upper: a.below_upper,
                })
            }) as DensityFnArg
        });
        let shift = |s: Support| Support::new(s.lower + c, s.upper + c);
        Ok(DistributionSpec {
            label: format!("{}+{}", self.label, c),
            cdf: Arc::new(move |x| b1.cdf(x - c)),
            sf: Arc::new(move |x| b2.sf(x - c)),
            density,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    location: a.location + c,
                    mass: a.mass,
                })
                .collect(),
            support: shift(self.support),
            density_support: shift(self.density_support),
            breakpoints: self.breakpoints.iter().map(|b| b + c).collect(),
            sampler: self.sampler.clone().map(|s| {
                Arc::new(move |rng: &mut dyn RngCore| c + s(rng)) as SamplerFn
            }),
            scale: self.scale,
            cache: Arc::default(),
        })
    }

    /// Checks monotonicity of the CDF on a 1000-point grid and that density
    /// mass plus atom mass is 1 within `mass_tol`.
    pub fn check_invariants(&self, mass_tol: f64, cfg: &QuadratureConfig) -> Result<()> {
        let hi = if self.support.upper.is_finite() {
            self.support.upper
        } else {
            self.upper_quantile(1e-6)
        };
        let lo = self.support.lower;
        let mut prev = self.cdf(lo - 1e-12 * (1.0 + lo.abs()));
        if prev.abs() > 1e-12 {
            return Err(Error::contract(format!("cdf below support is {prev}")));
        }
        for i in 0..=1000 {
            let x = lo + (hi - lo) * i as f64 / 1000.0;
            let v = self.cdf(x);
            if !(0.0..=1.0).contains(&v) || v < prev - 1e-14 {
                return Err(Error::contract(format!("cdf not monotone at {x}")));
            }
            prev = v;
        }
        if self.support.upper.is_finite() && (self.cdf(self.support.upper) - 1.0).abs() > mass_tol {
            return Err(Error::contract("cdf at upper support end is not 1"));
        }
        if self.density.is_some() {
            let mass = self.density_mass(cfg)? + self.atom_mass();
            if (mass - 1.0).abs() > mass_tol {
                return Err(Error::contract(format!("total mass {mass} differs from 1")));
            }
        }
        Ok(())
    }

    /// ∫ density over the continuous support.
    pub fn density_mass(&self, cfg: &QuadratureConfig) -> Result<f64> {
        self.integrate_density(|_, f| Ok(f), cfg)
    }

    /// ∫ g(x, f(x)) dx over the continuous part, split at the density
    /// pieces.
    pub fn integrate_density<G>(&self, mut g: G, cfg: &QuadratureConfig) -> Result<f64>
    where
        G: FnMut(Node, f64) -> Result<f64>,
    {
        self.integrate_density_with(&[], |n, _, _, f| g(n, f), cfg)
    }

    /// As [`integrate_density`](Self::integrate_density), additionally
    /// splitting at `extra` and passing each piece `[a, b]` to `g`.
    pub fn integrate_density_with<G>(&self, extra: &[f64], mut g: G, cfg: &QuadratureConfig) -> Result<f64>
    where
        G: FnMut(Node, f64, f64, f64) -> Result<f64>,
    {
        let dens = self
            .density
            .clone()
            .ok_or_else(|| Error::contract(format!("'{}' has no density", self.label)))?;
        let ds = self.density_support;
        let mut pts = self.density_pieces();
        if !extra.is_empty() {
            pts = quadrature::split_points(ds.lower, ds.upper, &[&pts[..], extra].concat());
        }
        let n = (pts.len() - 1).max(1) as f64;
        let piece_cfg = QuadratureConfig {
            abs_tol: cfg.abs_tol / n,
            ..*cfg
        };
        let mut total = 0.0;
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let mut h = |node: Node| -> Result<f64> {
                let fv = dens(Arg::from_node(node, a, b, ds));
                if fv == 0.0 {
                    return Ok(0.0);
                }
                g(node, a, b, fv)
            };
            let est = quadrature::integrate_scaled(&mut h, a, b, self.scale, &piece_cfg)?;
            total += est.require(&piece_cfg, "density integral")?;
        }
        Ok(total)
    }
}

/// Law of `X·Y_σ`, with `Y_σ` Bernoulli(σ) independent of `X`.
#[derive(Clone, Debug)]
pub struct ThinnedSpec {
    pub base: DistributionSpec,
    pub sigma: f64,
    spec: DistributionSpec,
}

impl Deref for ThinnedSpec {
    type Target = DistributionSpec;
    fn deref(&self) -> &DistributionSpec {
        &self.spec
    }
}

impl ThinnedSpec {
    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn into_spec(self) -> DistributionSpec {
        self.spec
    }
}

/// Law of `A_c = cX/(cX+1)`.
#[derive(Clone, Debug)]
pub struct TiltBaseSpec {
    pub base: DistributionSpec,
    pub c: f64,
    spec: DistributionSpec,
}

impl Deref for TiltBaseSpec {
    type Target = DistributionSpec;
    fn deref(&self) -> &DistributionSpec {
        &self.spec
    }
}

impl TiltBaseSpec {
    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn into_spec(self) -> DistributionSpec {
        self.spec
    }
}

pub fn uniform01() -> DistributionSpec {
    SpecBuilder::new(
        "uniform01",
        Support::new(0.0, 1.0),
        Arc::new(|x: f64| x.clamp(0.0, 1.0)),
        Arc::new(|x: f64| (1.0 - x).clamp(0.0, 1.0)),
    )
    .density(Arc::new(|_a: Arg| 1.0))
    .sampler(Arc::new(|rng: &mut dyn RngCore| rng.random::<f64>()))
    .build()
    .expect("valid uniform spec")
}

pub fn point_mass(a: f64) -> Result<DistributionSpec> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("point mass location must be >= 0, got {a}")));
    }
    SpecBuilder::new(
        format!("point_mass({a})"),
        Support::new(a, a),
        Arc::new(move |x: f64| if x >= a { 1.0 } else { 0.0 }),
        Arc::new(move |x: f64| if x >= a { 0.0 } else { 1.0 }),
    )
    .atoms(vec![Atom {
        location: a,
        mass: 1.0,
    }])
    .sampler(Arc::new(move |_rng: &mut dyn RngCore| a))
    .scale(if a > 0.0 { a } else { 1.0 })
    .build()
}

/// Ratio of two independent unit exponentials.
pub fn exp_ratio() -> DistributionSpec {
    SpecBuilder::new(
        "exp_ratio",
        Support::new(0.0, f64::INFINITY),
        Arc::new(|w: f64| if w <= 0.0 { 0.0 } else { w / (1.0 + w) }),
        Arc::new(|w: f64| if w <= 0.0 { 1.0 } else { 1.0 / (1.0 + w) }),
    )
    .density(Arc::new(|a: Arg| {
        let d = 1.0 + a.x;
        1.0 / (d * d)
    }))
    .sampler(Arc::new(|rng: &mut dyn RngCore| {
        let e1: f64 = rand_distr::Distribution::sample(&rand_distr::Exp1, rng);
        let e2: f64 = rand_distr::Distribution::sample(&rand_distr::Exp1, rng);
        e1 / e2
    }))
    .build()
    .expect("valid exp-ratio spec")
}

pub(crate) fn check_unit_open(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in (0,1), got {v}")))
    }
}

/// Density of the Lamperti law `Z_α`.
pub fn lamperti_density(alpha: f64, y: f64) -> f64 {
    if y < 0.0 {
        return 0.0;
    }
    let c = crate::special::cos_pi(alpha);
    sin_pi(alpha) / (std::f64::consts::PI * alpha) / (y * y + 2.0 * y * c + 1.0)
}

/// P(Z_α > z).
pub fn lamperti_sf(alpha: f64, z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    if z.is_infinite() {
        return 0.0;
    }
    let s = sin_pi(alpha);
    let c = crate::special::cos_pi(alpha);
    if z > 1.0 {
        // Avoid cancellation in cos πα + z for large z.
        (s / (c + z)).atan() / (std::f64::consts::PI * alpha)
    } else {
        s.atan2(c + z) / (std::f64::consts::PI * alpha)
    }
}

/// P(Z_α <= z), via the reciprocal symmetry so small z keep full precision.
pub fn lamperti_cdf(alpha: f64, z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        lamperti_sf(alpha, 1.0 / z)
    }
}

pub fn lamperti(alpha: f64) -> Result<DistributionSpec> {
    check_unit_open("alpha", alpha)?;
    SpecBuilder::new(
        format!("lamperti({alpha})"),
        Support::new(0.0, f64::INFINITY),
        Arc::new(move |z| lamperti_cdf(alpha, z)),
        Arc::new(move |z| lamperti_sf(alpha, z)),
    )
    .density(Arc::new(move |a: Arg| lamperti_density(alpha, a.x)))
    .sampler(Arc::new(move |rng: &mut dyn RngCore| {
        crate::montecarlo::lamperti_draw(alpha, rng)
    }))
    .build()
}

/// Law of `X·Y_σ`: mass σ on the base law and 1−σ at the origin.
pub fn thin(base: &DistributionSpec, sigma: f64) -> Result<ThinnedSpec> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::domain(format!("sigma must lie in (0,1], got {sigma}")));
    }
    if sigma == 1.0 {
        return Ok(ThinnedSpec {
            base: base.clone(),
            sigma,
            spec: base.clone(),
        });
    }
    let (b1, b2) = (base.clone(), base.clone());
    let mut atoms: Vec<Atom> = base
        .atoms
        .iter()
        .map(|a| Atom {
            location: a.location,
            mass: sigma * a.mass,
        })
        .collect();
    match atoms.iter_mut().find(|a| a.location == 0.0) {
        Some(a) => a.mass += 1.0 - sigma,
        None => atoms.insert(
            0,
            Atom {
                location: 0.0,
                mass: 1.0 - sigma,
            },
        ),
    }
    let density = base.density.clone().map(|f| {
        Arc::new(move |a: Arg| sigma * f(a)) as DensityFnArg
    });
    let sampler = base.sampler.clone().map(|s| {
        Arc::new(move |rng: &mut dyn RngCore| {
            if rng.random::<f64>() < sigma {
                s(rng)
            } else {
                0.0
            }
        }) as SamplerFn
    });
    let spec = DistributionSpec {
        label: format!("thin({}, {sigma})", base.label),
        cdf: Arc::new(move |x| {
            if x < 0.0 {
                0.0
            } else {
                sigma * b1.cdf(x) + (1.0 - sigma)
            }
        }),
        sf: Arc::new(move |x| if x < 0.0 { 1.0 } else { sigma * b2.sf(x) }),
        density,
        atoms,
        support: Support::new(0.0, base.support.upper),
        density_support: base.density_support,
        breakpoints: base.breakpoints.clone(),
        sampler,
        scale: base.scale,
        cache: Arc::default(),
    };
    Ok(ThinnedSpec {
        base: base.clone(),
        sigma,
        spec,
    })
}

/// Maps `x ↦ cx/(cx+1)`, with `+∞ ↦ 1`.
fn tilt_map(c: f64, x: f64) -> f64 {
    if x.is_infinite() {
        1.0
    } else {
        c * x / (c * x + 1.0)
    }
}

/// Law of `A_c = cX/(cX+1)`.
pub fn tilt_base(base: &DistributionSpec, c: f64) -> Result<TiltBaseSpec> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::domain(format!("c must be positive, got {c}")));
    }
    let inv = move |y: f64, one_minus_y: f64| y / (c * one_minus_y);
    let (b1, b2) = (base.clone(), base.clone());
    let ds = base.density_support;
    let new_ds = Support::new(tilt_map(c, ds.lower), tilt_map(c, ds.upper));
    let top = tilt_map(c, base.support.upper);
    let density = base.density.clone().map(|f| {
        Arc::new(move |a: Arg| {
            // 1 - y, exact when the tilted support reaches 1.
            let omy = if new_ds.upper == 1.0 {
                a.below_upper
            } else {
                1.0 - a.x
            };
            let x = inv(a.x, omy);
            // x - lower and upper - x expressed through the exact offsets.
            let above = (c * ds.lower + 1.0) * a.above_lower / (c * omy);
            let below = if ds.upper.is_finite() {
                (c * ds.upper + 1.0) * a.below_upper / (c * omy)
            } else {
                f64::INFINITY
            };
            let jac = 1.0 / (c * omy * omy);
            f(Arg {
                x,
                above_lower: above,
                below_upper: below,
            }) * jac
        }) as DensityFnArg
    });
    let sampler = base.sampler.clone().map(|s| {
        Arc::new(move |rng: &mut dyn RngCore| tilt_map(c, s(rng))) as SamplerFn
    });
    let spec = DistributionSpec {
        label: format!("tilt_base({}, {c})", base.label),
        cdf: Arc::new(move |y| {
            if y < 0.0 {
                0.0
            } else if y >= top {
                1.0
            } else {
                b1.cdf(inv(y, 1.0 - y))
            }
        }),
        sf: Arc::new(move |y| {
            if y < 0.0 {
                1.0
            } else if y >= top {
                0.0
            } else {
                b2.sf(inv(y, 1.0 - y))
            }
        }),
        density,
        atoms: base
            .atoms
            .iter()
            .map(|a| Atom {
                location: tilt_map(c, a.location),
                mass: a.mass,
            })
            .collect(),
        support: Support::new(tilt_map(c, base.support.lower), tilt_map(c, base.support.upper)),
        density_support: new_ds,
        breakpoints: base.breakpoints.iter().map(|&b| tilt_map(c, b)).collect(),
        sampler,
        scale: 0.5,
        cache: Arc::default(),
    };
    Ok(TiltBaseSpec {
        base: base.clone(),
        c,
        spec,
    })
}

pub type MapFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Law of `map(X)` for a strictly increasing `map` with inverse `inverse`.
/// With `inverse_derivative` the result carries a density.
pub fn pushforward_monotone(
    base: &DistributionSpec,
    map: MapFn,
    inverse: MapFn,
    inverse_derivative: Option<MapFn>,
) -> Result<DistributionSpec> {
    // Probe the support for monotonicity and inversion.
    let s = base.support;
    let hi = if s.upper.is_finite() {
        s.upper
    } else {
        s.lower + 1e3 * base.scale
    };
    let mut prev = f64::NEG_INFINITY;
    for i in 1..200 {
        let x = if s.upper.is_finite() {
            s.lower + (hi - s.lower) * i as f64 / 200.0
        } else {
            s.lower + base.scale * ((i as f64 - 100.0) / 12.0).exp()
        };
        let y = map(x);
        if !(y > prev) {
            return Err(Error::contract(format!(
                "map is not strictly increasing near x = {x}"
            )));
        }
        let back = inverse(y);
        if (back - x).abs() > 1e-8 * x.abs().max(1.0) {
            return Err(Error::contract(format!(
                "inverse(map(x)) = {back} differs from x = {x}"
            )));
        }
        prev = y;
    }
    let mapped = |x: f64| if x.is_infinite() { map(f64::MAX).max(map(1e300)) } else { map(x) };
    let upper = if s.upper.is_finite() {
        map(s.upper)
    } else {
        let m = mapped(f64::INFINITY);
        if m >= 1e299 { f64::INFINITY } else { m }
    };
    let lower = map(s.lower);
    if !(lower >= 0.0) {
        return Err(Error::contract("pushforward must map into [0, ∞)"));
    }
    let new_support = Support::new(lower, upper);
    let ds = base.density_support;
    let new_ds = Support::new(
        map(ds.lower),
        if ds.upper.is_finite() { map(ds.upper) } else { upper },
    );
    let (b1, b2) = (base.clone(), base.clone());
    let (i1, i2) = (inverse.clone(), inverse.clone());
    let density = match (&base.density, inverse_derivative) {
        (Some(f), Some(d)) => {
            let f = f.clone();
            let inv = inverse.clone();
            Some(Arc::new(move |a: Arg| {
                let x = inv(a.x);
                let fx = f(Arg::within(x, ds));
                if fx == 0.0 {
                    0.0
                } else {
                    fx * d(a.x)
                }
            }) as DensityFnArg)
        }
        _ => None,
    };
    let sampler = base.sampler.clone().map(|smp| {
        let m = map.clone();
        Arc::new(move |rng: &mut dyn RngCore| m(smp(rng))) as SamplerFn
    });
    SpecBuilder::new(
        format!("pushforward({})", base.label),
        new_support,
        Arc::new(move |y| {
            if y < lower {
                0.0
            } else if y >= upper {
                1.0
            } else {
                b1.cdf(i1(y))
            }
        }),
        Arc::new(move |y| {
            if y < lower {
                1.0
            } else if y >= upper {
                0.0
            } else {
                b2.sf(i2(y))
            }
        }),
    )
    .density_support(new_ds)
    .atoms(
        base.atoms
            .iter()
            .map(|a| Atom {
                location: map(a.location),
                mass: a.mass,
            })
            .collect(),
    )
    .breakpoints(base.breakpoints.iter().map(|&b| map(b)).collect())
    .scale(if upper.is_finite() {
        (upper - lower).max(1e-300)
    } else {
        (map(s.lower + base.scale) - lower).max(1e-300)
    })
    .build()
    .map(|mut out| {
        out.density = density;
        out.sampler = sampler;
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn uniform_basics() {
        let u = uniform01();
        assert_eq!(u.cdf(0.5), 0.5);
        assert_eq!(u.density(0.25), Some(1.0));
        assert!((u.density_mass(&cfg()).unwrap() - 1.0).abs() < 1e-14);
        u.check_invariants(1e-8, &cfg()).unwrap();
    }

    #[test]
    fn point_mass_basics() {
        let p = point_mass(1.0).unwrap();
        assert_eq!(p.cdf(0.5), 0.0);
        assert_eq!(p.cdf(1.0), 1.0);
        let z = point_mass(0.0).unwrap();
        assert_eq!(z.atoms(), &[Atom { location: 0.0, mass: 1.0 }]);
        assert!(matches!(point_mass(-1.0), Err(Error::Domain(_))));
        p.check_invariants(1e-8, &cfg()).unwrap();
    }

    #[test]
    fn exp_ratio_basics() {
        let w = exp_ratio();
        assert_eq!(w.cdf(1.0), 0.5);
        assert_eq!(w.density(0.0), Some(1.0));
        assert!((w.quantile(0.5) - 1.0).abs() < 1e-12);
        w.check_invariants(1e-8, &cfg()).unwrap();
    }

    #[test]
    fn lamperti_basics() {
        let z = lamperti(0.5).unwrap();
        assert!((z.density(1.0).unwrap() - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        for &a in &[0.1, 0.3, 0.5, 0.9] {
            let z = lamperti(a).unwrap();
            assert!((z.cdf(1.0) - 0.5).abs() < 1e-15);
            assert!((z.density_mass(&cfg()).unwrap() - 1.0).abs() < 1e-10);
            for &x in &[1e-8, 0.3, 2.0, 1e8] {
                assert!((z.cdf(x) + z.sf(x) - 1.0).abs() < 1e-15);
                assert!((z.cdf(1.0 / x) - z.sf(x)).abs() < 1e-15);
            }
            z.check_invariants(1e-8, &cfg()).unwrap();
        }
        assert!(lamperti(1.0).is_err());
    }

    #[test]
    fn thinning() {
        let u = uniform01();
        let t = thin(&u, 0.5).unwrap();
        assert_eq!(t.cdf(0.5), 0.75);
        let t3 = thin(&u, 0.3).unwrap();
        assert_eq!(t3.atoms().len(), 1);
        assert!((t3.atoms()[0].mass - 0.7).abs() < 1e-15);
        assert_eq!(t3.atoms()[0].location, 0.0);
        let t1 = thin(&u, 1.0).unwrap();
        for &x in &[0.1, 0.5, 0.9] {
            assert_eq!(t1.cdf(x), u.cdf(x));
        }
        assert!(thin(&u, 0.0).is_err());
        assert!(thin(&u, 1.2).is_err());
        t3.check_invariants(1e-8, &cfg()).unwrap();
    }

    #[test]
    fn tilting_base() {
        let a = tilt_base(&exp_ratio(), 1.0).unwrap();
        for &y in &[0.01, 0.3, 0.5, 0.77, 0.999] {
            assert!((a.cdf(y) - y).abs() < 1e-14);
            assert!((a.density(y).unwrap() - 1.0).abs() < 1e-12);
        }
        let p = tilt_base(&point_mass(1.0).unwrap(), 1.0).unwrap();
        assert_eq!(p.atoms(), &[Atom { location: 0.5, mass: 1.0 }]);
        let u2 = tilt_base(&uniform01(), 2.0).unwrap();
        assert_eq!(u2.cdf(2.0 / 3.0), 1.0);
        assert!(tilt_base(&uniform01(), 0.0).is_err());
        u2.check_invariants(1e-8, &cfg()).unwrap();
    }

    #[test]
    fn pushforward() {
        let u = uniform01();
        let id = pushforward_monotone(
            &u,
            Arc::new(|x| x),
            Arc::new(|y| y),
            Some(Arc::new(|_| 1.0)),
        )
        .unwrap();
        assert_eq!(id.cdf(0.3), 0.3);
        let dbl = pushforward_monotone(
            &u,
            Arc::new(|x| 2.0 * x),
            Arc::new(|y| y / 2.0),
            Some(Arc::new(|_| 0.5)),
        )
        .unwrap();
        assert_eq!(dbl.cdf(1.0), 0.5);
        assert!((dbl.density_mass(&cfg()).unwrap() - 1.0).abs() < 1e-13);
        let bad = pushforward_monotone(&u, Arc::new(|x| -x), Arc::new(|y| -y), None);
        assert!(matches!(bad, Err(Error::Contract(_))));
    }

    #[test]
    fn scaled_and_shifted() {
        let u = uniform01();
        let s = u.scaled(3.0).unwrap();
        assert!((s.cdf(1.5) - 0.5).abs() < 1e-15);
        assert!((s.density(1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let h = u.shifted(2.0).unwrap();
        assert_eq!(h.cdf(2.5), 0.5);
        assert_eq!(h.support(), Support::new(2.0, 3.0));
    }

    #[test]
    fn quantile_sampler_matches_cdf() {
        let w = exp_ratio().with_quantile_sampler();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 4000;
        let below = (0..n)
            .filter(|_| w.sample(&mut rng).unwrap() <= 1.0)
            .count();
        assert!(((below as f64 / n as f64) - 0.5).abs() < 0.04);
    }

    #[test]
    fn missing_sampler_is_contract_error() {
        let u = uniform01();
        let mut no = u.clone();
        no.sampler = None;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(no.sample(&mut rng), Err(Error::Contract(_))));
    }
}
