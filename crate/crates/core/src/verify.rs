//! Named identity suites. Each suite compares two independent routes to the
//! same quantity and reports every comparison with its tolerance.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::catalog::{self, Params};
use crate::dist::{self, exp_ratio, lamperti_cdf, uniform01, DistributionSpec};
use crate::error::{Error, Result};
use crate::functionals::phi;
use crate::mean_laws::{cauchy_stieltjes_check, MeanLaw};
use crate::montecarlo::{self, SamplerConfig};
use crate::quadrature::QuadratureConfig;
use crate::subordinators::{convolution_check, ggc_laplace};
use crate::transforms::{
    density_mass, ggc_component_density, phi_tilt, scaled_mean_density, tilt_forward, tilt_forward_density,
    tilt_inverse, GgcLaw,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    CauchyStieltjes,
    BetaScale,
    TiltRoundtrip,
    PhiCrosscheck,
    FidiConvolution,
    CatalogNormalization,
    McKs,
    UpsilonLaplace,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::CauchyStieltjes,
        Suite::BetaScale,
        Suite::TiltRoundtrip,
        Suite::PhiCrosscheck,
        Suite::FidiConvolution,
        Suite::CatalogNormalization,
        Suite::McKs,
        Suite::UpsilonLaplace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::CauchyStieltjes => "cauchy-stieltjes",
            Suite::BetaScale => "beta-scale",
            Suite::TiltRoundtrip => "tilt-roundtrip",
            Suite::PhiCrosscheck => "phi-crosscheck",
            Suite::FidiConvolution => "fidi-convolution",
            Suite::CatalogNormalization => "catalog-normalization",
            Suite::McKs => "mc-ks",
            Suite::UpsilonLaplace => "upsilon-laplace",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown suite '{s}'")))
    }
}

/// One comparison. `error` is the measured discrepancy (or statistic) and
/// the check passes when it is at most `tolerance`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(label: impl Into<String>, lhs: f64, rhs: f64, error: f64, tolerance: f64) -> Check {
        Check {
            label: label.into(),
            lhs,
            rhs,
            error,
            tolerance,
            passed: error <= tolerance,
        }
    }

    fn abs(label: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Check {
        Check::new(label, lhs, rhs, (lhs - rhs).abs(), tolerance)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub passed: bool,
    pub max_error: f64,
    /// Largest error/tolerance ratio over the checks.
    pub worst_ratio: f64,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(suite: Suite, checks: Vec<Check>) -> Report {
        let worst_ratio = checks
            .iter()
            .map(|c| c.error / c.tolerance)
            .fold(0.0, |a: f64, r| if r.is_nan() { f64::INFINITY } else { a.max(r) });
        Report {
            suite,
            passed: checks.iter().all(|c| c.passed),
            max_error: checks.iter().map(|c| c.error).fold(0.0, f64::max),
            worst_ratio,
            checks,
        }
    }
}

/// Inputs a suite may use. `base` and `theta` narrow the Cauchy–Stieltjes
/// suite to one law; the other suites run their fixed configurations.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub base: Option<DistributionSpec>,
    pub theta: Option<f64>,
    pub quad: QuadratureConfig,
    pub sampler: SamplerConfig,
}

pub fn run(suite: Suite, opts: &Options) -> Result<Report> {
    let checks = match suite {
        Suite::CauchyStieltjes => cauchy_stieltjes_suite(opts)?,
        Suite::BetaScale => beta_scale_suite(&opts.quad)?,
        Suite::TiltRoundtrip => tilt_suite(&opts.quad)?,
        Suite::PhiCrosscheck => phi_suite(&opts.quad)?,
        Suite::FidiConvolution => fidi_suite(&opts.quad)?,
        Suite::CatalogNormalization => catalog_suite(&opts.quad)?,
        Suite::McKs => mc_suite(opts)?,
        Suite::UpsilonLaplace => upsilon_suite(&opts.quad)?,
    };
    Ok(Report::new(suite, checks))
}

fn open_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

const LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];

fn cauchy_stieltjes_suite(opts: &Options) -> Result<Vec<Check>> {
    let bases = match &opts.base {
        Some(b) => vec![b.clone()],
        None => vec![uniform01(), exp_ratio(), dist::lamperti(0.5)?],
    };
    let thetas = match opts.theta {
        Some(t) => vec![t],
        None => vec![0.5, 1.0, 2.0],
    };
    let mut out = Vec::new();
    for base in &bases {
        for &theta in &thetas {
            let law = MeanLaw::new(theta, base.clone(), opts.quad)?;
            for &l in &LAMBDAS {
                let (lhs, rhs) = cauchy_stieltjes_check(&law, l)?;
                out.push(Check::new(
                    format!("{} theta={theta} lambda={l}", base.label),
                    lhs,
                    rhs,
                    ((lhs - rhs) / rhs).abs(),
                    1e-5,
                ));
            }
        }
    }
    Ok(out)
}

fn beta_scale_suite(quad: &QuadratureConfig) -> Result<Vec<Check>> {
    let base = uniform01();
    let mut out = Vec::new();
    for &s in &[0.25, 0.5, 0.75] {
        let mut worst = Check::abs(format!("sigma={s} pointwise"), 0.0, 0.0, 1e-8);
        for i in 1..100 {
            let x = i as f64 / 100.0;
            let a = scaled_mean_density(&base, s, x, quad)?;
            let b = catalog::dk_component_density(s, x);
            let e = (a - b).abs() / b.abs().max(1.0);
            if e >= worst.error {
                worst = Check::new(format!("sigma={s} pointwise, worst at x={x}"), a, b, e, 1e-8);
            }
        }
        out.push(worst);
        let m = density_mass(|x| scaled_mean_density(&base, s, x, quad), &[0.0, 1.0], 1.0, quad)?;
        out.push(Check::abs(format!("sigma={s} mass"), m, 1.0, 1e-7));
    }
    Ok(out)
}

fn tilt_suite(quad: &QuadratureConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let law = MeanLaw::new(1.0, uniform01(), *quad)?;
    let xi = law.density_fn();
    let there = tilt_forward(&uniform01(), 1.0, 1.0, &xi, quad)?;
    let back = tilt_inverse(&uniform01(), 1.0, &there, quad)?;
    let mut worst = Check::abs("round trip", 0.0, 0.0, 1e-9);
    for x in open_grid(0.05, 0.95, 91) {
        let a = back.eval(x)?;
        let b = xi.eval(x)?;
        if (a - b).abs() >= worst.error {
            worst = Check::abs(format!("round trip, worst at x={x}"), a, b, 1e-9);
        }
    }
    out.push(worst);

    let w = MeanLaw::new(1.0, exp_ratio(), *quad)?;
    let xw = w.density_fn();
    let xw = xw.density()?;
    let mut worst = Check::abs("forward tilt of the exp-ratio mean", 0.0, 0.0, 1e-9);
    for y in open_grid(0.02, 0.98, 49) {
        let a = tilt_forward_density(&exp_ratio(), 1.0, 1.0, xw, y, quad)?;
        let b = catalog::dk_mean_density(y);
        if (a - b).abs() >= worst.error {
            worst = Check::abs(format!("forward tilt of the exp-ratio mean, worst at y={y}"), a, b, 1e-9);
        }
    }
    out.push(worst);
    Ok(out)
}

fn phi_suite(quad: &QuadratureConfig) -> Result<Vec<Check>> {
    let a = 0.5;
    let inv_g = catalog::inv_bertoin_g_spec(a)?;
    let mut out = Vec::new();
    for base in [uniform01(), inv_g.clone()] {
        for &c in &[0.5, 1.0, 2.0] {
            let push = dist::tilt_base(&base, c)?.into_spec();
            let mut worst = Check::abs(format!("tilt base of {} c={c}", base.label), 0.0, 0.0, 1e-6);
            for y in open_grid(0.02, 0.98, 50) {
                let l = phi_tilt(&base, c, y, quad)?;
                let r = phi(&push, y, quad)?;
                if (l - r).abs() >= worst.error {
                    worst = Check::abs(format!("tilt base of {} c={c}, worst at y={y}", base.label), l, r, 1e-6);
                }
            }
            out.push(worst);
        }
    }
    let mut worst = Check::abs("closed-form phi of 1/G", 0.0, 0.0, 1e-6);
    for i in 0..50 {
        // log-spaced on [0.05, 20], crossing the branch point x = 1
        let x = 0.05 * 400f64.powf(i as f64 / 49.0);
        let l = catalog::phi_inv_g(a, x);
        let r = phi(&inv_g, x, quad)?;
        if (l - r).abs() >= worst.error {
            worst = Check::abs(format!("closed-form phi of 1/G, worst at x={x}"), l, r, 1e-6);
        }
    }
    out.push(worst);
    Ok(out)
}

fn fidi_suite(quad: &QuadratureConfig) -> Result<Vec<Check>> {
    let base = uniform01();
    let mut out = Vec::new();
    for &s in &[0.25, 0.5, 1.0] {
        let m = density_mass(
            |x| ggc_component_density(&base, s, x, quad),
            &[0.0, 1.0, f64::INFINITY],
            1.0,
            quad,
        )?;
        out.push(Check::abs(format!("g_{s} mass"), m, 1.0, 1e-6));
    }
    let r = convolution_check(&base, 0.5, 0.5, 10.0, quad)?;
    out.push(Check::new(
        format!("g_0.5 * g_0.5 vs g_1 on {} points of (0, 10]", r.grid.len()),
        r.residual,
        0.0,
        r.residual,
        1e-4,
    ));
    Ok(out)
}

fn catalog_suite(quad: &QuadratureConfig) -> Result<Vec<Check>> {
    let p = Params {
        alpha: Some(0.5),
        sigma: Some(0.5),
        c: Some(1.0),
    };
    let mut out = Vec::new();
    for info in catalog::ENTRIES {
        let e = catalog::entry(info.name, &p)?;
        let m = e.mass(quad)?;
        out.push(Check::abs(format!("{} mass", e.name), m, 1.0, 1e-7));
        if let Some(g) = e.generic.clone() {
            let mut worst = Check::abs(format!("{} vs generic", e.name), 0.0, 0.0, 1e-6);
            for x in e.grid(40) {
                let a = e.eval(x);
                let b = g(x)?;
                let err = (a - b).abs() / a.abs().max(1.0);
                if err >= worst.error {
                    worst = Check::new(format!("{} vs generic, worst at x={x}", e.name), a, b, err, 1e-6);
                }
            }
            out.push(worst);
        }
    }
    Ok(out)
}

fn ks_check(label: &str, samples: &[f64], d: f64) -> Check {
    let crit = montecarlo::ks_critical(samples.len());
    Check::new(label, d, crit, d, crit)
}

fn mc_suite(opts: &Options) -> Result<Vec<Check>> {
    let quad = &opts.quad;
    let cfg = |k: u64| SamplerConfig {
        seed: opts.sampler.seed.wrapping_add(k),
        ..opts.sampler
    };
    let mut out = Vec::new();

    let c = cfg(0);
    let xs = montecarlo::dirichlet_mean_samples(&uniform01(), 1.0, &c)?;
    let d = montecarlo::ks_statistic_density(&xs, 0.0, |y| Ok(catalog::dk_mean_density(y)))?;
    out.push(ks_check("M_1 of uniform vs closed density", &xs, d));

    let c = cfg(1);
    let u = uniform01();
    let xs = montecarlo::sample_many(&c, |rng| montecarlo::sample_beta_scaled_mean(&u, 0.5, &c, rng))?;
    let d = montecarlo::ks_statistic_density(&xs, 0.0, |y| scaled_mean_density(&u, 0.5, y, quad))?;
    out.push(ks_check("beta_{0.5,0.5} M_0.5 of uniform vs generic density", &xs, d));

    let c = cfg(2);
    let xs = montecarlo::sample_many(&c, |rng| montecarlo::sample_lamperti(0.5, rng))?;
    let d = montecarlo::ks_statistic(&xs, |z| lamperti_cdf(0.5, z))?;
    out.push(ks_check("Lamperti(0.5) vs cdf", &xs, d));

    let c = cfg(3);
    let a = 0.5;
    let inv_g = catalog::inv_bertoin_g_spec(a)?;
    let xs = montecarlo::sample_many(&c, |rng| montecarlo::sample_ggc(&inv_g, 1.0 - a, &c, rng))?;
    let d = montecarlo::ks_statistic_density(&xs, 0.0, |x| Ok(catalog::sigma_alpha_density(a, x)))?;
    out.push(ks_check("GGC(0.5) over 1/G_0.5 vs closed density", &xs, d));
    Ok(out)
}

fn upsilon_suite(quad: &QuadratureConfig) -> Result<Vec<Check>> {
    let a = 0.5;
    let ggc = GgcLaw::new(a, catalog::u_alpha0_spec(a)?, *quad)?;
    LAMBDAS
        .iter()
        .map(|&l| {
            let v = ggc_laplace(&ggc, 1.0, l)?;
            Ok(Check::abs(format!("lambda={l}"), v, catalog::upsilon_laplace(a, l), 1e-8))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(serde_json::to_value(s).unwrap(), s.name());
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn narrowed_cauchy_stieltjes() {
        let opts = Options {
            base: Some(uniform01()),
            theta: Some(1.0),
            ..Options::default()
        };
        let r = run(Suite::CauchyStieltjes, &opts).unwrap();
        assert_eq!(r.checks.len(), 3);
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn upsilon_suite_passes() {
        assert!(run(Suite::UpsilonLaplace, &Options::default()).unwrap().passed);
    }
}
