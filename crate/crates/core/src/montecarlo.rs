//! Simulation oracles and goodness-of-fit statistics.
//!
//! Samples are generated in fixed-size chunks. Chunk `k` draws from a ChaCha8
//! generator seeded with the master seed and switched to stream `k`, so the
//! output is bit-identical whatever the number of worker threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{check_unit_open, DistributionSpec};
use crate::error::{Error, Result};
use crate::quadrature::{self, gk21_panel, QuadratureConfig};
use crate::subordinators::PartitionSpec;

pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub seed: u64,
    /// Stick-breaking stops once the unallocated mass drops below this.
    pub truncation_epsilon: f64,
    pub sample_count: usize,
    /// Hard cap on sticks per draw. Poisson–Dirichlet residuals decay only
    /// polynomially, so ε alone may need billions of sticks.
    pub max_sticks: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0x5eed,
            truncation_epsilon: 1e-10,
            sample_count: 100_000,
            max_sticks: 10_000,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.truncation_epsilon > 0.0 && self.truncation_epsilon < 1.0) {
            return Err(Error::domain("truncation_epsilon must lie in (0,1)"));
        }
        if self.sample_count == 0 {
            return Err(Error::domain("sample_count must be positive"));
        }
        if self.max_sticks == 0 {
            return Err(Error::domain("max_sticks must be positive"));
        }
        Ok(())
    }
}

/// Draws `cfg.sample_count` values in parallel with the chunked stream rule.
pub fn sample_many<F>(cfg: &SamplerConfig, draw: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    cfg.validate()?;
    let n = cfg.sample_count;
    let chunks = n.div_ceil(CHUNK);
    let parts: Result<Vec<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let len = CHUNK.min(n - k * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    Ok(parts?.into_iter().flatten().collect())
}

/// As [`sample_many`] for vector-valued draws.
pub fn sample_many_vec<F>(cfg: &SamplerConfig, draw: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Vec<f64>> + Sync,
{
    cfg.validate()?;
    let n = cfg.sample_count;
    let chunks = n.div_ceil(CHUNK);
    let parts: Result<Vec<Vec<Vec<f64>>>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let len = CHUNK.min(n - k * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    Ok(parts?.into_iter().flatten().collect())
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("theta must be positive, got {theta}")))
    }
}

pub fn gamma_draw(shape: f64, rng: &mut dyn RngCore) -> f64 {
    Gamma::new(shape, 1.0).expect("positive shape").sample(rng)
}

pub fn beta_draw(a: f64, b: f64, rng: &mut dyn RngCore) -> f64 {
    Beta::new(a, b).expect("positive beta parameters").sample(rng)
}

/// One draw of M_θ(F) by stick-breaking with Beta(1, θ) sticks.
pub fn sample_dirichlet_mean(
    base: &DistributionSpec,
    theta: f64,
    cfg: &SamplerConfig,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    check_theta(theta)?;
    if !base.has_sampler() {
        return Err(Error::contract(format!("'{}' has no sampler", base.label)));
    }
    let inv_theta = 1.0 / theta;
    let mut rest = 1.0;
    let mut sum = 0.0;
    let mut k = 0;
    while rest >= cfg.truncation_epsilon && k < cfg.max_sticks {
        // 1 − V with V ~ Beta(1, θ)
        let keep = rng.random::<f64>().powf(inv_theta);
        let p = rest * (1.0 - keep);
        sum += p * base.sample(rng)?;
        rest *= keep;
        k += 1;
    }
    Ok(sum + rest * base.sample(rng)?)
}

pub fn dirichlet_mean_samples(base: &DistributionSpec, theta: f64, cfg: &SamplerConfig) -> Result<Vec<f64>> {
    check_theta(theta)?;
    sample_many(cfg, |rng| sample_dirichlet_mean(base, theta, cfg, rng))
}

/// One draw of the two-parameter Poisson–Dirichlet mean of a uniform base,
/// with sticks V_k ~ Beta(1−α, θ+kα).
pub fn sample_pd_mean(alpha: f64, theta: f64, cfg: &SamplerConfig, rng: &mut dyn RngCore) -> Result<f64> {
    check_pd(alpha, theta)?;
    let mut rest = 1.0;
    let mut sum = 0.0;
    let mut k = 1usize;
    while rest >= cfg.truncation_epsilon && k <= cfg.max_sticks {
        let v = beta_draw(1.0 - alpha, theta + k as f64 * alpha, rng);
        let p = rest * v;
        sum += p * rng.random::<f64>();
        rest -= p;
        k += 1;
    }
    Ok(sum + rest * rng.random::<f64>())
}

fn check_pd(alpha: f64, theta: f64) -> Result<()> {
    check_unit_open("alpha", alpha)?;
    if !(theta > -alpha && theta.is_finite()) {
        return Err(Error::domain(format!("theta must exceed -alpha, got {theta}")));
    }
    Ok(())
}

pub fn pd_mean_samples(alpha: f64, theta: f64, cfg: &SamplerConfig) -> Result<Vec<f64>> {
    check_pd(alpha, theta)?;
    sample_many(cfg, |rng| sample_pd_mean(alpha, theta, cfg, rng))
}

/// Positive α-stable draw with E[e^{−λS}] = e^{−λ^α} (Kanter's
/// representation).
pub fn positive_stable_draw(alpha: f64, rng: &mut dyn RngCore) -> f64 {
    let u = std::f64::consts::PI * rng.random::<f64>();
    let e: f64 = Exp1.sample(rng);
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * u).sin() / e).powf((1.0 - alpha) / alpha);
    a * b
}

pub fn sample_positive_stable(alpha: f64, rng: &mut dyn RngCore) -> Result<f64> {
    check_unit_open("alpha", alpha)?;
    Ok(positive_stable_draw(alpha, rng))
}

/// Lamperti draw (S/S')^α.
pub fn lamperti_draw(alpha: f64, rng: &mut dyn RngCore) -> f64 {
    let s1 = positive_stable_draw(alpha, rng);
    let s2 = positive_stable_draw(alpha, rng);
    (s1 / s2).powf(alpha)
}

pub fn sample_lamperti(alpha: f64, rng: &mut dyn RngCore) -> Result<f64> {
    check_unit_open("alpha", alpha)?;
    Ok(lamperti_draw(alpha, rng))
}

/// One draw of GGC(θ, F) = G_θ·M_θ(F).
pub fn sample_ggc(base: &DistributionSpec, theta: f64, cfg: &SamplerConfig, rng: &mut dyn RngCore) -> Result<f64> {
    check_theta(theta)?;
    let m = sample_dirichlet_mean(base, theta, cfg, rng)?;
    Ok(gamma_draw(theta, rng) * m)
}

/// One draw of β_{σ,1−σ}·M_σ(F); for σ = 1 the beta factor is 1.
pub fn sample_beta_scaled_mean(
    base: &DistributionSpec,
    sigma: f64,
    cfg: &SamplerConfig,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::domain(format!("sigma must lie in (0,1], got {sigma}")));
    }
    let m = sample_dirichlet_mean(base, sigma, cfg, rng)?;
    if sigma == 1.0 {
        return Ok(m);
    }
    Ok(beta_draw(sigma, 1.0 - sigma, rng) * m)
}

/// Independent per-cell GGC(σ_i, F) increments of the subordinator.
pub fn sample_fidi(
    base: &DistributionSpec,
    part: &PartitionSpec,
    cfg: &SamplerConfig,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    part.sigmas()
        .iter()
        .map(|&s| sample_ggc(base, s, cfg, rng))
        .collect()
}

/// One-sample Kolmogorov–Smirnov distance sup|F_n − F|.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::contract("KS statistic needs at least one sample"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let values: Vec<f64> = xs.iter().map(|&x| cdf(x)).collect();
    Ok(ks_from_sorted_cdf(&values))
}

fn ks_from_sorted_cdf(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    values
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let hi = (i + 1) as f64 / n - f;
            let lo = f - i as f64 / n;
            hi.max(lo)
        })
        .fold(0.0, f64::max)
}

/// One-sample KS distance against a law given by a density on
/// `[lower, ∞)`. The CDF at the sorted samples is accumulated panel by
/// panel; the first panel uses the double-exponential rule so that an
/// integrable singularity at `lower` is resolved.
pub fn ks_statistic_density<F>(samples: &[f64], lower: f64, density: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if samples.is_empty() {
        return Err(Error::contract("KS statistic needs at least one sample"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let cfg = QuadratureConfig::default().tightened(1e-12, 1e-14);
    let first = quadrature::integrate(
        |n| density(n.x),
        lower,
        xs[0].max(lower),
        &cfg,
    )?
    .value;
    // Increments between consecutive samples are independent panels.
    let incs: Result<Vec<f64>> = xs
        .par_windows(2)
        .map(|w| {
            if w[1] <= w[0] {
                return Ok(0.0);
            }
            let mut err = None;
            let mut f = |x: f64| match density(x) {
                Ok(v) => v,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            };
            let (v, _) = gk21_panel(&mut f, w[0], w[1]);
            match err {
                Some(e) => Err(e),
                None => Ok(v),
            }
        })
        .collect();
    let mut acc = first;
    let mut values = Vec::with_capacity(xs.len());
    values.push(acc);
    for d in incs? {
        acc += d;
        values.push(acc);
    }
    Ok(ks_from_sorted_cdf(&values))
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::contract("KS statistic needs nonempty samples"));
    }
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|p, q| p.total_cmp(q));
    xb.sort_by(|p, q| p.total_cmp(q));
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic one-sample KS critical value at level 0.01.
pub fn ks_critical(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Asymptotic two-sample KS critical value at level 0.01.
pub fn ks_critical_two_sample(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}

/// Empirical E[e^{−λX}] with its standard error.
pub fn empirical_laplace(samples: &[f64], lambda: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::contract("empirical Laplace transform needs samples"));
    }
    let n = samples.len() as f64;
    let vals: Vec<f64> = samples.iter().map(|&x| (-lambda * x).exp()).collect();
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{lamperti_cdf, point_mass, uniform01};

    fn small(n: usize, seed: u64) -> SamplerConfig {
        SamplerConfig {
            seed,
            sample_count: n,
            ..SamplerConfig::default()
        }
    }

    #[test]
    fn point_mass_mean_is_exact() {
        let p = point_mass(2.5).unwrap();
        let xs = dirichlet_mean_samples(&p, 1.3, &small(100, 1)).unwrap();
        assert!(xs.iter().all(|&x| (x - 2.5).abs() < 1e-12));
    }

    #[test]
    fn uniform_mean_is_half() {
        let xs = dirichlet_mean_samples(&uniform01(), 1.0, &small(20_000, 2)).unwrap();
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt();
        assert!((m - 0.5).abs() < 4.0 * sd / n.sqrt());
    }

    #[test]
    fn reproducible_streams() {
        let a = dirichlet_mean_samples(&uniform01(), 0.7, &small(9000, 11)).unwrap();
        let b = dirichlet_mean_samples(&uniform01(), 0.7, &small(9000, 11)).unwrap();
        assert_eq!(a, b);
        let c = dirichlet_mean_samples(&uniform01(), 0.7, &small(9000, 12)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn stable_laplace() {
        let cfg = small(50_000, 3);
        let xs = sample_many(&cfg, |rng| sample_positive_stable(0.5, rng)).unwrap();
        let (m, se) = empirical_laplace(&xs, 1.0).unwrap();
        assert!((m - (-1.0f64).exp()).abs() < 4.0 * se, "{m} {se}");
    }

    #[test]
    fn lamperti_ks() {
        let cfg = small(20_000, 4);
        let xs = sample_many(&cfg, |rng| sample_lamperti(0.5, rng)).unwrap();
        let d = ks_statistic(&xs, |z| lamperti_cdf(0.5, z)).unwrap();
        assert!(d < ks_critical(xs.len()), "{d}");
    }

    #[test]
    fn gamma_mean_for_point_mass_base() {
        let p = point_mass(1.0).unwrap();
        let cfg = small(20_000, 5);
        let xs = sample_many(&cfg, |rng| sample_ggc(&p, 1.7, &cfg, rng)).unwrap();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((m - 1.7).abs() < 4.0 * (1.7f64 / 20_000.0).sqrt());
    }

    #[test]
    fn laplace_and_ks_edge_cases() {
        assert_eq!(empirical_laplace(&[1.0, 2.0], 0.0).unwrap().0, 1.0);
        assert!(matches!(empirical_laplace(&[], 1.0), Err(Error::Contract(_))));
        assert!(matches!(ks_statistic(&[], |x| x), Err(Error::Contract(_))));
        let cfg = small(20_000, 6);
        let xs = sample_many(&cfg, |rng| Ok(Exp1.sample(rng))).unwrap();
        let (m, se) = empirical_laplace(&xs, 1.0).unwrap();
        assert!((m - 0.5).abs() < 3.5 * se);
    }

    #[test]
    fn ks_density_route_matches_cdf_route() {
        let cfg = small(5000, 7);
        let xs = sample_many(&cfg, |rng| Ok(rng.random::<f64>().powi(2))).unwrap();
        // X = U², density 1/(2√x) on (0,1), cdf √x.
        let a = ks_statistic(&xs, |x| x.sqrt()).unwrap();
        let b = ks_statistic_density(&xs, 0.0, |x| Ok(0.5 / x.sqrt())).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} {b}");
    }

    #[test]
    fn two_sample_ks_same_law() {
        let a = sample_many(&small(20_000, 8), |rng| Ok(rng.random::<f64>())).unwrap();
        let b = sample_many(&small(20_000, 9), |rng| Ok(rng.random::<f64>())).unwrap();
        let d = ks_two_sample(&a, &b).unwrap();
        assert!(d < ks_critical_two_sample(a.len(), b.len()));
    }

    #[test]
    fn pd_rejects_bad_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_pd_mean(1.2, 0.0, &SamplerConfig::default(), &mut rng).is_err());
        assert!(sample_pd_mean(0.5, -0.6, &SamplerConfig::default(), &mut rng).is_err());
    }
}
