//! The Lévy exponent ψ(λ) = E[log(1+λX)] and the log-distance functional
//! Φ(t) = E[log|t−X|; X≠t].

use crate::dist::{CacheTag, DistributionSpec, ThinnedSpec};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_kronrod, QuadratureConfig};

/// Decides whether E[log(1+X)] is finite from the survival function alone.
///
/// E[log(1+X)] = ∫ P(X>s)/(1+s) ds, and by Cauchy condensation this is finite
/// iff Σ_k P(X > 2^k) converges. The sum is probed up to k = 1000; a tail
/// block carrying more than 5% of the total is read as divergence.
pub fn existence_check(f: &DistributionSpec, _cfg: &QuadratureConfig) -> bool {
    if f.support().upper.is_finite() {
        return true;
    }
    let v = f
        .cache
        .get_or(CacheTag::Existence, 0.0, 0.0, || {
            let lo = f.support().lower;
            let s = f.scale();
            let mut total = 0.0;
            let mut tail = 0.0;
            for k in 0..=1000 {
                let x = lo + s * 2f64.powi(k);
                if !x.is_finite() {
                    break;
                }
                let p = f.sf(x);
                total += p;
                if k > 500 {
                    tail += p;
                }
            }
            Ok(if total == 0.0 || tail <= 0.05 * total { 1.0 } else { 0.0 })
        })
        .unwrap_or(0.0);
    v == 1.0
}

fn require_existence(f: &DistributionSpec, cfg: &QuadratureConfig) -> Result<()> {
    if existence_check(f, cfg) {
        Ok(())
    } else {
        Err(Error::Existence(format!(
            "E[log(1+X)] diverges for '{}'; the mean functional does not exist",
            f.label
        )))
    }
}

fn is_purely_atomic(f: &DistributionSpec) -> bool {
    !f.has_density() && (f.atom_mass() - 1.0).abs() < 1e-12
}

/// ψ(λ) = E[log(1+λX)].
pub fn psi(f: &DistributionSpec, lambda: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("lambda must be >= 0, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    require_existence(f, cfg)?;
    f.cache.get_or(CacheTag::Psi, lambda, cfg.rel_tol, || {
        let atoms: f64 = f
            .atoms()
            .iter()
            .map(|a| a.mass * (lambda * a.location).ln_1p())
            .sum();
        if is_purely_atomic(f) {
            return Ok(atoms);
        }
        if f.has_density() {
            let cont = f.integrate_density(|n, fv| Ok(fv * (lambda * n.x).ln_1p()), cfg)?;
            Ok(atoms + cont)
        } else {
            psi_from_cdf(f, lambda, cfg)
        }
    })
}

/// Φ(t) = E[log|t−X|; X≠t].
pub fn phi(f: &DistributionSpec, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    require_existence(f, cfg)?;
    f.cache.get_or(CacheTag::Phi, t, cfg.rel_tol, || {
        let atoms: f64 = f
            .atoms()
            .iter()
            .filter(|a| a.location != t)
            .map(|a| a.mass * (t - a.location).abs().ln())
            .sum();
        if is_purely_atomic(f) {
            return Ok(atoms);
        }
        if f.has_density() {
            let cont = f.integrate_density_with(
                &[t],
                |n, a, b, fv| {
                    let d = if b == t {
                        n.to_upper
                    } else if a == t {
                        n.from_lower
                    } else {
                        (t - n.x).abs()
                    };
                    // d underflows to 0 only at a node on t itself, a null set
                    if fv == 0.0 || d == 0.0 {
                        return Ok(0.0);
                    }
                    Ok(fv * d.ln())
                },
                cfg,
            )?;
            Ok(atoms + cont)
        } else {
            phi_from_cdf(f, t, cfg)
        }
    })
}

/// Φ of the thinned law from the base functional: σΦ(t) + (1−σ)log t.
pub fn phi_thinned(f: &ThinnedSpec, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if f.sigma == 1.0 {
        return phi(&f.base, t, cfg);
    }
    Ok(f.sigma * phi(&f.base, t, cfg)? + (1.0 - f.sigma) * t.ln())
}

/// ∫_a^b g over a possibly long interval; beyond `a + scale` the variable
/// x = a + e^u is used so that slowly decaying tails are resolved.
fn integrate_long<G: FnMut(f64) -> f64>(mut g: G, a: f64, b: f64, scale: f64, cfg: &QuadratureConfig) -> f64 {
    if b <= a {
        return 0.0;
    }
    if b - a <= 4.0 * scale {
        return gauss_kronrod(&mut g, a, b, cfg).value;
    }
    let near = gauss_kronrod(&mut g, a, a + scale, cfg).value;
    let far = gauss_kronrod(
        |u: f64| {
            let e = u.exp();
            g(a + e) * e
        },
        scale.ln(),
        (b - a).ln(),
        cfg,
    )
    .value;
    near + far
}

/// ∫ over consecutive pieces of `pts`.
fn integrate_split<G: FnMut(f64) -> f64>(mut g: G, pts: &[f64], scale: f64, cfg: &QuadratureConfig) -> f64 {
    pts.windows(2)
        .map(|w| integrate_long(&mut g, w[0], w[1], scale, cfg))
        .sum()
}

fn cdf_only_cutoff(f: &DistributionSpec, cfg: &QuadratureConfig) -> f64 {
    let s = f.support();
    if s.upper.is_finite() {
        s.upper
    } else {
        f.upper_quantile(cfg.tail_delta)
    }
}

fn jump_points(f: &DistributionSpec, lo: f64, hi: f64) -> Vec<f64> {
    let mut extra: Vec<f64> = f.atoms().iter().map(|a| a.location).collect();
    extra.extend_from_slice(f.breakpoints());
    extra.push(f.density_support().lower);
    crate::quadrature::split_points(lo, hi, &extra)
}

/// ψ(λ) = log(1+λL) + ∫_L^∞ λ P(X>x)/(1+λx) dx, which needs only the CDF.
fn psi_from_cdf(f: &DistributionSpec, lambda: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let lo = f.support().lower;
    let hi = cdf_only_cutoff(f, cfg);
    let pts = jump_points(f, lo, hi);
    let body = integrate_split(|x| lambda * f.sf(x) / (1.0 + lambda * x), &pts, f.scale(), cfg);
    Ok((lambda * lo).ln_1p() + body)
}

/// Φ(t) from the CDF by integrating log|t−x| by parts on each side of t.
fn phi_from_cdf(f: &DistributionSpec, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let lo = f.support().lower;
    let scale = f.scale();
    let mut total = 0.0;
    if t > lo {
        // E[log(t−X); X<t] = F(t⁻)log(t−L) − ∫_L^t (F(t⁻)−F(s))/(t−s) ds
        let ft = f.cdf_left(t);
        let pts = jump_points(f, lo, t);
        let inner = integrate_split(
            |s| {
                let d = t - s;
                if d <= 0.0 {
                    0.0
                } else {
                    (ft - f.cdf(s)).max(0.0) / d
                }
            },
            &pts,
            scale,
            cfg,
        );
        total += ft * (t - lo).ln() - inner;
    }
    // E[log(X−t); X>t] = P(X>t)log d + ∫_{t+d}^∞ P(X>s)/(s−t) ds
    //                    − ∫_t^{t+d} (F(s)−F(t))/(s−t) ds
    let d = scale;
    let ft = f.cdf(t);
    let hi = cdf_only_cutoff(f, cfg);
    let near_hi = t + d;
    let pts = jump_points(f, t, near_hi);
    let near = integrate_split(
        |s| {
            let r = s - t;
            if r <= 0.0 {
                0.0
            } else {
                (f.cdf(s) - ft).max(0.0) / r
            }
        },
        &pts,
        scale,
        cfg,
    );
    let far = if hi > near_hi {
        let pts = jump_points(f, near_hi, hi);
        integrate_split(|s| f.sf(s) / (s - t), &pts, scale, cfg)
    } else {
        0.0
    };
    total += f.sf(t) * d.ln() + far - near;
    Ok(total)
}
