use dirmean::catalog::{self, entry, Params};
use dirmean::dist::{pushforward_monotone, uniform01};
use dirmean::functionals::{phi, psi};
use dirmean::quadrature::QuadratureConfig;
use dirmean::subordinators::ggc_laplace;
use dirmean::transforms::{ggc_component_density, scaled_mean_density, GgcLaw};
use std::sync::Arc;

fn q() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn every_entry_is_a_probability_density() {
    for e in catalog::all_default().unwrap() {
        let m = e.mass(&q()).unwrap();
        assert!((m - 1.0).abs() < 1e-7, "{}: mass {m}", e.name);
        for x in e.grid(500) {
            let v = e.eval(x);
            assert!(v >= 0.0 && v.is_finite(), "{} at {x}: {v}", e.name);
        }
    }
}

#[test]
fn closed_forms_match_generic_routes() {
    for e in catalog::all_default().unwrap() {
        let Some(g) = e.generic.clone() else { continue };
        for x in e.grid(40) {
            let a = e.eval(x);
            let b = g(x).unwrap();
            assert!(
                (a - b).abs() < 1e-6 * a.abs().max(1.0),
                "{} at {x}: closed {a} vs generic {b}",
                e.name
            );
        }
    }
}

#[test]
fn closed_form_phi_matches_quadrature() {
    for name in ["u_alpha0", "inv_bertoin_g", "lamperti_power", "dk_mean", "w_mean"] {
        let e = entry(name, &catalog::info(name).unwrap().defaults).unwrap();
        let phi_cf = e.phi.clone().unwrap();
        let spec = match &e.spec {
            Some(s) => s.clone(),
            None if name == "dk_mean" => uniform01(),
            None => dirmean::dist::exp_ratio(),
        };
        for &t in &[0.05, 0.2, 0.5, 0.8, 0.95, 1.3, 2.0, 5.0] {
            if e.support.upper == 1.0 && t >= 1.0 {
                continue;
            }
            let a = phi_cf(t);
            let b = phi(&spec, t, &q()).unwrap();
            assert!((a - b).abs() < 1e-7, "{name} at {t}: {a} vs {b}");
        }
    }
}

#[test]
fn u_alpha0_is_a_pushforward_of_lamperti() {
    let a = 0.5;
    let push = pushforward_monotone(
        &dirmean::dist::lamperti(a).unwrap(),
        Arc::new(move |z: f64| {
            let v = z.powf(1.0 / (a + 1.0));
            v / (1.0 + v)
        }),
        Arc::new(move |t: f64| (t / (1.0 - t)).powf(a + 1.0)),
        Some(Arc::new(move |t: f64| (a + 1.0) * (t / (1.0 - t)).powf(a) / (1.0 - t).powi(2))),
    )
    .unwrap();
    for i in 1..50 {
        let t = i as f64 / 50.0;
        let d = push.density(t).unwrap();
        assert!((d - catalog::u_alpha0_density(a, t)).abs() < 1e-9);
    }
}

#[test]
fn phi_u_alpha0_limit_at_zero() {
    let a = 0.5;
    let v = catalog::phi_u_alpha0(a, 1e-12);
    assert!((v + (a + 1.0f64).ln() / a).abs() < 1e-9);
}

#[test]
fn inverse_g_survival_identity() {
    let a = 0.5;
    let spec = catalog::inv_bertoin_g_spec(a).unwrap();
    for &x in &[1.01, 1.5, 3.0, 40.0] {
        let lhs = spec.sf(x);
        let rhs = dirmean::dist::lamperti_cdf(1.0 - a, (x - 1.0f64).powf(-a));
        assert!((lhs - rhs).abs() < 1e-10);
        assert!((lhs - catalog::bertoin_g_cdf(a, 1.0 / x)).abs() < 1e-10);
    }
}

#[test]
fn sigma_alpha_from_mixture_integral() {
    let a = 0.5;
    let base = catalog::inv_bertoin_g_spec(a).unwrap();
    let v = ggc_component_density(&base, 1.0 - a, 1.0, &q()).unwrap();
    let want = catalog::sigma_alpha_density(a, 1.0);
    assert!((v - want).abs() < 1e-6, "{v} vs {want}");
    assert!((want - 0.178_317_9).abs() < 1e-6);
}

#[test]
fn b_alpha_matches_scaled_mean_density() {
    let a = 0.5;
    let base = catalog::inv_bertoin_g_spec(a).unwrap();
    for &x in &[0.1, 0.5, 0.99, 1.01, 2.0, 10.0] {
        let g = scaled_mean_density(&base, 1.0 - a, x, &q()).unwrap();
        let c = catalog::b_alpha_density(a, x);
        assert!((g - c).abs() < 1e-8, "{x}: {g} vs {c}");
    }
}

#[test]
fn upsilon_subordinator_laplace() {
    let a = 0.5;
    let ggc = GgcLaw::new(a, catalog::u_alpha0_spec(a).unwrap(), q()).unwrap();
    for &l in &[0.5, 1.0, 2.0] {
        let v = ggc_laplace(&ggc, 1.0, l).unwrap();
        let want = catalog::upsilon_laplace(a, l);
        assert!((v - want).abs() < 1e-8, "{l}: {v} vs {want}");
    }
}

#[test]
fn closed_form_psi_values() {
    let a = 0.5;
    type ClosedPsi = Box<dyn Fn(f64) -> f64>;
    let cases: Vec<(dirmean::dist::DistributionSpec, ClosedPsi)> = vec![
        (uniform01(), Box::new(catalog::psi_uniform)),
        (dirmean::dist::exp_ratio(), Box::new(catalog::psi_exp_ratio)),
        (catalog::u_alpha0_spec(a).unwrap(), Box::new(move |l| catalog::psi_u_alpha0(a, l))),
        (catalog::inv_bertoin_g_spec(a).unwrap(), Box::new(move |l| catalog::psi_inv_g(a, l))),
        (catalog::bertoin_g_spec(a).unwrap(), Box::new(move |l| catalog::psi_bertoin_g(a, l))),
    ];
    for (spec, f) in &cases {
        for &l in &[0.1, 1.0, 3.0] {
            let v = psi(spec, l, &q()).unwrap();
            assert!((v - f(l)).abs() < 1e-8, "{} at {l}: {v} vs {}", spec.label, f(l));
        }
    }
}

#[test]
fn z_dagger_at_one_minus_alpha_gives_gamma_uniform_laplace() {
    // G_1·M_1 over the tilted base has Laplace transform ((λ+1)^α − 1)/(αλ).
    let a = 0.5;
    let e = entry("z_dagger_component", &Params { alpha: Some(a), sigma: Some(1.0 - a), c: None }).unwrap();
    for &l in &[0.5, 1.0, 2.0] {
        // E[e^{−λ G_1 M}] = E[1/(1+λM)]
        let v = dirmean::transforms::density_mass(
            |y| Ok(e.eval(y) / (1.0 + l * y)),
            &[0.0, 0.5, 1.0],
            1.0,
            &q(),
        )
        .unwrap();
        let want = ((a * f64::ln_1p(l)).exp_m1()) / (a * l);
        assert!((v - want).abs() < 1e-6, "{l}: {v} vs {want}");
    }
}

#[test]
fn bertoin_tilted_small_c_recovers_untilted() {
    // The gap closes like c^α, so c = 1e-9 is needed for a 1e-4 match.
    let (a, s, c): (f64, f64, f64) = (0.5, 0.5, 1e-9);
    for &x in &[0.3f64, 0.8, 2.0, 5.0] {
        let v = c * catalog::bertoin_tilted_component_density(a, s, c, c * x);
        let w = catalog::bertoin_component_density(a, s, x);
        assert!((v - w).abs() < 1e-4 * w.max(1.0), "{x}: {v} vs {w}");
    }
}

#[test]
fn limit_coherence_near_alpha_one() {
    // The Y_σ𝔾_α family approaches the uniform-base component as α → 1.
    let a = 1.0 - 1e-3;
    let s = 0.5;
    let base = catalog::bertoin_g_spec(a).unwrap();
    for i in 1..9 {
        let y = 0.1 * i as f64;
        let v = scaled_mean_density(&base, s, y, &q()).unwrap();
        let w = catalog::dk_component_density(s, y);
        assert!((v - w).abs() < 2e-2, "{y}: {v} vs {w}");
    }
}
