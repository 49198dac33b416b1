//! The eight acceptance criteria, one PASS/FAIL line each. The lines are
//! written straight to stderr so they show up without `--nocapture`.

use std::io::Write;
use std::time::Instant;

use dirmean::verify::{run, Options, Report, Suite};

fn line(text: String) {
    let _ = writeln!(std::io::stderr(), "{text}");
}

fn report(n: usize, what: &str, r: &Report, secs: f64) -> bool {
    line(format!(
        "criterion {n} [{}] {what}: {} (max error {:.3e}, worst error/tolerance {:.3}, {secs:.1}s)",
        r.suite,
        if r.passed { "PASS" } else { "FAIL" },
        r.max_error,
        r.worst_ratio,
    ));
    if !r.passed {
        for c in r.checks.iter().filter(|c| !c.passed) {
            line(format!("    failed: {} ({:.6e} > {:.1e})", c.label, c.error, c.tolerance));
        }
    }
    r.passed
}

#[test]
fn acceptance_criteria() {
    let criteria = [
        (1, Suite::CauchyStieltjes, "transform identity over 3 bases x 3 thetas x 3 lambdas"),
        (2, Suite::BetaScale, "beta-scaled uniform means vs closed form, unit mass"),
        (3, Suite::McKs, "one-sample KS at level 0.01, N = 1e5"),
        (4, Suite::TiltRoundtrip, "tilt round trip and exp-ratio to uniform tilt"),
        (5, Suite::PhiCrosscheck, "closed-form phi vs quadrature on pushforwards"),
        (6, Suite::FidiConvolution, "GGC marginal masses and convolution"),
        (7, Suite::CatalogNormalization, "catalog masses and generic matches"),
        (8, Suite::UpsilonLaplace, "subordinator Laplace identity"),
    ];
    let opts = Options::default();
    let mut failed = Vec::new();
    for (n, suite, what) in criteria {
        let t = Instant::now();
        match run(suite, &opts) {
            Ok(r) => {
                if !report(n, what, &r, t.elapsed().as_secs_f64()) {
                    failed.push(n);
                }
            }
            Err(e) => {
                line(format!("criterion {n} [{suite}] {what}: FAIL (error: {e})"));
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
