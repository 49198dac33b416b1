//! Command-line front end. [`run`] parses the arguments, executes one
//! subcommand and returns the process exit code:
//!
//! * 0: success
//! * 2: domain, precondition, contract or existence error
//! * 3: numerical quality failure, including a verify suite that misses its
//!   tolerance
//! * 64: usage error
//! * 74: the output file could not be written
//!
//! Errors go to the error stream as one JSON object.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dirmean::catalog::{self, Params};
use dirmean::descriptor;
use dirmean::dist::{self, DistributionSpec};
use dirmean::functionals::{phi, psi};
use dirmean::mean_laws::{mean_cdf, mean_density, MeanLaw};
use dirmean::montecarlo::{self, SamplerConfig};
use dirmean::quadrature::QuadratureConfig;
use dirmean::subordinators::{fidi_density, PartitionSpec};
use dirmean::transforms::{scaled_mean_density, tilt_forward, tilt_inverse, tilted_ggc_density, GgcLaw};
use dirmean::verify::{self, Suite};
use dirmean::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Parser, Debug)]
#[command(name = "dirmean", version, about = "Laws of Dirichlet means and GGC subordinators")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    /// Adaptive subdivision budget per integral.
    #[arg(long, global = true)]
    max_subdivisions: Option<usize>,
    /// Tail probability at which infinite supports are truncated.
    #[arg(long, global = true)]
    tail_delta: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct Grid {
    /// Evenly spaced points as start,stop,count.
    #[arg(long, conflicts_with = "at", allow_hyphen_values = true)]
    grid: Option<String>,
    /// Explicit comma-separated points.
    #[arg(long, allow_hyphen_values = true)]
    at: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// ψ(λ) = E log(1+λX) of the base law.
    Psi {
        #[arg(long)]
        dist: String,
        #[command(flatten)]
        grid: Grid,
    },
    /// Φ(t) = E log|t−X| of the base law.
    Phi {
        #[arg(long)]
        dist: String,
        #[command(flatten)]
        grid: Grid,
    },
    /// Density of the Dirichlet mean M_θ(F).
    Density {
        #[arg(long)]
        dist: String,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[command(flatten)]
        grid: Grid,
    },
    /// CDF of the Dirichlet mean M_θ(F).
    Cdf {
        #[arg(long)]
        dist: String,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        #[command(flatten)]
        grid: Grid,
    },
    /// Densities produced by the beta-scaling and tilting transforms.
    Transform {
        #[arg(long, value_enum)]
        op: TransformOp,
        #[arg(long)]
        dist: String,
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        c: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
        #[command(flatten)]
        grid: Grid,
    },
    /// Joint density of subordinator increments over a partition.
    Fidi {
        #[arg(long)]
        dist: String,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        /// Cell lengths, summing to 1/θ.
        #[arg(long)]
        cells: String,
        /// One point per cell.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Closed-form laws.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Draw samples.
    Sample {
        /// Base law descriptor.
        #[arg(long)]
        law: String,
        #[arg(long, value_enum, default_value_t = SampleWhat::Base)]
        what: SampleWhat,
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, env = "DIRMEAN_SEED")]
        seed: Option<u64>,
        /// Stick-breaking truncation level.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Run a named identity suite and print a JSON report.
    Verify {
        #[arg(long)]
        suite: String,
        /// Narrows the cauchy-stieltjes suite to one base law.
        #[arg(long)]
        dist: Option<String>,
        /// Narrows the cauchy-stieltjes suite to one θ.
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
        /// Sample size for the Monte Carlo suite.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, env = "DIRMEAN_SEED")]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum TransformOp {
    /// Density of β_{σ,1−σ}·M_σ(F).
    BetaScale,
    /// Density of M_θ(F_{A_c}) from M_θ(F).
    TiltForward,
    /// Density of M_θ(F) recovered from M_θ(F_{A_1}).
    TiltInverse,
    /// Esscher-tilted GGC(θ, F) density.
    TiltedGgc,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum SampleWhat {
    /// The base law itself.
    Base,
    /// M_θ(F) by stick-breaking.
    Mean,
    /// GGC(θ, F) = G_θ·M_θ(F).
    Ggc,
    /// β_{σ,1−σ}·M_σ(F).
    BetaScaled,
    /// Two-parameter Poisson–Dirichlet mean of the uniform law; ignores --law.
    PdMean,
}

#[derive(Subcommand, Debug)]
enum CatalogAction {
    /// List entries with their parameters.
    List,
    /// Evaluate an entry's closed-form density.
    Eval {
        name: String,
        /// Parameters as key=value pairs, e.g. alpha=0.5,sigma=0.5.
        #[arg(long)]
        params: Option<String>,
        #[command(flatten)]
        grid: Grid,
    },
}

/// Failures of a command, mapped to exit codes.
#[derive(Debug)]
enum Failure {
    Lib(Error),
    Usage(String),
    Io(io::Error),
    /// A verify suite ran but missed its tolerance; the report is already
    /// printed.
    Unmet,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let (code, body) = match f {
                Failure::Lib(e) => {
                    let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_INPUT };
                    (code, json!({"error": {"kind": e.kind(), "message": e.to_string()}}))
                }
                Failure::Usage(m) => (EXIT_USAGE, json!({"error": {"kind": "usage", "message": m}})),
                Failure::Io(e) => (EXIT_IO, json!({"error": {"kind": "io", "message": e.to_string()}})),
                Failure::Unmet => return EXIT_NUMERICAL,
            };
            let _ = writeln!(stderr, "{body}");
            code
        }
    }
}

fn quad(c: &Common) -> CmdResult<QuadratureConfig> {
    let mut q = QuadratureConfig::default();
    if let Some(v) = c.rel_tol {
        q.rel_tol = v;
    }
    if let Some(v) = c.abs_tol {
        q.abs_tol = v;
    }
    if let Some(v) = c.max_subdivisions {
        q.max_subdivisions = v;
    }
    if let Some(v) = c.tail_delta {
        q.tail_delta = v;
    }
    q.validate()?;
    Ok(q)
}

fn parse_list(text: &str, what: &str) -> CmdResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Usage(format!("{what}: '{s}' is not a number")))
        })
        .collect()
}

fn points(g: &Grid) -> CmdResult<Vec<f64>> {
    match (&g.grid, &g.at) {
        (Some(spec), None) => {
            let v = parse_list(spec, "--grid")?;
            let [start, stop, count] = v[..] else {
                return Err(Failure::Usage("--grid takes start,stop,count".into()));
            };
            if !(count >= 1.0 && count.fract() == 0.0) {
                return Err(Failure::Usage(format!("--grid count must be a positive integer, got {count}")));
            }
            let n = count as usize;
            if n == 1 {
                return Ok(vec![start]);
            }
            Ok((0..n)
                .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                .collect())
        }
        (None, Some(at)) => parse_list(at, "--at"),
        _ => Err(Failure::Usage("give the points with --grid start,stop,count or --at x1,x2,...".into())),
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

struct Output<'a> {
    format: Format,
    sink: Box<dyn Write + 'a>,
}

impl<'a> Output<'a> {
    fn open(c: &Common, stdout: &'a mut dyn Write) -> CmdResult<Output<'a>> {
        let sink: Box<dyn Write + 'a> = match &c.out {
            Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
            None => Box::new(stdout),
        };
        Ok(Output { format: c.format, sink })
    }

    /// Rows of numbers under `header`.
    fn table(mut self, header: &[&str], rows: &[Vec<f64>]) -> CmdResult<()> {
        match self.format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut self.sink);
                w.write_record(header).map_err(csv_io)?;
                for r in rows {
                    w.write_record(r.iter().map(|v| num(*v))).map_err(csv_io)?;
                }
                w.flush()?;
            }
            Format::Json => {
                let list: Vec<Value> = rows
                    .iter()
                    .map(|r| {
                        Value::Object(
                            header
                                .iter()
                                .zip(r)
                                .map(|(h, v)| (h.to_string(), json!(v)))
                                .collect(),
                        )
                    })
                    .collect();
                writeln!(self.sink, "{}", Value::Array(list))?;
            }
        }
        self.sink.flush()?;
        Ok(())
    }

    fn json(mut self, v: &Value) -> CmdResult<()> {
        writeln!(self.sink, "{}", serde_json::to_string_pretty(v).expect("serializable"))?;
        self.sink.flush()?;
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> Failure {
    Failure::Io(io::Error::other(e))
}

fn eval_grid<F>(xs: &[f64], f: F) -> CmdResult<Vec<Vec<f64>>>
where
    F: Fn(f64) -> dirmean::Result<f64>,
{
    xs.iter().map(|&x| Ok(vec![x, f(x)?])).collect()
}

fn law(dist: &str) -> CmdResult<DistributionSpec> {
    Ok(descriptor::parse(dist)?)
}

fn need(v: Option<f64>, flag: &str) -> CmdResult<f64> {
    v.ok_or_else(|| Failure::Usage(format!("{flag} is required for this operation")))
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> CmdResult<()> {
    let q = quad(&cli.common)?;
    match &cli.command {
        Command::Psi { dist, grid } => {
            let base = law(dist)?;
            let rows = eval_grid(&points(grid)?, |l| psi(&base, l, &q))?;
            Output::open(&cli.common, stdout)?.table(&["lambda", "psi"], &rows)
        }
        Command::Phi { dist, grid } => {
            let base = law(dist)?;
            let rows = eval_grid(&points(grid)?, |t| phi(&base, t, &q))?;
            Output::open(&cli.common, stdout)?.table(&["t", "phi"], &rows)
        }
        Command::Density { dist, theta, grid } => {
            let m = MeanLaw::new(*theta, law(dist)?, q)?;
            let rows = eval_grid(&points(grid)?, |x| mean_density(&m, x))?;
            Output::open(&cli.common, stdout)?.table(&["x", "density"], &rows)
        }
        Command::Cdf { dist, theta, grid } => {
            let m = MeanLaw::new(*theta, law(dist)?, q)?;
            let rows = eval_grid(&points(grid)?, |x| mean_cdf(&m, x))?;
            Output::open(&cli.common, stdout)?.table(&["x", "cdf"], &rows)
        }
        Command::Transform {
            op,
            dist,
            sigma,
            c,
            theta,
            grid,
        } => {
            let base = law(dist)?;
            let xs = points(grid)?;
            let rows = match op {
                TransformOp::BetaScale => {
                    let s = need(*sigma, "--sigma")?;
                    eval_grid(&xs, |x| scaled_mean_density(&base, s, x, &q))?
                }
                TransformOp::TiltForward => {
                    let (th, c) = (need(*theta, "--theta")?, need(*c, "--c")?);
                    let m = MeanLaw::new(th, base.clone(), q)?;
                    let t = tilt_forward(&base, th, c, &m.density_fn(), &q)?;
                    eval_grid(&xs, |y| t.eval(y))?
                }
                TransformOp::TiltInverse => {
                    let th = need(*theta, "--theta")?;
                    let a1 = dist::tilt_base(&base, 1.0)?.into_spec();
                    let m = MeanLaw::new(th, a1, q)?;
                    let t = tilt_inverse(&base, th, &m.density_fn(), &q)?;
                    eval_grid(&xs, |x| t.eval(x))?
                }
                TransformOp::TiltedGgc => {
                    let (th, c) = (need(*theta, "--theta")?, need(*c, "--c")?);
                    let g = GgcLaw::new(th, base, q)?;
                    eval_grid(&xs, |t| tilted_ggc_density(&g, c, t))?
                }
            };
            Output::open(&cli.common, stdout)?.table(&["x", "density"], &rows)
        }
        Command::Fidi { dist, theta, cells, at } => {
            let g = GgcLaw::new(*theta, law(dist)?, q)?;
            let part = PartitionSpec::new(*theta, parse_list(cells, "--cells")?)?;
            let xs = parse_list(at, "--at")?;
            let v = fidi_density(&g, &part, &xs)?;
            let out = Output::open(&cli.common, stdout)?;
            match out.format {
                Format::Json => out.json(&json!({
                    "joint": v.joint,
                    "cells": part.lengths().iter().zip(part.sigmas()).zip(&xs).zip(&v.marginals)
                        .map(|(((l, s), x), m)| json!({"length": l, "sigma": s, "x": x, "marginal": m}))
                        .collect::<Vec<_>>(),
                })),
                Format::Csv => {
                    // cell rows first, then the joint value on a row with cell 0
                    let mut rows: Vec<Vec<f64>> = part
                        .lengths()
                        .iter()
                        .zip(part.sigmas())
                        .zip(&xs)
                        .zip(&v.marginals)
                        .enumerate()
                        .map(|(i, (((l, s), x), m))| vec![(i + 1) as f64, *l, s, *x, *m])
                        .collect();
                    rows.push(vec![0.0, f64::NAN, f64::NAN, f64::NAN, v.joint]);
                    out.fidi_csv(&rows)
                }
            }
        }
        Command::Catalog { action } => match action {
            CatalogAction::List => {
                let out = Output::open(&cli.common, stdout)?;
                let entries: Vec<Value> = catalog::ENTRIES
                    .iter()
                    .map(|e| {
                        json!({
                            "name": e.name,
                            "params": e.params,
                            "defaults": {"alpha": e.defaults.alpha, "sigma": e.defaults.sigma, "c": e.defaults.c},
                            "notes": e.notes,
                        })
                    })
                    .collect();
                match out.format {
                    Format::Json => out.json(&Value::Array(entries)),
                    Format::Csv => out.catalog_csv(),
                }
            }
            CatalogAction::Eval { name, params, grid } => {
                let info = catalog::info(name)?;
                let p = parse_params(params.as_deref(), info.defaults)?;
                let e = catalog::entry(name, &p)?;
                let rows = eval_grid(&points(grid)?, |x| Ok(e.eval(x)))?;
                Output::open(&cli.common, stdout)?.table(&["x", "density"], &rows)
            }
        },
        Command::Sample {
            law: d,
            what,
            theta,
            sigma,
            alpha,
            n,
            seed,
            epsilon,
        } => {
            let mut cfg = SamplerConfig {
                sample_count: *n,
                ..SamplerConfig::default()
            };
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            if let Some(e) = epsilon {
                cfg.truncation_epsilon = *e;
            }
            let base = law(d)?;
            let xs = match what {
                SampleWhat::Base => montecarlo::sample_many(&cfg, |rng| base.sample(rng))?,
                SampleWhat::Mean => montecarlo::dirichlet_mean_samples(&base, need(*theta, "--theta")?, &cfg)?,
                SampleWhat::Ggc => {
                    let th = need(*theta, "--theta")?;
                    montecarlo::sample_many(&cfg, |rng| montecarlo::sample_ggc(&base, th, &cfg, rng))?
                }
                SampleWhat::BetaScaled => {
                    let s = need(*sigma, "--sigma")?;
                    montecarlo::sample_many(&cfg, |rng| montecarlo::sample_beta_scaled_mean(&base, s, &cfg, rng))?
                }
                SampleWhat::PdMean => {
                    montecarlo::pd_mean_samples(need(*alpha, "--alpha")?, need(*theta, "--theta")?, &cfg)?
                }
            };
            let rows: Vec<Vec<f64>> = xs.into_iter().map(|x| vec![x]).collect();
            Output::open(&cli.common, stdout)?.table(&["x"], &rows)
        }
        Command::Verify {
            suite,
            dist,
            theta,
            n,
            seed,
        } => {
            let suite: Suite = suite.parse()?;
            let mut opts = verify::Options {
                base: dist.as_deref().map(descriptor::parse).transpose()?,
                theta: *theta,
                quad: q,
                ..verify::Options::default()
            };
            if let Some(n) = n {
                opts.sampler.sample_count = *n;
            }
            if let Some(s) = seed {
                opts.sampler.seed = *s;
            }
            let report = verify::run(suite, &opts)?;
            let v = serde_json::to_value(&report).expect("serializable report");
            Output::open(&cli.common, stdout)?.json(&v)?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Unmet)
            }
        }
    }
}

impl Output<'_> {
    fn fidi_csv(mut self, rows: &[Vec<f64>]) -> CmdResult<()> {
        let mut w = csv::Writer::from_writer(&mut self.sink);
        w.write_record(["cell", "length", "sigma", "x", "density"]).map_err(csv_io)?;
        for r in rows {
            if r[0] == 0.0 {
                w.write_record(["joint", "", "", "", &num(r[4])]).map_err(csv_io)?;
            } else {
                let mut rec = vec![format!("{}", r[0] as usize)];
                rec.extend(r[1..].iter().map(|v| num(*v)));
                w.write_record(&rec).map_err(csv_io)?;
            }
        }
        w.flush()?;
        drop(w);
        self.sink.flush()?;
        Ok(())
    }

    fn catalog_csv(mut self) -> CmdResult<()> {
        let mut w = csv::Writer::from_writer(&mut self.sink);
        w.write_record(["name", "params", "defaults", "notes"]).map_err(csv_io)?;
        for e in catalog::ENTRIES {
            let d = e.defaults;
            let defaults: Vec<String> = [("alpha", d.alpha), ("sigma", d.sigma), ("c", d.c)]
                .iter()
                .filter_map(|(k, v)| v.map(|v| format!("{k}={v}")))
                .collect();
            w.write_record([e.name, &e.params.join(" "), &defaults.join(" "), e.notes])
                .map_err(csv_io)?;
        }
        w.flush()?;
        drop(w);
        self.sink.flush()?;
        Ok(())
    }
}

fn parse_params(text: Option<&str>, defaults: Params) -> CmdResult<Params> {
    let mut p = defaults;
    let Some(text) = text else { return Ok(p) };
    for pair in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--params: '{pair}' is not key=value")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("--params: '{v}' is not a number")))?;
        match k.trim() {
            "alpha" => p.alpha = Some(v),
            "sigma" => p.sigma = Some(v),
            "c" => p.c = Some(v),
            other => return Err(Failure::Usage(format!("--params: unknown parameter '{other}'"))),
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(g: &str) -> Grid {
        Grid {
            grid: Some(g.into()),
            at: None,
        }
    }

    #[test]
    fn grid_points() {
        assert_eq!(points(&grid("0,1,3")).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(points(&grid("0.2,9,1")).unwrap(), vec![0.2]);
        assert!(points(&grid("0,1,0")).is_err());
        assert!(points(&grid("0,1")).is_err());
        let at = Grid {
            grid: None,
            at: Some("1, 2.5".into()),
        };
        assert_eq!(points(&at).unwrap(), vec![1.0, 2.5]);
    }

    #[test]
    fn number_format_has_17_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(1.0).parse::<f64>().unwrap(), 1.0);
    }

    #[test]
    fn params_override_defaults() {
        let d = Params {
            alpha: Some(0.5),
            sigma: None,
            c: None,
        };
        let p = parse_params(Some("sigma=0.25, c=2"), d).unwrap();
        assert_eq!((p.alpha, p.sigma, p.c), (Some(0.5), Some(0.25), Some(2.0)));
        assert!(parse_params(Some("beta=1"), d).is_err());
    }
}
