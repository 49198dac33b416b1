use std::process::{Command, Output};

fn dirmean(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirmean"))
        .args(args)
        .env_remove("DIRMEAN_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn density_grid_row_count() {
    let o = dirmean(&["density", "--dist", r#"{"kind":"uniform01"}"#, "--theta", "1", "--grid", "0.01,0.99,99"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 99);
    let mid: f64 = rows[49][1].parse().unwrap();
    assert!((mid - 2.0 * std::f64::consts::E / std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn numbers_carry_17_significant_digits() {
    let o = dirmean(&["psi", "--dist", "uniform01", "--at", "1"]);
    let cell = &csv_rows(&o)[0][1];
    let (mantissa, exponent) = cell.split_once('e').unwrap();
    assert_eq!(mantissa.len(), 18, "{cell}");
    assert!(exponent.parse::<i32>().is_ok());
    assert!((cell.parse::<f64>().unwrap() - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
}

#[test]
fn verify_cauchy_stieltjes_report() {
    let o = dirmean(&["verify", "--suite", "cauchy-stieltjes", "--dist", "uniform01", "--theta", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["suite"], "cauchy-stieltjes");
    assert_eq!(v["passed"], true);
    assert!(v["max_error"].as_f64().unwrap() < 1e-5);
    assert_eq!(v["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn fidi_joint_is_product_of_marginals() {
    let d = r#"{"kind":"uniform01"}"#;
    let o = dirmean(&["fidi", "--theta", "1", "--cells", "0.5,0.5", "--at", "1.0,2.0", "--dist", d]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 3);
    let m1: f64 = rows[0][4].parse().unwrap();
    let m2: f64 = rows[1][4].parse().unwrap();
    assert_eq!(rows[2][0], "joint");
    let joint: f64 = rows[2][4].parse().unwrap();
    assert_eq!(joint, m1 * m2);
    let swapped = dirmean(&["fidi", "--theta", "1", "--cells", "0.5,0.5", "--at", "2.0,1.0", "--dist", d]);
    let rows = csv_rows(&swapped);
    assert_eq!(rows[0][4].parse::<f64>().unwrap(), m2);
    assert_eq!(rows[2][4].parse::<f64>().unwrap(), joint);
}

#[test]
fn catalog_list_and_eval() {
    let o = dirmean(&["catalog", "list"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l.starts_with("sigma_alpha,")));
    let o = dirmean(&["catalog", "eval", "u_alpha0", "--params", "alpha=0.5", "--at", "0.5"]);
    let v: f64 = csv_rows(&o)[0][1].parse().unwrap();
    assert!((v - 6.0 / std::f64::consts::PI).abs() < 1e-14);
}

#[test]
fn sampling_is_reproducible_and_seed_comes_from_env() {
    let a = dirmean(&["sample", "--law", "uniform01", "--what", "mean", "--theta", "1", "--n", "50", "--seed", "9"]);
    let b = Command::new(env!("CARGO_BIN_EXE_dirmean"))
        .args(["sample", "--law", "uniform01", "--what", "mean", "--theta", "1", "--n", "50"])
        .env("DIRMEAN_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(csv_rows(&a).len(), 50);
}

#[test]
fn output_file_and_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi.json");
    let o = dirmean(&["phi", "--dist", "uniform01", "--at", "0.5", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((v[0]["phi"].as_f64().unwrap() - (0.5f64.ln() - 1.0)).abs() < 1e-12);
}

#[test]
fn transforms_reproduce_known_values() {
    // tilting the exp-ratio mean with c = 1 gives the uniform mean law
    let o = dirmean(&["transform", "--op", "tilt-forward", "--dist", "exp_ratio", "--theta", "1", "--c", "1", "--at", "0.5"]);
    let v: f64 = csv_rows(&o)[0][1].parse().unwrap();
    assert!((v - 2.0 * std::f64::consts::E / std::f64::consts::PI).abs() < 1e-9);
    let o = dirmean(&["transform", "--op", "tilt-inverse", "--dist", "exp_ratio", "--theta", "1", "--at", "1"]);
    let v: f64 = csv_rows(&o)[0][1].parse().unwrap();
    assert!((v - 1.0 / std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    let o = dirmean(&["density", "--dist", "nonsense", "--theta", "1", "--at", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let e: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "domain");

    let o = dirmean(&["density", "--dist", "uniform01", "--theta", "-1", "--at", "0.5"]);
    assert_eq!(o.status.code(), Some(2));

    let o = dirmean(&["fidi", "--theta", "1", "--cells", "0.5,0.6", "--at", "1,2", "--dist", "uniform01"]);
    assert_eq!(o.status.code(), Some(2));
    let e: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "precondition");

    // a tolerance below machine precision cannot be met
    let o = dirmean(&["psi", "--dist", "exp_ratio", "--at", "3", "--rel-tol", "1e-300", "--abs-tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(3));

    assert_eq!(dirmean(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(dirmean(&["density", "--dist", "uniform01", "--theta", "1"]).status.code(), Some(64));
    assert_eq!(dirmean(&["--help"]).status.code(), Some(0));
}
