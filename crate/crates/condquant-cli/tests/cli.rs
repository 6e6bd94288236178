use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_condquant")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn frac(v: &Value) -> (String, String) {
    (v["num"].as_str().unwrap().to_owned(), v["den"].as_str().unwrap().to_owned())
}

fn f(num: &str, den: &str) -> (String, String) {
    (num.to_owned(), den.to_owned())
}

#[test]
fn moments_are_exact() {
    let v = json(&["moments", "--measure", "discrete"]);
    assert_eq!(v["command"], "moments");
    assert_eq!(v["preset"], "discrete");
    assert_eq!(frac(&v["results"]["mean_p"]), f("19", "39"));
    assert_eq!(frac(&v["results"]["variance_p"]), f("86696", "777231"));
    let u = json(&["moments", "--measure", "uniform"]);
    assert_eq!(frac(&u["results"]["variance_p"]), f("97", "876"));
    assert_eq!(frac(&u["results"]["variance_nu"]), f("1", "300"));
}

#[test]
fn construct_reports_codebook_and_error() {
    let v = json(&["construct", "--measure", "discrete", "--n", "4"]);
    let r = &v["results"];
    assert_eq!(r["count"], 4);
    let pts: Vec<_> = r["points"].as_array().unwrap().iter().map(frac).collect();
    assert_eq!(pts, [f("19", "195"), f("2", "5"), f("8", "15"), f("35", "39")]);
    assert_eq!(frac(&r["error"]), f("185729", "58292325"));
    assert_eq!(r["optimality"], "paper-optimal");

    let u = json(&["construct", "--measure", "uniform", "--n", "8"]);
    assert_eq!(frac(&u["results"]["error"]), f("2537", "6570000"));
}

#[test]
fn construct_writes_points_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.csv");
    json(&["construct", "--measure", "uniform", "--n", "3", "--csv", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 4, "{text}");
}

#[test]
fn solve_agrees_with_oracle() {
    let v = json(&["solve", "--measure", "uniform", "--n", "3", "--restarts", "4", "--seed", "7"]);
    let r = &v["results"];
    assert_eq!(r["agreement"], true);
    let lloyd: Vec<f64> =
        r["lloyd"]["points"].as_array().unwrap().iter().map(|p| p["float"].as_f64().unwrap()).collect();
    for (got, want) in lloyd.iter().zip([0.1, 0.5, 0.9]) {
        assert!((got - want).abs() < 1e-9, "{lloyd:?}");
    }
    assert_eq!(v["seed"], 7);
}

#[test]
fn output_is_deterministic() {
    let args = ["solve", "--measure", "discrete", "--n", "2", "--restarts", "6", "--seed", "3"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn dimension_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dim.csv");
    let v = json(&["dimension", "--measure", "uniform", "--max-level", "12", "--csv", path.to_str().unwrap()]);
    let ext = v["results"]["extrapolated"]["float"].as_f64().unwrap();
    let target = v["results"]["target"]["float"].as_f64().unwrap();
    assert!((ext - target).abs() < 0.05, "{ext} vs {target}");
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["n", "V_n", "d_n", "coeff"]);
    // Levels 0 through 12.
    assert_eq!(rdr.records().count(), 13);
}

#[test]
fn coefficients_approach_limit() {
    let v = json(&["coefficients", "--measure", "uniform", "--max-level", "20"]);
    let r = &v["results"];
    let last = r["f_subsequence"].as_array().unwrap().last().unwrap()["coefficient"]["float"].as_f64().unwrap();
    assert!((last - 1.0 / 129.0).abs() < 1e-6, "{last}");
    assert_eq!(r["coefficient_nonexistent"], true);
}

#[test]
fn verify_exit_codes() {
    let ok = run(&["verify", "--suite", "paper", "--only", "1,3"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("verify: ok"));

    let bad = run(&["verify", "--suite", "paper", "--only", "1", "--perturb-variance", "1/1000000000"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("verify: FAILED"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["construct", "--measure", "uniform", "--n", "0"][..],
        &["construct", "--measure", "uniform"][..],
        &["dimension", "--measure", "discrete", "--max-level", "0"][..],
        &["verify", "--suite", "unknown"][..],
        &["moments", "--measure", "cantor"][..],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}
