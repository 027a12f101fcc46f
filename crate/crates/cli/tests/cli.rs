use std::process::{Command, Output};

use qnb_core::dist::PmfTable;

fn qnb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnb")).args(args).env_remove("QNB_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn pmf_csv_starts_at_support_minimum() {
    let o = qnb(&["pmf", "--scheme", "type1", "--k", "2", "--r", "2", "--theta", "0.5", "--q", "0.9", "--tail-eps", "1e-8", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n,pmf,cdf"));
    assert!(lines.next().unwrap().starts_with("4,"));
    // q < 1 leaves mass at infinity, so the cap is hit and reported.
    assert!(stderr(&o).starts_with("warning[W_TRUNCATED]"));
}

#[test]
fn overlap_at_k_is_a_usage_error() {
    let o = qnb(&["pmf", "--scheme", "loverlap", "--ell", "3", "--k", "3", "--r", "2", "--theta", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error[E_PARAM]"));
}

#[test]
fn type4_has_no_dual_route() {
    let o = qnb(&["pmf", "--scheme", "type4", "--k", "2", "--r", "2", "--theta", "0.5", "--dual"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no dual route for Type IV"));
}

#[test]
fn errors_are_one_greppable_line() {
    let cases: [&[&str]; 5] = [
        &["pmf", "--scheme", "type1", "--k", "2", "--theta", "0.5"],
        &["pmf", "--scheme", "type1", "--k", "2", "--r", "1", "--theta", "1.5"],
        &["pmf", "--scheme", "type1", "--k", "0", "--r", "1", "--theta", "0.5"],
        &["kernels", "--family", "Q", "--k", "2", "--r", "1", "--s", "3"],
        &["simulate", "--scheme", "type1", "--k", "2", "--r", "1", "--theta", "0.5", "--replications", "10"],
    ];
    for args in cases {
        let o = qnb(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = stderr(&o);
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error[E_"), "{args:?}: {err}");
    }
}

#[test]
fn verify_reproduces_worked_examples() {
    let o = qnb(&["verify", "--paper-examples"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["checks"][0]["cases"], 10);
}

#[test]
fn verify_default_grid_passes() {
    let o = qnb(&["verify", "--k-max", "2", "--r-max", "2", "--n-max", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for check in report["checks"].as_array().unwrap() {
        assert_eq!(check["failure_count"], 0, "{check}");
    }
}

#[test]
fn verify_catches_injected_perturbation() {
    let o = qnb(&["verify", "--k-max", "1", "--r-max", "1", "--perturb", "1e-6"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[E_CHECK]"));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["passed"], false);
    let oracle = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "formula_vs_oracle").unwrap();
    let first = &oracle["failures"][0];
    for field in ["scheme", "k", "r", "theta", "q", "n"] {
        assert!(first.get(field).is_some(), "missing {field}");
    }
}

#[test]
fn simulate_is_deterministic() {
    let args = [
        "simulate", "--scheme", "type2", "--k", "2", "--r", "2", "--theta", "0.6", "--q", "0.9",
        "--replications", "100000", "--seed", "42", "--n-cap", "80",
    ];
    let a = qnb(&args);
    let b = qnb(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("n,pmf,cdf,stderr\n"));
    let single = Command::new(env!("CARGO_BIN_EXE_qnb")).args(args).env("QNB_THREADS", "1").output().unwrap();
    assert_eq!(single.stdout, a.stdout);
}

#[test]
fn kernel_base_case() {
    let o = qnb(&["kernels", "--family", "A", "--k", "2", "--r", "1", "--s", "5", "--q", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "A,2,0,1,5,2,1"), "{out}");
    assert!(out.lines().skip(1).filter(|l| !l.ends_with(",2,1")).all(|l| l.ends_with(",0")));
}

#[test]
fn counts_sum_to_one() {
    let o = qnb(&["counts", "--scheme", "type3", "--n", "10", "--k", "2", "--theta", "0.45", "--q", "0.8"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let probs: Vec<f64> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(probs.len(), 10);
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn json_output_round_trips_and_is_stable() {
    let args = ["pmf", "--scheme", "type3", "--k", "2", "--r", "3", "--theta", "0.6", "--q", "1", "--format", "json"];
    let a = qnb(&args);
    assert_eq!(a.status.code(), Some(0));
    let text = stdout(&a);
    let table = PmfTable::from_json(&text).unwrap();
    assert_eq!(table.to_json() + "\n", text);
    assert!(!table.truncated);
    assert_eq!(qnb(&args).stdout, a.stdout);
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("qnb-cli-test-{}.csv", std::process::id()));
    let p = path.to_str().unwrap();
    let o = qnb(&["pmf", "--scheme", "type2", "--k", "1", "--r", "1", "--theta", "0.5", "--output", p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let body = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(body.starts_with("n,pmf,cdf\n1,0.5,0.5\n"));
}
