//! End-to-end checks of the CLI: stable output schemas, exit codes, and
//! agreement with direct library calls.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_glrank")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn glrank")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const C4: &str = "p 4\ne 0 1\ne 1 2\ne 2 3\ne 3 0\n";
const K4: &str = "p 4\ne 0 1\ne 0 2\ne 0 3\ne 1 2\ne 1 3\ne 2 3\n";

#[test]
fn gcr_prints_plain_rank_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = write(dir.path(), "c4.edges", C4);
    let first = run(&["gcr", &c4, "--seed", "7"]);
    assert!(first.status.success());
    assert_eq!(stdout(&first), "3\n");
    let second = run(&["gcr", &c4, "--seed", "7"]);
    assert_eq!(stdout(&second), "3\n");
}

#[test]
fn ranks_golden_json() {
    let dir = tempfile::tempdir().unwrap();
    let k4 = write(dir.path(), "k4.edges", K4);
    let out = run(&["ranks", &k4, "--seed", "3", "--trials", "10"]);
    assert!(out.status.success());
    let golden = r#"{
  "bounds": {
    "degeneracy_plus1": 4,
    "gaussian_rank_estimate": 4,
    "gcr": 4,
    "kappa_star_plus1": 4,
    "rbar": 4,
    "seed": 3,
    "trials": 10,
    "weak_rank_estimate": 4
  },
  "invariants": {
    "chordal": true,
    "clique_number": 4,
    "degeneracy": 3,
    "disconnection": 3,
    "max_degree": 3,
    "subgraph_connectivity": 3
  }
}
"#;
    assert_eq!(stdout(&out), golden);
}

#[test]
fn certify_golden_json_with_exact_certificate() {
    // Two isolated vertices with A = diag(1, 0): the kernel direction
    // diag(0, 1) has nonnegative nonzero diagonal, so no minimizer exists
    // for either objective.
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "iso2.edges", "p 2\n");
    let m = write(dir.path(), "a.csv", "1,0\n0,0\n");
    let out = run(&["certify", &g, &m]);
    assert!(out.status.success());
    let text = stdout(&out);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["pseudo"]["exists"], false);
    assert_eq!(v["pseudo"]["unique"], false);
    assert_eq!(v["pseudo"]["kernel_dim"], 1);
    assert_eq!(v["pseudo"]["zero_diag_dim"], 0);
    assert_eq!(
        v["pseudo"]["certificate"],
        serde_json::json!([["0", "0"], ["0", "1"]])
    );
    assert_eq!(v["gaussian"]["outcome"], "not_exists");
    assert_eq!(v["gaussian"]["unique"], false);
}

#[test]
fn certify_dimension_mismatch_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "c4.edges", C4);
    let m = write(dir.path(), "a.csv", "1,0\n0,1\n");
    let out = run(&["certify", &g, &m]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fit_writes_matrix_and_json_summary() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "k4.edges", K4);
    let m = write(dir.path(), "diag.csv", "4,0,0,0\n0,1,0,0\n0,0,1,0\n0,0,0,1\n");
    let omega = dir.path().join("omega.csv");
    let out = run(&[
        "fit",
        "--method",
        "concord",
        "--graph",
        &g,
        "--matrix",
        &m,
        "--out",
        omega.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"], "converged");
    assert_eq!(v["omega"], omega.to_str().unwrap());
    let fitted = glrank::symmat::parse_matrix_csv(&std::fs::read_to_string(&omega).unwrap()).unwrap();
    let expect = [0.5, 1.0, 1.0, 1.0];
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j { expect[i] } else { 0.0 };
            assert!((fitted.get(i, j) - want).abs() < 1e-6);
        }
    }
}

#[test]
fn fit_requires_exactly_one_input_and_known_method() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "k4.edges", K4);
    let out = run(&["fit", "--method", "concord", "--graph", &g]);
    assert_eq!(out.status.code(), Some(1));
    let m = write(dir.path(), "diag.csv", "4,0,0,0\n0,1,0,0\n0,0,1,0\n0,0,0,1\n");
    let out = run(&["fit", "--method", "bogus", "--graph", &g, "--matrix", &m]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fit_maxiter_exits_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "k4.edges", K4);
    let m = write(
        dir.path(),
        "s.csv",
        "4,1,0,1\n1,3,1,0\n0,1,5,1\n1,0,1,2\n",
    );
    let omega = dir.path().join("omega.csv");
    let out = run(&[
        "fit",
        "--method",
        "concord",
        "--graph",
        &g,
        "--matrix",
        &m,
        "--max-iter",
        "1",
        "--out",
        omega.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"], "maxiter");
}

#[test]
fn simulate_golden_csv_matches_library_call() {
    let out = run(&[
        "simulate",
        "--family",
        "complete",
        "--params",
        "3",
        "--n-min",
        "3",
        "--n-max",
        "3",
        "--trials",
        "5",
        "--seed",
        "7",
    ]);
    assert!(out.status.success());
    let golden = "graph,p,param,n,method,trials,prob,stderr,inconclusive,seed\n\
                  complete,3,3,3,pseudo,5,1,0,0,7\n\
                  complete,3,3,3,gaussian,5,1,0,0,7\n";
    assert_eq!(stdout(&out), golden);
    // Thin-adapter contract: the CLI output equals the library result.
    let g = glrank::graph::GraphFamily::Complete(3)
        .generate::<rand_chacha::ChaCha8Rng>(None)
        .unwrap();
    let cfg = glrank::SimConfig {
        graph: g,
        label: "complete".into(),
        param: "3".into(),
        n_range: (3, 3),
        trials: 5,
        seed: 7,
        methods: vec![glrank::Method::Pseudo, glrank::Method::Gaussian],
    };
    assert_eq!(glrank::existence_curve(&cfg).unwrap().to_csv(), golden);
}

#[test]
fn budget_exceeded_exits_2() {
    // Disconnection-number brute force refuses p > 15.
    let mut text = String::from("p 17\n");
    for i in 0..16 {
        text.push_str(&format!("e {} {}\n", i, i + 1));
    }
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "long.edges", &text);
    let out = run(&["ranks", &g, "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_graph_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "bad.edges", "p 3\ne 0 0\n");
    let out = run(&["certify", &g, &g]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line"), "stderr: {err}");
}
