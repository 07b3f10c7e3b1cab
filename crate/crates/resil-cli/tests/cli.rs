use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BELL_WITH_NOISE: &str = r#"{
  "version": 1,
  "qubits": 2,
  "layers": [
    {"gates": [{"kind": "h", "qubits": [0]}],
     "noise": [{"qubits": [0], "operator": "Z", "distribution": {"kind": "two_point", "sigma": 0.05}, "paired_gate": 0}]},
    {"gates": [{"kind": "cx", "qubits": [0, 1]}],
     "noise": [{"qubits": [1], "operator": "X", "distribution": {"kind": "gaussian", "sigma": 0.03}, "paired_gate": 0}]},
    {"gates": [{"kind": "rz", "qubits": [1], "angle": 0.7}],
     "noise": [{"qubits": [1], "operator": "Z", "distribution": {"kind": "uniform", "sigma": 0.04}, "paired_gate": 0}]}
  ]
}"#;

fn resil(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_resil"));
    cmd.args(args).env_remove("RESIL_WORKERS");
    if let Some(w) = workers {
        cmd.env("RESIL_WORKERS", w);
    }
    cmd.output().expect("resil runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn analyze_circuit_reports_every_method_and_hashes_its_input() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "bell.json", BELL_WITH_NOISE);
    let out = resil(
        &["analyze", "--circuit", c.to_str().unwrap(), "--method", "avg", "--method", "mc", "--samples", "20000"],
        None,
    );
    let report = json(&out);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["compilation"]["qubits"], 2);
    assert_eq!(report["compilation"]["noise_sites"], 3);
    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0]["estimator"], "avg");
    assert_eq!(results[1]["estimator"], "mc");
    assert_eq!(report["comparisons"][0]["within_three_stderr"], true);
    let sha = report["inputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(sha.len(), 64);
    assert!(sha.chars().all(|c| c.is_ascii_hexdigit()));
}

#[test]
fn output_is_byte_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "bell.json", BELL_WITH_NOISE);
    let args = ["analyze", "--circuit", c.to_str().unwrap(), "--method", "mc", "--seed", "7", "--samples", "5000"];
    let one = resil(&args, Some("1"));
    let again = resil(&args, Some("1"));
    let four = resil(&args, Some("4"));
    let flag = resil(&[&args[..], &["--workers", "3"]].concat(), None);
    assert!(one.status.success());
    assert_eq!(one.stdout, again.stdout);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, flag.stdout);

    let sweep = [
        "sweep", "--model", "flip-a", "--noise", "qi", "--param", "T", "--values", "0.5:4:4", "--metric", "avg",
        "--metric", "path-length",
    ];
    let s1 = resil(&sweep, Some("1"));
    let s4 = resil(&sweep, Some("4"));
    assert!(s1.status.success(), "{}", String::from_utf8_lossy(&s1.stderr));
    assert_eq!(s1.stdout, s4.stdout);
}

#[test]
fn a_different_seed_changes_monte_carlo_output() {
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "bell.json", BELL_WITH_NOISE);
    let run = |seed: &str| resil(&["analyze", "--circuit", c.to_str().unwrap(), "--method", "mc", "--seed", seed], None);
    assert_ne!(run("1").stdout, run("2").stdout);
}

#[test]
fn compare_ranks_the_flip_compilations_by_noise_operator() {
    let qi = json(&resil(&["compare", "--model", "flip-b", "--model", "flip-a", "--noise", "qi"], None));
    assert_eq!(qi["ranking"][0]["name"], "flip-a");
    let qii = json(&resil(&["compare", "--model", "flip-a", "--model", "flip-b", "--noise", "qii"], None));
    assert_eq!(qii["ranking"][0]["name"], "flip-b");
    assert_eq!(qii["ranking"][1]["rank"], 2);
}

#[test]
fn sweep_writes_csv_with_a_loglog_slope_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/rescale.csv");
    let status = resil(
        &[
            "sweep", "--model", "flip-b", "--noise", "hamiltonian", "--param", "gamma", "--values", "0.5,1,2,4",
            "--metric", "avg", "--loglog-fit", "--out", out.to_str().unwrap(),
        ],
        None,
    );
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gamma,avg,avg_loglog_slope"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    // Fragility is linear in the noise intensity.
    assert!((rows[0][2] - 1.0).abs() < 1e-9);
}

#[test]
fn tradeoff_reports_the_inequality_used() {
    let analog = json(&resil(&["tradeoff", "--model", "pspin:n=3,runtime=5", "--noise", "hamiltonian"], None));
    assert_eq!(analog["inequality"], "analog");
    assert_eq!(analog["holds"], true);
    let dir = tempfile::tempdir().unwrap();
    let c = write(dir.path(), "bell.json", BELL_WITH_NOISE);
    let digital = json(&resil(&["tradeoff", "--circuit", c.to_str().unwrap()], None));
    assert_eq!(digital["inequality"], "digital");
    assert_eq!(digital["holds"], true);
    let cost = json(&resil(&["tradeoff", "--circuit", c.to_str().unwrap(), "--cost", "ZZ"], None));
    assert_eq!(cost["inequality"], "cost");
    assert_eq!(cost["holds"], true);
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"version": 1, "qubits": 2, "layers": [{"gates": [{"kind": "frob", "qubits": [0]}]}]}"#);
    for args in [
        vec!["analyze", "--circuit", bad.to_str().unwrap()],
        vec!["analyze", "--model", "no-such-model"],
        vec!["analyze", "--model", "flip-a"],
        vec!["analyze", "--circuit", "/does/not/exist.json"],
        vec!["analyze", "--model", "flip-a", "--noise", "qi", "--method", "bogus"],
        vec!["compare", "--model", "flip-a"],
        vec!["sweep", "--model", "flip-a", "--noise", "qi", "--param", "depth", "--values", "1"],
        vec!["analyze", "--model", "flip-a", "--noise", "qi", "--workers", "0"],
    ] {
        let out = resil(&args, None);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn numerical_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // A fast schedule with a step cap too small for the integrator to converge.
    let sched = write(
        dir.path(),
        "stiff.json",
        r#"{"version": 1, "qubits": 2, "runtime": 200.0,
            "terms": [{"operator": "XX", "ramp": {"kind": "linear", "from": 0.0, "to": 5.0}},
                      {"operator": "ZI", "ramp": {"kind": "constant", "value": 3.0}}],
            "integrator": {"initial_steps": 2, "max_steps": 4}}"#,
    );
    let out = resil(&["analyze", "--schedule", sched.to_str().unwrap(), "--noise", "hamiltonian"], None);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
}

#[test]
fn repro_writes_tables_and_a_reproducible_summary() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let status = resil(&["repro", "a5", "--out", out.to_str().unwrap()], None);
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        out
    };
    let a = run("a");
    let b = run("b");
    for f in ["a5_fragility.csv", "a5_ranking.csv", "summary.json", "summary.txt"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let summary: Value = serde_json::from_slice(&std::fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["criteria"].as_array().unwrap().len(), 2);
}
