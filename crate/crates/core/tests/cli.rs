use std::path::Path;
use std::process::{Command, Output};

fn szegolab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_szegolab")).current_dir(dir).args(args).output().unwrap()
}

const P2: &str = r#"{
  "schema": 1,
  "set": {"alpha": -3, "beta": 3, "gaps": [[-1, 1]]},
  "divisor": {"points": [{"x": 0.4, "eps": 1}]},
  "perturbation": {"amp_a": 0.3, "rate_a": 0.8, "amp_b": 0.1, "rate_b": 0.85},
  "operation": {"kind": "dynamics", "n_max": 400},
  "checks": [{"metric": "error_tail", "max": 1e-3}]
}"#;

#[test]
fn gapset_prints_capacity_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("chebyshev.json"), r#"{"alpha": -2, "beta": 2}"#).unwrap();
    let out = szegolab(dir.path(), &["gapset", "--set", "chebyshev.json"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let line = stdout.lines().find(|l| l.starts_with("capacity")).unwrap();
    assert_eq!(line.split_whitespace().nth(1).unwrap().parse::<f64>().unwrap(), 1.0);
}

#[test]
fn dynamics_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p2.json"), P2).unwrap();
    let first = szegolab(dir.path(), &["dynamics", "run", "--config", "p2.json", "--out", "a.csv"]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let second = szegolab(dir.path(), &["dynamics", "run", "--config", "p2.json", "--out", "b.csv"]);
    assert_eq!(second.status.code(), Some(0));
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.lines().next().unwrap().split(',').any(|c| c == "e_n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), "{\"schema\": 1,\n \"set\": {\"alpha\": -2 \"beta\": 2}}").unwrap();
    let out = szegolab(dir.path(), &["szego", "--config", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2 column"), "{err}");

    let failing = P2.replace("1e-3", "1e-30");
    std::fs::write(dir.path().join("strict.json"), failing).unwrap();
    assert_eq!(szegolab(dir.path(), &["dynamics", "run", "--config", "strict.json"]).status.code(), Some(1));

    std::fs::write(dir.path().join("p2.json"), P2).unwrap();
    assert_eq!(szegolab(dir.path(), &["torus", "--config", "p2.json"]).status.code(), Some(2));

    let coarse = r#"{"schema": 1, "set": {"alpha": -2, "beta": 2}, "quad_order": 32,
        "measure": {"source": "chebyshev_first_kind"}, "operation": {"kind": "l2", "n": [100]}}"#;
    std::fs::write(dir.path().join("coarse.json"), coarse).unwrap();
    assert_eq!(szegolab(dir.path(), &["asymptotics", "scan", "--config", "coarse.json"]).status.code(), Some(3));
}

#[test]
fn suite_filter_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = szegolab(dir.path(), &["suite", "--filter", "gapset", "--json", "verdict.json"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("criterion")).count(), 1);
    let verdict: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("verdict.json")).unwrap()).unwrap();
    assert_eq!(verdict["passed"], true);

    let out = szegolab(dir.path(), &["suite", "--filter", "4", "--tolerance-factor", "1e-12"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAILED 4 (Szegő functionals)"));
}

#[test]
fn thread_cap_is_respected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p2.json"), P2).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_szegolab"))
        .current_dir(dir.path())
        .env("SZEGOLAB_THREADS", "1")
        .args(["dynamics", "run", "--config", "p2.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = Command::new(env!("CARGO_BIN_EXE_szegolab"))
        .current_dir(dir.path())
        .env("SZEGOLAB_THREADS", "zero")
        .args(["suite", "--filter", "gapset"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
