//! Running a JSON experiment config in-process, as the `szegolab` binary does.

use szegolab::cli::{run, ExperimentConfig};

const CONFIG: &str = r#"{
  "schema": 1,
  "set": {"alpha": -3, "beta": 3, "gaps": [[-1, 1]]},
  "divisor": {"points": [{"x": 0.4, "eps": 1}]},
  "perturbation": {"amp_a": 0.3, "rate_a": 0.8, "amp_b": 0.1, "rate_b": 0.85},
  "operation": {"kind": "dynamics", "n_max": 400, "fit": {"depth": 40}},
  "checks": [{"metric": "error_tail", "max": 1e-3}, {"metric": "generator_distance", "max": 1e-4}]
}"#;

fn main() -> anyhow::Result<()> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    let dir = tempfile::tempdir()?;
    let out = dir.path().join("report.csv");
    let report = run(&cfg, None, Some(&out))?;
    print!("{}", report.summary());
    let csv = std::fs::read_to_string(&out)?;
    println!("\nfirst rows of {}:", out.display());
    for line in csv.lines().take(4) {
        println!("  {line}");
    }
    println!("exit code {}", report.exit_code());
    Ok(())
}
