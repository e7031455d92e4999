use std::process::ExitCode;

use szegolab::acceptance::{criteria, run_suite};

fn main() -> ExitCode {
    let report = run_suite(None, 1.0);
    let mut ok = report.criteria.len() == criteria().len();
    for c in &report.criteria {
        println!("{}", c.line());
        if !c.passed {
            for ch in &c.checks {
                println!("    {} = {:.3e} (bound {:.1e})", ch.label, ch.value, ch.bound);
            }
        }
    }
    ok &= report.passed;

    let filtered = run_suite(Some("gapset"), 1.0);
    let ids: Vec<u32> = filtered.criteria.iter().map(|c| c.id).collect();
    let filter_ok = ids == [1] && filtered.passed;
    println!("filter by module selects {ids:?}: {}", if filter_ok { "PASS" } else { "FAIL" });

    let strict = run_suite(Some("szego"), 1e-12);
    let named = !strict.passed
        && strict.criteria.iter().filter(|c| !c.passed).all(|c| c.line().contains("FAIL") && c.line().contains(c.title));
    println!("tightened tolerance names the failing criterion: {}", if named { "PASS" } else { "FAIL" });

    let passed = report.criteria.iter().filter(|c| c.passed).count();
    println!("acceptance: {passed}/{} criteria pass", report.criteria.len());
    if ok && filter_ok && named {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
