//! The acceptance suite, optionally filtered by module name or criterion number.

use szegolab::acceptance::run_suite;

fn main() {
    let filter = std::env::args().nth(1);
    let report = run_suite(filter.as_deref(), 1.0);
    for c in &report.criteria {
        println!("{}", c.line());
    }
    println!("{}", if report.passed { "all pass" } else { "FAILED" });
}
