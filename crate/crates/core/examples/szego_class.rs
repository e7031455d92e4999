//! Szegő integral, relative entropy, Blaschke sum and normalized products for a few
//! measures on [-2, 2].

use szegolab::szego::{membership, Extended};
use szegolab::{DiscretizedMeasure, FiniteGapSet, GreenFunction};

fn show(e: Extended) -> String {
    match e {
        Extended::Finite(v) => format!("{v:+.10}"),
        Extended::PosInfinity => "+inf".into(),
        Extended::NegInfinity => "-inf".into(),
    }
}

fn main() -> anyhow::Result<()> {
    let set = FiniteGapSet::interval(-2.0, 2.0)?;
    let g = GreenFunction::new(&set, 128)?;
    let cases = [
        ("equilibrium", DiscretizedMeasure::equilibrium(&g)?),
        ("Chebyshev 2nd kind", DiscretizedMeasure::chebyshev_second_kind(128)?),
        ("uniform dt/4", DiscretizedMeasure::uniform(&set, 128)?),
        ("uniform + mass at 2.5", DiscretizedMeasure::uniform(&set, 128)?.with_point_mass(2.5, 0.1)?.normalized()),
        ("vanishing on [-2, 0]", DiscretizedMeasure::from_density(&set, 128, |t| t.max(0.0))?.normalized()),
    ];
    println!("{:<24} {:>15} {:>15} {:>10} {:>8}", "measure", "Szegő integral", "entropy", "Blaschke", "a/cap");
    for (name, mu) in &cases {
        let r = membership(mu, &g)?;
        let lead = r.normalized_leading.last().map_or("-".to_string(), |v| format!("{v:.6}"));
        println!(
            "{name:<24} {:>15} {:>15} {:>10.6} {:>8}",
            show(r.szego_integral),
            show(r.entropy),
            r.blaschke_sum,
            lead
        );
        for reason in &r.reasons {
            println!("    not Szegő class: {reason}");
        }
    }
    Ok(())
}
