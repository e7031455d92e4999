//! A period-2 torus point perturbed by exponentially decaying terms: identify the
//! limiting torus orbit from the coefficients alone and watch the error decay.

use std::sync::Arc;

use szegolab::dynamics::{divisor_distance, identify_torus_point, orbit_error, perturb_torus, ExpPerturbation, FitOptions};
use szegolab::{Divisor, FiniteGapSet, GreenFunction, TorusPoint};

fn main() -> anyhow::Result<()> {
    let set = FiniteGapSet::new(-3.0, 3.0, vec![(-1.0, 1.0)])?;
    let green = Arc::new(GreenFunction::new(&set, 128)?);
    let generator = TorusPoint::new(green.clone(), &Divisor::new(vec![(0.4, 1)]), 128)?;
    let p = ExpPerturbation { amp_a: 0.3, rate_a: 0.8, amp_b: 0.1, rate_b: 0.85 };
    let j = perturb_torus(&generator, 400, |n| p.at(n))?;

    let id = identify_torus_point(&j, &green, &FitOptions::default())?;
    for rec in &id.history {
        println!("depth {:3}: fitted x = {:+.10}, misfit {:.2e}", rec.depth, rec.pulled_back.points[0].x, rec.misfit);
    }
    println!("distance to generator: {:.2e}", divisor_distance(&set, id.point.divisor(), generator.divisor()));

    let rep = orbit_error(&j, &id.point, 400)?;
    println!("\n   n        e_n      prod a/a'     sum b-b'");
    for n in [1, 5, 10, 20, 40, 60, 100, 200, 400] {
        println!("{n:4}  {:.3e}  {:.12}  {:+.12}", rep.error_seq[n - 1], rep.partial_products[n - 1], rep.partial_sums[n - 1]);
    }
    println!("ℓ² sum of coefficient differences: {:.6}", rep.ell2_sum);
    Ok(())
}
