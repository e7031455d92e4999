//! Reflectionless Jacobi matrices on the isospectral torus of a one-gap set: the
//! coefficient window of a divisor, its shift orbit, and the reflectionless residual.

use std::sync::Arc;

use szegolab::{Divisor, FiniteGapSet, GreenFunction, TorusPoint};

fn main() -> anyhow::Result<()> {
    let set = FiniteGapSet::new(-3.0, 3.0, vec![(-1.0, 1.0)])?;
    let green = Arc::new(GreenFunction::new(&set, 128)?);
    println!("cap(E) = {:.12}", green.capacity());

    for (label, d) in [
        ("gap centre", Divisor::new(vec![(0.0, 1)])),
        ("gap endpoint", Divisor::new(vec![(1.0, 1)])),
        ("generic", Divisor::new(vec![(0.4, 1)])),
    ] {
        let t = TorusPoint::new(green.clone(), &d, 128)?;
        let w = t.torus_coeffs(-4, 4)?;
        println!("\n{label} divisor {:?}", d.xs());
        println!("   n        a_n            b_n");
        for n in -4..=4 {
            println!("{n:4}  {:.10}  {:+.10}", w.a(n), w.b(n));
        }
        let ts: Vec<f64> = (1..=10).map(|k| 1.0 + 2.0 * k as f64 / 11.0).collect();
        println!("reflectionless residual {:.2e}", t.reflectionless_residual(&ts, 6)?);
    }

    let t = TorusPoint::new(green, &Divisor::new(vec![(0.4, -1)]), 128)?;
    println!("\nshift orbit of (0.4, -1):");
    let mut p = t.clone();
    for n in 0..6 {
        let x = p.divisor().points[0];
        println!("  T^{n}: x = {:+.8}  eps = {:+}  a0^2 = {:.8}  b0 = {:+.8}", x.x, x.eps, p.a0_sq(), p.b0());
        p = p.shift()?;
    }
    Ok(())
}
