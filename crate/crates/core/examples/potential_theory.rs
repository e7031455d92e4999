//! Capacity, critical points and Green's function of a two-band set.

use num_complex::Complex64;
use szegolab::{FiniteGapSet, GreenFunction};

fn main() -> anyhow::Result<()> {
    let set = FiniteGapSet::new(-2.0, 2.0, vec![(-1.0, 1.0)])?;
    let g = GreenFunction::new(&set, 128)?;
    println!("E = [-2,-1] ∪ [1,2]");
    println!("capacity        {:.12}  (sqrt(3)/2 = {:.12})", g.capacity(), 3f64.sqrt() / 2.0);
    println!("critical point  {:+.3e}", g.critical_points()[0]);
    println!("g(0)            {:.12}  (log(3)/2 = {:.12})", g.value_real(0.0), 3f64.ln() / 2.0);
    println!("band masses     {:.6} {:.6}", g.equilibrium_mass(0)?, g.equilibrium_mass(1)?);
    println!("PW sum          {:.12}", g.pw_sum());

    println!("\n     x        g(x)");
    for x in [-3.0, -1.5, -0.5, 0.0, 0.5, 1.5, 3.0] {
        println!("{x:6.2}  {:.10}", g.value_real(x));
    }
    let z = Complex64::new(0.3, 0.8);
    println!("\ng({z}) = {:.10}", g.value(z)?);
    Ok(())
}
