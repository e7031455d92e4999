//! Jost functions on a single interval: closed forms, the Jost solution, and convergence
//! of the Jost functions of stripped measures to that of the free matrix.

use std::sync::Arc;

use num_complex::Complex64;
use szegolab::dynamics::{perturb_torus, ExpPerturbation};
use szegolab::jost::{jost_convergence, jost_solution_residual, JostFunction, Reconstruction};
use szegolab::{DiscretizedMeasure, Divisor, FiniteGapSet, GreenFunction, JacobiCoeffs, TorusPoint};

fn main() -> anyhow::Result<()> {
    let cheb_u = DiscretizedMeasure::chebyshev_second_kind(128)?;
    let cheb_t = DiscretizedMeasure::chebyshev_first_kind(128)?;
    let (uu, ut) = (JostFunction::new(&cheb_u)?, JostFunction::new(&cheb_t)?);
    println!("     z        u(z; ChebU)   sqrt(2/(1-z²))   u(z; ChebT)   sqrt(1-z²)");
    for z in [0.0, 0.3, -0.5, 0.8] {
        let zc = Complex64::new(z, 0.0);
        println!(
            "{z:6.2}   {:.12}  {:.12}   {:.12}  {:.12}",
            uu.eval(zc)?.re,
            (2.0 / (1.0 - z * z)).sqrt(),
            ut.eval(zc)?.re,
            (1.0 - z * z).sqrt()
        );
    }

    let set = FiniteGapSet::interval(-2.0, 2.0)?;
    let free = TorusPoint::new(Arc::new(GreenFunction::new(&set, 128)?), &Divisor::empty(), 128)?;
    let z = Complex64::new(0.2, 0.3);
    let res = jost_solution_residual(&cheb_u, &JacobiCoeffs::free(), &free, 5, z, Reconstruction::default())?;
    println!("\nJost solution residual at n = 5, z = {z}: {res:.2e}");

    let p = ExpPerturbation { amp_a: 0.3, rate_a: 0.8, amp_b: 0.0, rate_b: 0.0 };
    let j = perturb_torus(&free, 200, |n| p.at(n))?;
    println!("\n  m   max_(|z|≤0.5) |u(z; μ_m) - u(z; free)|");
    for d in jost_convergence(&j, &free, &[0, 5, 10, 20, 40], 0.5, Reconstruction::default())? {
        println!("{:3}   {:.3e}", d.m, d.distance);
    }
    Ok(())
}
