//! Ratio asymptotics, the growth envelope on a one-gap set, and L² asymptotics.

use std::sync::Arc;

use num_complex::Complex64;
use szegolab::asymptotics::{growth_envelope, l2_asymptotics, poly_ratio_scan, ratio_vs_jost};
use szegolab::jacobi::stieltjes_coeffs;
use szegolab::jost::Reconstruction;
use szegolab::{DiscretizedMeasure, Divisor, FiniteGapSet, GreenFunction, JacobiCoeffs, TorusPoint};

fn main() -> anyhow::Result<()> {
    let set = FiniteGapSet::interval(-2.0, 2.0)?;
    let x = [Complex64::new(2.5, 0.0), Complex64::new(0.0, 1.0)];
    let scan = poly_ratio_scan(&JacobiCoeffs::chebyshev_first_kind(), &JacobiCoeffs::free(), &set, &x, 60, 1e-12)?;
    for (xi, lim) in x.iter().zip(&scan.limits) {
        println!("P_n(x; ChebT)/P_n(x; ChebU) at x = {xi}: {:.10} (certified: {})", lim.limit, lim.certified);
    }

    let (mu, mu_ref) = (DiscretizedMeasure::chebyshev_first_kind(128)?, DiscretizedMeasure::chebyshev_second_kind(128)?);
    let zs: Vec<Complex64> = (0..5).map(|k| Complex64::from_polar(0.2 + 0.15 * k as f64, 0.7 * k as f64)).collect();
    let rep = ratio_vs_jost(&JacobiCoeffs::chebyshev_first_kind(), &mu, &JacobiCoeffs::free(), &mu_ref, &zs, 200)?;
    println!("\npolynomial ratio vs Jost ratio, ChebT / ChebU: max deviation {:.2e}", rep.max_deviation);

    let one_gap = FiniteGapSet::new(-2.0, 2.5, vec![(0.3, 1.1)])?;
    let green = Arc::new(GreenFunction::new(&one_gap, 128)?);
    let t = TorusPoint::new(green.clone(), &Divisor::new(vec![(0.55, -1)]), 128)?;
    let xs = [Complex64::new(3.0, 0.0), Complex64::new(-2.5, 0.0), Complex64::new(0.5, 0.6)];
    println!("\nenvelope of e^(-n g(x)) |P_n(x)| over n in [100, 300]:");
    for e in growth_envelope(&t.right_coeffs(300)?, &green, &xs, 100, 300)? {
        println!("  x = {:<10} min {:.6}  max {:.6}  ratio {:.4}", e.x.to_string(), e.min, e.max, e.ratio());
    }

    let cheb_t = DiscretizedMeasure::chebyshev_first_kind(512)?;
    let ns = [20, 50, 100];
    let r = l2_asymptotics(&cheb_t, &stieltjes_coeffs(&cheb_t, 200)?, &ns, Reconstruction::default())?;
    let with_mass = DiscretizedMeasure::chebyshev_first_kind(512)?.with_point_mass(2.5, 0.2)?.normalized();
    let s = l2_asymptotics(&with_mass, &stieltjes_coeffs(&with_mass, 200)?, &ns, Reconstruction::default())?;
    println!("\n   n    I_n^ac (ChebT)   I_n^sing (mass at 2.5)");
    for ((n, ac), sing) in ns.iter().zip(&r.ac).zip(&s.sing) {
        println!("{n:4}    {ac:.3e}        {sing:.3e}");
    }
    Ok(())
}
