//! Single-interval covering `z ↦ mid + s (z + 1/z)` of `C ∖ [α, β]` by the disk, Jost
//! functions and Jost solutions.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::stripped_measure;
use crate::error::{Error, Result};
use crate::gapset::{FiniteGapSet, GreenFunction};
use crate::jacobi::{orthonormal_eval, weyl_solution, DiscretizedMeasure, JacobiCoeffs};
use crate::torus::TorusPoint;

/// The covering map of `C ∖ [α, β]` by the unit disk. `B(z) = z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveringL0 {
    set: FiniteGapSet,
    mid: f64,
    scale: f64,
}

impl CoveringL0 {
    pub fn new(set: &FiniteGapSet) -> Result<Self> {
        if set.num_gaps() != 0 {
            return Err(Error::UnsupportedSet(format!(
                "covering maps are implemented for a single interval only; this set has {} gaps",
                set.num_gaps()
            )));
        }
        Ok(CoveringL0 { set: set.clone(), mid: set.hull_center(), scale: 0.5 * set.hull_halfwidth() })
    }

    pub fn set(&self) -> &FiniteGapSet {
        &self.set
    }

    /// `lim_{z→0} z cm(z)`.
    pub fn residue(&self) -> f64 {
        self.scale
    }

    /// `cm(z)`; `None` at the pole `z = 0`.
    pub fn cm(&self, z: Complex64) -> Option<Complex64> {
        if z == Complex64::new(0.0, 0.0) {
            return None;
        }
        Some(self.mid + self.scale * (z + 1.0 / z))
    }

    /// The preimage of `x ∉ E` in the open disk.
    pub fn preimage(&self, x: Complex64) -> Result<Complex64> {
        if x.im == 0.0 && self.set.contains(x.re) {
            return Err(Error::InvalidInput(format!("{} lies on E", x.re)));
        }
        let y = (x - self.mid) / self.scale;
        let sq = (y - 2.0).sqrt() * (y + 2.0).sqrt();
        let big = if (y + sq).norm() >= (y - sq).norm() { y + sq } else { y - sq };
        Ok(2.0 / big)
    }

    /// `ι(t) = e^{-iθ}` for `t = mid + 2 s cos θ`, the boundary value from below.
    pub fn boundary_preimage(&self, t: f64) -> Complex64 {
        let c = ((t - self.mid) / (2.0 * self.scale)).clamp(-1.0, 1.0);
        Complex64::from_polar(1.0, -c.acos())
    }

    pub fn blaschke(&self, z: Complex64) -> Complex64 {
        z
    }
}

/// `(|p| / p) (p - z) / (1 - p z)` for real `p ≠ 0`.
pub fn blaschke_factor(p: f64, z: Complex64) -> Complex64 {
    p.signum() * (p - z) / (1.0 - p * z)
}

/// `u(z; μ) = ∏ B(z, p_k) · exp{-∫ (e^{iθ} + z)/(e^{iθ} - z) log(π f(cm(e^{iθ}))) dθ / 4π}`.
#[derive(Debug, Clone, Serialize)]
pub struct JostFunction {
    covering: CoveringL0,
    pub blaschke_points: Vec<f64>,
    /// Cosine coefficients of the smooth part of `log(π f)`.
    outer_coeffs: Vec<f64>,
    edge_exponents: (f64, f64),
}

impl JostFunction {
    pub fn new(mu: &DiscretizedMeasure) -> Result<Self> {
        let covering = CoveringL0::new(mu.set())?;
        let band = &mu.bands()[0];
        let nodes = &band.nodes;
        let (gl, gr) = band.edge_exponents;
        let mut rest = Vec::with_capacity(nodes.len());
        for (k, &f) in band.density.iter().enumerate() {
            if !(f > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "density vanishes at t = {}; the Szegő integral is not finite",
                    nodes.t[k]
                )));
            }
            rest.push((PI * f).ln() - gl * nodes.one_plus_cos(k).ln() - gr * nodes.one_minus_cos(k).ln());
        }
        let kmax = nodes.len() / 2;
        let outer_coeffs = (0..=kmax)
            .map(|k| {
                let c = if k == 0 { 1.0 / PI } else { 2.0 / PI };
                c * (0..nodes.len())
                    .map(|i| nodes.w_theta[i] * rest[i] * (k as f64 * nodes.theta[i]).cos())
                    .sum::<f64>()
            })
            .collect();
        let blaschke_points = mu
            .point_masses()
            .iter()
            .map(|p| covering.preimage(Complex64::new(p.x, 0.0)).map(|z| z.re))
            .collect::<Result<_>>()?;
        Ok(JostFunction { covering, blaschke_points, outer_coeffs, edge_exponents: (gl, gr) })
    }

    pub fn covering(&self) -> &CoveringL0 {
        &self.covering
    }

    fn check(z: Complex64) -> Result<()> {
        if !(z.norm() < 1.0) {
            return Err(Error::InvalidInput(format!("|z| = {} is not inside the unit disk", z.norm())));
        }
        Ok(())
    }

    /// The zero-free outer factor.
    pub fn outer(&self, z: Complex64) -> Result<Complex64> {
        Self::check(z)?;
        Ok(self.outer_raw(z))
    }

    fn outer_raw(&self, z: Complex64) -> Complex64 {
        let mut series = Complex64::new(self.outer_coeffs[0], 0.0);
        let mut zk = Complex64::new(1.0, 0.0);
        for &c in &self.outer_coeffs[1..] {
            zk *= z;
            series += c * zk;
        }
        let (gl, gr) = self.edge_exponents;
        let one = Complex64::new(1.0, 0.0);
        let log_u = -0.5 * series + gr * (0.5 * LN_2 - (one - z).ln()) + gl * (0.5 * LN_2 - (one + z).ln());
        log_u.exp()
    }

    /// Boundary value at `|z| = 1`, `z ≠ ±1`, from the same series.
    pub fn boundary(&self, z: Complex64) -> Result<Complex64> {
        if (z.norm() - 1.0).abs() > 1e-12 || z.im == 0.0 {
            return Err(Error::InvalidInput(format!("{z} is not a boundary point away from ±1")));
        }
        let b: Complex64 = self.blaschke_points.iter().map(|&p| blaschke_factor(p, z)).product();
        Ok(b * self.outer_raw(z))
    }

    pub fn blaschke(&self, z: Complex64) -> Result<Complex64> {
        Self::check(z)?;
        Ok(self.blaschke_points.iter().map(|&p| blaschke_factor(p, z)).product())
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.blaschke(z)? * self.outer(z)?)
    }
}

/// `u(z; μ)`.
pub fn jost_eval(mu: &DiscretizedMeasure, z: Complex64) -> Result<Complex64> {
    JostFunction::new(mu)?.eval(z)
}

/// `u_n(z) = u(z; μ) W_n(cm(z))`.
pub fn jost_solution(u: &JostFunction, j: &JacobiCoeffs, n: i64, z: Complex64) -> Result<Complex64> {
    let x = u.covering().cm(z).ok_or_else(|| Error::InvalidInput("z = 0 is the pole of cm".into()))?;
    Ok(u.eval(z)? * weyl_solution(j, n, x)?)
}

/// Settings for reconstructing the spectral measures of stripped matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reconstruction {
    pub depth: usize,
    pub order: usize,
}

impl Default for Reconstruction {
    fn default() -> Self {
        Reconstruction { depth: 60, order: 128 }
    }
}

/// `|u_n(z) - a_n^{-1} z^n u(z; μ_n)|` with `μ_n` the spectral measure of `J` stripped `n` times.
pub fn jost_solution_residual(
    mu: &DiscretizedMeasure,
    j: &JacobiCoeffs,
    background: &TorusPoint,
    n: usize,
    z: Complex64,
    rec: Reconstruction,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let u = JostFunction::new(mu)?;
    let lhs = jost_solution(&u, j, n as i64, z)?;
    let mu_n = stripped_measure(j, n, background, rec.depth, rec.order)?;
    let rhs = z.powi(n as i32) * JostFunction::new(&mu_n)?.eval(z)? / j.a(n as i64);
    Ok((lhs - rhs).norm())
}

/// `u_n(z) P_{m-1}(cm(z)) / u(z)` for `n ≥ m`, to be compared with `G_{nm}(cm(z))`.
pub fn green_from_jost(u: &JostFunction, j: &JacobiCoeffs, n: i64, m: i64, z: Complex64) -> Result<Complex64> {
    if n < m || m < 1 {
        return Err(Error::InvalidInput(format!("need n ≥ m ≥ 1, got ({n}, {m})")));
    }
    let x = u.covering().cm(z).ok_or_else(|| Error::InvalidInput("z = 0 is the pole of cm".into()))?;
    Ok(jost_solution(u, j, n, z)? * orthonormal_eval(j, (m - 1) as usize, x)? / u.eval(z)?)
}

fn circle(r: f64, k: usize) -> impl Iterator<Item = Complex64> {
    (0..k).map(move |i| Complex64::from_polar(r, 2.0 * PI * i as f64 / k as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JostDistance {
    pub m: usize,
    pub distance: f64,
}

/// `max_{|z| ≤ r} |u(z; μ_m) - u(z; J')|` per depth, `J'` the torus point of the single interval.
pub fn jost_convergence(
    j: &JacobiCoeffs,
    background: &TorusPoint,
    depths: &[usize],
    r: f64,
    rec: Reconstruction,
) -> Result<Vec<JostDistance>> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidInput(format!("radius must lie in (0, 1), got {r}")));
    }
    let reference = JostFunction::new(background.mu_plus()?)?;
    let zs: Vec<Complex64> = circle(r, 64).collect();
    depths
        .iter()
        .map(|&m| {
            let u = JostFunction::new(&stripped_measure(j, m, background, rec.depth, rec.order)?)?;
            let mut distance = 0.0f64;
            for &z in &zs {
                distance = distance.max((u.eval(z)? - reference.eval(z)?).norm());
            }
            Ok(JostDistance { m, distance })
        })
        .collect()
}

/// `(max_{|z|≤r} |∏ B(z, z_k) - 1|, exp{(1+r)/(1-r) Σ g(y_k)} - 1)` for points `y_k ∉ E`.
pub fn lemma_rho_bound(green: &GreenFunction, ys: &[f64], r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidInput(format!("radius must lie in (0, 1), got {r}")));
    }
    if ys.is_empty() {
        return Ok((0.0, 0.0));
    }
    let covering = CoveringL0::new(green.set())?;
    let ps: Vec<f64> = ys
        .iter()
        .map(|&y| covering.preimage(Complex64::new(y, 0.0)).map(|z| z.re))
        .collect::<Result<_>>()?;
    let lhs = circle(r, 1440)
        .map(|z| (ps.iter().map(|&p| blaschke_factor(p, z)).product::<Complex64>() - 1.0).norm())
        .fold(0.0, f64::max);
    let gsum: f64 = ys.iter().map(|&y| green.value_real(y)).sum();
    let rhs = ((1.0 + r) / (1.0 - r) * gsum).exp() - 1.0;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gapset::DEFAULT_QUAD_ORDER;
    use crate::torus::Divisor;
    use std::sync::Arc;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn free_point() -> TorusPoint {
        let set = FiniteGapSet::interval(-2.0, 2.0).unwrap();
        let g = Arc::new(GreenFunction::new(&set, DEFAULT_QUAD_ORDER).unwrap());
        TorusPoint::new(g, &Divisor::empty(), 128).unwrap()
    }

    #[test]
    fn covering_basics() {
        let set = FiniteGapSet::interval(-1.0, 3.0).unwrap();
        let cov = CoveringL0::new(&set).unwrap();
        assert!(cov.cm(c(0.0)).is_none());
        assert!(cov.residue() > 0.0);
        let g = GreenFunction::new(&set, 64).unwrap();
        for z in [Complex64::new(0.3, 0.2), c(-0.7), Complex64::new(0.0, 0.9)] {
            let x = cov.cm(z).unwrap();
            assert!((cov.blaschke(z).norm().ln() + g.value(x).unwrap()).abs() < 1e-10);
            assert!((cov.preimage(x).unwrap() - z).norm() < 1e-13);
        }
        let two_gap = FiniteGapSet::new(-2.0, 2.0, vec![(-0.5, 0.5)]).unwrap();
        assert!(matches!(CoveringL0::new(&two_gap), Err(Error::UnsupportedSet(_))));
    }

    #[test]
    fn closed_form_jost_functions() {
        let u = jost_eval(&DiscretizedMeasure::chebyshev_second_kind(128).unwrap(), c(0.0)).unwrap();
        assert!((u.re - 2f64.sqrt()).abs() < 1e-13 && u.im.abs() < 1e-15);
        let u = jost_eval(&DiscretizedMeasure::chebyshev_first_kind(128).unwrap(), c(0.5)).unwrap();
        assert!((u.re - 0.75f64.sqrt()).abs() < 1e-13);
        let z = Complex64::new(0.3, -0.4);
        let u = jost_eval(&DiscretizedMeasure::chebyshev_second_kind(128).unwrap(), z).unwrap();
        assert!((u - (2.0 / (1.0 - z * z)).sqrt()).norm() < 1e-13);
    }

    #[test]
    fn blaschke_at_origin() {
        let mu = DiscretizedMeasure::chebyshev_second_kind(128).unwrap().with_point_mass(2.5, 0.1).unwrap();
        let u = JostFunction::new(&mu).unwrap();
        assert!((u.blaschke_points[0] - 0.5).abs() < 1e-15);
        assert!((u.blaschke(c(0.0)).unwrap().re - 0.5).abs() < 1e-15);
        assert!(u.eval(c(0.5)).unwrap().norm() < 1e-15);
        assert!(u.eval(c(1.0)).is_err());
    }

    #[test]
    fn radial_limit() {
        // f = sqrt(4 - t^2) (1 + 0.3 t / 2) / (2π), smooth after removing the edge factors.
        let mu = DiscretizedMeasure::from_density(&FiniteGapSet::interval(-2.0, 2.0).unwrap(), 128, |t| {
            (4.0 - t * t).max(0.0).sqrt() * (1.0 + 0.15 * t) / (2.0 * PI)
        })
        .unwrap();
        let u = JostFunction::new(&mu).unwrap();
        for theta in [0.4f64, 1.3, 2.2] {
            let t = 2.0 * theta.cos();
            let f = (4.0 - t * t).sqrt() * (1.0 + 0.15 * t) / (2.0 * PI);
            let v = u.eval(Complex64::from_polar(0.999, theta)).unwrap().norm();
            assert!((v * (PI * f).sqrt() - 1.0).abs() < 5e-3, "θ = {theta}: {v}");
        }
    }

    #[test]
    fn free_jost_solution_and_green() {
        let mu = DiscretizedMeasure::chebyshev_second_kind(128).unwrap();
        let u = JostFunction::new(&mu).unwrap();
        let j = JacobiCoeffs::free();
        let z = Complex64::new(0.4, 0.1);
        for n in 1..6 {
            let un = jost_solution(&u, &j, n, z).unwrap();
            assert!((un / u.eval(z).unwrap() - z.powi(n as i32)).norm() < 1e-12);
        }
        let g = green_from_jost(&u, &j, 1, 1, z).unwrap();
        assert!((g - z).norm() < 1e-12);
        let x = u.covering().cm(z).unwrap();
        let g34 = crate::jacobi::greens_entry(&j, 4, 3, x).unwrap();
        assert!((green_from_jost(&u, &j, 4, 3, z).unwrap() - g34).norm() < 1e-12);
    }

    #[test]
    fn chebyshev_first_kind_solution_identity() {
        let free = free_point();
        let mu = DiscretizedMeasure::chebyshev_first_kind(128).unwrap();
        let j = JacobiCoeffs::chebyshev_first_kind();
        for n in 1..=10 {
            let r = jost_solution_residual(&mu, &j, &free, n, c(0.4), Reconstruction::default()).unwrap();
            assert!(r < 1e-8, "n = {n}: {r}");
        }
    }

    #[test]
    fn stripping_chebyshev_first_kind_hits_free() {
        let free = free_point();
        let d = jost_convergence(&JacobiCoeffs::chebyshev_first_kind(), &free, &[1, 2, 5], 0.7, Reconstruction::default())
            .unwrap();
        assert!(d.iter().all(|e| e.distance < 1e-10), "{d:?}");
    }

    #[test]
    fn rho_bound_examples() {
        let g = GreenFunction::new(&FiniteGapSet::interval(-2.0, 2.0).unwrap(), 64).unwrap();
        assert_eq!(lemma_rho_bound(&g, &[], 0.5).unwrap(), (0.0, 0.0));
        let (lhs, rhs) = lemma_rho_bound(&g, &[2.5], 0.5).unwrap();
        assert!((rhs - 7.0).abs() < 1e-9);
        assert!(lhs <= rhs);
        assert!((lhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exp_perturbed_free_converges() {
        let free = free_point();
        let j = crate::dynamics::perturb_torus(&free, 300, |n| (0.3 * 0.8f64.powi(n as i32), 0.0)).unwrap();
        let d = jost_convergence(&j, &free, &[5, 10, 20, 40], 0.7, Reconstruction::default()).unwrap();
        assert!(d.windows(2).all(|w| w[1].distance < w[0].distance));
        assert!(d[3].distance < 1e-3);
        let accurate = jost_convergence(&j, &free, &[40], 0.7, Reconstruction { depth: 200, order: 256 }).unwrap();
        assert!((accurate[0].distance - d[3].distance).abs() < 1e-6);
    }
}
