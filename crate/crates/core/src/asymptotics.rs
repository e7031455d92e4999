//! Ratio asymptotics, growth envelopes, diagonal Green's function ratios and `L²`
//! asymptotics of orthonormal polynomials.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::stripped_measure;
use crate::error::{Error, Result};
use crate::gapset::{FiniteGapSet, GreenFunction};
use crate::jacobi::{greens_entry, orthonormal_seq_log, orthonormal_seq_real, DiscretizedMeasure, JacobiCoeffs};
use crate::jost::{CoveringL0, JostFunction, Reconstruction};
use crate::torus::{Divisor, TorusPoint};

/// Aitken's Δ² transform; entries with a vanishing second difference keep the latest term.
pub fn aitken(seq: &[Complex64]) -> Vec<Complex64> {
    seq.windows(3)
        .map(|w| {
            let d1 = w[1] - w[0];
            let d2 = w[2] - 2.0 * w[1] + w[0];
            if d2.norm() <= 1e-14 * w[2].norm().max(1e-300) {
                w[2]
            } else {
                let acc = w[2] - (w[2] - w[1]) * (w[2] - w[1]) / d2;
                if acc.re.is_finite() && acc.im.is_finite() && (acc - w[2]).norm() <= 10.0 * d1.norm().max(1e-300) {
                    acc
                } else {
                    w[2]
                }
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolation {
    pub limit: Complex64,
    /// The last three accelerated values agree within the tolerance.
    pub certified: bool,
    pub last_delta: f64,
    /// `|Δ_N / Δ_{N-1}|` of the raw sequence.
    pub rate: f64,
}

pub fn extrapolate(seq: &[Complex64], tol: f64) -> Result<Extrapolation> {
    if seq.len() < 6 {
        return Err(Error::InvalidInput(format!("need at least 6 terms to extrapolate, got {}", seq.len())));
    }
    let acc = aitken(seq);
    let k = acc.len();
    let deltas = [(acc[k - 1] - acc[k - 2]).norm(), (acc[k - 2] - acc[k - 3]).norm(), (acc[k - 3] - acc[k - 4]).norm()];
    let n = seq.len();
    let (d_last, d_prev) = ((seq[n - 1] - seq[n - 2]).norm(), (seq[n - 2] - seq[n - 3]).norm());
    let rate = if d_prev > 0.0 { d_last / d_prev } else { 0.0 };
    Ok(Extrapolation { limit: acc[k - 1], certified: deltas.iter().all(|d| *d < tol), last_delta: deltas[0], rate })
}

/// Polynomial extrapolation in `h = 1/n` to `h = 0` (Neville). Returns the estimate and the
/// difference between the last two diagonal entries of the tableau.
pub fn richardson(ns: &[usize], vals: &[Complex64]) -> Result<(Complex64, f64)> {
    if ns.len() != vals.len() || ns.len() < 2 {
        return Err(Error::InvalidInput("need at least two (n, value) pairs of equal length".into()));
    }
    let h: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    let mut t = vals.to_vec();
    let mut diag = vec![t[t.len() - 1]];
    for level in 1..ns.len() {
        for i in (level..ns.len()).rev() {
            t[i] = (h[i - level] * t[i] - h[i] * t[i - 1]) / (h[i - level] - h[i]);
        }
        diag.push(t[ns.len() - 1]);
    }
    let k = diag.len();
    Ok((diag[k - 1], (diag[k - 1] - diag[k - 2]).norm()))
}

fn check_exterior(set: &FiniteGapSet, x: Complex64) -> Result<()> {
    if x.im == 0.0 && x.re >= set.alpha() && x.re <= set.beta() {
        return Err(Error::InvalidInput(format!("x = {} lies in the convex hull of E", x.re)));
    }
    if !(x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite x".into()));
    }
    Ok(())
}

/// `R_n(x) = P_n(x; J) / P_n(x; J')` for `n = 1..=N` with extrapolated limits.
#[derive(Debug, Clone, Serialize)]
pub struct RatioScan {
    pub x_grid: Vec<Complex64>,
    pub n_list: Vec<usize>,
    /// `values[i][k]` is `R_{n_list[k]}(x_grid[i])`.
    pub values: Vec<Vec<Complex64>>,
    pub limits: Vec<Extrapolation>,
}

pub fn poly_ratio_scan(
    j: &JacobiCoeffs,
    j_ref: &JacobiCoeffs,
    set: &FiniteGapSet,
    x_grid: &[Complex64],
    n_max: usize,
    tol: f64,
) -> Result<RatioScan> {
    for &x in x_grid {
        check_exterior(set, x)?;
    }
    let rows: Vec<(Vec<Complex64>, Extrapolation)> = x_grid
        .par_iter()
        .map(|&x| {
            let p = orthonormal_seq_log(j, n_max, x)?;
            let q = orthonormal_seq_log(j_ref, n_max, x)?;
            let vals: Vec<Complex64> = (1..=n_max).map(|n| p[n].ratio(q[n])).collect();
            let ext = extrapolate(&vals, tol)?;
            Ok((vals, ext))
        })
        .collect::<Result<_>>()?;
    let (values, limits) = rows.into_iter().unzip();
    Ok(RatioScan { x_grid: x_grid.to_vec(), n_list: (1..=n_max).collect(), values, limits })
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioJostReport {
    pub z_grid: Vec<Complex64>,
    pub poly_limits: Vec<Complex64>,
    pub jost_ratios: Vec<Complex64>,
    pub max_deviation: f64,
    pub all_certified: bool,
}

/// Extrapolated `P_n(cm(z); μ) / P_n(cm(z); μ')` against `u(z; μ) / u(z; μ')`.
pub fn ratio_vs_jost(
    j: &JacobiCoeffs,
    mu: &DiscretizedMeasure,
    j_ref: &JacobiCoeffs,
    mu_ref: &DiscretizedMeasure,
    z_grid: &[Complex64],
    n_max: usize,
) -> Result<RatioJostReport> {
    let cov = CoveringL0::new(mu.set())?;
    let (u, u_ref) = (JostFunction::new(mu)?, JostFunction::new(mu_ref)?);
    let xs = z_grid
        .iter()
        .map(|&z| cov.cm(z).ok_or_else(|| Error::InvalidInput("z = 0 is the pole of cm".into())))
        .collect::<Result<Vec<_>>>()?;
    let scan = poly_ratio_scan(j, j_ref, mu.set(), &xs, n_max, 1e-12)?;
    let jost_ratios = z_grid.iter().map(|&z| Ok(u.eval(z)? / u_ref.eval(z)?)).collect::<Result<Vec<_>>>()?;
    let poly_limits: Vec<Complex64> = scan.limits.iter().map(|e| e.limit).collect();
    let max_deviation = poly_limits.iter().zip(&jost_ratios).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    Ok(RatioJostReport {
        z_grid: z_grid.to_vec(),
        poly_limits,
        jost_ratios,
        max_deviation,
        all_certified: scan.limits.iter().all(|e| e.certified),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub x: Complex64,
    pub min: f64,
    pub max: f64,
}

impl Envelope {
    pub fn ratio(&self) -> f64 {
        self.max / self.min
    }
}

/// `min` and `max` of `e^{-n g(x)} |P_n(x)|` over `n ∈ [n_lo, n_hi]`.
pub fn growth_envelope(
    j: &JacobiCoeffs,
    green: &GreenFunction,
    x_grid: &[Complex64],
    n_lo: usize,
    n_hi: usize,
) -> Result<Vec<Envelope>> {
    if n_lo > n_hi {
        return Err(Error::InvalidInput(format!("empty range [{n_lo}, {n_hi}]")));
    }
    for &x in x_grid {
        check_exterior(green.set(), x)?;
    }
    x_grid
        .par_iter()
        .map(|&x| {
            let g = green.value(x)?;
            let p = orthonormal_seq_log(j, n_hi, x)?;
            let vals = (n_lo..=n_hi).map(|n| (p[n].ln_abs - n as f64 * g).exp());
            let (min, max) = vals.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
            Ok(Envelope { x, min, max })
        })
        .collect()
}

/// `z^n P_n(cm(z))` for `n = 0..=n_max`.
pub fn scaled_pn(j: &JacobiCoeffs, cov: &CoveringL0, z: Complex64, n_max: usize) -> Result<Vec<Complex64>> {
    let x = cov.cm(z).ok_or_else(|| Error::InvalidInput("z = 0 is the pole of cm".into()))?;
    let p = orthonormal_seq_log(j, n_max, x)?;
    let lz = z.ln();
    Ok(p.iter()
        .enumerate()
        .map(|(n, v)| (Complex64::new(v.ln_abs, 0.0) + n as f64 * lz).exp() * v.phase)
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiReport {
    pub z_grid: Vec<Complex64>,
    pub n_list: Vec<usize>,
    /// `phi[c][i]`: extrapolated `Φ(z_i)` for case `c`.
    pub phi: Vec<Vec<Complex64>>,
    /// Largest extrapolation uncertainty per case.
    pub uncertainty: Vec<f64>,
    /// `max_i max_c |Φ_c(z_i) - Φ_0(z_i)|`.
    pub residual: f64,
}

/// `Φ_n(z; μ) = z^n P_n(cm(z); μ) a_n (1 - z²) / u(z; μ)` for each `(J, μ)` case, at
/// `n = n_base 2^k`, `k < levels`, extrapolated to `n = ∞` in powers of `1/n`.
pub fn corollary_pn_check(
    cases: &[(JacobiCoeffs, DiscretizedMeasure)],
    z_grid: &[Complex64],
    n_base: usize,
    levels: usize,
) -> Result<PhiReport> {
    if cases.is_empty() {
        return Err(Error::InvalidInput("no measures supplied".into()));
    }
    if n_base == 0 || levels < 2 {
        return Err(Error::InvalidInput("need n_base > 0 and at least two levels".into()));
    }
    let set = cases[0].1.set();
    let cov = CoveringL0::new(set)?;
    let n_list: Vec<usize> = (0..levels).map(|k| n_base << k).collect();
    let n_top = *n_list.last().unwrap();
    let mut phi = Vec::with_capacity(cases.len());
    let mut uncertainty = Vec::with_capacity(cases.len());
    for (j, mu) in cases {
        if mu.set() != set {
            return Err(Error::InvalidInput("all measures must live on the same interval".into()));
        }
        let u = JostFunction::new(mu)?;
        let (a, _) = j.prefix(n_top)?;
        let rows = z_grid
            .par_iter()
            .map(|&z| {
                let zp = scaled_pn(j, &cov, z, n_top)?;
                let factor = (1.0 - z * z) / u.eval(z)?;
                let seq: Vec<Complex64> = n_list.iter().map(|&n| zp[n] * a[n - 1] * factor).collect();
                richardson(&n_list, &seq)
            })
            .collect::<Result<Vec<_>>>()?;
        uncertainty.push(rows.iter().map(|r| r.1).fold(0.0, f64::max));
        phi.push(rows.into_iter().map(|r| r.0).collect::<Vec<_>>());
    }
    let mut residual = 0.0f64;
    for i in 0..z_grid.len() {
        for c in 1..phi.len() {
            residual = residual.max((phi[c][i] - phi[0][i]).norm());
        }
    }
    Ok(PhiReport { z_grid: z_grid.to_vec(), n_list, phi, uncertainty, residual })
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenRatio {
    pub n_list: Vec<i64>,
    /// `|G_nn(J) / G_nn(J⁺) - 1|`.
    pub values: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Diagonal Green's function ratios against the reference one-sided matrix.
pub fn green_ratio(j: &JacobiCoeffs, j_ref: &JacobiCoeffs, set: &FiniteGapSet, n_list: &[i64], x: Complex64) -> Result<GreenRatio> {
    let mut warnings = Vec::new();
    let dist = set.distance(x);
    if dist < 1e-2 {
        warnings.push(format!("x = {x} is within {dist:.1e} of E; resolvent truncations converge slowly"));
    }
    let values = n_list
        .par_iter()
        .map(|&n| {
            let g = greens_entry(j, n, n, x)?;
            let g_ref = greens_entry(j_ref, n, n, x)?;
            Ok((g / g_ref - 1.0).norm())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GreenRatio { n_list: n_list.to_vec(), values, warnings })
}

#[derive(Debug, Clone, Serialize)]
pub struct L2Report {
    pub n_list: Vec<usize>,
    /// `∫_E |P_n(t) - Im{u(ι) conj(u_{n+1}(ι))}|² f dt`.
    pub ac: Vec<f64>,
    /// `Σ_k |P_n(x_k)|² w_k`.
    pub sing: Vec<f64>,
}

/// `L²` asymptotics on a single interval. `u_{n+1}(ι) = a_{n+1}^{-1} ι^{n+1} u(ι; μ_{n+1})` with
/// `μ_{n+1}` reconstructed from `J` stripped `n + 1` times, and `ι(t) = e^{-iθ}` for
/// `t = mid + 2 s cos θ`.
pub fn l2_asymptotics(mu: &DiscretizedMeasure, j: &JacobiCoeffs, n_list: &[usize], rec: Reconstruction) -> Result<L2Report> {
    CoveringL0::new(mu.set())?;
    let green = Arc::new(GreenFunction::new(mu.set(), mu.order().max(64))?);
    let background = TorusPoint::new(green, &Divisor::empty(), rec.order)?;
    let u = JostFunction::new(mu)?;
    let band = &mu.bands()[0];
    let nodes = &band.nodes;
    let iotas: Vec<Complex64> = nodes.theta.iter().map(|&th| Complex64::from_polar(1.0, -th)).collect();
    let u_bd = iotas.iter().map(|&z| u.boundary(z)).collect::<Result<Vec<_>>>()?;
    let n_top = n_list.iter().copied().max().unwrap_or(0);
    let (a, b) = j.prefix(n_top + 1)?;
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let mu_next = stripped_measure(j, n + 1, &background, rec.depth, rec.order)?;
            let u_next = JostFunction::new(&mu_next)?;
            let mut ac = 0.0;
            for (k, &t) in nodes.t.iter().enumerate() {
                let pn = orthonormal_seq_real(&a, &b, n, t)[n];
                let un1 = iotas[k].powi(n as i32 + 1) * u_next.boundary(iotas[k])? / a[n];
                let approx = (u_bd[k] * un1.conj()).im;
                ac += (pn - approx).powi(2) * band.weights[k];
            }
            let sing: f64 = mass_point_values(mu, &a, &b, n)?.iter().zip(mu.point_masses()).map(|(v, p)| p.w * v * v).sum();
            Ok((ac, sing))
        })
        .collect::<Result<Vec<_>>>()?;
    let (ac, sing) = rows.into_iter().unzip();
    Ok(L2Report { n_list: n_list.to_vec(), ac, sing })
}

/// `P_n(x_k)` at the point masses of `mu` from `∫ P_n q_k dμ = 0` with
/// `q_k = ∏_{j≠k} (t - x_j)`, using only stable evaluations on the bands.
fn mass_point_values(mu: &DiscretizedMeasure, a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>> {
    let xs: Vec<f64> = mu.point_masses().iter().map(|p| p.x).collect();
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    if n < xs.len() {
        return Ok(mu.point_masses().iter().map(|p| orthonormal_seq_real(a, b, n, p.x)[n]).collect());
    }
    let q = |k: usize, t: f64| xs.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, x)| t - x).product::<f64>();
    let mut ints = vec![0.0; xs.len()];
    for band in mu.bands() {
        for (i, &t) in band.nodes.t.iter().enumerate() {
            let pn = orthonormal_seq_real(a, b, n, t)[n];
            for (k, acc) in ints.iter_mut().enumerate() {
                *acc += band.weights[i] * pn * q(k, t);
            }
        }
    }
    Ok(mu.point_masses().iter().enumerate().map(|(k, p)| -ints[k] / (p.w * q(k, p.x))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jacobi::{stieltjes_coeffs, Side};
    use std::f64::consts::SQRT_2;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn interval() -> FiniteGapSet {
        FiniteGapSet::interval(-2.0, 2.0).unwrap()
    }

    #[test]
    fn aitken_geometric() {
        let seq: Vec<Complex64> = (0..10).map(|n| c(3.0 + 0.5f64.powi(n))).collect();
        let e = extrapolate(&seq, 1e-12).unwrap();
        assert!((e.limit - 3.0).norm() < 1e-13 && e.certified);
        assert!((e.rate - 0.5).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_ratio_limits() {
        let t = JacobiCoeffs::chebyshev_first_kind();
        let free = JacobiCoeffs::free();
        let s = poly_ratio_scan(&t, &free, &interval(), &[c(2.5), c(1e4)], 40, 1e-10).unwrap();
        assert!((s.limits[0].limit.re - 0.75 / SQRT_2).abs() < 1e-12);
        assert!((s.limits[1].limit.re - 1.0 / SQRT_2).abs() < 1e-7);
        assert!(s.values[0].iter().all(|v| v.re > 0.0));
        let same = poly_ratio_scan(&free, &free, &interval(), &[c(3.0), Complex64::new(0.0, 1.0)], 20, 1e-10).unwrap();
        assert!(same.values.iter().flatten().all(|v| (v - 1.0).norm() < 1e-15));
        assert!(poly_ratio_scan(&t, &free, &interval(), &[c(1.0)], 20, 1e-10).is_err());
    }

    #[test]
    fn ratio_matches_jost() {
        let t = JacobiCoeffs::chebyshev_first_kind();
        let free = JacobiCoeffs::free();
        let mt = DiscretizedMeasure::chebyshev_first_kind(128).unwrap();
        let mu = DiscretizedMeasure::chebyshev_second_kind(128).unwrap();
        let zs: Vec<Complex64> = (0..20).map(|k| c(0.05 + 0.75 * k as f64 / 19.0)).collect();
        let r = ratio_vs_jost(&t, &mt, &free, &mu, &zs, 60).unwrap();
        assert!(r.max_deviation < 1e-6, "{}", r.max_deviation);
        let r = ratio_vs_jost(&t, &mt, &free, &mu, &[c(0.5)], 40).unwrap();
        assert!((r.jost_ratios[0].re - 0.5303300858899106).abs() < 1e-12);
    }

    #[test]
    fn free_envelope() {
        let g = GreenFunction::new(&interval(), 64).unwrap();
        let e = growth_envelope(&JacobiCoeffs::free(), &g, &[c(2.5)], 40, 80).unwrap();
        assert!((e[0].max - 4.0 / 3.0).abs() < 1e-9 && (e[0].min - 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn scaled_chebyshev_second_kind() {
        let cov = CoveringL0::new(&interval()).unwrap();
        let v = scaled_pn(&JacobiCoeffs::free(), &cov, c(0.5), 30).unwrap();
        assert!((v[30].re - 4.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn phi_is_measure_independent() {
        let legendre = JacobiCoeffs::from_rule(Side::OneSided, |n| {
            let n = n as f64;
            (2.0 * n / (4.0 * n * n - 1.0).sqrt(), 0.0)
        });
        let uniform = DiscretizedMeasure::uniform(&interval(), 128).unwrap();
        let cases = vec![
            (JacobiCoeffs::free(), DiscretizedMeasure::chebyshev_second_kind(128).unwrap()),
            (JacobiCoeffs::chebyshev_first_kind(), DiscretizedMeasure::chebyshev_first_kind(128).unwrap()),
            (legendre, uniform),
        ];
        let zs = [c(0.5), Complex64::new(0.2, 0.3), c(-0.6)];
        let r = corollary_pn_check(&cases, &zs, 64, 7).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
        assert!((r.phi[0][0].re - 0.375f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn green_ratio_trivial_and_decaying() {
        let free = JacobiCoeffs::free();
        let r = green_ratio(&free, &free, &interval(), &[1, 5, 50], c(3.0)).unwrap();
        assert!(r.values.iter().all(|v| *v == 0.0));
        let p = JacobiCoeffs::from_rule(Side::OneSided, |n| (1.0 + 0.3 * 0.8f64.powi(n as i32), 0.1 * 0.85f64.powi(n as i32)));
        let r = green_ratio(&p, &free, &interval(), &[10, 50, 100, 200], c(3.0)).unwrap();
        assert!(r.values.windows(2).all(|w| w[1] < w[0]));
        assert!(r.values[3] < 1e-3);
    }

    #[test]
    fn l2_chebyshev_and_mass_point() {
        let mt = DiscretizedMeasure::chebyshev_first_kind(128).unwrap();
        let r = l2_asymptotics(&mt, &JacobiCoeffs::chebyshev_first_kind(), &[1, 10, 100], Reconstruction::default()).unwrap();
        assert!(r.ac.iter().all(|v| *v < 1e-10), "{r:?}");
        let free = DiscretizedMeasure::chebyshev_second_kind(128).unwrap();
        let r = l2_asymptotics(&free, &JacobiCoeffs::free(), &[5, 50], Reconstruction::default()).unwrap();
        assert!(r.ac.iter().all(|v| *v < 1e-20), "{r:?}");
        let mu = DiscretizedMeasure::chebyshev_second_kind(512).unwrap().with_point_mass(2.5, 0.25).unwrap().normalized();
        let j = stieltjes_coeffs(&mu, 200).unwrap();
        let r = l2_asymptotics(&mu, &j, &[10, 50, 100], Reconstruction::default()).unwrap();
        eprintln!("{r:?}");
        assert!(r.sing.windows(2).all(|w| w[1] < w[0]));
        assert!(r.sing[2] < 1e-4);
        assert!(r.ac[2] < 1e-3);
    }
}
