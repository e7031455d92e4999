//! Left shifts of Szegő-class Jacobi matrices and the torus orbit they approach.
//!
//! The torus point is found without characters: fit a divisor to a window of the
//! deeply stripped coefficients, then pull it back by inverse torus shifts.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gapset::{FiniteGapSet, GreenFunction};
use crate::jacobi::{truncation_eigs, DiscretizedMeasure, JacobiCoeffs};
use crate::jacobi::resolvent::tridiagonal_eigs;
use crate::quadrature::golden_section;
use crate::szego::{relative_entropy, Extended};
use crate::torus::{Divisor, DivisorPoint, TorusPoint};

/// `δa_n = amp_a · rate_a^n`, `δb_n = amp_b · rate_b^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpPerturbation {
    pub amp_a: f64,
    pub rate_a: f64,
    #[serde(default)]
    pub amp_b: f64,
    #[serde(default)]
    pub rate_b: f64,
}

impl ExpPerturbation {
    pub fn at(&self, n: i64) -> (f64, f64) {
        (self.amp_a * self.rate_a.powi(n as i32), self.amp_b * self.rate_b.powi(n as i32))
    }

    /// `Σ_{n≥1} |δa_n| + |δb_n|`.
    pub fn l1_sum(&self) -> f64 {
        let g = |amp: f64, r: f64| if amp == 0.0 { 0.0 } else { amp.abs() * r.abs() / (1.0 - r.abs()) };
        g(self.amp_a, self.rate_a) + g(self.amp_b, self.rate_b)
    }
}

/// `a_n = a_n' + δa_n`, `b_n = b_n' + δb_n` for `n = 1..=n_max`, `J'` the right half of `t`.
pub fn perturb_torus<F: Fn(i64) -> (f64, f64)>(t: &TorusPoint, n_max: usize, decay: F) -> Result<JacobiCoeffs> {
    perturb_coeffs(&t.right_coeffs(n_max)?, n_max, decay)
}

/// The first `n_max` coefficients of `base` plus `decay(n)`, as a one-sided table.
pub fn perturb_coeffs<F: Fn(i64) -> (f64, f64)>(base: &JacobiCoeffs, n_max: usize, decay: F) -> Result<JacobiCoeffs> {
    let (a0, b0) = base.prefix(n_max)?;
    let mut a = Vec::with_capacity(n_max);
    let mut b = Vec::with_capacity(n_max);
    for (k, (ak, bk)) in a0.into_iter().zip(b0).enumerate() {
        let n = k as i64 + 1;
        let (da, db) = decay(n);
        let an = ak + da;
        if !(an > 0.0) {
            return Err(Error::InvalidInput(format!("perturbed a_{n} = {an} is not positive")));
        }
        a.push(an);
        b.push(bk + db);
    }
    JacobiCoeffs::from_table(a, b)
}

/// Angle coordinates on the doubled gaps: `x = mid + half cos φ`, `ε = sign(sin φ)`.
pub fn divisor_from_angles(set: &FiniteGapSet, phis: &[f64]) -> Divisor {
    let points = set
        .gaps()
        .iter()
        .zip(phis)
        .map(|(&(a, b), &phi)| {
            let x = (0.5 * (a + b) + 0.5 * (b - a) * phi.cos()).clamp(a, b);
            DivisorPoint { x, eps: if phi.sin() >= 0.0 { 1 } else { -1 } }
        })
        .collect();
    Divisor { points }
}

pub fn angles_from_divisor(set: &FiniteGapSet, d: &Divisor) -> Vec<f64> {
    set.gaps()
        .iter()
        .zip(&d.points)
        .map(|(&(a, b), p)| {
            let c = ((p.x - 0.5 * (a + b)) / (0.5 * (b - a))).clamp(-1.0, 1.0);
            p.eps as f64 * c.acos()
        })
        .collect()
}

/// Largest per-gap distance along the doubled gap (a circle of length `2 (β_j - α_j)`).
pub fn divisor_distance(set: &FiniteGapSet, d1: &Divisor, d2: &Divisor) -> f64 {
    set.gaps()
        .iter()
        .zip(d1.points.iter().zip(&d2.points))
        .map(|(&(a, b), (p, q))| {
            let endpoint = |x: f64| x == a || x == b;
            if p.eps == q.eps || endpoint(p.x) || endpoint(q.x) {
                let direct = (p.x - q.x).abs();
                if p.eps == q.eps {
                    direct
                } else {
                    direct.min((p.x - a) + (q.x - a)).min((b - p.x) + (b - q.x))
                }
            } else {
                ((p.x - a) + (q.x - a)).min((b - p.x) + (b - q.x))
            }
        })
        .fold(0.0, f64::max)
}

/// Settings for [`identify_torus_point`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub depth: usize,
    pub window: usize,
    /// Allowed divisor distance between the pulled-back fits at depths `m` and `2m`.
    pub stabilization_tol: f64,
    pub quad_order: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { depth: 40, window: 12, stabilization_tol: 1e-3, quad_order: 128 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitRecord {
    pub depth: usize,
    pub fitted: Divisor,
    pub pulled_back: Divisor,
    pub misfit: f64,
}

/// The identified torus point and the per-depth fits behind it.
#[derive(Debug, Clone)]
pub struct Identification {
    pub point: TorusPoint,
    pub history: Vec<FitRecord>,
}

fn window_misfit(green: &Arc<GreenFunction>, d: &Divisor, ta: &[f64], tb: &[f64], order: usize) -> f64 {
    let Ok(mut t) = TorusPoint::new(green.clone(), d, order) else {
        return f64::INFINITY;
    };
    let mut total = 0.0;
    for k in 0..ta.len() {
        let Ok(next) = t.shift() else {
            return f64::INFINITY;
        };
        t = next;
        total += (ta[k] - t.a0_sq().sqrt()).abs() + (tb[k] - t.b0()).abs();
    }
    total
}

/// Divisor whose `J⁺` best matches `(ta, tb)` in the ℓ¹ window misfit.
fn fit_divisor(
    green: &Arc<GreenFunction>,
    ta: &[f64],
    tb: &[f64],
    guess: &[f64],
    order: usize,
) -> (Vec<f64>, f64) {
    let set = green.set();
    let ell = set.num_gaps();
    let cost = |phis: &[f64]| window_misfit(green, &divisor_from_angles(set, phis), ta, tb, order);
    let mut starts = vec![guess.to_vec(), vec![PI / 2.0; ell], vec![-PI / 2.0; ell]];
    starts.dedup();
    let mut best: (Vec<f64>, f64) = (guess.to_vec(), f64::INFINITY);
    for start in starts {
        let mut phis = start;
        let mut val = cost(&phis);
        for sweep in 0..40 {
            let before = val;
            for j in 0..ell {
                let mut trial = phis.clone();
                let mut eval = |p: f64| {
                    trial[j] = p;
                    cost(&trial)
                };
                let (lo, hi) = if sweep == 0 {
                    let grid = 96;
                    let step = 2.0 * PI / grid as f64;
                    let (k, _) = (0..grid)
                        .map(|k| (k, eval(-PI + step * k as f64)))
                        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
                    let c = -PI + step * k as f64;
                    (c - step, c + step)
                } else {
                    (phis[j] - 0.02, phis[j] + 0.02)
                };
                let (p, v) = golden_section(lo, hi, &mut eval, 1e-13);
                if v < val {
                    phis[j] = p;
                    val = v;
                }
            }
            if before - val <= 1e-15 * before.max(1e-300) && sweep > 0 {
                break;
            }
        }
        if val < best.1 {
            best = (phis, val);
        }
    }
    best
}

/// Angle guess from eigenvalues of a truncation of `J|_m` lying in the gaps.
fn eigen_guess(j: &JacobiCoeffs, set: &FiniteGapSet, m: usize) -> Vec<f64> {
    let avail = j.len().map(|n| n.saturating_sub(m)).unwrap_or(400).min(400);
    let stripped = j.strip(m);
    set.gaps()
        .iter()
        .map(|&(a, b)| {
            let eig = if avail >= 2 { truncation_eigs(&stripped, avail, (a, b)).unwrap_or_default() } else { Vec::new() };
            match eig.first() {
                Some(&x) => {
                    let c = ((x - 0.5 * (a + b)) / (0.5 * (b - a))).clamp(-1.0, 1.0);
                    c.acos()
                }
                None => PI / 2.0,
            }
        })
        .collect()
}

/// Identify the torus point approached by the left shifts of `j`: fit at depths `m` and `2m`,
/// pull both back by inverse shifts, and require them to agree.
pub fn identify_torus_point(j: &JacobiCoeffs, green: &Arc<GreenFunction>, opts: &FitOptions) -> Result<Identification> {
    let set = green.set();
    let (m, w) = (opts.depth, opts.window);
    if w == 0 {
        return Err(Error::InvalidInput("fit window must be positive".into()));
    }
    if let Some(n) = j.len() {
        if n < 2 * m + w {
            return Err(Error::InvalidInput(format!("need at least {} coefficients, have {n}", 2 * m + w)));
        }
    }
    if set.num_gaps() == 0 {
        let point = TorusPoint::new(green.clone(), &Divisor::empty(), opts.quad_order)?;
        return Ok(Identification { point, history: Vec::new() });
    }
    let mut history = Vec::new();
    let mut points = Vec::new();
    for depth in [m, 2 * m] {
        let (ta, tb) = j.window(depth as i64 + 1, (depth + w) as i64)?;
        let guess = eigen_guess(j, set, depth);
        let (phis, misfit) = fit_divisor(green, &ta, &tb, &guess, opts.quad_order);
        let fitted = divisor_from_angles(set, &phis).normalized(set)?;
        let at_depth = TorusPoint::new(green.clone(), &fitted, opts.quad_order)?;
        let pulled = at_depth.shift_by(-(depth as i64))?;
        history.push(FitRecord { depth, fitted, pulled_back: pulled.divisor().clone(), misfit });
        points.push(pulled);
    }
    let dist = divisor_distance(set, points[0].divisor(), points[1].divisor());
    if !(dist <= opts.stabilization_tol) {
        return Err(Error::InsufficientDepth(format!(
            "fits at depths {m} and {} differ by {dist:.3e} (tolerance {:.1e}); increase the depth",
            2 * m,
            opts.stabilization_tol
        )));
    }
    Ok(Identification { point: points.pop().unwrap(), history })
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitReport {
    pub identified: Divisor,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub a_ref: Vec<f64>,
    pub b_ref: Vec<f64>,
    /// `e_n = |a_n - a_n'| + |b_n - b_n'|`.
    pub error_seq: Vec<f64>,
    /// `∏_{k≤n} a_k / a_k'`.
    pub partial_products: Vec<f64>,
    /// `Σ_{k≤n} (b_k - b_k')`.
    pub partial_sums: Vec<f64>,
    /// `Σ (a - a')^2 + (b - b')^2`, reported only.
    pub ell2_sum: f64,
    pub fit_history: Vec<FitRecord>,
}

impl OrbitReport {
    /// `sup_{k≥n} e_k` for every `n`.
    pub fn error_envelope(&self) -> Vec<f64> {
        let mut out = self.error_seq.clone();
        for k in (0..out.len().saturating_sub(1)).rev() {
            out[k] = out[k].max(out[k + 1]);
        }
        out
    }
}

/// Compare `j` with the reference torus point on `n = 1..=n_max`.
pub fn orbit_error(j: &JacobiCoeffs, reference: &TorusPoint, n_max: usize) -> Result<OrbitReport> {
    let (a, b) = j.prefix(n_max)?;
    let r = reference.right_coeffs(n_max)?;
    let (a_ref, b_ref) = r.prefix(n_max)?;
    let mut error_seq = Vec::with_capacity(n_max);
    let mut partial_products = Vec::with_capacity(n_max);
    let mut partial_sums = Vec::with_capacity(n_max);
    let (mut log_prod, mut sum, mut ell2) = (0.0, 0.0, 0.0);
    for k in 0..n_max {
        let (da, db) = (a[k] - a_ref[k], b[k] - b_ref[k]);
        error_seq.push(da.abs() + db.abs());
        log_prod += (a[k] / a_ref[k]).ln();
        partial_products.push(log_prod.exp());
        sum += db;
        partial_sums.push(sum);
        ell2 += da * da + db * db;
    }
    Ok(OrbitReport {
        identified: reference.divisor().clone(),
        a,
        b,
        a_ref,
        b_ref,
        error_seq,
        partial_products,
        partial_sums,
        ell2_sum: ell2,
        fit_history: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterlacingReport {
    pub holds: bool,
    /// Eigenvalues of the truncation of `J` per gap.
    pub counts_full: Vec<usize>,
    /// Eigenvalues of the truncation of `J|_m` per gap.
    pub counts_stripped: Vec<usize>,
    pub max_between: usize,
}

/// Between consecutive gap eigenvalues of `J_N` there is at most one gap eigenvalue of
/// the principal block on rows `m+1..=N`. Eigenvalues of the two matrices closer than
/// `1e-9` (relative) count as shared, not as lying between.
pub fn interlacing_check(j: &JacobiCoeffs, m: usize, green: &GreenFunction, n: usize) -> Result<InterlacingReport> {
    if m == 0 || m >= n {
        return Err(Error::InvalidInput(format!("need 0 < m < N, got m = {m}, N = {n}")));
    }
    let (a, b) = j.prefix(n)?;
    let mut counts_full = Vec::new();
    let mut counts_stripped = Vec::new();
    let mut max_between = 0;
    for &(lo, hi) in green.set().gaps() {
        let full = tridiagonal_eigs(&a, &b, (lo, hi));
        let sub = tridiagonal_eigs(&a[m..], &b[m..], (lo, hi));
        let tol = 1e-9 * (hi - lo).abs().max(1.0);
        for pair in full.windows(2) {
            let c = sub.iter().filter(|&&x| x > pair[0] + tol && x < pair[1] - tol).count();
            max_between = max_between.max(c);
        }
        counts_full.push(full.len());
        counts_stripped.push(sub.len());
    }
    Ok(InterlacingReport { holds: max_between <= 1, counts_full, counts_stripped, max_between })
}

/// Spectral measure of `J|_m`, reconstructed from the coefficients: boundary values of
/// `m(t + i0)` by a backward continued fraction of length `depth` closed by the
/// background torus point shifted `m + depth` times; point masses from truncation
/// eigenvalues refined on `1/m`.
pub fn stripped_measure(
    j: &JacobiCoeffs,
    m: usize,
    background: &TorusPoint,
    depth: usize,
    order: usize,
) -> Result<DiscretizedMeasure> {
    let set = background.set().clone();
    let (a, b) = j.window(m as i64 + 1, (m + depth) as i64)?;
    let tail = background.shift_by((m + depth) as i64)?;
    let m_fn = |x: Complex64, tail_val: Complex64| {
        let mut v = tail_val;
        for k in (0..depth).rev() {
            v = 1.0 / (b[k] - x - a[k] * a[k] * v);
        }
        v
    };
    let mut density = Vec::new();
    for (l, r) in set.bands() {
        let nodes = crate::gapset::AngleNodes::new(l, r, order);
        density.push(
            nodes
                .t
                .iter()
                .map(|&t| (m_fn(Complex64::new(t, 0.0), tail.m_boundary(t).0).im / PI).max(0.0))
                .collect::<Vec<f64>>(),
        );
    }
    let mut mu = DiscretizedMeasure::from_samples(&set, order, density, None)?;
    let inv_m = |x: f64| {
        let z = Complex64::new(x, 0.0);
        (1.0 / m_fn(z, tail.m_plus(z))).re
    };
    let mut windows: Vec<(f64, f64)> = set.gaps().to_vec();
    let reach = 2.0 * (a.iter().fold(0.0f64, |s, v| s.max(*v)) + b.iter().fold(0.0f64, |s, v| s.max(v.abs()))) + 1.0;
    windows.push((set.beta(), set.beta().max(0.0) + reach));
    windows.push((set.alpha().min(0.0) - reach, set.alpha()));
    for (lo, hi) in windows {
        let cands = tridiagonal_eigs(&a, &b, (lo, hi));
        for c in cands {
            if let Some((x, w)) = refine_mass(&inv_m, c, lo, hi) {
                if !mu.point_masses().iter().any(|p| (p.x - x).abs() < 1e-9) {
                    mu = mu.with_point_mass(x, w)?;
                }
            }
        }
    }
    Ok(mu)
}

/// Zero of `F = 1/m` near `c` with `F' < 0`; the mass is `-1 / F'`.
fn refine_mass<F: Fn(f64) -> f64>(f: &F, c: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let scale = (hi - lo).abs().min(1.0);
    let mut delta = 1e-8 * scale;
    while delta < 1e-2 * scale {
        let (l, r) = ((c - delta).max(lo + 1e-12), (c + delta).min(hi - 1e-12));
        let (fl, fr) = (f(l), f(r));
        if fl.is_finite() && fr.is_finite() && fl > 0.0 && fr < 0.0 {
            let x = crate::quadrature::bisect(l, r, f, 1e-15 * c.abs().max(1.0)).ok()?;
            let h = 1e-3 * scale.min((x - lo).min(hi - x));
            let diff = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
            let d = (4.0 * diff(0.5 * h) - diff(h)) / 3.0;
            if d < 0.0 && f(x).abs() < 1e-6 {
                return Some((x, -1.0 / d));
            }
            return None;
        }
        delta *= 10.0;
    }
    None
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyEntry {
    pub m: usize,
    pub entropy: Extended,
    pub mass_error: f64,
}

/// `S(dμ_m)` for `m = 0..=n_steps`.
pub fn entropy_along_stripping(
    j: &JacobiCoeffs,
    background: &TorusPoint,
    n_steps: usize,
    depth: usize,
    order: usize,
) -> Result<Vec<EntropyEntry>> {
    let green = background.green().clone();
    (0..=n_steps)
        .map(|m| {
            let mu = stripped_measure(j, m, background, depth, order)?;
            let mass_error = (mu.total_mass() - 1.0).abs();
            Ok(EntropyEntry { m, entropy: relative_entropy(&mu, &green)?, mass_error })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gapset::DEFAULT_QUAD_ORDER;

    fn green(set: FiniteGapSet) -> Arc<GreenFunction> {
        Arc::new(GreenFunction::new(&set, DEFAULT_QUAD_ORDER).unwrap())
    }

    #[test]
    fn exp_perturbation_arithmetic() {
        let g = green(FiniteGapSet::interval(-2.0, 2.0).unwrap());
        let free = TorusPoint::new(g, &Divisor::empty(), 64).unwrap();
        let p = ExpPerturbation { amp_a: 0.3, rate_a: 0.8, amp_b: 0.0, rate_b: 0.0 };
        let j = perturb_torus(&free, 50, |n| p.at(n)).unwrap();
        assert!((j.a(1) - 1.24).abs() < 1e-15);
        assert!((p.l1_sum() - 1.2).abs() < 1e-15);
        let same = perturb_torus(&free, 10, |_| (0.0, 0.0)).unwrap();
        assert_eq!(same.a(3), 1.0);
        assert!(perturb_torus(&free, 10, |_| (-2.0, 0.0)).is_err());
    }

    #[test]
    fn angles_round_trip_and_distance() {
        let set = FiniteGapSet::new(-2.0, 2.5, vec![(0.3, 1.1)]).unwrap();
        let d = Divisor::new(vec![(0.5, -1)]);
        let phis = angles_from_divisor(&set, &d);
        let back = divisor_from_angles(&set, &phis);
        assert!((back.points[0].x - 0.5).abs() < 1e-14 && back.points[0].eps == -1);
        let e = Divisor::new(vec![(0.5, 1)]);
        assert!((divisor_distance(&set, &d, &e) - 0.4).abs() < 1e-14);
        let f = Divisor::new(vec![(1.0, 1)]);
        assert!((divisor_distance(&set, &d, &f) - 0.7).abs() < 1e-14);
        assert!((divisor_distance(&set, &e, &f) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_first_kind_orbit() {
        let g = green(FiniteGapSet::interval(-2.0, 2.0).unwrap());
        let free = TorusPoint::new(g.clone(), &Divisor::empty(), 64).unwrap();
        let j = JacobiCoeffs::chebyshev_first_kind();
        let id = identify_torus_point(&j, &g, &FitOptions::default()).unwrap();
        assert!(id.point.divisor().points.is_empty());
        let rep = orbit_error(&j, &free, 50).unwrap();
        assert!((rep.error_seq[0] - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!(rep.error_seq[1..].iter().all(|&e| e == 0.0));
        assert!((rep.partial_products[49] - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(rep.partial_sums[49], 0.0);
    }

    #[test]
    fn identify_exact_torus_member() {
        let g = green(FiniteGapSet::new(-2.0, 2.5, vec![(0.3, 1.1)]).unwrap());
        let gen = TorusPoint::new(g.clone(), &Divisor::new(vec![(0.55, -1)]), 128).unwrap();
        let j = gen.right_coeffs(120).unwrap();
        let opts = FitOptions { depth: 20, window: 12, ..FitOptions::default() };
        let id = identify_torus_point(&j, &g, &opts).unwrap();
        assert!(divisor_distance(g.set(), id.point.divisor(), gen.divisor()) < 1e-8);
    }

    #[test]
    fn interlacing_on_free_and_rank_one() {
        let g = green(FiniteGapSet::new(-2.0, 2.0, vec![(-0.5, 0.5)]).unwrap());
        let free = JacobiCoeffs::free();
        let rep = interlacing_check(&free, 3, &g, 200).unwrap();
        assert!(rep.holds);
        let p2 = JacobiCoeffs::periodic(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        let g2 = green(FiniteGapSet::new(-3.0, 3.0, vec![(-1.0, 1.0)]).unwrap());
        let rep = interlacing_check(&p2, 1, &g2, 201).unwrap();
        assert!(rep.holds);
    }

    #[test]
    fn chebyshev_first_kind_entropy_after_one_strip() {
        let g = green(FiniteGapSet::interval(-2.0, 2.0).unwrap());
        let free = TorusPoint::new(g.clone(), &Divisor::empty(), 128).unwrap();
        let j = JacobiCoeffs::chebyshev_first_kind();
        let s = entropy_along_stripping(&j, &free, 2, 40, 128).unwrap();
        assert!(s[0].entropy.finite().unwrap().abs() < 1e-10, "{:?}", s[0]);
        assert!((s[1].entropy.finite().unwrap() - 2f64.ln()).abs() < 1e-10);
        assert!((s[2].entropy.finite().unwrap() - 2f64.ln()).abs() < 1e-10);
        assert!(s.iter().all(|e| e.mass_error < 1e-10));
    }

    #[test]
    fn reconstruction_finds_point_mass() {
        // b_1 = 3 on the free matrix: one eigenvalue at 10/3 with weight 8/9.
        let g = green(FiniteGapSet::interval(-2.0, 2.0).unwrap());
        let free = TorusPoint::new(g, &Divisor::empty(), 128).unwrap();
        let j = JacobiCoeffs::from_rule(crate::jacobi::Side::OneSided, |n| (1.0, if n == 1 { 3.0 } else { 0.0 }));
        let mu = stripped_measure(&j, 0, &free, 40, 128).unwrap();
        assert_eq!(mu.point_masses().len(), 1);
        assert!((mu.point_masses()[0].x - 10.0 / 3.0).abs() < 1e-10);
        assert!((mu.point_masses()[0].w - 8.0 / 9.0).abs() < 1e-9);
        assert!((mu.total_mass() - 1.0).abs() < 1e-9);
        // Stripping once gives the free measure again.
        let mu1 = stripped_measure(&j, 1, &free, 40, 128).unwrap();
        assert!(mu1.point_masses().is_empty());
    }

    #[test]
    fn perturbed_period_two_identified() {
        let set = FiniteGapSet::new(-3.0, 3.0, vec![(-1.0, 1.0)]).unwrap();
        let g = green(set.clone());
        let gen = TorusPoint::new(g.clone(), &Divisor::new(vec![(0.4, 1)]), 128).unwrap();
        let p = ExpPerturbation { amp_a: 0.3, rate_a: 0.8, amp_b: 0.0, rate_b: 0.0 };
        let j = perturb_torus(&gen, 300, |n| p.at(n)).unwrap();
        let id = identify_torus_point(&j, &g, &FitOptions::default()).unwrap();
        assert!(divisor_distance(&set, id.point.divisor(), gen.divisor()) < 1e-4);
        assert_eq!(id.history.len(), 2);
        let rep = orbit_error(&j, &id.point, 200).unwrap();
        for (n, e) in rep.error_seq.iter().enumerate() {
            assert!(*e <= 0.3 * 0.8f64.powi(n as i32 + 1) + 1e-8, "n = {}: {e}", n + 1);
        }
        assert!(rep.ell2_sum.is_finite());
    }

    #[test]
    fn shallow_fit_reports_insufficient_depth() {
        let set = FiniteGapSet::new(-3.0, 3.0, vec![(-1.0, 1.0)]).unwrap();
        let g = green(set);
        let gen = TorusPoint::new(g.clone(), &Divisor::new(vec![(0.4, 1)]), 128).unwrap();
        let j = perturb_torus(&gen, 100, |n| { let d = 0.97f64.powi(n as i32); (0.6 * (n as f64).sin() * d, 0.5 * (1.7 * n as f64).cos() * d) }).unwrap();
        let opts = FitOptions { depth: 2, window: 4, ..FitOptions::default() };
        let r = identify_torus_point(&j, &g, &opts);
        assert!(matches!(r, Err(Error::InsufficientDepth(_))), "{:?}", r.map(|i| i.history));
    }
}
