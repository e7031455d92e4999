use num_complex::Complex64;

use super::{JacobiCoeffs, Side};
use crate::error::{Error, Result};

const MAX_TRUNCATION: i64 = 1 << 20;

/// `[(T - x)^{-1}]_{nm}` for the finite tridiagonal `T` with diagonal `b` and
/// off-diagonal `a` (`a[k]` couples rows `k` and `k+1`); `n`, `m` are 0-based rows.
pub fn resolvent_window(a: &[f64], b: &[f64], n: usize, m: usize, x: Complex64) -> Complex64 {
    let len = b.len();
    let (n, m) = if n <= m { (n, m) } else { (m, n) };
    let tiny = Complex64::new(1e-300, 0.0);
    let fix = |d: Complex64| if d.norm() == 0.0 { tiny } else { d };
    let mut fwd = vec![Complex64::new(0.0, 0.0); m + 1];
    fwd[0] = fix(b[0] - x);
    for k in 1..=m {
        fwd[k] = fix(b[k] - x - a[k - 1] * a[k - 1] / fwd[k - 1]);
    }
    let mut bwd = fix(b[len - 1] - x);
    for k in (m..len - 1).rev() {
        bwd = fix(b[k] - x - a[k] * a[k] / bwd);
    }
    let mut g = 1.0 / (fwd[m] + bwd - (b[m] - x));
    for k in (n..m).rev() {
        g *= -a[k] / fwd[k];
    }
    g
}

/// `G_{nm}(x) = -<δ_n, (J - x)^{-1} δ_m>`, on a truncation doubled until the entry
/// changes by less than `1e-12` (relative).
pub fn greens_entry(j: &JacobiCoeffs, n: i64, m: i64, x: Complex64) -> Result<Complex64> {
    if x.re.is_nan() || x.im.is_nan() {
        return Err(Error::InvalidInput("NaN spectral parameter".into()));
    }
    let (avail_lo, avail_hi) = j.range();
    let (lo_idx, hi_idx) = (n.min(m), n.max(m));
    if avail_lo.is_some_and(|l| lo_idx < l) || avail_hi.is_some_and(|h| hi_idx > h) {
        return Err(Error::InvalidInput(format!("site indices ({n}, {m}) outside coefficient range")));
    }
    let mut pad = 32i64;
    let mut prev: Option<Complex64> = None;
    loop {
        let mut lo = match j.side() {
            Side::OneSided => 1,
            Side::TwoSided => lo_idx - pad,
        };
        let mut hi = hi_idx + pad;
        if let Some(l) = avail_lo {
            lo = lo.max(l);
        }
        if let Some(h) = avail_hi {
            hi = hi.min(h);
        }
        let (a, b) = j.window(lo, hi)?;
        let val = -resolvent_window(&a, &b, (n - lo) as usize, (m - lo) as usize, x);
        if !(val.re.is_finite() && val.im.is_finite()) {
            return Err(Error::NotConverged(format!("resolvent entry at x = {x} is not finite (x on the spectrum?)")));
        }
        let clipped = avail_lo.is_some_and(|l| j.side() == Side::TwoSided && lo == l) || avail_hi.is_some_and(|h| hi == h);
        if let Some(p) = prev {
            if (val - p).norm() <= 1e-12 * val.norm() {
                return Ok(val);
            }
        }
        if clipped && prev.is_some() {
            return Err(Error::NotConverged(format!(
                "resolvent entry ({n}, {m}) at x = {x} not converged within the available coefficients; supply a longer table"
            )));
        }
        if pad > MAX_TRUNCATION {
            return Err(Error::NotConverged(format!(
                "resolvent entry ({n}, {m}) at x = {x} not converged at truncation {pad}; move x away from the spectrum"
            )));
        }
        prev = Some(val);
        pad *= 2;
    }
}

/// Weyl solution `W_n(x) = G_{n1}(x)`; `W_1 = -m`.
pub fn weyl_solution(j: &JacobiCoeffs, n: i64, x: Complex64) -> Result<Complex64> {
    greens_entry(j, n, 1, x)
}

/// Number of eigenvalues of the tridiagonal matrix below `x`.
pub fn sturm_count(a: &[f64], b: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for k in 0..b.len() {
        let off = if k == 0 { 0.0 } else { a[k - 1] * a[k - 1] / d };
        d = b[k] - x - off;
        if d == 0.0 {
            d = -1e-300;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalues of the `n×n` truncation of a one-sided `J` inside `[lo, hi]` (either end
/// may be infinite), by Sturm-sequence bisection.
pub fn truncation_eigs(j: &JacobiCoeffs, n: usize, window: (f64, f64)) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidInput("truncation size must be at least 2".into()));
    }
    let (a, b) = j.prefix(n)?;
    Ok(tridiagonal_eigs(&a, &b, window))
}

pub(crate) fn tridiagonal_eigs(a: &[f64], b: &[f64], window: (f64, f64)) -> Vec<f64> {
    let n = b.len();
    let radius = (0..n)
        .map(|k| {
            let left = if k > 0 { a[k - 1].abs() } else { 0.0 };
            let right = if k + 1 < n { a[k].abs() } else { 0.0 };
            b[k].abs() + left + right
        })
        .fold(0.0, f64::max);
    let lo = window.0.max(-radius - 1.0);
    let hi = window.1.min(radius + 1.0);
    if lo >= hi {
        return Vec::new();
    }
    let c_lo = sturm_count(a, b, lo);
    let c_hi = sturm_count(a, b, hi);
    let tol = 4.0 * f64::EPSILON * radius.max(1.0);
    (c_lo..c_hi)
        .map(|i| {
            let (mut l, mut h) = (lo, hi);
            while h - l > tol {
                let mid = 0.5 * (l + h);
                if sturm_count(a, b, mid) > i {
                    h = mid;
                } else {
                    l = mid;
                }
            }
            0.5 * (l + h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::bisect;

    fn m_free(x: f64) -> f64 {
        (-x + (x * x - 4.0).sqrt()) / 2.0
    }

    #[test]
    fn free_green_entries() {
        let free = JacobiCoeffs::free();
        let g = greens_entry(&free, 1, 1, Complex64::new(3.0, 0.0)).unwrap();
        assert!((g.re + m_free(3.0)).abs() < 1e-12);
        assert!((g.re - 0.381_966_011_250_105_1).abs() < 1e-12);
        let x = Complex64::new(3.0, 0.5);
        let j = JacobiCoeffs::from_rule(Side::OneSided, |n| (1.0 + 0.3 * 0.8f64.powi(n as i32), 0.1 / n as f64));
        let g12 = greens_entry(&j, 1, 2, x).unwrap();
        let g21 = greens_entry(&j, 2, 1, x).unwrap();
        assert!((g12 - g21).norm() < 1e-14);
    }

    #[test]
    fn combes_thomas_decay() {
        let free = JacobiCoeffs::free();
        let x = Complex64::new(3.0, 0.0);
        let vals: Vec<f64> = (1..=20).map(|k| greens_entry(&free, 1, k, x).unwrap().norm().ln()).collect();
        let delta = -(vals[19] - vals[0]) / 19.0;
        // W_k = z^k with z = m_free-conjugate root: decay rate -log z.
        assert!((delta + (-m_free(3.0)).ln()).abs() < 1e-10);
        assert!(delta > 0.0);
    }

    #[test]
    fn weyl_solution_of_free_matrix() {
        let free = JacobiCoeffs::free();
        let z = 0.5;
        let x = Complex64::new(z + 1.0 / z, 0.0);
        assert!((weyl_solution(&free, 1, x).unwrap().re - 0.5).abs() < 1e-13);
        assert!((weyl_solution(&free, 3, x).unwrap().re - 0.125).abs() < 1e-13);
        let j = JacobiCoeffs::from_rule(Side::OneSided, |n| (1.0 + 0.3 * 0.8f64.powi(n as i32), 0.2 * 0.7f64.powi(n as i32)));
        let x = Complex64::new(0.3, 2.7);
        let w: Vec<Complex64> = (1..=21).map(|n| weyl_solution(&j, n, x).unwrap()).collect();
        for n in 2..=20i64 {
            let k = (n - 1) as usize;
            let resid = x * w[k] - (j.a(n) * w[k + 1] + j.b(n) * w[k] + j.a(n - 1) * w[k - 1]);
            assert!(resid.norm() < 1e-10, "n = {n}: {resid}");
        }
    }

    #[test]
    fn truncation_eigenvalues() {
        let free = JacobiCoeffs::free();
        assert!(truncation_eigs(&free, 50, (2.1, f64::INFINITY)).unwrap().is_empty());
        let all = truncation_eigs(&free, 10, (f64::NEG_INFINITY, f64::INFINITY)).unwrap();
        for (k, e) in all.iter().enumerate() {
            let expect = 2.0 * (std::f64::consts::PI * (k as f64 + 1.0) / 11.0).cos();
            assert!(all.iter().any(|v| (v - expect).abs() < 1e-13), "{e}");
        }
        // b_1 = 3: eigenvalue solves 1 + 3 m_free(x) ... i.e. b_1 - x - m_free(x) = 0.
        let pert = JacobiCoeffs::from_rule(Side::OneSided, |n| (1.0, if n == 1 { 3.0 } else { 0.0 }));
        let eig = truncation_eigs(&pert, 200, (2.0, f64::INFINITY)).unwrap();
        let exact = bisect(2.01, 10.0, |x| 3.0 - x - m_free(x), 1e-15).unwrap();
        assert_eq!(eig.len(), 1);
        assert!((eig[0] - exact).abs() < 1e-12);
        assert!((exact - 10.0 / 3.0).abs() < 1e-12);
    }
}
