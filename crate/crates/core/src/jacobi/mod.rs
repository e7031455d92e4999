//! Jacobi coefficient sequences and the operations on them: orthonormal polynomials,
//! coefficient stripping, finite-section eigenvalues and resolvent entries.
//!
//! Convention: `(J u)_n = a_n u_{n+1} + b_n u_n + a_{n-1} u_{n-1}`. One-sided sequences
//! start at `n = 1`; two-sided ones may start anywhere.

mod coeffs;
mod measure;
pub(crate) mod resolvent;

pub use coeffs::{JacobiCoeffs, Side};
pub use measure::{m_function, stieltjes_coeffs, BandSamples, DiscretizedMeasure, PointMass};
pub(crate) use measure::lanczos;
pub use resolvent::{greens_entry, resolvent_window, truncation_eigs, weyl_solution, sturm_count};

use num_complex::Complex64;

use crate::error::Result;

/// A complex number stored as `exp(ln_abs) * phase` with `|phase| = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScaled {
    pub ln_abs: f64,
    pub phase: Complex64,
}

impl LogScaled {
    pub fn from_complex(z: Complex64) -> Self {
        let r = z.norm();
        if r == 0.0 {
            LogScaled { ln_abs: f64::NEG_INFINITY, phase: Complex64::new(1.0, 0.0) }
        } else {
            LogScaled { ln_abs: r.ln(), phase: z / r }
        }
    }

    pub fn to_complex(self) -> Complex64 {
        let r = self.ln_abs.exp();
        let scale = |c: f64| if c == 0.0 { 0.0 } else { c * r };
        Complex64::new(scale(self.phase.re), scale(self.phase.im))
    }

    /// `self / other` as an ordinary complex number.
    pub fn ratio(self, other: LogScaled) -> Complex64 {
        self.phase / other.phase * (self.ln_abs - other.ln_abs).exp()
    }
}

/// `P_n(x)` by the forward recurrence. For `n > 50` the log-scaled recurrence is used.
pub fn orthonormal_eval(j: &JacobiCoeffs, n: usize, x: Complex64) -> Result<Complex64> {
    if n > 50 {
        return Ok(orthonormal_eval_log(j, n, x)?.to_complex());
    }
    let (a, b) = j.prefix(n)?;
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let a_prev = if k == 0 { 0.0 } else { a[k - 1] };
        let next = ((x - b[k]) * cur - a_prev * prev) / a[k];
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `P_n(x)` as log-magnitude and phase.
pub fn orthonormal_eval_log(j: &JacobiCoeffs, n: usize, x: Complex64) -> Result<LogScaled> {
    Ok(*orthonormal_seq_log(j, n, x)?.last().unwrap())
}

/// `P_0(x), ..., P_n(x)` in log-scaled form.
pub fn orthonormal_seq_log(j: &JacobiCoeffs, n: usize, x: Complex64) -> Result<Vec<LogScaled>> {
    let (a, b) = j.prefix(n)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(LogScaled { ln_abs: 0.0, phase: Complex64::new(1.0, 0.0) });
    // (prev, cur) are P_{k-1}, P_k divided by exp(shift).
    let mut shift = 0.0;
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let a_prev = if k == 0 { 0.0 } else { a[k - 1] };
        let next = ((x - b[k]) * cur - a_prev * prev) / a[k];
        prev = cur;
        cur = next;
        let s = cur.norm().max(prev.norm());
        if s > 0.0 && !(1e-100..=1e100).contains(&s) {
            prev /= s;
            cur /= s;
            shift += s.ln();
        }
        let mut v = LogScaled::from_complex(cur);
        v.ln_abs += shift;
        out.push(v);
    }
    Ok(out)
}

/// Real-valued `P_0(x), ..., P_n(x)` by the plain recurrence.
pub fn orthonormal_seq_real(a: &[f64], b: &[f64], n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let a_prev = if k == 0 { 0.0 } else { a[k - 1] };
        let next = ((x - b[k]) * cur - a_prev * prev) / a[k];
        prev = cur;
        cur = next;
        out.push(cur);
    }
    out
}

/// `J|_m`: the coefficients `{a_{n+m}, b_{n+m}}_{n≥1}`.
pub fn strip(j: &JacobiCoeffs, m: usize) -> JacobiCoeffs {
    j.strip(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_polynomials() {
        let free = JacobiCoeffs::free();
        let x = Complex64::new(2.5, 0.0);
        assert!((orthonormal_eval(&free, 0, x).unwrap().re - 1.0).abs() < 1e-15);
        assert!((orthonormal_eval(&free, 1, x).unwrap().re - 2.5).abs() < 1e-15);
        assert!((orthonormal_eval(&free, 2, x).unwrap().re - 5.25).abs() < 1e-14);
        let cheb_t = JacobiCoeffs::chebyshev_first_kind();
        let p1 = orthonormal_eval(&cheb_t, 1, x).unwrap();
        assert!((p1.re - 2.5 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_closed_forms() {
        // P_n = sqrt(2) T_n(x/2) and U_n(x/2) for the two Chebyshev matrices.
        let z: f64 = 0.5;
        let x = z + 1.0 / z;
        for n in [5usize, 30, 60, 200] {
            let t = orthonormal_eval_log(&JacobiCoeffs::chebyshev_first_kind(), n, x.into()).unwrap();
            let expect = (2f64.sqrt() * 0.5 * (z.powi(-(n as i32)) + z.powi(n as i32))).ln();
            assert!((t.ln_abs - expect).abs() < 1e-12, "n = {n}");
            let u = orthonormal_eval_log(&JacobiCoeffs::free(), n, x.into()).unwrap();
            let expect = ((z.powi(-(n as i32) - 1) - z.powi(n as i32 + 1)) / (1.0 / z - z)).ln();
            assert!((u.ln_abs - expect).abs() < 1e-12);
        }
        // Log-scaled values survive where plain ones overflow.
        let big = orthonormal_eval_log(&JacobiCoeffs::free(), 5000, x.into()).unwrap();
        assert!((big.ln_abs - 5001.0 * 2f64.ln() - (2.0f64 / 3.0).ln()).abs() < 1e-9);
        assert!(orthonormal_eval(&JacobiCoeffs::free(), 5000, x.into()).unwrap().re.is_infinite());
    }

    #[test]
    fn leading_coefficient() {
        // The coefficient of x^n is 1 / (a_1 ... a_n): compare P_n(x) / x^n at large x.
        let j = JacobiCoeffs::from_rule(Side::OneSided, |n| (1.0 + 0.5 / n as f64, 0.1 * n as f64));
        let n = 8;
        let x = 1e7;
        let p = orthonormal_eval(&j, n, x.into()).unwrap().re / x.powi(n as i32);
        let lead: f64 = (1..=n).map(|k| 1.0 / j.a(k as i64)).product();
        assert!((p / lead - 1.0).abs() < 1e-4);
    }

    #[test]
    fn stripping() {
        let cheb = JacobiCoeffs::chebyshev_first_kind();
        let s = strip(&cheb, 1);
        for n in 1..20 {
            assert_eq!(s.a(n), 1.0);
            assert_eq!(s.b(n), 0.0);
        }
        let j = JacobiCoeffs::from_rule(Side::OneSided, |n| (1.0 + 1.0 / n as f64, (n as f64).sin()));
        let twice = strip(&strip(&j, 1), 1);
        let once = strip(&j, 2);
        for n in 1..30 {
            assert_eq!(twice.a(n), once.a(n));
            assert_eq!(twice.b(n), once.b(n));
        }
        let free = strip(&JacobiCoeffs::free(), 5);
        assert_eq!(free.a(1), 1.0);
    }

    #[test]
    fn log_scaled_ratio() {
        let a = LogScaled::from_complex(Complex64::new(3.0, 4.0));
        let b = LogScaled::from_complex(Complex64::new(0.0, 2.0));
        let r = a.ratio(b);
        assert!((r - Complex64::new(3.0, 4.0) / Complex64::new(0.0, 2.0)).norm() < 1e-15);
    }
}
