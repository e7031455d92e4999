//! Dense real polynomials of small degree (coefficients in ascending order).

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Poly { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Poly { coeffs: vec![c] }
    }

    /// Monic polynomial with the given real roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut p = Poly::constant(1.0);
        for &r in roots {
            p = p.mul(&Poly::new(vec![-r, 1.0]));
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::constant(0.0);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(0.0)
                        - other.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Drop the top `k` coefficients (used after exact leading cancellation).
    pub fn truncate_top(&self, k: usize) -> Poly {
        let n = self.coeffs.len().saturating_sub(k).max(1);
        Poly::new(self.coeffs[..n].to_vec())
    }

    /// Quotient by `(x - r)`, discarding the remainder.
    pub fn deflate(&self, r: f64) -> Poly {
        let n = self.coeffs.len();
        if n <= 1 {
            return Poly::constant(0.0);
        }
        let mut q = vec![0.0; n - 1];
        let mut carry = 0.0;
        for k in (1..n).rev() {
            carry = self.coeffs[k] + carry * r;
            q[k - 1] = carry;
        }
        Poly::new(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_product_and_deflation() {
        let p = Poly::from_roots(&[1.0, -2.0, 0.5]);
        assert_eq!(p.degree(), 3);
        for r in [1.0, -2.0, 0.5] {
            assert!(p.eval(r).abs() < 1e-14);
        }
        let q = p.deflate(-2.0);
        assert_eq!(q, Poly::from_roots(&[1.0, 0.5]));
    }

    #[test]
    fn derivative_of_cubic() {
        let p = Poly::new(vec![1.0, 2.0, 0.0, 4.0]);
        assert_eq!(p.derivative().coeffs, vec![2.0, 0.0, 12.0]);
    }
}
