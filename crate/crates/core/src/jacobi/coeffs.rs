use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    OneSided,
    TwoSided,
}

type RuleFn = dyn Fn(i64) -> (f64, f64) + Send + Sync;

struct CachedRule {
    f: Box<RuleFn>,
    cache: RwLock<HashMap<i64, (f64, f64)>>,
}

impl CachedRule {
    fn get(&self, n: i64) -> (f64, f64) {
        if let Some(v) = self.cache.read().unwrap().get(&n) {
            return *v;
        }
        let v = (self.f)(n);
        self.cache.write().unwrap().insert(n, v);
        v
    }
}

#[derive(Clone)]
enum Source {
    Table { first: i64, a: Arc<Vec<f64>>, b: Arc<Vec<f64>> },
    Rule(Arc<CachedRule>),
}

/// Recurrence coefficients `{a_n, b_n}`, either a finite table or a deterministic rule
/// (evaluated lazily and cached).
#[derive(Clone)]
pub struct JacobiCoeffs {
    side: Side,
    source: Source,
    offset: i64,
}

impl fmt::Debug for JacobiCoeffs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.source {
            Source::Table { first, a, .. } => format!("table[{}..{}]", first, first + a.len() as i64),
            Source::Rule(_) => "rule".to_string(),
        };
        f.debug_struct("JacobiCoeffs")
            .field("side", &self.side)
            .field("source", &kind)
            .field("offset", &self.offset)
            .finish()
    }
}

impl JacobiCoeffs {
    pub fn from_rule<F>(side: Side, rule: F) -> Self
    where
        F: Fn(i64) -> (f64, f64) + Send + Sync + 'static,
    {
        JacobiCoeffs {
            side,
            source: Source::Rule(Arc::new(CachedRule { f: Box::new(rule), cache: RwLock::new(HashMap::new()) })),
            offset: 0,
        }
    }

    /// One-sided table: `a[k] = a_{k+1}`, `b[k] = b_{k+1}`.
    pub fn from_table(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Self::table(Side::OneSided, 1, a, b)
    }

    /// Two-sided window: `a[k] = a_{first+k}`, `b[k] = b_{first+k}`.
    pub fn two_sided_table(first: i64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Self::table(Side::TwoSided, first, a, b)
    }

    fn table(side: Side, first: i64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::InvalidInput(format!(
                "coefficient tables differ in length ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        if let Some(k) = a.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput(format!("a_{} = {} is not positive", first + k as i64, a[k])));
        }
        if let Some(k) = b.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("b_{} is not finite", first + k as i64)));
        }
        Ok(JacobiCoeffs { side, source: Source::Table { first, a: Arc::new(a), b: Arc::new(b) }, offset: 0 })
    }

    /// `a ≡ 1, b ≡ 0`.
    pub fn free() -> Self {
        Self::from_rule(Side::OneSided, |_| (1.0, 0.0))
    }

    /// `a_1 = sqrt(2)`, `a_n = 1` otherwise, `b ≡ 0`.
    pub fn chebyshev_first_kind() -> Self {
        Self::from_rule(Side::OneSided, |n| (if n == 1 { 2f64.sqrt() } else { 1.0 }, 0.0))
    }

    /// Periodic one-sided coefficients `a_n = a[(n-1) mod p]`.
    pub fn periodic(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() || a.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidInput("periodic coefficients need equal nonempty lengths and a > 0".into()));
        }
        let p = a.len() as i64;
        Ok(Self::from_rule(Side::OneSided, move |n| {
            let k = (n - 1).rem_euclid(p) as usize;
            (a[k], b[k])
        }))
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Index range available, `None` for an unbounded end.
    pub fn range(&self) -> (Option<i64>, Option<i64>) {
        match &self.source {
            Source::Table { first, a, .. } => {
                let lo = first - self.offset;
                let lo = if self.side == Side::OneSided { lo.max(1) } else { lo };
                (Some(lo), Some(first + a.len() as i64 - 1 - self.offset))
            }
            Source::Rule(_) => match self.side {
                Side::OneSided => (Some(1), None),
                Side::TwoSided => (None, None),
            },
        }
    }

    /// Number of one-sided entries available (`None` if unbounded).
    pub fn len(&self) -> Option<usize> {
        match self.range() {
            (Some(lo), Some(hi)) => Some((hi - lo + 1).max(0) as usize),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn get(&self, n: i64) -> Option<(f64, f64)> {
        if self.side == Side::OneSided && n < 1 {
            return None;
        }
        let m = n + self.offset;
        match &self.source {
            Source::Table { first, a, b } => {
                let k = m - first;
                if k < 0 || k as usize >= a.len() {
                    None
                } else {
                    Some((a[k as usize], b[k as usize]))
                }
            }
            Source::Rule(rule) => Some(rule.get(m)),
        }
    }

    /// `a_n`; panics outside the available range.
    pub fn a(&self, n: i64) -> f64 {
        self.get(n).unwrap_or_else(|| panic!("coefficient index {n} outside available range")).0
    }

    /// `b_n`; panics outside the available range.
    pub fn b(&self, n: i64) -> f64 {
        self.get(n).unwrap_or_else(|| panic!("coefficient index {n} outside available range")).1
    }

    /// `(a_lo..=a_hi, b_lo..=b_hi)`, checking availability and `a > 0`.
    pub fn window(&self, lo: i64, hi: i64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut a = Vec::with_capacity((hi - lo + 1).max(0) as usize);
        let mut b = Vec::with_capacity(a.capacity());
        for n in lo..=hi {
            let (an, bn) = self
                .get(n)
                .ok_or_else(|| Error::InvalidInput(format!("coefficient index {n} outside available range {:?}", self.range())))?;
            if !(an.is_finite() && an > 0.0) || !bn.is_finite() {
                return Err(Error::InvalidInput(format!("invalid coefficients at n = {n}: a = {an}, b = {bn}")));
            }
            a.push(an);
            b.push(bn);
        }
        Ok((a, b))
    }

    /// `a_1..a_n`, `b_1..b_n`.
    pub fn prefix(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        self.window(1, n as i64)
    }

    /// Left shift by `m`: the result has `a'_n = a_{n+m}`. One-sided sequences lose their
    /// first `m` entries.
    pub fn strip(&self, m: usize) -> JacobiCoeffs {
        let mut out = self.clone();
        out.offset += m as i64;
        out
    }

    /// Shift for two-sided sequences (`k` may be negative).
    pub fn shifted(&self, k: i64) -> JacobiCoeffs {
        let mut out = self.clone();
        out.offset += k;
        out
    }

    /// The one-sided restriction `{a_n, b_n}_{n≥1}` of a two-sided sequence.
    pub fn one_sided(&self) -> JacobiCoeffs {
        let mut out = self.clone();
        out.side = Side::OneSided;
        out
    }

    /// `(sup |a_n|, sup |b_n|)` over `lo..=hi`.
    pub fn bounds(&self, lo: i64, hi: i64) -> Result<(f64, f64)> {
        let (a, b) = self.window(lo, hi)?;
        Ok((
            a.iter().fold(0.0, |m, v| m.max(v.abs())),
            b.iter().fold(0.0, |m, v| m.max(v.abs())),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_and_ranges() {
        let j = JacobiCoeffs::from_table(vec![1.0, 2.0, 3.0], vec![0.0, 0.1, 0.2]).unwrap();
        assert_eq!(j.len(), Some(3));
        assert_eq!(j.get(2), Some((2.0, 0.1)));
        assert_eq!(j.get(0), None);
        assert_eq!(j.get(4), None);
        let s = j.strip(1);
        assert_eq!(s.len(), Some(2));
        assert_eq!(s.a(1), 2.0);
        assert!(s.prefix(3).is_err());
        assert!(JacobiCoeffs::from_table(vec![1.0, -1.0], vec![0.0, 0.0]).is_err());
        assert!(JacobiCoeffs::from_table(vec![1.0], vec![]).is_err());
    }

    #[test]
    fn two_sided_windows() {
        let j = JacobiCoeffs::two_sided_table(-2, vec![1.0, 2.0, 3.0, 4.0, 5.0], vec![0.0; 5]).unwrap();
        assert_eq!(j.range(), (Some(-2), Some(2)));
        assert_eq!(j.a(0), 3.0);
        assert_eq!(j.shifted(1).a(0), 4.0);
        assert_eq!(j.one_sided().range(), (Some(1), Some(2)));
        assert_eq!(j.one_sided().a(1), 4.0);
    }

    #[test]
    fn rules_are_deterministic_and_cached() {
        let j = JacobiCoeffs::periodic(vec![1.0, 2.0], vec![0.5, -0.5]).unwrap();
        assert_eq!(j.a(1), 1.0);
        assert_eq!(j.a(2), 2.0);
        assert_eq!(j.a(101), 1.0);
        assert_eq!(j.b(102), -0.5);
        assert_eq!(j.bounds(1, 10).unwrap(), (2.0, 0.5));
        let k = j.clone();
        assert_eq!(k.get(7), j.get(7));
    }
}
