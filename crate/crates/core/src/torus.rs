//! The isospectral torus of reflectionless two-sided Jacobi matrices with spectrum `E`.
//!
//! A point is fixed by a divisor `{(x_j, ε_j)}`, one point per closed gap. With
//! `Π(x) = ∏ (x - x_j)` the diagonal Green's function is `G(x) = -Π(x) / sqrt(R(x))`
//! and `H = -1/G = a_0^2 m⁺ - 1/m⁻`. The half-line m-functions are
//!
//! ```text
//! a_0^2 m⁺ = (P + sqrt(R)) / (2 Π),      m⁻ = (P + sqrt(R)) / (2 a_0^2 Π̃),
//! R - P^2 = -4 a_0^2 Π Π̃,
//! ```
//!
//! where `P = -x^{ℓ+1} + (Σ e_k / 2) x^ℓ + O(x^{ℓ-1})` interpolates `P(x_j) = ε_j sqrt(R(x_j))`
//! and the roots `y_j` of the monic `Π̃` form the divisor of the once-shifted point.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gapset::{AngleNodes, FiniteGapSet, GreenFunction};
use crate::jacobi::{lanczos, DiscretizedMeasure, JacobiCoeffs};
use crate::poly::Poly;
use crate::quadrature::bisect;

/// Divisor points closer than this to a gap endpoint are moved onto it.
pub const SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorPoint {
    pub x: f64,
    pub eps: i8,
}

/// One point with a sheet sign per gap. JSON: `{"points": [{"x": 1.3, "eps": 1}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Divisor {
    pub points: Vec<DivisorPoint>,
}

impl Divisor {
    pub fn new(points: Vec<(f64, i8)>) -> Self {
        Divisor { points: points.into_iter().map(|(x, eps)| DivisorPoint { x, eps }).collect() }
    }

    pub fn empty() -> Self {
        Divisor { points: Vec::new() }
    }

    /// Validate against `set`, snap near-endpoint points and normalize their signs.
    pub fn normalized(&self, set: &FiniteGapSet) -> Result<Divisor> {
        if self.points.len() != set.num_gaps() {
            return Err(Error::InvalidInput(format!(
                "divisor has {} points but the set has {} gaps",
                self.points.len(),
                set.num_gaps()
            )));
        }
        let mut out = Vec::with_capacity(self.points.len());
        for (j, (p, &(a, b))) in self.points.iter().zip(set.gaps()).enumerate() {
            if p.eps != 1 && p.eps != -1 {
                return Err(Error::InvalidInput(format!("divisor point {j}: eps must be +1 or -1")));
            }
            if !(p.x >= a - SNAP_TOL && p.x <= b + SNAP_TOL) {
                return Err(Error::InvalidInput(format!("divisor point {j} = {} outside gap [{a}, {b}]", p.x)));
            }
            let (x, eps) = if (p.x - a).abs() <= SNAP_TOL {
                (a, 1)
            } else if (p.x - b).abs() <= SNAP_TOL {
                (b, 1)
            } else {
                (p.x, p.eps)
            };
            out.push(DivisorPoint { x, eps });
        }
        Ok(Divisor { points: out })
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    /// All signs flipped (endpoint points keep `+1`).
    pub fn reflected(&self, set: &FiniteGapSet) -> Divisor {
        let points = self
            .points
            .iter()
            .zip(set.gaps())
            .map(|(p, &(a, b))| {
                let eps = if p.x == a || p.x == b { 1 } else { -p.eps };
                DivisorPoint { x: p.x, eps }
            })
            .collect();
        Divisor { points }
    }
}

/// `G(x) = -Π(x) / sqrt(R(x))` off `E`.
pub fn diag_green(d: &Divisor, set: &FiniteGapSet, x: Complex64) -> Result<Complex64> {
    if x.im == 0.0 && set.contains_interior(x.re) {
        return Err(Error::InvalidInput(format!("x = {} lies on E; use boundary_im_green", x.re)));
    }
    let pi = d.points.iter().fold(Complex64::new(1.0, 0.0), |acc, p| acc * (x - p.x));
    Ok(-pi / set.sqrt_r(x))
}

/// `Im G(t + i0)` for `t` in an open band.
pub fn boundary_im_green(d: &Divisor, set: &FiniteGapSet, t: f64) -> Result<f64> {
    if !set.contains_interior(t) || set.edges().contains(&t) {
        return Err(Error::InvalidInput(format!("t = {t} is not in an open band")));
    }
    let pi: f64 = d.points.iter().map(|p| t - p.x).product();
    Ok((-pi / set.sqrt_r_boundary(t)).im)
}

/// Herglotz data of `H = -1/G = x + A + ∫ dν(t) / (t - x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Herglotz {
    pub a_const: f64,
    /// `(x_j, σ_j)` at interior divisor points.
    pub poles: Vec<(f64, f64)>,
}

/// A point of the isospectral torus with all derived Herglotz data.
#[derive(Debug, Clone)]
pub struct TorusPoint {
    green: Arc<GreenFunction>,
    divisor: Divisor,
    quad_order: usize,
    center: f64,
    scale: f64,
    /// `P` in `u = (x - center) / scale`, divided by `scale^{ℓ+1}`.
    p_scaled: Poly,
    a0_sq: f64,
    next: Divisor,
    herglotz: Herglotz,
    mu_plus: OnceLock<DiscretizedMeasure>,
    mu_minus: OnceLock<DiscretizedMeasure>,
}

/// Serializable summary of a torus point.
#[derive(Debug, Clone, Serialize)]
pub struct TorusSummary {
    pub divisor: Divisor,
    pub a0_sq: f64,
    pub herglotz: Herglotz,
    pub shifted_divisor: Divisor,
}

impl TorusPoint {
    /// Build the torus point with divisor `d` on the set of `green`.
    pub fn new(green: Arc<GreenFunction>, d: &Divisor, quad_order: usize) -> Result<Self> {
        let set = green.set().clone();
        let divisor = d.normalized(&set)?;
        let ell = set.num_gaps();
        let center = set.hull_center();
        let scale = set.hull_halfwidth();
        let to_u = |x: f64| (x - center) / scale;
        let edges_u: Vec<f64> = set.edges().iter().map(|&e| to_u(e)).collect();
        let r_scaled = Poly::from_roots(&edges_u);
        let half_sum: f64 = edges_u.iter().sum::<f64>() / 2.0;

        // P = -u^{ℓ+1} + (Σê/2) u^ℓ + L(u), L fixed by interpolation.
        let mut head = vec![0.0; ell + 2];
        head[ell + 1] = -1.0;
        head[ell] = half_sum;
        let head = Poly::new(head);
        let mut lcoef = vec![0.0; ell];
        if ell > 0 {
            let mut v = DMatrix::<f64>::zeros(ell, ell);
            let mut rhs = DVector::<f64>::zeros(ell);
            for (j, p) in divisor.points.iter().enumerate() {
                let u = to_u(p.x);
                let sqrt_r = set.sqrt_r_real(p.x) / scale.powi(ell as i32 + 1);
                let sqrt_r = if sqrt_r.is_nan() { 0.0 } else { sqrt_r };
                let mut pow = 1.0;
                for k in 0..ell {
                    v[(j, k)] = pow;
                    pow *= u;
                }
                rhs[j] = p.eps as f64 * sqrt_r - head.eval(u);
            }
            let sol = v
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Internal("singular interpolation system for P".into()))?;
            lcoef = sol.iter().copied().collect();
        }
        let mut pc = head.coeffs.clone();
        for (k, c) in lcoef.iter().enumerate() {
            pc[k] += c;
        }
        let p_scaled = Poly::new(pc);

        let diff = r_scaled.sub(&p_scaled.mul(&p_scaled)).truncate_top(2);
        let lead = diff.coeffs[2 * ell];
        let a0_sq = -scale * scale * lead / 4.0;
        if !(a0_sq > 0.0 && a0_sq.is_finite()) {
            return Err(Error::Internal(format!("non-positive a_0^2 = {a0_sq} for divisor {divisor:?}")));
        }
        let mut tilde = diff;
        for p in &divisor.points {
            tilde = tilde.deflate(to_u(p.x));
        }
        let tilde = tilde.scale(1.0 / lead);

        let mut next = Vec::with_capacity(ell);
        for (j, &(a, b)) in set.gaps().iter().enumerate() {
            let (ua, ub) = (to_u(a), to_u(b));
            let yu = root_in_closed_gap(|u| tilde.eval(u), ua, ub)
                .map_err(|e| Error::RootFind(format!("gap {j} of the shifted divisor: {e}")))?;
            let y = center + scale * yu;
            let (y, eps) = if (y - a).abs() <= SNAP_TOL * scale.max(1.0) {
                (a, 1)
            } else if (y - b).abs() <= SNAP_TOL * scale.max(1.0) {
                (b, 1)
            } else {
                let pv = p_scaled.eval(to_u(y));
                let sr = set.sqrt_r_real(y) / scale.powi(ell as i32 + 1);
                (y, if (pv + sr).abs() <= (pv - sr).abs() { 1 } else { -1 })
            };
            next.push(DivisorPoint { x: y, eps });
        }

        let xs = divisor.xs();
        let mut poles = Vec::new();
        for (j, p) in divisor.points.iter().enumerate() {
            let (a, b) = set.gaps()[j];
            if p.x == a || p.x == b {
                continue;
            }
            let dpi: f64 = xs.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &xk)| p.x - xk).product();
            let sigma = -set.sqrt_r_real(p.x) / dpi;
            if !(sigma > 0.0) {
                return Err(Error::Internal(format!("residue σ_{j} = {sigma} is not positive")));
            }
            poles.push((p.x, sigma));
        }
        let a_const = xs.iter().sum::<f64>() - 0.5 * set.edges().iter().sum::<f64>();

        Ok(TorusPoint {
            green,
            divisor,
            quad_order,
            center,
            scale,
            p_scaled,
            a0_sq,
            next: Divisor { points: next },
            herglotz: Herglotz { a_const, poles },
            mu_plus: OnceLock::new(),
            mu_minus: OnceLock::new(),
        })
    }

    pub fn set(&self) -> &FiniteGapSet {
        self.green.set()
    }

    pub fn green(&self) -> &Arc<GreenFunction> {
        &self.green
    }

    pub fn divisor(&self) -> &Divisor {
        &self.divisor
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    /// `a_0'^2`, the coupling between sites 0 and 1.
    pub fn a0_sq(&self) -> f64 {
        self.a0_sq
    }

    /// `b_0' = Σ e_k / 2 - Σ x_j`.
    pub fn b0(&self) -> f64 {
        -self.herglotz.a_const
    }

    pub fn herglotz(&self) -> &Herglotz {
        &self.herglotz
    }

    /// Divisor of the once-shifted point.
    pub fn shifted_divisor(&self) -> &Divisor {
        &self.next
    }

    pub fn summary(&self) -> TorusSummary {
        TorusSummary {
            divisor: self.divisor.clone(),
            a0_sq: self.a0_sq,
            herglotz: self.herglotz.clone(),
            shifted_divisor: self.next.clone(),
        }
    }

    fn with_divisor(&self, d: &Divisor) -> Result<TorusPoint> {
        TorusPoint::new(self.green.clone(), d, self.quad_order)
    }

    /// The point whose `J⁺` is `J⁺` of `self` stripped once.
    pub fn shift(&self) -> Result<TorusPoint> {
        self.with_divisor(&self.next)
    }

    /// Reflection `a^r_n = a'_{-n-1}`, `b^r_n = b'_{-n}`.
    pub fn reflect(&self) -> Result<TorusPoint> {
        self.with_divisor(&self.divisor.reflected(self.set()))
    }

    /// Inverse shift, as reflect ∘ shift ∘ reflect.
    pub fn inverse_shift(&self) -> Result<TorusPoint> {
        self.reflect()?.shift()?.reflect()
    }

    /// `shift^n` for any integer `n`.
    pub fn shift_by(&self, n: i64) -> Result<TorusPoint> {
        let mut cur = self.clone();
        if n >= 0 {
            for _ in 0..n {
                cur = cur.shift()?;
            }
        } else {
            let mut r = self.reflect()?;
            for _ in 0..(-n) {
                r = r.shift()?;
            }
            cur = r.reflect()?;
        }
        Ok(cur)
    }

    fn p(&self, x: Complex64) -> Complex64 {
        let ell = self.set().num_gaps() as i32;
        self.p_scaled.eval_complex((x - self.center) / self.scale) * self.scale.powi(ell + 1)
    }

    fn pi(&self, x: Complex64) -> Complex64 {
        self.divisor.points.iter().fold(Complex64::new(1.0, 0.0), |acc, p| acc * (x - p.x))
    }

    fn pi_tilde(&self, x: Complex64) -> Complex64 {
        self.next.points.iter().fold(Complex64::new(1.0, 0.0), |acc, p| acc * (x - p.x))
    }

    fn m_pair(&self, x: Complex64, sqrt_r: Complex64) -> (Complex64, Complex64) {
        let p = self.p(x);
        let plus = p + sqrt_r;
        let minus = p - sqrt_r;
        if plus.norm() >= minus.norm() {
            (plus / (2.0 * self.a0_sq * self.pi(x)), plus / (2.0 * self.a0_sq * self.pi_tilde(x)))
        } else {
            (2.0 * self.pi_tilde(x) / minus, 2.0 * self.pi(x) / minus)
        }
    }

    /// `m⁺(x)`, the m-function of `{a'_n, b'_n}_{n≥1}`.
    pub fn m_plus(&self, x: Complex64) -> Complex64 {
        self.m_pair(x, self.set().sqrt_r(x)).0
    }

    /// `m⁻(x)`, the m-function of the left half-line at site 0.
    pub fn m_minus(&self, x: Complex64) -> Complex64 {
        self.m_pair(x, self.set().sqrt_r(x)).1
    }

    /// `(m⁺(t + i0), m⁻(t + i0))` for `t` in a band.
    pub fn m_boundary(&self, t: f64) -> (Complex64, Complex64) {
        self.m_pair(Complex64::new(t, 0.0), self.set().sqrt_r_boundary(t))
    }

    /// `G_00(x) = -Π / sqrt(R)`.
    pub fn g00(&self, x: Complex64) -> Complex64 {
        -self.pi(x) / self.set().sqrt_r(x)
    }

    /// `H(x) = -1 / G_00(x)`.
    pub fn h(&self, x: Complex64) -> Complex64 {
        self.set().sqrt_r(x) / self.pi(x)
    }

    /// Spectral measure of `J⁺` (density `|sqrt R| / (2π a_0^2 |Π|)` plus poles with `ε = +1`).
    pub fn mu_plus(&self) -> Result<&DiscretizedMeasure> {
        if let Some(m) = self.mu_plus.get() {
            return Ok(m);
        }
        let m = self.half_line_measure(&self.divisor, true)?;
        Ok(self.mu_plus.get_or_init(|| m))
    }

    /// Spectral measure of `J⁻` at site 0.
    pub fn mu_minus(&self) -> Result<&DiscretizedMeasure> {
        if let Some(m) = self.mu_minus.get() {
            return Ok(m);
        }
        let m = self.half_line_measure(&self.next, false)?;
        Ok(self.mu_minus.get_or_init(|| m))
    }

    /// Density `|sqrt R| / (2π a_0^2 |∏(t - z_j)|)` with poles at the points of `zeros`
    /// whose sign selects this side.
    fn half_line_measure(&self, zeros: &Divisor, plus: bool) -> Result<DiscretizedMeasure> {
        let set = self.set().clone();
        let edges = set.edges();
        let zs = zeros.xs();
        let a0_sq = self.a0_sq;
        let stable = |t: f64, e: f64, nodes: &AngleNodes, k: usize| {
            if e == nodes.left {
                nodes.half() * nodes.one_plus_cos(k)
            } else if e == nodes.right {
                nodes.half() * nodes.one_minus_cos(k)
            } else {
                (t - e).abs()
            }
        };
        let density_at = |nodes: &AngleNodes, k: usize| {
            let t = nodes.t[k];
            let r: f64 = edges.iter().map(|&e| stable(t, e, nodes, k)).product();
            let z: f64 = zs.iter().map(|&e| stable(t, e, nodes, k)).product();
            r.sqrt() / (2.0 * PI * a0_sq * z)
        };
        let exps = set
            .bands()
            .iter()
            .map(|&(l, r)| {
                let at = |e: f64| if zs.contains(&e) { -0.5 } else { 0.5 };
                (at(l), at(r))
            })
            .collect();
        let mut mu = DiscretizedMeasure::from_parts(
            &set,
            self.quad_order,
            |_, nodes, k| density_at(nodes, k),
            |_, nodes, k| nodes.w_theta[k] * nodes.half() * nodes.theta[k].sin() * density_at(nodes, k),
            exps,
        )?;
        let want = if plus { 1 } else { -1 };
        for (j, p) in zeros.points.iter().enumerate() {
            let (a, b) = set.gaps()[j];
            if p.x == a || p.x == b || p.eps != want {
                continue;
            }
            let d: f64 = zs.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &z)| p.x - z).product();
            let w = -set.sqrt_r_real(p.x) / (a0_sq * d);
            if !(w > 0.0) {
                return Err(Error::Internal(format!("non-positive mass {w} at {}", p.x)));
            }
            mu = mu.with_point_mass(p.x, w)?;
        }
        Ok(mu)
    }

    /// Two-sided window `n ∈ [lo, hi]` of the coefficients, by Lanczos on `mu_plus`
    /// (`n ≥ 1`) and on `mu_minus` (`n ≤ 0`, flipped), with `a'_0 = sqrt(a_0^2)`.
    pub fn torus_coeffs(&self, lo: i64, hi: i64) -> Result<JacobiCoeffs> {
        if lo > hi {
            return Err(Error::InvalidInput(format!("empty window [{lo}, {hi}]")));
        }
        let n_plus = hi.max(0) as usize;
        let n_minus = (1 - lo).max(0) as usize;
        let (ap, bp) = if n_plus > 0 {
            let (t, w) = self.mu_plus()?.nodes_and_weights();
            lanczos(&t, &w, n_plus)?
        } else {
            (Vec::new(), Vec::new())
        };
        let (am, bm) = if n_minus > 0 {
            let (t, w) = self.mu_minus()?.nodes_and_weights();
            lanczos(&t, &w, n_minus)?
        } else {
            (Vec::new(), Vec::new())
        };
        let mut a = Vec::new();
        let mut b = Vec::new();
        for n in lo..=hi {
            let an = if n >= 1 {
                ap[(n - 1) as usize]
            } else if n == 0 {
                self.a0_sq.sqrt()
            } else {
                am[(-n - 1) as usize]
            };
            let bn = if n >= 1 { bp[(n - 1) as usize] } else { bm[(-n) as usize] };
            a.push(an);
            b.push(bn);
        }
        JacobiCoeffs::two_sided_table(lo, a, b)
    }

    /// Same window from iterated closed-form shifts: `a'_n^2 = a_0^2(shift^n)`,
    /// `b'_n = b_0(shift^n)`.
    pub fn coeffs_by_shifts(&self, lo: i64, hi: i64) -> Result<JacobiCoeffs> {
        if lo > hi {
            return Err(Error::InvalidInput(format!("empty window [{lo}, {hi}]")));
        }
        let mut a = Vec::with_capacity((hi - lo + 1) as usize);
        let mut b = Vec::with_capacity(a.capacity());
        let mut cur = self.shift_by(lo)?;
        for n in lo..=hi {
            a.push(cur.a0_sq.sqrt());
            b.push(cur.b0());
            if n < hi {
                cur = cur.shift()?;
            }
        }
        JacobiCoeffs::two_sided_table(lo, a, b)
    }

    /// `{a'_n, b'_n}_{n=1..=n}` as a one-sided table.
    pub fn right_coeffs(&self, n: usize) -> Result<JacobiCoeffs> {
        Ok(self.coeffs_by_shifts(1, n as i64)?.one_sided())
    }

    /// `|m⁺ G_00 - m⁻ G_11|` with `G_11` the diagonal Green's function of the shifted point.
    pub fn identity_m_og_g(&self, x: Complex64) -> Result<f64> {
        let shifted = self.shift()?;
        Ok((self.m_plus(x) * self.g00(x) - self.m_minus(x) * shifted.g00(x)).norm())
    }

    /// `|a_0^2 m⁺(t+i0) conj(m⁻(t+i0)) - 1|` with both boundary values assembled from
    /// `depth` Lanczos coefficients on each side and closed-form tails.
    pub fn reflectionless_residual(&self, ts: &[f64], depth: usize) -> Result<f64> {
        let win = self.torus_coeffs(-(depth as i64), depth as i64)?;
        let tail_plus = self.shift_by(depth as i64)?;
        let tail_minus = self.shift_by(-(depth as i64))?;
        let mut worst: f64 = 0.0;
        for &t in ts {
            let x = Complex64::new(t, 0.0);
            let mut mp = tail_plus.m_boundary(t).0;
            for k in (1..=depth as i64).rev() {
                mp = 1.0 / (win.b(k) - x - win.a(k).powi(2) * mp);
            }
            let mut mm = tail_minus.m_boundary(t).1;
            for k in (0..depth as i64).rev() {
                mm = 1.0 / (win.b(-k) - x - win.a(-k - 1).powi(2) * mm);
            }
            worst = worst.max((self.a0_sq * mp * mm.conj() - 1.0).norm());
        }
        Ok(worst)
    }
}

/// The single root of `f` on the closed interval `[a, b]`.
fn root_in_closed_gap<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let tol = 1e-15 * (b - a).max(1.0);
    if fa * fb < 0.0 {
        return bisect(a, b, &f, tol);
    }
    let mesh = 64;
    let scale = (0..=mesh).map(|k| f(a + (b - a) * k as f64 / mesh as f64).abs()).fold(0.0, f64::max);
    if fa.abs().min(fb.abs()) <= 1e-10 * scale {
        return Ok(if fa.abs() <= fb.abs() { a } else { b });
    }
    let mut prev = (a, fa);
    for k in 1..=mesh {
        let x = a + (b - a) * k as f64 / mesh as f64;
        let fx = f(x);
        if prev.1 * fx <= 0.0 {
            return bisect(prev.0, x, &f, tol);
        }
        prev = (x, fx);
    }
    Err(Error::RootFind(format!(
        "no sign change on [{a}, {b}]: f(a) = {fa:e}, f(b) = {fb:e}, max |f| on mesh = {scale:e}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gapset::DEFAULT_QUAD_ORDER;
    use crate::jacobi::{m_function, stieltjes_coeffs};

    fn green(set: &FiniteGapSet) -> Arc<GreenFunction> {
        Arc::new(GreenFunction::new(set, DEFAULT_QUAD_ORDER).unwrap())
    }

    fn p2() -> Arc<GreenFunction> {
        green(&FiniteGapSet::new(-3.0, 3.0, vec![(-1.0, 1.0)]).unwrap())
    }

    fn one_gap() -> Arc<GreenFunction> {
        green(&FiniteGapSet::new(-2.0, 2.5, vec![(0.3, 1.1)]).unwrap())
    }

    #[test]
    fn diag_green_values() {
        let set = FiniteGapSet::interval(-2.0, 2.0).unwrap();
        let g = diag_green(&Divisor::empty(), &set, Complex64::new(3.0, 0.0)).unwrap();
        assert!((g.re + 1.0 / 5f64.sqrt()).abs() < 1e-15);
        let set2 = FiniteGapSet::new(0.0, 3.0, vec![(1.0, 2.0)]).unwrap();
        let d = Divisor::new(vec![(2.5, 1)]);
        let g = diag_green(&d, &set2, Complex64::new(4.0, 0.0)).unwrap();
        assert!((g.re + 1.5 / 24f64.sqrt()).abs() < 1e-15);
        let x = 1e8;
        let g = diag_green(&Divisor::new(vec![(1.4, -1)]), &set2, Complex64::new(x, 0.0)).unwrap();
        assert!((x * g.re + 1.0).abs() < 1e-6);
        assert!(diag_green(&d, &set2, Complex64::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn boundary_green_values() {
        let set = FiniteGapSet::interval(-2.0, 2.0).unwrap();
        let d = Divisor::empty();
        assert!((boundary_im_green(&d, &set, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((boundary_im_green(&d, &set, 2f64.sqrt()).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(boundary_im_green(&d, &set, 2.0).is_err());
        let set = FiniteGapSet::new(-2.0, 2.5, vec![(0.3, 1.1)]).unwrap();
        let d = Divisor::new(vec![(0.8, -1)]);
        for k in 0..100 {
            let t = -2.0 + 4.5 * (k as f64 + 0.5) / 100.0;
            if set.contains_interior(t) {
                assert!(boundary_im_green(&d, &set, t).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn free_point() {
        let g = green(&FiniteGapSet::interval(-2.0, 2.0).unwrap());
        let t = TorusPoint::new(g, &Divisor::empty(), 128).unwrap();
        assert!((t.a0_sq() - 1.0).abs() < 1e-15);
        let x = Complex64::new(3.0, 0.0);
        let m = (-3.0 + 5f64.sqrt()) / 2.0;
        assert!((t.m_plus(x).re - m).abs() < 1e-15);
        assert!((t.m_minus(x).re - m).abs() < 1e-15);
        let w = t.torus_coeffs(-5, 5).unwrap();
        for n in -5..=5 {
            assert!((w.a(n) - 1.0).abs() < 1e-12 && w.b(n).abs() < 1e-12);
        }
        let mu = t.mu_plus().unwrap();
        let cheb = DiscretizedMeasure::chebyshev_second_kind(128).unwrap();
        for (x, y) in mu.bands()[0].weights.iter().zip(&cheb.bands()[0].weights) {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(t.shift().unwrap().divisor(), t.divisor());
        assert!(t.identity_m_og_g(x).unwrap() < 1e-9);
        // Prop 2.1 identity at t = 0: both sides equal 2/π.
        let mid = mu.bands()[0].nodes.len() / 2;
        let f_plus = mu.bands()[0].density[mid];
        let tt = mu.bands()[0].nodes.t[mid];
        let lhs = 2.0 * t.a0_sq() * f_plus;
        let rhs = (1.0 / PI) / boundary_im_green(t.divisor(), t.set(), tt).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * rhs);
    }

    #[test]
    fn period_two_gap_centre() {
        let g = p2();
        assert!((g.capacity() - 2f64.sqrt()).abs() < 1e-12);
        for eps in [1, -1] {
            let t = TorusPoint::new(g.clone(), &Divisor::new(vec![(0.0, eps)]), 128).unwrap();
            assert!((t.a0_sq() - if eps == 1 { 4.0 } else { 1.0 }).abs() < 1e-12);
            let w = t.torus_coeffs(-10, 10).unwrap();
            let s = t.coeffs_by_shifts(-10, 10).unwrap();
            for n in -10..=10i64 {
                let expect = if (n % 2 == 0) == (eps == 1) { 2.0 } else { 1.0 };
                assert!((w.a(n) - expect).abs() < 1e-10, "eps {eps}, n {n}: {}", w.a(n));
                assert!(w.b(n).abs() < 1e-10);
                assert!((s.a(n) - expect).abs() < 1e-12);
                assert!(s.b(n).abs() < 1e-12);
            }
            let back = t.shift().unwrap().shift().unwrap();
            assert!((back.divisor().points[0].x - 0.0).abs() < 1e-8);
            assert_eq!(back.divisor().points[0].eps, eps);
        }
    }

    #[test]
    fn period_two_endpoint_divisor() {
        // Discriminant oracle: a ≡ sqrt 2, b alternating ±1 also has spectrum [-3,-1] ∪ [1,3].
        let g = p2();
        let t = TorusPoint::new(g, &Divisor::new(vec![(1.0, 1)]), 128).unwrap();
        let w = t.torus_coeffs(-10, 10).unwrap();
        for n in -10..=10i64 {
            assert!((w.a(n) - 2f64.sqrt()).abs() < 1e-10);
            assert!((w.b(n).abs() - 1.0).abs() < 1e-10);
            assert!(n == 10 || (w.b(n) + w.b(n + 1)).abs() < 1e-10);
        }
        assert!(((w.a(1) * w.a(2)).sqrt() - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn herglotz_splitting_matches_closed_forms() {
        let g = one_gap();
        for d in [Divisor::new(vec![(0.8, 1)]), Divisor::new(vec![(0.5, -1)]), Divisor::new(vec![(1.1, 1)])] {
            let t = TorusPoint::new(g.clone(), &d, 128).unwrap();
            // a_0^2 = ν⁺ mass = half the a.c. part of H plus the poles with ε = +1.
            let ac: f64 = g
                .set()
                .bands()
                .iter()
                .map(|&(l, r)| {
                    crate::quadrature::GaussLegendre::new(256).integrate(0.0, PI, |th| {
                        let h = 0.5 * (r - l);
                        let tt = 0.5 * (l + r) + h * th.cos();
                        ((t.set().sqrt_r_boundary(tt) / t.pi(Complex64::new(tt, 0.0))).im / PI).abs() * h * th.sin()
                    })
                })
                .sum();
            let poles: f64 = t
                .herglotz()
                .poles
                .iter()
                .zip(&t.divisor().points)
                .filter(|(_, p)| p.eps == 1)
                .map(|((_, s), _)| s)
                .sum();
            assert!((0.5 * ac + poles - t.a0_sq()).abs() < 1e-9, "{d:?}");
            assert!((t.mu_plus().unwrap().total_mass() - 1.0).abs() < 1e-10);
            assert!((t.mu_minus().unwrap().total_mass() - 1.0).abs() < 1e-10);
            // m± from quadrature against the closed forms.
            for x in [Complex64::new(3.5, 0.0), Complex64::new(0.7, 0.4), Complex64::new(-4.0, 1.0)] {
                let mp = m_function(t.mu_plus().unwrap(), x).unwrap();
                let mm = m_function(t.mu_minus().unwrap(), x).unwrap();
                assert!((mp - t.m_plus(x)).norm() < 1e-9, "{x}");
                assert!((mm - t.m_minus(x)).norm() < 1e-9, "{x}");
                let h = t.a0_sq() * t.m_plus(x) - 1.0 / t.m_minus(x);
                assert!((h - t.h(x)).norm() < 1e-10);
                // -1/m⁻ = x + A + ∫ dν⁻ / (t - x): check at large x.
                let big = Complex64::new(1e4, 0.0);
                let k = -1.0 / t.m_minus(big);
                assert!((k - big - t.herglotz().a_const).norm() < 1e-3);
            }
            assert!(t.identity_m_og_g(Complex64::new(4.0, 0.0)).unwrap() < 1e-7);
        }
    }

    #[test]
    fn poles_of_m_plus_follow_signs() {
        let g = one_gap();
        let t = TorusPoint::new(g.clone(), &Divisor::new(vec![(0.8, 1)]), 128).unwrap();
        assert_eq!(t.mu_plus().unwrap().point_masses().len(), 1);
        assert!((t.mu_plus().unwrap().point_masses()[0].x - 0.8).abs() < 1e-15);
        let t = TorusPoint::new(g, &Divisor::new(vec![(0.8, -1)]), 128).unwrap();
        assert!(t.mu_plus().unwrap().point_masses().is_empty());
    }

    #[test]
    fn shift_and_reflection_windows() {
        let g = one_gap();
        let t = TorusPoint::new(g, &Divisor::new(vec![(0.7, -1)]), 128).unwrap();
        let w = t.torus_coeffs(-6, 6).unwrap();
        let ws = t.shift().unwrap().torus_coeffs(-6, 6).unwrap();
        for n in -5..=5 {
            assert!((ws.a(n) - w.a(n + 1)).abs() < 1e-7);
            assert!((ws.b(n) - w.b(n + 1)).abs() < 1e-7);
        }
        let by_shift = t.coeffs_by_shifts(-6, 6).unwrap();
        for n in -6..=6 {
            assert!((by_shift.a(n) - w.a(n)).abs() < 1e-9);
            assert!((by_shift.b(n) - w.b(n)).abs() < 1e-9);
        }
        let r = t.reflect().unwrap();
        let rr = r.reflect().unwrap();
        assert!((rr.divisor().points[0].x - 0.7).abs() < 1e-10 && rr.divisor().points[0].eps == -1);
        let wr = r.torus_coeffs(-4, 4).unwrap();
        for n in -3..=3 {
            assert!((wr.a(n) - w.a(-n - 1)).abs() < 1e-9);
            assert!((wr.b(n) - w.b(-n)).abs() < 1e-9);
        }
        let inv = t.inverse_shift().unwrap();
        let back = inv.shift().unwrap();
        assert!((back.divisor().points[0].x - 0.7).abs() < 1e-10);
        assert_eq!(back.divisor().points[0].eps, -1);
    }

    #[test]
    fn lanczos_of_mu_plus_round_trips() {
        let g = one_gap();
        let t = TorusPoint::new(g, &Divisor::new(vec![(0.9, 1)]), 128).unwrap();
        let from_measure = stieltjes_coeffs(t.mu_plus().unwrap(), 30).unwrap();
        let exact = t.right_coeffs(30).unwrap();
        for n in 1..=30 {
            assert!((from_measure.a(n) - exact.a(n)).abs() < 1e-8);
            assert!((from_measure.b(n) - exact.b(n)).abs() < 1e-8);
        }
    }

    #[test]
    fn reflectionless_and_symmetric() {
        let g = one_gap();
        let t = TorusPoint::new(g, &Divisor::new(vec![(0.6, 1)]), 128).unwrap();
        let ts: Vec<f64> = (0..20).map(|k| -1.9 + 2.1 * k as f64 / 19.0).collect();
        assert!(t.reflectionless_residual(&ts, 6).unwrap() < 1e-8);
        // Symmetric set with gap-midpoint divisor: all b vanish.
        let sym = p2();
        let t = TorusPoint::new(sym, &Divisor::new(vec![(0.0, -1)]), 128).unwrap();
        let w = t.torus_coeffs(-8, 8).unwrap();
        for n in -8..=8 {
            assert!(w.b(n).abs() < 1e-10);
        }
    }

    #[test]
    fn divisor_validation_and_snapping() {
        let set = FiniteGapSet::new(-2.0, 2.5, vec![(0.3, 1.1)]).unwrap();
        assert!(Divisor::new(vec![(1.2, 1)]).normalized(&set).is_err());
        assert!(Divisor::new(vec![(0.5, 0)]).normalized(&set).is_err());
        assert!(Divisor::empty().normalized(&set).is_err());
        let d = Divisor::new(vec![(1.1 - 1e-10, -1)]).normalized(&set).unwrap();
        assert_eq!(d.points[0], DivisorPoint { x: 1.1, eps: 1 });
        let json = r#"{"points": [{"x": 0.5, "eps": -1}]}"#;
        let d: Divisor = serde_json::from_str(json).unwrap();
        assert_eq!(d, Divisor::new(vec![(0.5, -1)]));
    }
}
