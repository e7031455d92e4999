//! Finite-gap sets `E = [alpha, beta] \ ∪ (alpha_j, beta_j)` and their potential
//! theory.
//!
//! The Green's function with pole at infinity has derivative
//! `g'(x) = Q(x) / sqrt(R(x))` with `R(x) = (x - alpha)(x - beta) ∏ (x - alpha_j)(x - beta_j)`
//! and `Q` monic of degree `ℓ`, pinned down by requiring `g` to vanish at both ends of
//! every gap. Every integral against `1 / sqrt|R|` is done in the angle variable
//! `t = mid + half * cos(theta)` of the interval being integrated over, which
//! absorbs the two square-root endpoint singularities.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{bisect, GaussLegendre};

/// Default Gauss–Legendre order per band / gap.
pub const DEFAULT_QUAD_ORDER: usize = 128;
const MAX_QUAD_ORDER: usize = 8192;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetSpec {
    alpha: f64,
    beta: f64,
    #[serde(default)]
    gaps: Vec<(f64, f64)>,
}

/// `[alpha, beta]` with finitely many open gaps removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetSpec")]
pub struct FiniteGapSet {
    alpha: f64,
    beta: f64,
    gaps: Vec<(f64, f64)>,
}

impl TryFrom<SetSpec> for FiniteGapSet {
    type Error = Error;

    fn try_from(spec: SetSpec) -> Result<Self> {
        FiniteGapSet::new(spec.alpha, spec.beta, spec.gaps)
    }
}

impl FiniteGapSet {
    pub fn new(alpha: f64, beta: f64, gaps: Vec<(f64, f64)>) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) || alpha >= beta {
            return Err(Error::InvalidSet(format!("need alpha < beta, got [{alpha}, {beta}]")));
        }
        let mut prev = alpha;
        for (j, &(a, b)) in gaps.iter().enumerate() {
            if !(a.is_finite() && b.is_finite()) || a >= b {
                return Err(Error::InvalidSet(format!("gap {j} = ({a}, {b}) is empty")));
            }
            if a <= prev {
                return Err(Error::InvalidSet(format!(
                    "gap {j} = ({a}, {b}) overlaps the previous gap or touches alpha (band of zero length)"
                )));
            }
            prev = b;
        }
        if prev >= beta {
            return Err(Error::InvalidSet(format!(
                "last gap reaches beta = {beta} (band of zero length)"
            )));
        }
        Ok(FiniteGapSet { alpha, beta, gaps })
    }

    /// The single interval `[a, b]`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, Vec::new())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gaps(&self) -> &[(f64, f64)] {
        &self.gaps
    }

    pub fn num_gaps(&self) -> usize {
        self.gaps.len()
    }

    pub fn num_bands(&self) -> usize {
        self.gaps.len() + 1
    }

    /// Closed bands, left to right.
    pub fn bands(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.num_bands());
        let mut left = self.alpha;
        for &(a, b) in &self.gaps {
            out.push((left, a));
            left = b;
        }
        out.push((left, self.beta));
        out
    }

    /// All `2ℓ + 2` endpoints in increasing order.
    pub fn edges(&self) -> Vec<f64> {
        self.bands().into_iter().flat_map(|(l, r)| [l, r]).collect()
    }

    pub fn band_index(&self, x: f64) -> Option<usize> {
        self.bands().iter().position(|&(l, r)| x >= l && x <= r)
    }

    pub fn gap_index(&self, x: f64) -> Option<usize> {
        self.gaps.iter().position(|&(a, b)| x > a && x < b)
    }

    /// Membership in the closed set.
    pub fn contains(&self, x: f64) -> bool {
        self.band_index(x).is_some()
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        self.bands().iter().any(|&(l, r)| x > l && x < r)
    }

    pub fn distance(&self, x: Complex64) -> f64 {
        self.bands()
            .iter()
            .map(|&(l, r)| {
                let dx = if x.re < l {
                    l - x.re
                } else if x.re > r {
                    x.re - r
                } else {
                    0.0
                };
                dx.hypot(x.im)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Image under `x -> lambda * x + shift` (`lambda != 0`).
    pub fn affine(&self, lambda: f64, shift: f64) -> Result<Self> {
        if lambda == 0.0 {
            return Err(Error::InvalidInput("affine scale must be nonzero".into()));
        }
        let map = |x: f64| lambda * x + shift;
        if lambda > 0.0 {
            Self::new(
                map(self.alpha),
                map(self.beta),
                self.gaps.iter().map(|&(a, b)| (map(a), map(b))).collect(),
            )
        } else {
            Self::new(
                map(self.beta),
                map(self.alpha),
                self.gaps.iter().rev().map(|&(a, b)| (map(b), map(a))).collect(),
            )
        }
    }

    /// `sqrt(R(x))` on the branch analytic off `E` with `sqrt(R(x)) ~ x^{ℓ+1}` at infinity.
    ///
    /// Each band contributes `sqrt(x - l) * sqrt(x - r)` with principal roots, whose
    /// cuts cancel outside `[l, r]`.
    pub fn sqrt_r(&self, x: Complex64) -> Complex64 {
        self.bands()
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, &(l, r)| {
                acc * (x - l).sqrt() * (x - r).sqrt()
            })
    }

    /// Real `sqrt(R(x))` for real `x` off `E` (same branch as [`Self::sqrt_r`]).
    pub fn sqrt_r_real(&self, x: f64) -> f64 {
        self.bands().iter().fold(1.0, |acc, &(l, r)| {
            if x >= r {
                acc * ((x - l) * (x - r)).sqrt()
            } else if x <= l {
                -acc * ((l - x) * (r - x)).sqrt()
            } else {
                f64::NAN
            }
        })
    }

    /// Upper boundary value `sqrt(R(t + i0))` for `t` in a band.
    pub fn sqrt_r_boundary(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for &(l, r) in &self.bands() {
            if t >= r {
                acc *= ((t - l) * (t - r)).sqrt();
            } else if t <= l {
                acc *= -((l - t) * (r - t)).sqrt();
            } else {
                acc *= Complex64::new(0.0, ((t - l) * (r - t)).sqrt());
            }
        }
        acc
    }

    /// `∏ sqrt|t - e|` over the endpoints other than `skip.0`, `skip.1`.
    fn rest_abs_sqrt(&self, t: f64, skip: (f64, f64)) -> f64 {
        self.edges()
            .iter()
            .filter(|&&e| e != skip.0 && e != skip.1)
            .map(|&e| (t - e).abs().sqrt())
            .product()
    }

    pub fn hull_center(&self) -> f64 {
        0.5 * (self.alpha + self.beta)
    }

    pub fn hull_halfwidth(&self) -> f64 {
        0.5 * (self.beta - self.alpha)
    }
}

/// Gauss–Legendre nodes in the angle variable on one interval `[left, right]`,
/// `t = mid + half * cos(theta)`, `theta ∈ (0, pi)`. `theta` near `pi` is the left end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleNodes {
    pub left: f64,
    pub right: f64,
    pub theta: Vec<f64>,
    pub t: Vec<f64>,
    /// Weights for `dtheta`.
    pub w_theta: Vec<f64>,
}

impl AngleNodes {
    pub fn new(left: f64, right: f64, order: usize) -> Self {
        let rule = GaussLegendre::new(order);
        let mid = 0.5 * (left + right);
        let half = 0.5 * (right - left);
        let mut theta = Vec::with_capacity(order);
        let mut t = Vec::with_capacity(order);
        let mut w_theta = Vec::with_capacity(order);
        for (th, w) in rule.mapped(0.0, PI) {
            theta.push(th);
            t.push(mid + half * th.cos());
            w_theta.push(w);
        }
        AngleNodes { left, right, theta, t, w_theta }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn half(&self) -> f64 {
        0.5 * (self.right - self.left)
    }

    /// Weights for Lebesgue measure `dt`.
    pub fn lebesgue_weights(&self) -> Vec<f64> {
        let h = self.half();
        self.theta
            .iter()
            .zip(&self.w_theta)
            .map(|(th, w)| w * h * th.sin())
            .collect()
    }

    /// `(t - left) / half = 1 + cos(theta)`, computed without cancellation.
    pub fn one_plus_cos(&self, k: usize) -> f64 {
        2.0 * (0.5 * self.theta[k]).cos().powi(2)
    }

    /// `(right - t) / half = 1 - cos(theta)`.
    pub fn one_minus_cos(&self, k: usize) -> f64 {
        2.0 * (0.5 * self.theta[k]).sin().powi(2)
    }
}

/// `∫_0^π log(1 ± cos θ) ψ(θ) dθ` for a smooth even density `ψ` sampled on
/// angle nodes, via the cosine series of `log(1 ∓ cos θ)`.
pub(crate) fn log_edge_moments(nodes: &AngleNodes, psi: &[f64]) -> (f64, f64) {
    let mass: f64 = psi.iter().zip(&nodes.w_theta).map(|(p, w)| p * w).sum();
    let kmax = nodes.len() / 2;
    let mut plus = 0.0;
    let mut minus = 0.0;
    for k in 1..=kmax {
        let a_k = 2.0 / PI
            * nodes
                .theta
                .iter()
                .zip(&nodes.w_theta)
                .zip(psi)
                .map(|((th, w), p)| w * p * (k as f64 * th).cos())
                .sum::<f64>();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        plus += sign * a_k / k as f64;
        minus += a_k / k as f64;
    }
    let ln2 = std::f64::consts::LN_2;
    (-ln2 * mass - PI * plus, -ln2 * mass - PI * minus)
}

/// Green's function of `C \ E` with pole at infinity, with its equilibrium quadrature.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    set: FiniteGapSet,
    /// Coefficients of `Q` in `u = (t - center) / halfwidth`, monic in `u`, ascending.
    q_scaled: Vec<f64>,
    q_roots: Vec<f64>,
    capacity: f64,
    quad_order: usize,
    band_rules: Vec<AngleNodes>,
    /// `μ_E` weights at the band nodes.
    band_weights: Vec<Vec<f64>>,
}

impl GreenFunction {
    /// Build `g` for `set`. `quad_order` (≥ 16) is the starting order; it is doubled
    /// until the coefficients of `Q` change by less than `1e-12` (relative).
    pub fn new(set: &FiniteGapSet, quad_order: usize) -> Result<Self> {
        if quad_order < 16 {
            return Err(Error::InvalidInput(format!("quad_order must be >= 16, got {quad_order}")));
        }
        let mut order = quad_order;
        let mut q = solve_q(set, order)?;
        loop {
            let next = order * 2;
            let q2 = solve_q(set, next)?;
            let scale = q2.iter().fold(1.0f64, |m, c| m.max(c.abs()));
            let change = q.iter().zip(&q2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
            if change < 1e-12 {
                break;
            }
            order = next;
            q = q2;
            if order >= MAX_QUAD_ORDER {
                return Err(Error::NotConverged(format!(
                    "gap conditions for Q did not converge by quad_order {order}"
                )));
            }
        }
        let mut g = GreenFunction {
            set: set.clone(),
            q_scaled: q,
            q_roots: Vec::new(),
            capacity: f64::NAN,
            quad_order: order,
            band_rules: Vec::new(),
            band_weights: Vec::new(),
        };
        g.q_roots = set
            .gaps()
            .iter()
            .map(|&(a, b)| bisect(a, b, |t| g.q(t), 1e-15 * (b - a).max(1.0)))
            .collect::<Result<_>>()?;
        for (l, r) in set.bands() {
            let nodes = AngleNodes::new(l, r, order);
            let psi: Vec<f64> = nodes.t.iter().map(|&t| g.angle_density(t, (l, r))).collect();
            let weights = psi.iter().zip(&nodes.w_theta).map(|(p, w)| p * w).collect();
            g.band_rules.push(nodes);
            g.band_weights.push(weights);
        }
        g.capacity = g.compute_capacity();
        Ok(g)
    }

    pub fn set(&self) -> &FiniteGapSet {
        &self.set
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    /// Critical points `c_j` of `g`, one per gap.
    pub fn critical_points(&self) -> &[f64] {
        &self.q_roots
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn band_rules(&self) -> &[AngleNodes] {
        &self.band_rules
    }

    /// `μ_E` quadrature weights on [`Self::band_rules`].
    pub fn band_weights(&self) -> &[Vec<f64>] {
        &self.band_weights
    }

    /// The monic polynomial `Q` in `g' = Q / sqrt(R)`.
    pub fn q(&self, t: f64) -> f64 {
        let s = self.set.hull_halfwidth();
        let u = (t - self.set.hull_center()) / s;
        let val = self.q_scaled.iter().rev().fold(0.0, |acc, &c| acc * u + c);
        val * s.powi(self.set.num_gaps() as i32)
    }

    fn q_complex(&self, x: Complex64) -> Complex64 {
        let s = self.set.hull_halfwidth();
        let u = (x - self.set.hull_center()) / s;
        let val = self
            .q_scaled
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c);
        val * s.powi(self.set.num_gaps() as i32)
    }

    /// `g'(x)` for real `x` off `E`.
    pub fn derivative(&self, x: f64) -> f64 {
        self.q(x) / self.set.sqrt_r_real(x)
    }

    /// Equilibrium density `|Q(t)| / (π sqrt|R(t)|)` (zero off `E`).
    pub fn equilibrium_density(&self, t: f64) -> f64 {
        if !self.set.contains_interior(t) {
            return 0.0;
        }
        self.q(t).abs() / (PI * self.set.sqrt_r_boundary(t).norm())
    }

    /// Density of `μ_E` with respect to the band angle (smooth in `theta`).
    pub fn angle_density(&self, t: f64, band: (f64, f64)) -> f64 {
        self.q(t).abs() / (PI * self.set.rest_abs_sqrt(t, band))
    }

    /// `μ_E` of the band with index `band`.
    pub fn equilibrium_mass(&self, band: usize) -> Result<f64> {
        self.band_weights
            .get(band)
            .map(|w| w.iter().sum())
            .ok_or_else(|| Error::InvalidInput(format!("band index {band} out of range")))
    }

    /// `μ_E([a, b])` for an arbitrary real interval.
    pub fn equilibrium_mass_between(&self, a: f64, b: f64) -> f64 {
        let rule = GaussLegendre::new(self.quad_order);
        let mut total = 0.0;
        for (l, r) in self.set.bands() {
            let lo = a.max(l);
            let hi = b.min(r);
            if lo >= hi {
                continue;
            }
            let mid = 0.5 * (l + r);
            let half = 0.5 * (r - l);
            let th_hi = if lo <= l { PI } else { ((lo - mid) / half).clamp(-1.0, 1.0).acos() };
            let th_lo = if hi >= r { 0.0 } else { ((hi - mid) / half).clamp(-1.0, 1.0).acos() };
            total += rule.integrate(th_lo, th_hi, |th| {
                self.angle_density(mid + half * th.cos(), (l, r))
            });
        }
        total
    }

    /// `∫ φ dμ_E` by the band quadrature.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut phi: F) -> f64 {
        self.band_rules
            .iter()
            .zip(&self.band_weights)
            .map(|(nodes, w)| nodes.t.iter().zip(w).map(|(&t, &wk)| wk * phi(t)).sum::<f64>())
            .sum()
    }

    /// `g(x)` for complex `x`; zero on `E`.
    pub fn value(&self, x: Complex64) -> Result<f64> {
        if x.re.is_nan() || x.im.is_nan() {
            return Err(Error::InvalidInput("NaN argument to Green's function".into()));
        }
        if x.im == 0.0 {
            return Ok(self.value_real(x.re));
        }
        let x = Complex64::new(x.re, x.im.abs());
        let d_hull = {
            let dx = if x.re < self.set.alpha() {
                self.set.alpha() - x.re
            } else if x.re > self.set.beta() {
                x.re - self.set.beta()
            } else {
                0.0
            };
            dx.hypot(x.im)
        };
        if d_hull > 2.0 * self.set.hull_halfwidth() {
            return Ok(self.value_by_potential(x));
        }
        Ok(self.value_by_path(x))
    }

    /// `g(x)` for real `x`; zero on `E`.
    pub fn value_real(&self, x: f64) -> f64 {
        if self.set.contains(x) {
            return 0.0;
        }
        let (alpha, beta) = (self.set.alpha(), self.set.beta());
        let width = beta - alpha;
        if let Some(j) = self.set.gap_index(x) {
            let (a, b) = self.set.gaps()[j];
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            let phi = ((x - mid) / half).clamp(-1.0, 1.0).acos();
            let rule = GaussLegendre::new(self.quad_order);
            let v = rule.integrate(phi, PI, |th| {
                let t = mid + half * th.cos();
                self.q(t) / self.set.rest_abs_sqrt(t, (a, b))
            });
            return v.abs();
        }
        let dist = if x > beta { x - beta } else { alpha - x };
        if dist > width {
            return self.value_by_potential(Complex64::new(x, 0.0));
        }
        let edge = if x > beta { beta } else { alpha };
        let rule = GaussLegendre::new(self.quad_order);
        let root = dist.sqrt();
        let v = rule.integrate(0.0, 1.0, |v| {
            let t = edge + (x - edge) * v * v;
            2.0 * root * self.q(t).abs() / self.set.rest_abs_sqrt(t, (edge, f64::NAN))
        });
        v.abs()
    }

    /// `g(x) = ∫ log|x - t| dμ_E(t) - log cap`, accurate away from `E`.
    fn value_by_potential(&self, x: Complex64) -> f64 {
        let log_cap = if self.capacity.is_nan() {
            0.0
        } else {
            self.capacity.ln()
        };
        self.integrate(|t| (x - t).norm().ln()) - log_cap
    }

    /// Real part of the Abelian integral of `Q / sqrt(R)` along the segment from the
    /// nearest band edge, with composite Gauss–Legendre panels doubled to convergence.
    fn value_by_path(&self, x: Complex64) -> f64 {
        let edge = self
            .set
            .edges()
            .into_iter()
            .min_by(|a, b| (x - a).norm().total_cmp(&(x - b).norm()))
            .unwrap();
        let dx = x - edge;
        let root = dx.sqrt();
        let others: Vec<(f64, f64)> = self.set.bands();
        let integrand = |v: f64| -> Complex64 {
            let w = edge + dx * v * v;
            let mut rest = Complex64::new(1.0, 0.0);
            for &(l, r) in &others {
                if l != edge {
                    rest *= (w - l).sqrt();
                }
                if r != edge {
                    rest *= (w - r).sqrt();
                }
            }
            2.0 * root * self.q_complex(w) / rest
        };
        let rule = GaussLegendre::new(32);
        let mut panels = 4usize;
        let mut prev = f64::NAN;
        loop {
            let h = 1.0 / panels as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..panels {
                let a = p as f64 * h;
                for (v, w) in rule.mapped(a, a + h) {
                    acc += integrand(v) * w;
                }
            }
            let val = acc.re;
            if (val - prev).abs() <= 1e-13 * val.abs().max(1e-300) || panels >= 4096 {
                return val.max(0.0);
            }
            prev = val;
            panels *= 2;
        }
    }

    /// `Σ_j g(c_j)`.
    pub fn pw_sum(&self) -> f64 {
        self.q_roots.iter().map(|&c| self.value_real(c)).sum()
    }

    /// `Σ_k g(x_k)` for points off `E`.
    pub fn blaschke_sum(&self, points: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for &x in points {
            if x.is_nan() || self.set.contains(x) {
                return Err(Error::InvalidInput(format!("point {x} lies on E")));
            }
            total += self.value_real(x);
        }
        Ok(total)
    }

    fn compute_capacity(&self) -> f64 {
        let beta = self.set.beta();
        let width = beta - self.set.alpha();
        if self.set.num_gaps() == 0 {
            return width / 4.0;
        }
        let x0 = beta + width;
        let g0 = self.value_real_path(x0);
        let potential = self.integrate(|t| (x0 - t).abs().ln());
        (potential - g0).exp()
    }

    fn value_real_path(&self, x: f64) -> f64 {
        let beta = self.set.beta();
        let rule = GaussLegendre::new(self.quad_order);
        let root = (x - beta).sqrt();
        rule.integrate(0.0, 1.0, |v| {
            let t = beta + (x - beta) * v * v;
            2.0 * root * self.q(t) / self.set.rest_abs_sqrt(t, (beta, f64::NAN))
        })
    }
}

/// Solve the `ℓ` gap conditions `∫_gap Q / sqrt|R| = 0` for the scaled monic `Q`.
fn solve_q(set: &FiniteGapSet, order: usize) -> Result<Vec<f64>> {
    let l = set.num_gaps();
    if l == 0 {
        return Ok(vec![1.0]);
    }
    let c = set.hull_center();
    let s = set.hull_halfwidth();
    let rule = GaussLegendre::new(order);
    let mut m = DMatrix::<f64>::zeros(l, l);
    let mut rhs = DVector::<f64>::zeros(l);
    for (j, &(a, b)) in set.gaps().iter().enumerate() {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut moments = vec![0.0; l + 1];
        for (th, w) in rule.mapped(0.0, PI) {
            let t = mid + half * th.cos();
            let u = (t - c) / s;
            let base = w / set.rest_abs_sqrt(t, (a, b));
            let mut p = 1.0;
            for mk in moments.iter_mut() {
                *mk += base * p;
                p *= u;
            }
        }
        for k in 0..l {
            m[(j, k)] = moments[k];
        }
        rhs[j] = -moments[l];
    }
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Internal("singular system for the Green's function polynomial".into()))?;
    let mut q: Vec<f64> = sol.iter().copied().collect();
    q.push(1.0);
    Ok(q)
}
