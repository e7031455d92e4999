use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::JacobiCoeffs;
use crate::error::{Error, Result};
use crate::gapset::{AngleNodes, FiniteGapSet, GreenFunction};

/// Samples of the a.c. part on one band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSamples {
    pub nodes: AngleNodes,
    /// `f(t_i)`.
    pub density: Vec<f64>,
    /// `f(t_i) dt` quadrature weights.
    pub weights: Vec<f64>,
    /// `f(t) ≈ C (t - left)^γ_l` and `C (right - t)^γ_r` near the band ends.
    pub edge_exponents: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointMass {
    pub x: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureSpec {
    set: FiniteGapSet,
    order: usize,
    bands: Vec<BandSamples>,
    #[serde(default)]
    point_masses: Vec<PointMass>,
}

/// `f(t) dt` on the bands of `E` sampled at angle nodes, plus finitely many point masses
/// off `E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureSpec")]
pub struct DiscretizedMeasure {
    set: FiniteGapSet,
    order: usize,
    bands: Vec<BandSamples>,
    point_masses: Vec<PointMass>,
}

impl TryFrom<MeasureSpec> for DiscretizedMeasure {
    type Error = Error;

    fn try_from(s: MeasureSpec) -> Result<Self> {
        let m = DiscretizedMeasure { set: s.set, order: s.order, bands: s.bands, point_masses: s.point_masses };
        m.validate()?;
        Ok(m)
    }
}

impl DiscretizedMeasure {
    fn validate(&self) -> Result<()> {
        let bands = self.set.bands();
        if self.bands.len() != bands.len() {
            return Err(Error::InvalidInput(format!(
                "measure has {} band blocks but the set has {} bands",
                self.bands.len(),
                bands.len()
            )));
        }
        for (k, (blk, &(l, r))) in self.bands.iter().zip(&bands).enumerate() {
            let n = blk.nodes.len();
            if blk.nodes.left != l || blk.nodes.right != r {
                return Err(Error::InvalidInput(format!("band block {k} does not match band [{l}, {r}]")));
            }
            if blk.density.len() != n || blk.weights.len() != n || blk.nodes.theta.len() != n || blk.nodes.w_theta.len() != n {
                return Err(Error::InvalidInput(format!("band block {k} has inconsistent lengths")));
            }
            if blk.density.iter().chain(&blk.weights).any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidInput(format!("band block {k} has a negative or non-finite value")));
            }
        }
        for pm in &self.point_masses {
            if !(pm.x.is_finite() && pm.w.is_finite() && pm.w > 0.0) {
                return Err(Error::InvalidInput(format!("invalid point mass {pm:?}")));
            }
            if self.set.contains(pm.x) {
                return Err(Error::InvalidInput(format!("point mass at {} lies on E", pm.x)));
            }
        }
        Ok(())
    }

    /// Builds from a density closure `f`; edge exponents are read off `f` near each end.
    pub fn from_density<F: Fn(f64) -> f64>(set: &FiniteGapSet, order: usize, f: F) -> Result<Self> {
        let exps: Vec<(f64, f64)> = set.bands().iter().map(|&(l, r)| estimate_edge_exponents(l, r, &f)).collect();
        Self::from_parts(set, order, |_, nodes, k| f(nodes.t[k]), |_, nodes, k| nodes.lebesgue_weights()[k] * f(nodes.t[k]), exps)
    }

    /// Builds from node-wise density values `f(band, nodes, k)` and weights
    /// `w(band, nodes, k) = f(t_k) dt/dθ · w_θ`.
    pub(crate) fn from_parts<F, W>(set: &FiniteGapSet, order: usize, f: F, w: W, exps: Vec<(f64, f64)>) -> Result<Self>
    where
        F: Fn(usize, &AngleNodes, usize) -> f64,
        W: Fn(usize, &AngleNodes, usize) -> f64,
    {
        if order < 8 {
            return Err(Error::InvalidInput(format!("quadrature order {order} too small")));
        }
        let bands = set
            .bands()
            .iter()
            .enumerate()
            .map(|(b, &(l, r))| {
                let nodes = AngleNodes::new(l, r, order);
                let density = (0..nodes.len()).map(|k| f(b, &nodes, k)).collect();
                let weights = (0..nodes.len()).map(|k| w(b, &nodes, k)).collect();
                BandSamples { nodes, density, weights, edge_exponents: exps[b] }
            })
            .collect();
        let m = DiscretizedMeasure { set: set.clone(), order, bands, point_masses: Vec::new() };
        m.validate()?;
        Ok(m)
    }

    /// Builds from density samples at the angle nodes of order `order`.
    pub fn from_samples(set: &FiniteGapSet, order: usize, density: Vec<Vec<f64>>, exps: Option<Vec<(f64, f64)>>) -> Result<Self> {
        if density.len() != set.num_bands() {
            return Err(Error::InvalidInput("one density vector per band required".into()));
        }
        let bands = set
            .bands()
            .iter()
            .zip(density)
            .enumerate()
            .map(|(b, (&(l, r), dens))| {
                let nodes = AngleNodes::new(l, r, order);
                if dens.len() != nodes.len() {
                    return Err(Error::InvalidInput(format!("band {b}: expected {} samples", nodes.len())));
                }
                let weights = nodes.lebesgue_weights().iter().zip(&dens).map(|(w, f)| w * f).collect();
                let edge_exponents = match &exps {
                    Some(e) => e[b],
                    None => estimate_edge_exponents_from_samples(&nodes, &dens),
                };
                Ok(BandSamples { nodes, density: dens, weights, edge_exponents })
            })
            .collect::<Result<Vec<_>>>()?;
        let m = DiscretizedMeasure { set: set.clone(), order, bands, point_masses: Vec::new() };
        m.validate()?;
        Ok(m)
    }

    /// The equilibrium measure, on the nodes of `green`.
    pub fn equilibrium(green: &GreenFunction) -> Result<Self> {
        let set = green.set();
        let exps = vec![(-0.5, -0.5); set.num_bands()];
        Self::from_parts(
            set,
            green.quad_order(),
            |_, nodes, k| {
                green.angle_density(nodes.t[k], (nodes.left, nodes.right)) / (nodes.half() * nodes.theta[k].sin())
            },
            |_, nodes, k| nodes.w_theta[k] * green.angle_density(nodes.t[k], (nodes.left, nodes.right)),
            exps,
        )
    }

    /// `sqrt(4 - t^2) / (2π) dt` on `[-2, 2]`.
    pub fn chebyshev_second_kind(order: usize) -> Result<Self> {
        let set = FiniteGapSet::interval(-2.0, 2.0)?;
        Self::from_parts(
            &set,
            order,
            |_, nodes, k| nodes.theta[k].sin() / PI,
            |_, nodes, k| {
                let s = nodes.theta[k].sin();
                nodes.w_theta[k] * 2.0 * s * s / PI
            },
            vec![(0.5, 0.5)],
        )
    }

    /// `dt / (π sqrt(4 - t^2))` on `[-2, 2]`.
    pub fn chebyshev_first_kind(order: usize) -> Result<Self> {
        let set = FiniteGapSet::interval(-2.0, 2.0)?;
        Self::from_parts(
            &set,
            order,
            |_, nodes, k| 1.0 / (2.0 * PI * nodes.theta[k].sin()),
            |_, nodes, k| nodes.w_theta[k] / PI,
            vec![(-0.5, -0.5)],
        )
    }

    /// Normalized Lebesgue measure on `E`.
    pub fn uniform(set: &FiniteGapSet, order: usize) -> Result<Self> {
        let total: f64 = set.bands().iter().map(|(l, r)| r - l).sum();
        Self::from_parts(
            set,
            order,
            |_, _, _| 1.0 / total,
            |_, nodes, k| nodes.lebesgue_weights()[k] / total,
            vec![(0.0, 0.0); set.num_bands()],
        )
    }

    /// Adds a point mass (no renormalization).
    pub fn with_point_mass(mut self, x: f64, w: f64) -> Result<Self> {
        self.point_masses.push(PointMass { x, w });
        self.validate()?;
        Ok(self)
    }

    /// Scales the whole measure to total mass one.
    pub fn normalized(mut self) -> Self {
        let total = self.total_mass();
        for b in &mut self.bands {
            b.density.iter_mut().for_each(|v| *v /= total);
            b.weights.iter_mut().for_each(|v| *v /= total);
        }
        self.point_masses.iter_mut().for_each(|p| p.w /= total);
        self
    }

    pub fn set(&self) -> &FiniteGapSet {
        &self.set
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bands(&self) -> &[BandSamples] {
        &self.bands
    }

    pub fn point_masses(&self) -> &[PointMass] {
        &self.point_masses
    }

    pub fn ac_mass(&self) -> f64 {
        self.bands.iter().flat_map(|b| &b.weights).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.ac_mass() + self.point_masses.iter().map(|p| p.w).sum::<f64>()
    }

    /// All nodes and weights, point masses last.
    pub fn nodes_and_weights(&self) -> (Vec<f64>, Vec<f64>) {
        let mut t = Vec::new();
        let mut w = Vec::new();
        for b in &self.bands {
            t.extend_from_slice(&b.nodes.t);
            w.extend_from_slice(&b.weights);
        }
        for p in &self.point_masses {
            t.push(p.x);
            w.push(p.w);
        }
        (t, w)
    }

    pub fn node_count(&self) -> usize {
        self.bands.iter().map(|b| b.nodes.len()).sum::<usize>() + self.point_masses.len()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut phi: F) -> f64 {
        let (t, w) = self.nodes_and_weights();
        t.iter().zip(&w).map(|(&t, &w)| w * phi(t)).sum()
    }

    /// Fraction of nodes with positive density, per band.
    pub fn positive_fraction(&self) -> Vec<f64> {
        self.bands
            .iter()
            .map(|b| b.density.iter().filter(|&&v| v > 0.0).count() as f64 / b.density.len() as f64)
            .collect()
    }

    /// Whether `x` is farther from `E` than the node spacing near its closest point on `E`.
    pub fn is_resolved(&self, x: Complex64) -> bool {
        let d = self.set.distance(x);
        let Some(band) = self
            .bands
            .iter()
            .min_by(|p, q| band_distance(p, x).total_cmp(&band_distance(q, x)))
        else {
            return d > 0.0;
        };
        let p = x.re.clamp(band.nodes.left, band.nodes.right);
        let t = &band.nodes.t;
        // Nodes are in decreasing order of t.
        let k = t.iter().position(|&tk| tk <= p).unwrap_or(t.len() - 1).max(1);
        let spacing = (t[k - 1] - t[k]).abs();
        d > spacing
    }
}

fn band_distance(b: &BandSamples, x: Complex64) -> f64 {
    let p = x.re.clamp(b.nodes.left, b.nodes.right);
    (x - p).norm()
}

/// `m(x) = ∫ dμ(t) / (t - x)` by quadrature; exact for point masses.
pub fn m_function(mu: &DiscretizedMeasure, x: Complex64) -> Result<Complex64> {
    if x.re.is_nan() || x.im.is_nan() {
        return Err(Error::InvalidInput("NaN argument to m-function".into()));
    }
    let (t, w) = mu.nodes_and_weights();
    let mut acc = Complex64::new(0.0, 0.0);
    for (&tk, &wk) in t.iter().zip(&w) {
        let d = tk - x;
        if d.norm() == 0.0 {
            return Err(Error::InvalidInput(format!("m-function evaluated at a node {tk}")));
        }
        acc += wk / d;
    }
    Ok(acc)
}

/// First `n` recurrence coefficients of `mu` by Lanczos with full reorthogonalization.
pub fn stieltjes_coeffs(mu: &DiscretizedMeasure, n: usize) -> Result<JacobiCoeffs> {
    let (t, w) = mu.nodes_and_weights();
    let (a, b) = lanczos(&t, &w, n)?;
    JacobiCoeffs::from_table(a, b)
}

pub(crate) fn lanczos(t: &[f64], w: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = t.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    if 2 * n > m {
        return Err(Error::Resolution(format!(
            "{n} coefficients need at least {} quadrature nodes, measure has {m}; increase quad_order",
            2 * n
        )));
    }
    let total: f64 = w.iter().sum();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    basis.push(w.iter().map(|wi| (wi / total).sqrt()).collect());
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for k in 0..n {
        let q = &basis[k];
        let mut v: Vec<f64> = q.iter().zip(t).map(|(qi, ti)| qi * ti).collect();
        let bk: f64 = v.iter().zip(q).map(|(vi, qi)| vi * qi).sum();
        for i in 0..m {
            v[i] -= bk * q[i];
            if k > 0 {
                v[i] -= a[k - 1] * basis[k - 1][i];
            }
        }
        for _ in 0..2 {
            for p in &basis {
                let c: f64 = v.iter().zip(p).map(|(vi, pi)| vi * pi).sum();
                v.iter_mut().zip(p).for_each(|(vi, pi)| *vi -= c * pi);
            }
        }
        let ak = v.iter().map(|vi| vi * vi).sum::<f64>().sqrt();
        if !(ak > 1e-14) {
            return Err(Error::Resolution(format!(
                "Lanczos breakdown at step {}: measure supported on too few effective nodes",
                k + 1
            )));
        }
        b.push(bk);
        a.push(ak);
        basis.push(v.into_iter().map(|vi| vi / ak).collect());
    }
    Ok((a, b))
}

fn estimate_edge_exponents<F: Fn(f64) -> f64>(l: f64, r: f64, f: &F) -> (f64, f64) {
    let h = r - l;
    let (d1, d2) = (1e-4 * h, 1e-7 * h);
    let slope = |f1: f64, f2: f64| {
        if !(f1 > 0.0 && f2 > 0.0) || !f1.is_finite() || !f2.is_finite() {
            return 0.0;
        }
        let s = (f2 / f1).ln() / (d2 / d1).ln();
        (2.0 * s).round() / 2.0
    };
    (slope(f(l + d1), f(l + d2)), slope(f(r - d1), f(r - d2)))
}

pub(crate) fn estimate_edge_exponents_from_samples(nodes: &AngleNodes, density: &[f64]) -> (f64, f64) {
    let n = nodes.len();
    let fit = |i: usize, j: usize, g: &dyn Fn(usize) -> f64| {
        let (fi, fj) = (density[i], density[j]);
        if !(fi > 0.0 && fj > 0.0) {
            return 0.0;
        }
        let s = (fi / fj).ln() / (g(i) / g(j)).ln();
        (2.0 * s).round() / 2.0
    };
    let right = fit(0, 1, &|k| nodes.one_minus_cos(k));
    let left = fit(n - 1, n - 2, &|k| nodes.one_plus_cos(k));
    (left, right)
}
