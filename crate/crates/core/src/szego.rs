//! Szegő-class diagnostics: the Szegő integral `∫ log f dμ_E`, the relative entropy
//! `∫ log(f_E / f) dμ_E`, and the normalized products `a_1 ... a_n / cap^n`.
//!
//! `log f` on a band is split as `γ_l log(1 + cos θ) + γ_r log(1 - cos θ) + smooth`, where
//! `γ_l`, `γ_r` are the edge exponents stored with the measure. The two logarithmic
//! moments of `μ_E` are done by cosine series, the smooth rest by Gauss–Legendre.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gapset::{log_edge_moments, AngleNodes, GreenFunction};
use crate::jacobi::{stieltjes_coeffs, DiscretizedMeasure, JacobiCoeffs};

/// A real number or one of the two infinities, never encoded as a float sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extended {
    Finite(f64),
    PosInfinity,
    NegInfinity,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }
}

/// Fraction of band nodes with positive density required for "essential support = E".
pub const SUPPORT_FRACTION: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SzegoReport {
    pub szego_integral: Extended,
    pub blaschke_sum: f64,
    pub normalized_leading: Vec<f64>,
    pub entropy: Extended,
    pub member: bool,
    pub reasons: Vec<String>,
}

fn check_sets(mu: &DiscretizedMeasure, green: &GreenFunction) -> Result<()> {
    if mu.set() != green.set() {
        return Err(Error::InvalidInput("measure and Green's function live on different sets".into()));
    }
    Ok(())
}

/// `∫ log φ dμ_E` over one band for samples of `φ` with the given edge exponents.
fn band_log_integral(green: &GreenFunction, nodes: &AngleNodes, phi: &[f64], exps: (f64, f64)) -> Extended {
    if phi.iter().any(|&v| !(v > 0.0)) {
        return Extended::NegInfinity;
    }
    let band = (nodes.left, nodes.right);
    let psi: Vec<f64> = nodes.t.iter().map(|&t| green.angle_density(t, band)).collect();
    let (lp, lm) = log_edge_moments(nodes, &psi);
    let (gl, gr) = exps;
    let smooth: f64 = (0..nodes.len())
        .map(|k| {
            let rest = phi[k].ln() - gl * nodes.one_plus_cos(k).ln() - gr * nodes.one_minus_cos(k).ln();
            nodes.w_theta[k] * psi[k] * rest
        })
        .sum();
    Extended::Finite(gl * lp + gr * lm + smooth)
}

/// `∫_E log f dμ_E`.
pub fn szego_integral(mu: &DiscretizedMeasure, green: &GreenFunction) -> Result<Extended> {
    check_sets(mu, green)?;
    let mut total = 0.0;
    for b in mu.bands() {
        match band_log_integral(green, &b.nodes, &b.density, b.edge_exponents) {
            Extended::Finite(v) => total += v,
            other => return Ok(other),
        }
    }
    Ok(Extended::Finite(total))
}

/// `∫_E log f_E dμ_E`, on the nodes of `mu`.
fn equilibrium_log_integral(mu: &DiscretizedMeasure, green: &GreenFunction) -> f64 {
    mu.bands()
        .iter()
        .map(|b| {
            let band = (b.nodes.left, b.nodes.right);
            let h = b.nodes.half();
            let fe: Vec<f64> = (0..b.nodes.len())
                .map(|k| green.angle_density(b.nodes.t[k], band) / (h * b.nodes.theta[k].sin()))
                .collect();
            band_log_integral(green, &b.nodes, &fe, (-0.5, -0.5)).finite().unwrap_or(f64::NAN)
        })
        .sum()
}

/// `S(μ) = ∫ log(f_E / f) dμ_E`; `+∞` when the Szegő integral diverges.
pub fn relative_entropy(mu: &DiscretizedMeasure, green: &GreenFunction) -> Result<Extended> {
    Ok(match szego_integral(mu, green)? {
        Extended::Finite(s) => Extended::Finite(equilibrium_log_integral(mu, green) - s),
        _ => Extended::PosInfinity,
    })
}

/// `u_n = a_1 ... a_n / cap^n` for `n = 1..=n_max`, accumulated in log space.
pub fn normalized_leading(j: &JacobiCoeffs, cap: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(cap > 0.0) {
        return Err(Error::InvalidInput(format!("capacity must be positive, got {cap}")));
    }
    let (a, _) = j.prefix(n_max)?;
    let lc = cap.ln();
    let mut acc = 0.0;
    Ok(a.iter()
        .map(|ak| {
            acc += ak.ln() - lc;
            acc.exp()
        })
        .collect())
}

/// Aggregate Szegő-class report.
pub fn membership(mu: &DiscretizedMeasure, green: &GreenFunction) -> Result<SzegoReport> {
    check_sets(mu, green)?;
    let mut reasons = Vec::new();
    let szego = szego_integral(mu, green)?;
    if !szego.is_finite() {
        reasons.push("Szegő integral −∞".to_string());
    }
    let xs: Vec<f64> = mu.point_masses().iter().map(|p| p.x).collect();
    let blaschke = green.blaschke_sum(&xs)?;
    if !blaschke.is_finite() {
        reasons.push("Blaschke sum diverges".to_string());
    }
    for (k, frac) in mu.positive_fraction().iter().enumerate() {
        if *frac < SUPPORT_FRACTION {
            reasons.push(format!("density positive on only {:.1}% of band {k}", 100.0 * frac));
        }
    }
    let entropy = relative_entropy(mu, green)?;
    let n_lead = (mu.node_count() / 2).min(64);
    let leading = if reasons.is_empty() {
        let j = stieltjes_coeffs(&mu.clone().normalized(), n_lead)?;
        normalized_leading(&j, green.capacity(), n_lead)?
    } else {
        Vec::new()
    };
    Ok(SzegoReport {
        szego_integral: szego,
        blaschke_sum: blaschke,
        normalized_leading: leading,
        entropy,
        member: reasons.is_empty(),
        reasons,
    })
}
