//! Experiment configs and the batch runner behind the `szegolab` binary.
//!
//! Configs are JSON with `"schema": 1`; unknown keys are rejected. Exit codes:
//! 0 all checks pass, 1 a check fails, 2 schema or config error, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::acceptance;
use crate::asymptotics::{green_ratio, growth_envelope, l2_asymptotics, poly_ratio_scan};
use crate::dynamics::{
    divisor_distance, identify_torus_point, interlacing_check, orbit_error, perturb_coeffs, stripped_measure,
    ExpPerturbation, FitOptions,
};
use crate::error::Error;
use crate::gapset::{FiniteGapSet, GreenFunction, DEFAULT_QUAD_ORDER};
use crate::io::Table;
use crate::jacobi::{stieltjes_coeffs, DiscretizedMeasure, JacobiCoeffs, PointMass};
use crate::jost::{lemma_rho_bound, JostFunction, Reconstruction};
use crate::szego::membership;
use crate::torus::{Divisor, TorusPoint};

pub const SCHEMA_VERSION: u32 = 1;
pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Schema(String),
    #[error("numerical failure: {0}")]
    Numerical(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidSet(_) | Error::InvalidInput(_) | Error::UnsupportedSet(_) => RunError::Schema(e.to_string()),
            other => RunError::Numerical(other),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Schema(_) => EXIT_SCHEMA,
            RunError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

fn schema<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Schema(e.to_string())
}

pub type RunResult<T> = std::result::Result<T, RunError>;

/// Which subcommand a config belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gapset,
    Torus,
    Szego,
    Dynamics,
    Jost,
    Asymptotics,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureSource {
    Equilibrium,
    ChebyshevFirstKind,
    ChebyshevSecondKind,
    Uniform,
    /// The half-line measure `μ⁺` of the config divisor.
    TorusPlus,
    /// Reconstructed from the config coefficients.
    Reconstructed { depth: usize },
    Inline(DiscretizedMeasure),
    File { path: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub source: MeasureSource,
    #[serde(default)]
    pub point_masses: Vec<PointMass>,
    #[serde(default)]
    pub normalize: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffSource {
    /// `J⁺` of the config divisor.
    Torus,
    Free,
    ChebyshevFirstKind,
    /// Lanczos coefficients of the config measure.
    Measure,
    Table { a: Vec<f64>, b: Vec<f64> },
    Periodic { a: Vec<f64>, b: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Operation {
    /// Green's function samples `(x, g(x))`.
    Green {
        #[serde(default)]
        x: Vec<f64>,
    },
    /// Two-sided coefficient window of the torus point.
    Torus { lo: i64, hi: i64 },
    Szego,
    Dynamics {
        n_max: usize,
        #[serde(default)]
        fit: FitOptions,
        #[serde(default)]
        tail_from: Option<usize>,
    },
    Interlacing { trials: usize, n: usize, max_strip: usize },
    Jost { radii: Vec<f64>, angles: Vec<f64> },
    BlaschkeBound { configurations: usize, max_points: usize, radii: Vec<f64> },
    Ratio {
        x: Vec<[f64; 2]>,
        n_max: usize,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    Envelope { x: Vec<[f64; 2]>, n_lo: usize, n_hi: usize },
    GreenRatio { x: [f64; 2], n: Vec<i64> },
    L2 {
        n: Vec<usize>,
        #[serde(default)]
        reconstruction: Option<Reconstruction>,
    },
}

fn default_tol() -> f64 {
    1e-10
}

fn default_order() -> usize {
    DEFAULT_QUAD_ORDER
}

impl Operation {
    pub fn family(&self) -> Family {
        match self {
            Operation::Green { .. } => Family::Gapset,
            Operation::Torus { .. } => Family::Torus,
            Operation::Szego => Family::Szego,
            Operation::Dynamics { .. } | Operation::Interlacing { .. } => Family::Dynamics,
            Operation::Jost { .. } | Operation::BlaschkeBound { .. } => Family::Jost,
            Operation::Ratio { .. } | Operation::Envelope { .. } | Operation::GreenRatio { .. } | Operation::L2 { .. } => {
                Family::Asymptotics
            }
        }
    }
}

/// A bound on a named metric of the run.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MetricCheck {
    pub metric: String,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub set: FiniteGapSet,
    pub operation: Operation,
    #[serde(default)]
    pub divisor: Option<Divisor>,
    #[serde(default)]
    pub measure: Option<MeasureConfig>,
    #[serde(default)]
    pub coefficients: Option<CoeffSource>,
    #[serde(default)]
    pub perturbation: Option<ExpPerturbation>,
    #[serde(default)]
    pub checks: Vec<MetricCheck>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_order")]
    pub quad_order: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> RunResult<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(schema)?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(RunError::Schema(format!("unsupported schema {} (expected {SCHEMA_VERSION})", cfg.schema)));
        }
        if cfg.quad_order < 16 {
            return Err(RunError::Schema(format!("quad_order must be at least 16, got {}", cfg.quad_order)));
        }
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> RunResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Schema(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            RunError::Schema(m) => RunError::Schema(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

/// A reported scalar.
#[derive(Debug, Clone, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub check: MetricCheck,
    pub value: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub family: Family,
    pub metrics: Vec<Metric>,
    pub checks: Vec<CheckOutcome>,
    #[serde(skip)]
    pub table: Option<Table>,
    pub output: Option<PathBuf>,
    pub passed: bool,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        }
    }

    /// Two-column text table of the metrics and checks.
    pub fn summary(&self) -> String {
        let width = self.metrics.iter().map(|m| m.name.len()).max().unwrap_or(0).max(6);
        let mut out = String::new();
        for m in &self.metrics {
            out.push_str(&format!("{:<width$}  {:.10e}\n", m.name, m.value + 0.0));
        }
        for c in &self.checks {
            let bounds = match (c.check.min, c.check.max) {
                (Some(lo), Some(hi)) => format!("in [{lo:e}, {hi:e}]"),
                (Some(lo), None) => format!(">= {lo:e}"),
                (None, Some(hi)) => format!("<= {hi:e}"),
                (None, None) => "finite".into(),
            };
            let verdict = if c.passed { "ok" } else { "FAILED" };
            out.push_str(&format!("check {} {bounds}: {verdict}\n", c.check.metric));
        }
        out
    }
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    green: Arc<GreenFunction>,
}

impl Context<'_> {
    fn set(&self) -> &FiniteGapSet {
        self.green.set()
    }

    fn divisor(&self) -> RunResult<Divisor> {
        match &self.cfg.divisor {
            Some(d) => Ok(d.clone()),
            None if self.set().num_gaps() == 0 => Ok(Divisor::empty()),
            None => Err(RunError::Schema("this operation needs a divisor".into())),
        }
    }

    fn torus(&self) -> RunResult<TorusPoint> {
        let d = self.divisor()?;
        TorusPoint::new(self.green.clone(), &d, self.cfg.quad_order).map_err(schema)
    }

    fn coefficients(&self, n: usize) -> RunResult<JacobiCoeffs> {
        let source = self.cfg.coefficients.clone().unwrap_or(CoeffSource::Torus);
        let base = match source {
            CoeffSource::Torus => self.torus()?.right_coeffs(n)?,
            CoeffSource::Free => JacobiCoeffs::free(),
            CoeffSource::ChebyshevFirstKind => JacobiCoeffs::chebyshev_first_kind(),
            CoeffSource::Measure => stieltjes_coeffs(&self.measure()?, n)?,
            CoeffSource::Table { a, b } => JacobiCoeffs::from_table(a, b).map_err(schema)?,
            CoeffSource::Periodic { a, b } => JacobiCoeffs::periodic(a, b).map_err(schema)?,
        };
        match &self.cfg.perturbation {
            Some(p) => Ok(perturb_coeffs(&base, n, |k| p.at(k))?),
            None => Ok(base),
        }
    }

    /// The torus point used as reference: the config divisor, or the identified one.
    fn reference(&self, j: &JacobiCoeffs) -> RunResult<TorusPoint> {
        if self.cfg.divisor.is_some() || self.set().num_gaps() == 0 {
            return self.torus();
        }
        Ok(identify_torus_point(j, &self.green, &FitOptions::default())?.point)
    }

    fn measure(&self) -> RunResult<DiscretizedMeasure> {
        let mc = self.cfg.measure.as_ref().ok_or_else(|| RunError::Schema("this operation needs a measure".into()))?;
        let order = self.cfg.quad_order;
        let on_standard = || -> RunResult<()> {
            if *self.set() != FiniteGapSet::interval(-2.0, 2.0)? {
                return Err(RunError::Schema("Chebyshev measures live on [-2, 2]".into()));
            }
            Ok(())
        };
        let mut mu = match &mc.source {
            MeasureSource::Equilibrium => DiscretizedMeasure::equilibrium(&self.green)?,
            MeasureSource::ChebyshevFirstKind => {
                on_standard()?;
                DiscretizedMeasure::chebyshev_first_kind(order)?
            }
            MeasureSource::ChebyshevSecondKind => {
                on_standard()?;
                DiscretizedMeasure::chebyshev_second_kind(order)?
            }
            MeasureSource::Uniform => DiscretizedMeasure::uniform(self.set(), order)?,
            MeasureSource::TorusPlus => self.torus()?.mu_plus()?.clone(),
            MeasureSource::Reconstructed { depth } => {
                let j = self.coefficients(depth + 1)?;
                let bg = self.reference(&j)?;
                stripped_measure(&j, 0, &bg, *depth, order)?
            }
            MeasureSource::Inline(m) => m.clone(),
            MeasureSource::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| RunError::Schema(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| RunError::Schema(format!("{}: {e}", path.display())))?
            }
        };
        if mu.set() != self.set() {
            return Err(RunError::Schema("the measure lives on a different set".into()));
        }
        for p in &mc.point_masses {
            mu = mu.with_point_mass(p.x, p.w).map_err(schema)?;
        }
        if mc.normalize {
            mu = mu.normalized();
        }
        Ok(mu)
    }
}

fn complex(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn metric(name: impl Into<String>, value: f64) -> Metric {
    Metric { name: name.into(), value }
}

/// Run `cfg`. `expect` restricts the accepted operation family; `out` overrides the
/// config output path.
pub fn run(cfg: &ExperimentConfig, expect: Option<Family>, out: Option<&Path>) -> RunResult<RunReport> {
    let family = cfg.operation.family();
    if let Some(f) = expect {
        if f != family {
            return Err(RunError::Schema(format!("operation belongs to {family:?}, not {f:?}")));
        }
    }
    let green = Arc::new(GreenFunction::new(&cfg.set, cfg.quad_order)?);
    let ctx = Context { cfg, green };
    let (metrics, table) = execute(&ctx)?;
    let mut checks = Vec::new();
    for c in &cfg.checks {
        let m = metrics
            .iter()
            .find(|m| m.name == c.metric)
            .ok_or_else(|| RunError::Schema(format!("unknown metric '{}' for this operation", c.metric)))?;
        let passed = m.value.is_finite() && c.min.is_none_or(|lo| m.value >= lo) && c.max.is_none_or(|hi| m.value <= hi);
        checks.push(CheckOutcome { check: c.clone(), value: m.value, passed });
    }
    let output = out.map(Path::to_path_buf).or_else(|| cfg.output.clone());
    if let (Some(path), Some(t)) = (&output, &table) {
        t.write_csv(path)?;
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(RunReport { family, metrics, checks, table, output, passed })
}

fn execute(ctx: &Context) -> RunResult<(Vec<Metric>, Option<Table>)> {
    let set = ctx.set().clone();
    let g = &ctx.green;
    match &ctx.cfg.operation {
        Operation::Green { x } => {
            let mut metrics = vec![metric("capacity", g.capacity()), metric("pw_sum", g.pw_sum())];
            for (k, c) in g.critical_points().iter().enumerate() {
                metrics.push(metric(format!("critical_point_{}", k + 1), *c));
            }
            for k in 0..set.num_bands() {
                metrics.push(metric(format!("band_mass_{}", k + 1), g.equilibrium_mass(k)?));
            }
            let mut t = Table::new(["x", "g"]);
            for &xi in x {
                t.push(vec![xi.into(), g.value_real(xi).into()])?;
            }
            Ok((metrics, Some(t)))
        }
        Operation::Torus { lo, hi } => {
            if lo > hi {
                return Err(RunError::Schema(format!("empty window [{lo}, {hi}]")));
            }
            let tp = ctx.torus()?;
            let w = tp.torus_coeffs(*lo, *hi)?;
            let mut t = Table::new(["n", "a_n", "b_n"]);
            for n in *lo..=*hi {
                t.push(vec![n.into(), w.a(n).into(), w.b(n).into()])?;
            }
            let metrics = vec![metric("a0_sq", tp.a0_sq()), metric("b0", tp.b0()), metric("capacity", g.capacity())];
            Ok((metrics, Some(t)))
        }
        Operation::Szego => {
            let mu = ctx.measure()?;
            let r = membership(&mu, g)?;
            let ext = |e: crate::szego::Extended| match e {
                crate::szego::Extended::Finite(v) => v,
                crate::szego::Extended::PosInfinity => f64::INFINITY,
                crate::szego::Extended::NegInfinity => f64::NEG_INFINITY,
            };
            let mut metrics = vec![
                metric("szego_integral", ext(r.szego_integral)),
                metric("entropy", ext(r.entropy)),
                metric("blaschke_sum", r.blaschke_sum),
                metric("member", if r.member { 1.0 } else { 0.0 }),
            ];
            if let Some(last) = r.normalized_leading.last() {
                metrics.push(metric("normalized_leading_last", *last));
            }
            let mut t = Table::new(["n", "normalized_leading"]);
            for (k, v) in r.normalized_leading.iter().enumerate() {
                t.push(vec![(k + 1).into(), (*v).into()])?;
            }
            Ok((metrics, Some(t)))
        }
        Operation::Dynamics { n_max, fit, tail_from } => {
            let need = (*n_max).max(2 * fit.depth + fit.window);
            let j = ctx.coefficients(need)?;
            let id = identify_torus_point(&j, g, fit)?;
            let rep = orbit_error(&j, &id.point, *n_max)?;
            let env = rep.error_envelope();
            let tail = tail_from.unwrap_or(n_max / 2).clamp(1, *n_max);
            let half = (n_max / 2).max(1);
            let mut metrics = vec![
                metric("error_tail", env[tail - 1]),
                metric("product_oscillation", (rep.partial_products[n_max - 1] - rep.partial_products[half - 1]).abs()),
                metric("sum_oscillation", (rep.partial_sums[n_max - 1] - rep.partial_sums[half - 1]).abs()),
                metric("ell2_sum", rep.ell2_sum),
            ];
            if id.history.len() == 2 {
                metrics.push(metric("depth_agreement", divisor_distance(&set, &id.history[0].pulled_back, &id.history[1].pulled_back)));
            }
            if let (Some(d), None | Some(CoeffSource::Torus)) = (&ctx.cfg.divisor, &ctx.cfg.coefficients) {
                metrics.push(metric("generator_distance", divisor_distance(&set, id.point.divisor(), &d.normalized(&set)?)));
            }
            for (k, p) in id.point.divisor().points.iter().enumerate() {
                metrics.push(metric(format!("divisor_x_{}", k + 1), p.x));
                metrics.push(metric(format!("divisor_eps_{}", k + 1), p.eps as f64));
            }
            let mut t = Table::new(["n", "a_n", "b_n", "a_n'", "b_n'", "e_n", "prod", "sum"]);
            for k in 0..*n_max {
                t.push(vec![
                    (k + 1).into(),
                    rep.a[k].into(),
                    rep.b[k].into(),
                    rep.a_ref[k].into(),
                    rep.b_ref[k].into(),
                    rep.error_seq[k].into(),
                    rep.partial_products[k].into(),
                    rep.partial_sums[k].into(),
                ])?;
            }
            Ok((metrics, Some(t)))
        }
        Operation::Interlacing { trials, n, max_strip } => {
            if *max_strip == 0 || *max_strip >= *n {
                return Err(RunError::Schema("need 0 < max_strip < n".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
            let mut violations = 0usize;
            let mut t = Table::new(["trial", "m", "max_between", "holds"]);
            let greens = [g.clone()];
            for trial in 0..*trials {
                let j = if ctx.cfg.coefficients.is_some() || ctx.cfg.perturbation.is_some() {
                    ctx.coefficients(*n)?
                } else {
                    acceptance::sample_family_member(&mut rng, &greens, *n)?.0
                };
                let m = rng.gen_range(1..=*max_strip);
                let rep = interlacing_check(&j, m, g, *n)?;
                violations += usize::from(!rep.holds);
                t.push(vec![trial.into(), m.into(), rep.max_between.into(), rep.holds.into()])?;
            }
            Ok((vec![metric("violations", violations as f64)], Some(t)))
        }
        Operation::Jost { radii, angles } => {
            let u = JostFunction::new(&ctx.measure()?)?;
            let mut t = Table::new(["z_re", "z_im", "u_re", "u_im"]);
            for &phi in angles {
                for &r in radii {
                    let z = Complex64::from_polar(r, phi);
                    let v = u.eval(z)?;
                    t.push(vec![z.re.into(), z.im.into(), v.re.into(), v.im.into()])?;
                }
            }
            let u0 = u.eval(Complex64::new(0.0, 0.0))?;
            Ok((vec![metric("u0_re", u0.re), metric("u0_im", u0.im)], Some(t)))
        }
        Operation::BlaschkeBound { configurations, max_points, radii } => {
            if radii.is_empty() || *max_points == 0 || set.num_gaps() != 0 {
                return Err(RunError::Schema("blaschke_bound needs radii, max_points > 0 and a single interval".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
            let (lo, hi) = (set.alpha(), set.beta());
            let width = hi - lo;
            let mut violations = 0usize;
            let mut t = Table::new(["config", "points", "r", "lhs", "rhs"]);
            for k in 0..*configurations {
                let count = rng.gen_range(1..=*max_points);
                let ys: Vec<f64> = (0..count)
                    .map(|_| {
                        let d = rng.gen_range(0.005 * width..width);
                        if rng.gen_bool(0.5) { hi + d } else { lo - d }
                    })
                    .collect();
                let r = radii[k % radii.len()];
                let (lhs, rhs) = lemma_rho_bound(g, &ys, r)?;
                violations += usize::from(lhs > rhs);
                t.push(vec![k.into(), count.into(), r.into(), lhs.into(), rhs.into()])?;
            }
            Ok((vec![metric("violations", violations as f64)], Some(t)))
        }
        Operation::Ratio { x, n_max, tol } => {
            let j = ctx.coefficients(*n_max)?;
            let reference = ctx.reference(&j)?.right_coeffs(*n_max)?;
            let xs: Vec<Complex64> = x.iter().copied().map(complex).collect();
            let scan = poly_ratio_scan(&j, &reference, &set, &xs, *n_max, *tol)?;
            let mut t = Table::new(["x_re", "x_im", "n", "value_re", "value_im", "extrapolated_re", "extrapolated_im", "certified"]);
            let mut metrics = Vec::new();
            for (i, xi) in xs.iter().enumerate() {
                let lim = scan.limits[i];
                for (k, v) in scan.values[i].iter().enumerate() {
                    t.push(vec![
                        xi.re.into(),
                        xi.im.into(),
                        scan.n_list[k].into(),
                        v.re.into(),
                        v.im.into(),
                        lim.limit.re.into(),
                        lim.limit.im.into(),
                        lim.certified.into(),
                    ])?;
                }
                metrics.push(metric(format!("limit_re_{}", i + 1), lim.limit.re));
                metrics.push(metric(format!("limit_im_{}", i + 1), lim.limit.im));
            }
            metrics.push(metric("all_certified", if scan.limits.iter().all(|l| l.certified) { 1.0 } else { 0.0 }));
            Ok((metrics, Some(t)))
        }
        Operation::Envelope { x, n_lo, n_hi } => {
            let j = ctx.coefficients(*n_hi)?;
            let xs: Vec<Complex64> = x.iter().copied().map(complex).collect();
            let env = growth_envelope(&j, g, &xs, *n_lo, *n_hi)?;
            let mut t = Table::new(["x_re", "x_im", "min", "max", "ratio"]);
            for e in &env {
                t.push(vec![e.x.re.into(), e.x.im.into(), e.min.into(), e.max.into(), e.ratio().into()])?;
            }
            let worst = env.iter().map(|e| e.ratio()).fold(0.0, f64::max);
            Ok((vec![metric("max_ratio", worst)], Some(t)))
        }
        Operation::GreenRatio { x, n } => {
            let top = n.iter().copied().max().unwrap_or(1).max(1) as usize + 200;
            let j = ctx.coefficients(top)?;
            let reference = ctx.reference(&j)?.right_coeffs(top)?;
            let r = green_ratio(&j, &reference, &set, n, complex(*x))?;
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            let mut t = Table::new(["n", "deviation"]);
            for (k, v) in r.n_list.iter().zip(&r.values) {
                t.push(vec![(*k).into(), (*v).into()])?;
            }
            let last = r.values.last().copied().unwrap_or(f64::NAN);
            Ok((vec![metric("deviation_last", last)], Some(t)))
        }
        Operation::L2 { n, reconstruction } => {
            let rec = reconstruction.unwrap_or_default();
            let mu = ctx.measure()?;
            let top = n.iter().copied().max().unwrap_or(0) + rec.depth + 2;
            let j = match &ctx.cfg.coefficients {
                Some(_) => ctx.coefficients(top)?,
                None => stieltjes_coeffs(&mu, top)?,
            };
            let r = l2_asymptotics(&mu, &j, n, rec)?;
            let mut t = Table::new(["n", "ac", "sing"]);
            for ((nk, ac), sing) in n.iter().zip(&r.ac).zip(&r.sing) {
                t.push(vec![(*nk).into(), (*ac).into(), (*sing).into()])?;
            }
            let metrics = vec![
                metric("ac_last", r.ac.last().copied().unwrap_or(f64::NAN)),
                metric("sing_last", r.sing.last().copied().unwrap_or(f64::NAN)),
            ];
            Ok((metrics, Some(t)))
        }
    }
}

/// Read a bare set spec `{"alpha": .., "beta": .., "gaps": [[a, b], ..]}`.
pub fn read_set(path: &Path) -> RunResult<FiniteGapSet> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Schema(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| RunError::Schema(format!("{}: {e}", path.display())))
}

/// Config for the `gapset` subcommand from a bare set, sampling `g` on `samples` points
/// across `[α - w/2, β + w/2]`.
pub fn gapset_config(set: FiniteGapSet, samples: usize) -> ExperimentConfig {
    let (lo, hi) = (set.alpha(), set.beta());
    let w = hi - lo;
    let x = if samples < 2 {
        Vec::new()
    } else {
        (0..samples).map(|k| lo - 0.5 * w + 2.0 * w * k as f64 / (samples - 1) as f64).collect()
    };
    ExperimentConfig {
        schema: SCHEMA_VERSION,
        set,
        operation: Operation::Green { x },
        divisor: None,
        measure: None,
        coefficients: None,
        perturbation: None,
        checks: Vec::new(),
        output: None,
        seed: 0,
        quad_order: DEFAULT_QUAD_ORDER,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_json_is_a_schema_error_with_position() {
        let err = ExperimentConfig::from_json("{\n  \"schema\": 1,\n  \"set\": {\"alpha\": -2,}\n}").unwrap_err();
        assert_eq!(err.exit_code(), EXIT_SCHEMA);
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = ExperimentConfig::from_json(r#"{"schema": 1, "set": {"alpha": -2, "beta": 2}, "operation": {"kind": "szego"}, "bogus": 1}"#)
            .unwrap_err();
        assert!(err.to_string().contains("bogus"));
        let err = ExperimentConfig::from_json(r#"{"schema": 2, "set": {"alpha": -2, "beta": 2}, "operation": {"kind": "szego"}}"#).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_SCHEMA);
    }

    #[test]
    fn gapset_prints_capacity() {
        let cfg = gapset_config(FiniteGapSet::interval(-2.0, 2.0).unwrap(), 5);
        let r = run(&cfg, Some(Family::Gapset), None).unwrap();
        assert_eq!(r.metrics[0].value, 1.0);
        assert!(r.summary().contains("capacity"));
        assert_eq!(r.table.unwrap().rows.len(), 5);
    }

    #[test]
    fn checks_drive_the_exit_code() {
        let text = r#"{"schema": 1, "set": {"alpha": -2, "beta": 2},
            "operation": {"kind": "szego"},
            "measure": {"source": "chebyshev_second_kind"},
            "checks": [{"metric": "entropy", "min": 0.69, "max": 0.70}]}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let r = run(&cfg, Some(Family::Szego), None).unwrap();
        assert_eq!(r.exit_code(), EXIT_OK);
        let broken = text.replace("\"min\": 0.69, ", "");
        let broken = broken.replace("0.70", "0.5");
        let r = run(&ExperimentConfig::from_json(&broken).unwrap(), None, None).unwrap();
        assert_eq!(r.exit_code(), EXIT_CHECK_FAILED);
        let unknown = text.replace("\"entropy\"", "\"nope\"");
        let e = run(&ExperimentConfig::from_json(&unknown).unwrap(), None, None).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_SCHEMA);
        assert_eq!(run(&cfg, Some(Family::Torus), None).unwrap_err().exit_code(), EXIT_SCHEMA);
    }

    #[test]
    fn numerical_failure_exit_code() {
        let text = r#"{"schema": 1, "set": {"alpha": -2, "beta": 2},
            "operation": {"kind": "ratio", "x": [[0.5, 0.0]], "n_max": 10}}"#;
        let e = run(&ExperimentConfig::from_json(text).unwrap(), None, None).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_SCHEMA);
        let text = r#"{"schema": 1, "set": {"alpha": -2, "beta": 2},
            "measure": {"source": "chebyshev_first_kind"}, "quad_order": 32,
            "operation": {"kind": "l2", "n": [100]}}"#;
        let e = run(&ExperimentConfig::from_json(text).unwrap(), None, None).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_NUMERICAL);
    }

    #[test]
    fn dynamics_run_writes_csv() {
        let text = r#"{"schema": 1, "set": {"alpha": -3, "beta": 3, "gaps": [[-1, 1]]},
            "operation": {"kind": "dynamics", "n_max": 200},
            "divisor": {"points": [{"x": 0.4, "eps": 1}]},
            "perturbation": {"amp_a": 0.3, "rate_a": 0.8, "amp_b": 0.1, "rate_b": 0.85},
            "checks": [{"metric": "generator_distance", "max": 1e-4}, {"metric": "error_tail", "max": 1e-3}]}"#;
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("report.csv");
        let r = run(&ExperimentConfig::from_json(text).unwrap(), Some(Family::Dynamics), Some(&out)).unwrap();
        assert!(r.passed, "{}", r.summary());
        let csv = std::fs::read_to_string(&out).unwrap();
        assert!(csv.starts_with("n,a_n,b_n,a_n',b_n',e_n,prod,sum\n"));
        assert_eq!(csv.lines().count(), 201);
        let again = dir.path().join("again.csv");
        run(&ExperimentConfig::from_json(text).unwrap(), None, Some(&again)).unwrap();
        assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
    }
}
