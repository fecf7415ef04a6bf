//! Metric models: a 2-homogeneous Lagrangian `L(x, y)` on a conic domain,
//! evaluable on plain numbers and on jets.

mod expr;

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use expr::{Func, MetricExpr, ParseError, Var};

use crate::jet::{seed_at_order, JetContext, JetError, Scalar};
use crate::linalg;
use crate::math::{abs, sqrt};

/// Number of random samples used to validate a model on construction.
pub const VALIDATION_SAMPLES: usize = 50;
/// Relative tolerance of the validation checks.
pub const VALIDATION_TOLERANCE: f64 = 1e-9;
/// Fundamental tensors with a larger 1-norm condition number are treated as
/// singular.
pub const SINGULAR_CONDITION: f64 = 1e12;
/// Seed of the validation sampler.
pub const VALIDATION_SEED: u64 = 0x5eed_f125;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Randers condition violated: |b| = {norm} must be below 1")]
    RandersNorm { norm: f64 },
    #[error("amplitude {amplitude} too large; torus_conformal requires amplitude < 0.3")]
    AmplitudeTooLarge { amplitude: f64 },
    #[error("L is not 2-homogeneous: Euler residual y·∂̇L − 2L = {residual:e} at x = {x:?}, y = {y:?}")]
    Homogeneity { residual: f64, x: Vec<f64>, y: Vec<f64> },
    #[error("fundamental tensor degenerate (condition number {condition:e}) at x = {x:?}, y = {y:?}")]
    Degenerate { condition: f64, x: Vec<f64>, y: Vec<f64> },
    #[error("fundamental tensor not positive definite at x = {x:?}, y = {y:?}")]
    NotPositiveDefinite { x: Vec<f64>, y: Vec<f64> },
    #[error("domain predicate rejected every candidate sample")]
    EmptyDomain,
}

/// Region of the chart where base points are sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum BaseDomain {
    /// The cube `[lo, hi]ⁿ`.
    Box { lo: f64, hi: f64 },
    /// The Euclidean ball of the given radius around the origin.
    Ball { radius: f64 },
    /// The flat torus `[0, 2π)ⁿ`; the model must be 2π-periodic in every `xⁱ`.
    Torus,
}

impl BaseDomain {
    pub fn contains(&self, x: &[f64]) -> bool {
        match *self {
            BaseDomain::Box { lo, hi } => x.iter().all(|&v| v >= lo && v <= hi),
            BaseDomain::Ball { radius } => x.iter().map(|v| v * v).sum::<f64>() <= radius * radius,
            BaseDomain::Torus => true,
        }
    }

    /// Axis-aligned bounding box used for grids.
    pub fn bounds(&self, dim: usize) -> (f64, f64) {
        match *self {
            BaseDomain::Box { lo, hi } => (lo, hi),
            BaseDomain::Ball { radius } => {
                let half = radius / sqrt(dim as f64);
                (-half, half)
            }
            BaseDomain::Torus => (0.0, 2.0 * PI),
        }
    }
}

/// Structural claims a model makes about itself; tests hold it to them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelFlags {
    pub positive_definite: bool,
    pub riemannian: bool,
    pub x_independent: bool,
}

#[derive(Debug, Clone)]
enum Kind {
    Euclidean,
    MinkowskiRanders { b: Vec<f64> },
    Riemannian { g: Vec<MetricExpr> },
    SphereRound { radius: f64 },
    TorusConformal { amplitude: f64 },
    Randers { alpha: Option<Vec<MetricExpr>>, beta: Vec<MetricExpr> },
    Funk,
    Expression { l: MetricExpr, domain: Option<MetricExpr> },
}

/// Parameters of a built-in family.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    Euclidean { dim: usize },
    MinkowskiRanders { b: Vec<f64> },
    Riemannian { dim: usize, g: Vec<String> },
    SphereRound { dim: usize, radius: f64 },
    TorusConformal { dim: usize, amplitude: f64 },
    /// `alpha = None` means the Euclidean α.
    Randers { dim: usize, alpha: Option<Vec<String>>, beta: Vec<String> },
    Funk { dim: usize },
}

/// Names of the built-in families with their parameter schemas.
pub const BUILTIN_SCHEMAS: &[(&str, &str)] = &[
    ("euclidean", "dim: integer >= 2"),
    ("minkowski_randers", "b: list of dim reals with |b| < 1"),
    ("riemannian", "dim: integer; g: dim*dim expressions in x1..xn (row-major)"),
    ("sphere_round", "dim: integer; radius: real > 0"),
    ("torus_conformal", "dim: integer; amplitude: real in [0, 0.3)"),
    ("randers", "dim: integer; alpha: optional dim*dim expressions in x; beta: dim expressions in x with |beta|_alpha < 1"),
    ("funk", "dim: integer >= 2 (unit ball)"),
];

/// A pseudo-Finsler Lagrangian together with its domain and claims.
#[derive(Debug, Clone)]
pub struct MetricModel {
    name: String,
    dim: usize,
    kind: Kind,
    base: BaseDomain,
    flags: ModelFlags,
}

impl MetricModel {
    pub fn builtin(spec: Builtin) -> Result<Self, MetricError> {
        match spec {
            Builtin::Euclidean { dim } => Self::euclidean(dim),
            Builtin::MinkowskiRanders { b } => Self::minkowski_randers(&b),
            Builtin::Riemannian { dim, g } => {
                let refs: Vec<&str> = g.iter().map(String::as_str).collect();
                Self::riemannian(dim, &refs)
            }
            Builtin::SphereRound { dim, radius } => Self::sphere_round(dim, radius),
            Builtin::TorusConformal { dim, amplitude } => Self::torus_conformal(dim, amplitude),
            Builtin::Randers { dim, alpha, beta } => {
                let alpha_refs: Option<Vec<&str>> =
                    alpha.as_ref().map(|a| a.iter().map(String::as_str).collect());
                let beta_refs: Vec<&str> = beta.iter().map(String::as_str).collect();
                Self::randers(dim, alpha_refs.as_deref(), &beta_refs)
            }
            Builtin::Funk { dim } => Self::funk(dim),
        }
    }

    fn check_dim(dim: usize) -> Result<(), MetricError> {
        if !(2..=8).contains(&dim) {
            return Err(MetricError::InvalidParameter(format!(
                "dimension must lie in 2..=8, got {dim}"
            )));
        }
        Ok(())
    }

    fn build(
        name: String,
        dim: usize,
        kind: Kind,
        base: BaseDomain,
        flags: ModelFlags,
    ) -> Result<Self, MetricError> {
        let model = Self {
            name,
            dim,
            kind,
            base,
            flags,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn euclidean(dim: usize) -> Result<Self, MetricError> {
        Self::check_dim(dim)?;
        Self::build(
            format!("euclidean({dim})"),
            dim,
            Kind::Euclidean,
            BaseDomain::Torus,
            ModelFlags {
                positive_definite: true,
                riemannian: true,
                x_independent: true,
            },
        )
    }

    /// `F = |y| + b·y` with a constant covector `b`.
    pub fn minkowski_randers(b: &[f64]) -> Result<Self, MetricError> {
        let dim = b.len();
        Self::check_dim(dim)?;
        let norm = sqrt(b.iter().map(|v| v * v).sum());
        if norm >= 1.0 {
            return Err(MetricError::RandersNorm { norm });
        }
        Self::build(
            format!("minkowski_randers({dim}, b={b:?})"),
            dim,
            Kind::MinkowskiRanders { b: b.to_vec() },
            BaseDomain::Torus,
            ModelFlags {
                positive_definite: true,
                riemannian: false,
                x_independent: true,
            },
        )
    }

    /// `L = g_ij(x) yⁱ yʲ` with `g` given as `dim²` row-major expressions in `x`.
    pub fn riemannian(dim: usize, g: &[&str]) -> Result<Self, MetricError> {
        Self::check_dim(dim)?;
        let g = parse_matrix(g, dim)?;
        Self::build(
            format!("riemannian({dim})"),
            dim,
            Kind::Riemannian { g },
            BaseDomain::Box { lo: -1.0, hi: 1.0 },
            ModelFlags {
                positive_definite: true,
                riemannian: true,
                x_independent: false,
            },
        )
    }

    /// Round sphere of the given radius in a stereographic chart,
    /// `L = 4R²|y|² / (1 + |x|²)²`.
    pub fn sphere_round(dim: usize, radius: f64) -> Result<Self, MetricError> {
        Self::check_dim(dim)?;
        if radius.is_nan() || radius <= 0.0 {
            return Err(MetricError::InvalidParameter(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Self::build(
            format!("sphere_round({dim}, {radius})"),
            dim,
            Kind::SphereRound { radius },
            BaseDomain::Box { lo: -0.5, hi: 0.5 },
            ModelFlags {
                positive_definite: true,
                riemannian: true,
                x_independent: false,
            },
        )
    }

    /// `L = exp(2ε Σ sin xⁱ) |y|²` on the flat torus.
    pub fn torus_conformal(dim: usize, amplitude: f64) -> Result<Self, MetricError> {
        Self::check_dim(dim)?;
        if amplitude.is_nan() || !(0.0..0.3).contains(&abs(amplitude)) {
            return Err(MetricError::AmplitudeTooLarge { amplitude });
        }
        Self::build(
            format!("torus_conformal({dim}, {amplitude})"),
            dim,
            Kind::TorusConformal { amplitude },
            BaseDomain::Torus,
            ModelFlags {
                positive_definite: true,
                riemannian: true,
                x_independent: false,
            },
        )
    }

    /// `F = √(a_ij(x) yⁱ yʲ) + b_i(x) yⁱ`; `alpha = None` is the Euclidean α.
    pub fn randers(dim: usize, alpha: Option<&[&str]>, beta: &[&str]) -> Result<Self, MetricError> {
        Self::check_dim(dim)?;
        let alpha = alpha.map(|a| parse_matrix(a, dim)).transpose()?;
        if beta.len() != dim {
            return Err(MetricError::InvalidParameter(format!(
                "beta needs {dim} components, got {}",
                beta.len()
            )));
        }
        let beta = beta
            .iter()
            .map(|s| MetricExpr::parse_base(s, dim))
            .collect::<Result<Vec<_>, _>>()?;
        let model = Self {
            name: format!("randers({dim})"),
            dim,
            kind: Kind::Randers { alpha, beta },
            base: BaseDomain::Box { lo: -1.0, hi: 1.0 },
            flags: ModelFlags {
                positive_definite: true,
                riemannian: false,
                x_independent: false,
            },
        };
        // the Randers condition is part of the domain predicate; report it
        // explicitly when it fails somewhere on the sampling box
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
        for _ in 0..VALIDATION_SAMPLES {
            let x = model.sample_base(&mut rng);
            let norm = model.randers_norm(&x)?;
            if norm >= 1.0 {
                return Err(MetricError::RandersNorm { norm });
            }
        }
        model.validate()?;
        Ok(model)
    }

    /// The Funk metric of the unit ball,
    /// `F = (√((1−|x|²)|y|² + ⟨x,y⟩²) + ⟨x,y⟩) / (1−|x|²)`.
    pub fn funk(dim: usize) -> Result<Self, MetricError> {
        Self::check_dim(dim)?;
        Self::build(
            format!("funk({dim})"),
            dim,
            Kind::Funk,
            BaseDomain::Ball { radius: 0.6 },
            ModelFlags {
                positive_definite: true,
                riemannian: false,
                x_independent: false,
            },
        )
    }

    /// A model from a DSL expression for `L`, with an optional domain
    /// expression (the domain is where it is positive). Validation runs before
    /// the model is returned.
    pub fn from_expression(
        name: &str,
        dim: usize,
        source: &str,
        domain: Option<&str>,
        flags: ModelFlags,
        base: BaseDomain,
    ) -> Result<Self, MetricError> {
        Self::check_dim(dim)?;
        let l = MetricExpr::parse(source, dim)?;
        let domain = domain.map(|d| MetricExpr::parse(d, dim)).transpose()?;
        Self::build(String::from(name), dim, Kind::Expression { l, domain }, base, flags)
    }

    /// [`MetricModel::from_expression`] with default flags (positive definite
    /// claimed) and the box `[-1, 1]ⁿ`.
    pub fn parse_dsl(source: &str, dim: usize) -> Result<Self, MetricError> {
        Self::from_expression(
            source,
            dim,
            source,
            None,
            ModelFlags {
                positive_definite: true,
                ..ModelFlags::default()
            },
            BaseDomain::Box { lo: -1.0, hi: 1.0 },
        )
    }

    /// Same model with a different sampling region. Validation is rerun.
    pub fn with_base(mut self, base: BaseDomain) -> Result<Self, MetricError> {
        self.base = base;
        self.validate()?;
        Ok(self)
    }

    /// Same model under another display name.
    pub fn renamed(mut self, name: &str) -> Self {
        self.name = String::from(name);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn base(&self) -> BaseDomain {
        self.base
    }

    pub fn flags(&self) -> ModelFlags {
        self.flags
    }

    pub fn is_periodic(&self) -> bool {
        self.base == BaseDomain::Torus
    }

    /// Evaluates `L(x, y)`.
    pub fn lagrangian<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S, JetError> {
        let n = self.dim;
        if x.len() != n || y.len() != n {
            return Err(JetError::DimensionMismatch {
                expected: n,
                found: x.len().min(y.len()),
            });
        }
        let norm2 = |v: &[S]| {
            let mut acc = v[0].mul(&v[0]);
            for c in &v[1..] {
                acc = acc.add(&c.mul(c));
            }
            acc
        };
        let dot = |a: &[S], b: &[S]| {
            let mut acc = a[0].mul(&b[0]);
            for (p, q) in a.iter().zip(b).skip(1) {
                acc = acc.add(&p.mul(q));
            }
            acc
        };
        match &self.kind {
            Kind::Euclidean => Ok(norm2(y)),
            Kind::MinkowskiRanders { b } => {
                let mut beta = y[0].scale(b[0]);
                for (c, &bi) in y.iter().zip(b).skip(1) {
                    beta = beta.add(&c.scale(bi));
                }
                let f = norm2(y).sqrt()?.add(&beta);
                Ok(f.mul(&f))
            }
            Kind::Riemannian { g } => quadratic_form(g, x, y),
            Kind::SphereRound { radius } => {
                let denom = norm2(x).add_const(1.0);
                let conf = denom.mul(&denom).recip_or()?;
                Ok(norm2(y).mul(&conf).scale(4.0 * radius * radius))
            }
            Kind::TorusConformal { amplitude } => {
                let mut s = x[0].sin();
                for c in &x[1..] {
                    s = s.add(&c.sin());
                }
                Ok(s.scale(2.0 * amplitude).exp().mul(&norm2(y)))
            }
            Kind::Randers { alpha, beta } => {
                let a2 = match alpha {
                    Some(a) => quadratic_form(a, x, y)?,
                    None => norm2(y),
                };
                let mut b = beta[0].eval(x, y)?.mul(&y[0]);
                for (e, c) in beta.iter().zip(y).skip(1) {
                    b = b.add(&e.eval(x, y)?.mul(c));
                }
                let f = a2.sqrt()?.add(&b);
                Ok(f.mul(&f))
            }
            Kind::Funk => {
                let xx = norm2(x);
                let xy = dot(x, y);
                let yy = norm2(y);
                let one_minus = xx.neg().add_const(1.0);
                let root = one_minus.mul(&yy).add(&xy.mul(&xy)).sqrt()?;
                let f = root.add(&xy).div(&one_minus)?;
                Ok(f.mul(&f))
            }
            Kind::Expression { l, .. } => l.eval(x, y),
        }
    }

    /// `F = √L`.
    pub fn finsler_function(&self, x: &[f64], y: &[f64]) -> Result<f64, JetError> {
        Scalar::sqrt(&self.lagrangian(x, y)?)
    }

    /// `‖β‖_α` for Randers models, 0 for everything else.
    fn randers_norm(&self, x: &[f64]) -> Result<f64, MetricError> {
        let Kind::Randers { alpha, beta } = &self.kind else {
            return Ok(0.0);
        };
        let n = self.dim;
        let b = beta
            .iter()
            .map(|e| e.eval(x, &[]))
            .collect::<Result<Vec<f64>, _>>()?;
        let ainv = match alpha {
            Some(a) => {
                let m = a
                    .iter()
                    .map(|e| e.eval(x, &[]))
                    .collect::<Result<Vec<f64>, _>>()?;
                linalg::inverse(&m, n).ok_or(MetricError::Degenerate {
                    condition: f64::INFINITY,
                    x: x.to_vec(),
                    y: vec![],
                })?
            }
            None => (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect(),
        };
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += ainv[i * n + j] * b[i] * b[j];
            }
        }
        Ok(sqrt(s.max(0.0)))
    }

    /// The domain predicate `A(x, y)`.
    pub fn contains(&self, x: &[f64], y: &[f64]) -> bool {
        if x.len() != self.dim || y.len() != self.dim {
            return false;
        }
        if !x.iter().chain(y).all(|v| v.is_finite()) || y.iter().all(|&v| v == 0.0) {
            return false;
        }
        let ok = match &self.kind {
            Kind::Funk => x.iter().map(|v| v * v).sum::<f64>() < 1.0,
            Kind::Randers { .. } => matches!(self.randers_norm(x), Ok(norm) if norm < 1.0),
            Kind::Expression { domain: Some(d), .. } => matches!(d.eval(x, y), Ok(v) if v > 0.0),
            _ => true,
        };
        ok && matches!(self.lagrangian(x, y), Ok(v) if v.is_finite())
    }

    /// Draws a base point from the sampling region.
    pub fn sample_base<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.dim;
        match self.base {
            BaseDomain::Box { lo, hi } => (0..n).map(|_| rng.gen_range(lo..=hi)).collect(),
            BaseDomain::Torus => (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect(),
            BaseDomain::Ball { radius } => loop {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..=radius)).collect();
                if self.base.contains(&x) {
                    break x;
                }
            },
        }
    }

    /// `count` samples `(x, y)` with `x` uniform in the sampling region and
    /// `y` uniform on the Euclidean unit sphere, all inside the domain.
    /// Deterministic for a fixed `seed`.
    pub fn domain_sample(&self, count: usize, seed: u64) -> Result<Vec<(Vec<f64>, Vec<f64>)>, MetricError> {
        if count == 0 {
            return Err(MetricError::InvalidParameter("count must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        while out.len() < count {
            attempts += 1;
            if attempts > 1000 * count {
                return Err(MetricError::EmptyDomain);
            }
            let x = self.sample_base(&mut rng);
            let y = random_unit_vector(&mut rng, self.dim);
            if self.contains(&x, &y) {
                out.push((x, y));
            }
        }
        Ok(out)
    }

    /// Euler homogeneity and nondegeneracy (and positive definiteness, when
    /// claimed) at [`VALIDATION_SAMPLES`] random points.
    pub fn validate(&self) -> Result<(), MetricError> {
        let n = self.dim;
        let ctx = Arc::new(JetContext::new(n, 2)?);
        for (x, y) in self.domain_sample(VALIDATION_SAMPLES, VALIDATION_SEED)? {
            let point: Vec<f64> = x.iter().chain(&y).copied().collect();
            let seeds = seed_at_order(&ctx, &point, 2)?;
            let l = self.lagrangian(&seeds[..n], &seeds[n..])?;
            let mut euler = -2.0 * l.value();
            let mut dl = Vec::with_capacity(n);
            for i in 0..n {
                let d = l.derivative(n + i)?;
                euler += y[i] * d.value();
                dl.push(d);
            }
            if abs(euler) > VALIDATION_TOLERANCE * (1.0 + abs(l.value())) {
                return Err(MetricError::Homogeneity { residual: euler, x, y });
            }
            let mut g = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    g[i * n + j] = 0.5 * dl[i].derivative(n + j)?.value();
                }
            }
            let condition = linalg::condition_number(&g, n);
            if !(condition <= SINGULAR_CONDITION) {
                return Err(MetricError::Degenerate { condition, x, y });
            }
            if self.flags.positive_definite && !linalg::is_positive_definite(&g, n) {
                return Err(MetricError::NotPositiveDefinite { x, y });
            }
        }
        Ok(())
    }
}

trait RecipOr: Sized {
    fn recip_or(&self) -> Result<Self, JetError>;
}

impl<S: Scalar> RecipOr for S {
    fn recip_or(&self) -> Result<Self, JetError> {
        self.lift(1.0).div(self)
    }
}

fn parse_matrix(entries: &[&str], dim: usize) -> Result<Vec<MetricExpr>, MetricError> {
    if entries.len() != dim * dim {
        return Err(MetricError::InvalidParameter(format!(
            "expected {} matrix entries, got {}",
            dim * dim,
            entries.len()
        )));
    }
    entries
        .iter()
        .map(|s| MetricExpr::parse_base(s, dim).map_err(MetricError::from))
        .collect()
}

fn quadratic_form<S: Scalar>(g: &[MetricExpr], x: &[S], y: &[S]) -> Result<S, JetError> {
    let n = y.len();
    let mut acc: Option<S> = None;
    for i in 0..n {
        for j in i..n {
            let mut gij = g[i * n + j].eval(x, y)?;
            if i != j {
                gij = gij.add(&g[j * n + i].eval(x, y)?);
            }
            let term = gij.mul(&y[i].mul(&y[j]));
            acc = Some(match acc {
                Some(a) => a.add(&term),
                None => term,
            });
        }
    }
    Ok(acc.expect("dimension is at least 2"))
}

/// Uniform direction on the Euclidean unit sphere (Box–Muller Gaussians,
/// normalised).
pub fn random_unit_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let mut v = Vec::with_capacity(dim);
        while v.len() < dim {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen();
            let r = sqrt(-2.0 * crate::math::ln(u1));
            v.push(r * crate::math::cos(2.0 * PI * u2));
            if v.len() < dim {
                v.push(r * crate::math::sin(2.0 * PI * u2));
            }
        }
        let norm = sqrt(v.iter().map(|c| c * c).sum());
        if norm > 1e-8 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// One representative of every built-in family, covering the witnesses used
/// by the identity checks.
pub fn reference_zoo() -> Vec<MetricModel> {
    let models = [
        MetricModel::euclidean(2),
        MetricModel::euclidean(3),
        MetricModel::minkowski_randers(&[0.5, 0.0, 0.0]),
        MetricModel::riemannian(
            3,
            &[
                "exp(x2)", "0.2*x1", "0",
                "0.2*x1", "1 + x1^2", "0",
                "0", "0", "2 + sin(x3)",
            ],
        ),
        MetricModel::sphere_round(3, 1.0),
        MetricModel::sphere_round(4, 1.0),
        MetricModel::torus_conformal(2, 0.1),
        MetricModel::torus_conformal(3, 0.1),
        MetricModel::randers(3, None, &["0.3*sin(x2)", "0", "0"]),
        MetricModel::funk(2),
        MetricModel::funk(3),
    ];
    models
        .into_iter()
        .map(|m| m.expect("reference models validate"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn euclidean_value() {
        let m = MetricModel::euclidean(3).unwrap();
        let l = m.lagrangian(&[0.3, 0.1, -2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(l, 14.0);
    }

    #[test]
    fn minkowski_randers_value() {
        let m = MetricModel::minkowski_randers(&[0.5, 0.0, 0.0]).unwrap();
        let l = m.lagrangian(&[0.0; 3], &[1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(l, 2.25);
        assert_relative_eq!(m.finsler_function(&[0.0; 3], &[1.0, 0.0, 0.0]).unwrap(), 1.5);
    }

    #[test]
    fn funk_at_center_is_euclidean() {
        let m = MetricModel::funk(2).unwrap();
        assert_relative_eq!(m.finsler_function(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        // off-centre against the closed form
        let (x, y) = ([0.3, -0.2], [0.4, 1.1]);
        let xx = 0.13;
        let xy = 0.3 * 0.4 - 0.2 * 1.1;
        let yy = 0.16 + 1.21;
        let f = (libm::sqrt((1.0 - xx) * yy + xy * xy) + xy) / (1.0 - xx);
        assert_relative_eq!(m.finsler_function(&x, &y).unwrap(), f, epsilon = 1e-15);
    }

    #[test]
    fn dsl_metrics() {
        let e = MetricModel::parse_dsl("y1^2 + y2^2", 2).unwrap();
        assert_eq!(e.lagrangian(&[0.2, 0.3], &[3.0, 4.0]).unwrap(), 25.0);
        MetricModel::parse_dsl("exp(2*sin(x1)) * (y1^2 + y2^2)", 2).unwrap();
    }

    #[test]
    fn non_homogeneous_dsl_is_rejected() {
        let err = MetricModel::parse_dsl("y1^2 + x1*y2", 2).unwrap_err();
        assert!(matches!(err, MetricError::Homogeneity { .. }), "{err}");
    }

    #[test]
    fn degenerate_dsl_is_rejected() {
        let err = MetricModel::parse_dsl("y1^2", 2).unwrap_err();
        assert!(matches!(err, MetricError::Degenerate { .. }), "{err}");
    }

    #[test]
    fn builtin_parameter_errors() {
        assert!(matches!(
            MetricModel::minkowski_randers(&[0.8, 0.7]),
            Err(MetricError::RandersNorm { .. })
        ));
        assert!(matches!(
            MetricModel::torus_conformal(3, 0.4),
            Err(MetricError::AmplitudeTooLarge { .. })
        ));
        assert!(matches!(
            MetricModel::randers(2, None, &["1.5", "0"]),
            Err(MetricError::RandersNorm { .. })
        ));
        assert!(MetricModel::euclidean(1).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_in_domain() {
        let m = MetricModel::funk(2).unwrap();
        let a = m.domain_sample(20, 42).unwrap();
        let b = m.domain_sample(20, 42).unwrap();
        assert_eq!(a, b);
        for (x, y) in &a {
            assert!(x[0] * x[0] + x[1] * x[1] < 1.0);
            assert_relative_eq!(y[0] * y[0] + y[1] * y[1], 1.0, epsilon = 1e-14);
        }
        let e = MetricModel::euclidean(2).unwrap().domain_sample(3, 7).unwrap();
        assert_eq!(e.len(), 3);
        assert!(MetricModel::euclidean(2).unwrap().domain_sample(0, 7).is_err());
    }

    #[test]
    fn zoo_builds() {
        assert_eq!(reference_zoo().len(), 11);
    }
}
