//! Checkers for the integral identities and Schur-type theorems, and the
//! Einstein / weakly-Landsberg / quadratic-Ricci classification of a model.

mod checks;
mod classify;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

pub use checks::{
    check_berwald_theorem, check_bianchi, check_lemma1, check_lemma2, check_main_theorem, check_schur_corollary,
    check_section_invariance, check_stokes_torus, StokesField,
};
pub use classify::{classify, rho_estimate, ClassificationReport, Flag, RhoEstimate};

use crate::geometry::GeometryError;
use crate::jet::{seed, JetContext, JetError};
use crate::math::abs;
use crate::metric::{BaseDomain, MetricExpr, MetricModel, ParseError};
use crate::quadrature::QuadratureError;
use crate::DEFAULT_JET_ORDER;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IdentityError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("point has {found} coordinates, model dimension is {expected}")]
    PointDimension { expected: usize, found: usize },
}

impl From<JetError> for IdentityError {
    fn from(e: JetError) -> Self {
        IdentityError::Geometry(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Verdict {
    Pass,
    Fail,
    /// The hypotheses of the statement do not hold for the model.
    Refused,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Refused => "refused",
        }
    }
}

/// Outcome of one identity check at one base point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdentityReport {
    pub identity: String,
    pub model: String,
    pub point: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub resolution: usize,
    pub order: usize,
    /// Auxiliary measured values, keyed by name.
    #[cfg_attr(feature = "serde", serde(default))]
    pub details: BTreeMap<String, f64>,
    /// Reason for a refusal, or the branch taken by a dichotomy.
    #[cfg_attr(feature = "serde", serde(default))]
    pub note: Option<String>,
}

impl IdentityReport {
    /// Compares `lhs` and `rhs` in the max norm; the relative residual is the
    /// absolute one divided by `scale`.
    #[allow(clippy::too_many_arguments)]
    pub fn compare(
        identity: &str,
        model: &MetricModel,
        point: &[f64],
        lhs: Vec<f64>,
        rhs: Vec<f64>,
        scale: f64,
        tolerance: f64,
        resolution: usize,
        order: usize,
    ) -> Self {
        assert_eq!(lhs.len(), rhs.len(), "lhs and rhs lengths differ");
        let abs_residual = lhs
            .iter()
            .zip(&rhs)
            .map(|(a, b)| abs(a - b))
            .fold(0.0, f64::max);
        let rel_residual = if scale > 0.0 { abs_residual / scale } else { abs_residual };
        let verdict = if rel_residual <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            identity: identity.into(),
            model: model.name().into(),
            point: point.to_vec(),
            lhs,
            rhs,
            abs_residual,
            rel_residual,
            tolerance,
            verdict,
            resolution,
            order,
            details: BTreeMap::new(),
            note: None,
        }
    }

    pub fn refused(identity: &str, model: &MetricModel, point: &[f64], reason: String, tolerance: f64) -> Self {
        Self {
            identity: identity.into(),
            model: model.name().into(),
            point: point.to_vec(),
            lhs: Vec::new(),
            rhs: Vec::new(),
            abs_residual: 0.0,
            rel_residual: 0.0,
            tolerance,
            verdict: Verdict::Refused,
            resolution: 0,
            order: 0,
            details: BTreeMap::new(),
            note: Some(reason),
        }
    }

    pub fn with_detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.into(), value);
        self
    }

    pub fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// The checks the suite knows, with the statement each one verifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CheckKind {
    Lemma1,
    Lemma2,
    Main,
    Schur,
    Berwald,
    Bianchi,
    Stokes,
    SectionInvariance,
}

impl CheckKind {
    pub const ALL: [CheckKind; 8] = [
        CheckKind::Lemma1,
        CheckKind::Lemma2,
        CheckKind::Main,
        CheckKind::Schur,
        CheckKind::Berwald,
        CheckKind::Bianchi,
        CheckKind::Stokes,
        CheckKind::SectionInvariance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Lemma1 => "lemma1",
            CheckKind::Lemma2 => "lemma2",
            CheckKind::Main => "main",
            CheckKind::Schur => "schur",
            CheckKind::Berwald => "berwald",
            CheckKind::Bianchi => "bianchi",
            CheckKind::Stokes => "stokes",
            CheckKind::SectionInvariance => "section_invariance",
        }
    }

    pub fn parse(name: &str) -> Result<Self, IdentityError> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| IdentityError::UnknownCheck(name.into()))
    }

    /// Smallest jet order the check needs.
    pub fn min_order(self) -> usize {
        use crate::geometry::min_order;
        match self {
            CheckKind::Lemma1 => min_order::LEMMA1,
            CheckKind::Main => min_order::PFRAK_DYNAMICAL,
            CheckKind::Schur => min_order::SCHUR,
            CheckKind::Berwald => min_order::RICCI_HESSIAN,
            CheckKind::Bianchi => min_order::BIANCHI,
            CheckKind::Stokes => min_order::CHRISTOFFEL,
            CheckKind::Lemma2 | CheckKind::SectionInvariance => min_order::FUNDAMENTAL,
        }
    }

    /// Whether the check is evaluated at individual base points (as opposed
    /// to once over a base grid or the whole torus).
    pub fn is_pointwise(self) -> bool {
        matches!(
            self,
            CheckKind::Lemma1 | CheckKind::Lemma2 | CheckKind::Main | CheckKind::SectionInvariance
        )
    }

    /// The statement being verified, with its quoted anchor phrase.
    pub fn description(self) -> &'static str {
        match self {
            CheckKind::Lemma1 => {
                "lemma1: \"every Finsler metric has the pointwise property\" \
                 ∫ {g^{ab} Ric_{·a·b} − (n+2) Ric/F²}_{|0} (y_i/F²) dΣ⁺_x = −2 ∫ 𝔓_{|0} (y_i/F²) dΣ⁺_x \
                 with 𝔓 = g^{ij}(P_{i|j} − P_i P_j + P_{i|0·j}). Unconditional; the form with the \
                 dynamical derivative outside g^{ab} is reported alongside."
            }
            CheckKind::Lemma2 => {
                "lemma2: \"the differential of any function ρ\" on the base satisfies \
                 ∂_iρ · ∫ dΣ⁺_x = n ∫ (y^a ∂_aρ)(y_i/F²) dΣ⁺_x for every Finsler metric."
            }
            CheckKind::Main => {
                "main: for Einstein metrics (Ric = ρ F²) \"there holds a pointwise relation\" \
                 (n − 2) ∂_iρ = −2n ⟨F^{-1} 𝔓_{|0} ω⟩_i; ∂ρ from a five-point stencil. \
                 Refused on non-Einstein models."
            }
            CheckKind::Schur => {
                "schur: an Einstein metric of dimension ≥ 3 that is weakly Landsberg (or whose \
                 Schur scalar vanishes) has constant Ricci curvature, \"then ρ is constant\". \
                 Both forms of the Schur scalar are reported."
            }
            CheckKind::Berwald => {
                "berwald: an Einstein metric \"with quadratic Ricci scalar\" in dimension ≥ 3 is \
                 either Ricci-flat or has constant ρ; the vertical Hessian of Ric decides \
                 quadraticity. Not applicable when Ric is not quadratic."
            }
            CheckKind::Bianchi => {
                "bianchi: the contracted Bianchi identity ∇_j(ric^{ji} − ½ S g^{ji}) = 0, valid \
                 \"whatever the pseudo-Riemannian metric g may be\"."
            }
            CheckKind::Stokes => {
                "stokes: on the torus, boundary terms \"depending on ξ will automatically vanish\": \
                 ∫ u_{|0} dΣ⁺ = 0 and ∫ div(Y^i ∂̇_i) dΣ⁺ = 0 with \
                 div(Y^i ∂̇_i) = Y^i_{·i} + 2 C_i Y^i − n y_i Y^i / F²."
            }
            CheckKind::SectionInvariance => {
                "section_invariance: the fiber volume does not depend on the section y = λu of the \
                 ray bundle used to parametrise it."
            }
        }
    }
}

/// A smooth function on the base, given by a DSL expression in `x`.
#[derive(Debug, Clone)]
pub struct BaseFunction {
    source: String,
    expr: MetricExpr,
    dim: usize,
}

impl BaseFunction {
    pub fn parse(source: &str, dim: usize) -> Result<Self, IdentityError> {
        Ok(Self {
            source: source.into(),
            expr: MetricExpr::parse_base(source, dim)?,
            dim,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn value(&self, x: &[f64]) -> Result<f64, IdentityError> {
        Ok(self.expr.eval(x, &[])?)
    }

    /// `∂_iρ(x)` via first-order jets.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, IdentityError> {
        let ctx = Arc::new(JetContext::new(self.dim, 1)?);
        let mut point = x.to_vec();
        point.resize(2 * self.dim, 0.0);
        let vars = seed(&ctx, &point)?;
        let v = self.expr.eval(&vars[..self.dim], &vars[self.dim..])?;
        Ok((0..self.dim)
            .map(|i| v.extract_partial(&unit(2 * self.dim, i)))
            .collect::<Result<Vec<f64>, _>>()?)
    }
}

fn unit(len: usize, i: usize) -> Vec<usize> {
    let mut v = vec![0; len];
    v[i] = 1;
    v
}

/// Tunables shared by the checks.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckSettings {
    /// Jet order of the contexts.
    pub order: usize,
    /// Tolerance override; `None` uses the per-check default.
    pub tolerance: Option<f64>,
    /// Threshold for Einstein, weakly-Landsberg and quadraticity decisions.
    pub classification_tolerance: f64,
    /// Lattice points per axis of base grids.
    pub grid_points: usize,
    /// Step of the five-point stencil for `∂ρ`; `None` uses the grid
    /// spacing.
    pub stencil_step: Option<f64>,
    /// Lattice points per axis of the torus base rule.
    pub torus_points: usize,
}

impl Default for CheckSettings {
    fn default() -> Self {
        Self {
            order: DEFAULT_JET_ORDER,
            tolerance: None,
            classification_tolerance: crate::tolerance::CLASSIFICATION,
            grid_points: 5,
            stencil_step: None,
            torus_points: 16,
        }
    }
}

impl CheckSettings {
    fn tolerance_or(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }
}

/// Lattice of `points` per axis inside the model's sampling region (the
/// inscribed cube for a ball, `[0, 2π)` cells for a torus), restricted to
/// points where the domain predicate holds.
pub fn base_grid(model: &MetricModel, points: usize) -> Vec<Vec<f64>> {
    let n = model.dim();
    let points = points.max(1);
    let axis: Vec<f64> = match model.base() {
        BaseDomain::Torus => (0..points)
            .map(|k| 2.0 * core::f64::consts::PI * k as f64 / points as f64)
            .collect(),
        base => {
            let (lo, hi) = base.bounds(n);
            if points == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                (0..points)
                    .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
                    .collect()
            }
        }
    };
    let mut probe = vec![0.0; n];
    probe[0] = 1.0;
    let total = points.pow(n as u32);
    (0..total)
        .map(|mut k| {
            let mut x = vec![0.0; n];
            for c in x.iter_mut().rev() {
                *c = axis[k % points];
                k /= points;
            }
            x
        })
        .filter(|x| model.contains(x, &probe))
        .collect()
}

/// Spacing of [`base_grid`] along each axis.
pub fn grid_spacing(model: &MetricModel, points: usize) -> f64 {
    let points = points.max(2);
    match model.base() {
        BaseDomain::Torus => 2.0 * core::f64::consts::PI / points as f64,
        base => {
            let (lo, hi) = base.bounds(model.dim());
            (hi - lo) / (points - 1) as f64
        }
    }
}

/// Runs a pointwise check by kind.
pub fn run_pointwise(
    kind: CheckKind,
    model: &MetricModel,
    x: &[f64],
    rule: &crate::quadrature::SphereRule,
    rho: Option<&BaseFunction>,
    settings: &CheckSettings,
) -> Result<IdentityReport, IdentityError> {
    if x.len() != model.dim() {
        return Err(IdentityError::PointDimension {
            expected: model.dim(),
            found: x.len(),
        });
    }
    match kind {
        CheckKind::Lemma1 => check_lemma1(model, x, rule, settings),
        CheckKind::Lemma2 => {
            let default;
            let rho = match rho {
                Some(r) => r,
                None => {
                    default = BaseFunction::parse("x1", model.dim())?;
                    &default
                }
            };
            check_lemma2(model, rho, x, rule, settings)
        }
        CheckKind::Main => check_main_theorem(model, x, rule, settings),
        CheckKind::SectionInvariance => check_section_invariance(model, x, rule, &[0.5, 2.0, 3.0], settings),
        CheckKind::Schur => check_schur_corollary(model, &[x.to_vec()], settings),
        CheckKind::Berwald => check_berwald_theorem(model, &[x.to_vec()], None, settings),
        CheckKind::Bianchi => check_bianchi(model, x, settings),
        CheckKind::Stokes => check_stokes_torus(model, StokesField::default(), rule, settings),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::SphereRule;
    use approx::assert_relative_eq;

    #[test]
    fn check_names_round_trip() {
        for kind in CheckKind::ALL {
            assert_eq!(CheckKind::parse(kind.name()).unwrap(), kind);
            assert!(kind.description().starts_with(kind.name()));
        }
        assert!(matches!(CheckKind::parse("nope"), Err(IdentityError::UnknownCheck(_))));
        assert!(CheckKind::Lemma1
            .description()
            .contains("every Finsler metric has the pointwise property"));
    }

    #[test]
    fn base_function_gradient() {
        let rho = BaseFunction::parse("sin(x1)*cos(x2)", 2).unwrap();
        let g = rho.gradient(&[0.3, 0.7]).unwrap();
        assert_relative_eq!(g[0], libm::cos(0.3) * libm::cos(0.7), epsilon = 1e-15);
        assert_relative_eq!(g[1], -libm::sin(0.3) * libm::sin(0.7), epsilon = 1e-15);
        assert!(BaseFunction::parse("y1", 2).is_err());
    }

    #[test]
    fn grids_respect_the_domain() {
        let funk = MetricModel::funk(2).unwrap();
        let grid = base_grid(&funk, 5);
        assert_eq!(grid.len(), 25);
        assert!(grid.iter().all(|x| x[0] * x[0] + x[1] * x[1] < 1.0));
        let torus = MetricModel::euclidean(3).unwrap();
        assert_eq!(base_grid(&torus, 4).len(), 64);
        assert_relative_eq!(grid_spacing(&torus, 4), core::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn euclidean_lemma2_closed_form() {
        let m = MetricModel::euclidean(2).unwrap();
        let rho = BaseFunction::parse("x1", 2).unwrap();
        let rule = SphereRule::new(2, 128).unwrap();
        let r = check_lemma2(&m, &rho, &[0.0, 0.0], &rule, &CheckSettings::default()).unwrap();
        let two_pi = 2.0 * core::f64::consts::PI;
        assert!(r.passed());
        assert_relative_eq!(r.lhs[0], two_pi, epsilon = 1e-12);
        assert_relative_eq!(r.rhs[0], two_pi, epsilon = 1e-12);
        assert!(r.lhs[1].abs() < 1e-12 && r.rhs[1].abs() < 1e-12);
        assert!(r.abs_residual < 1e-10);
    }

    #[test]
    fn constant_rho_gives_zero_sides() {
        let m = MetricModel::funk(2).unwrap();
        let rho = BaseFunction::parse("3.5", 2).unwrap();
        let rule = SphereRule::new(2, 64).unwrap();
        let r = check_lemma2(&m, &rho, &[0.1, 0.2], &rule, &CheckSettings::default()).unwrap();
        assert!(r.lhs.iter().chain(&r.rhs).all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn main_theorem_refuses_non_einstein() {
        let m = MetricModel::torus_conformal(3, 0.1).unwrap();
        let rule = SphereRule::new(3, 8).unwrap();
        let r = run_pointwise(CheckKind::Main, &m, &[0.5, 1.0, 2.0], &rule, None, &CheckSettings::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Refused);
        assert!(r.note.unwrap().contains("not Einstein"));
    }

    #[test]
    fn point_dimension_is_checked() {
        let m = MetricModel::euclidean(3).unwrap();
        let rule = SphereRule::new(3, 8).unwrap();
        let r = run_pointwise(CheckKind::Lemma2, &m, &[0.0, 0.0], &rule, None, &CheckSettings::default());
        assert!(matches!(r, Err(IdentityError::PointDimension { expected: 3, found: 2 })));
    }

    #[test]
    fn classify_euclidean_and_sphere() {
        let settings = CheckSettings::default();
        let e = MetricModel::euclidean(2).unwrap();
        let c = classify(&e, &base_grid(&e, 2), &settings).unwrap();
        assert!(c.einstein.verdict && c.weakly_landsberg.verdict && c.riemannian.verdict);
        assert!(c.berwald_quadratic.verdict);
        assert!(c.rho.iter().all(|r| r.rho.abs() < 1e-14));

        let s = MetricModel::sphere_round(3, 1.0).unwrap();
        let c = classify(&s, &base_grid(&s, 2), &settings).unwrap();
        assert!(c.einstein.verdict && c.weakly_landsberg.verdict && c.riemannian.verdict);
        assert!(c.berwald_quadratic.verdict);
        assert!(c.rho.iter().all(|r| (r.rho - 2.0).abs() < 1e-9));
        assert!(c.rho_spread < 1e-9);
    }

    #[test]
    fn classify_variable_randers() {
        let m = MetricModel::randers(3, None, &["0.3*sin(x2)", "0", "0"]).unwrap();
        let c = classify(&m, &base_grid(&m, 2), &CheckSettings::default()).unwrap();
        assert!(!c.einstein.verdict);
        assert!(!c.weakly_landsberg.verdict);
        assert!(!c.riemannian.verdict);
    }
}
