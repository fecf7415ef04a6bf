//! Pointwise Finsler geometry: fundamental tensor through Ricci scalar, the
//! Landsberg tensors, Chern covariant derivatives and the scalars built from
//! them.

mod pipeline;
mod tensor;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

pub use pipeline::{min_order, Geometry, Lemma1Integrands, SchurVariant};
pub use tensor::{DerivativeBundle, JetTensor, TangentSample, TensorValue, Variance};

use crate::jet::{JetContext, JetError};
use crate::math::abs;
use crate::metric::{MetricError, MetricModel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("sample outside the model domain: x = {x:?}, y = {y:?}")]
    OutsideDomain { x: Vec<f64>, y: Vec<f64> },
    #[error("fundamental tensor singular (condition number {condition:e}) at x = {x:?}, y = {y:?}")]
    Singular { condition: f64, x: Vec<f64>, y: Vec<f64> },
    #[error("{quantity} needs jet order {required}, context has {available}")]
    OrderBudget {
        quantity: &'static str,
        required: usize,
        available: usize,
    },
    #[error("L = {value} is not positive, F = √L undefined")]
    NonPositiveLagrangian { value: f64 },
    #[error("model {model} is not Riemannian")]
    NotRiemannian { model: String },
    #[error("need at least {required} directions, got {found}")]
    TooFewDirections { required: usize, found: usize },
}

/// Outcome of the vertical-Hessian quadraticity test for `Ric`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadraticRicTest {
    pub is_quadratic: bool,
    /// Mean of `½ Ric_{·i·j}` over the directions, row-major.
    pub h: Vec<f64>,
    /// Largest componentwise deviation between any two directions.
    pub max_deviation: f64,
}

/// Evaluates `½ Ric_{·i·j}` at every direction and compares them. `Ric` is
/// quadratic in `y` exactly when this Hessian does not depend on `y`.
pub fn quadratic_ric_test(
    model: &MetricModel,
    x: &[f64],
    directions: &[Vec<f64>],
    tolerance: f64,
) -> Result<QuadraticRicTest, GeometryError> {
    if directions.len() < 2 {
        return Err(GeometryError::TooFewDirections {
            required: 2,
            found: directions.len(),
        });
    }
    let n = model.dim();
    let ctx = Arc::new(JetContext::new(n, min_order::RICCI_HESSIAN)?);
    let mut hessians = Vec::with_capacity(directions.len());
    for y in directions {
        let geo = Geometry::with_context(model, &ctx, x, y)?;
        let h = geo.ricci_vertical_hessian()?;
        hessians.push(h.comps.iter().map(|v| 0.5 * v).collect::<Vec<f64>>());
    }
    // the pairwise maximum equals the largest per-component range
    let mut max_deviation: f64 = 0.0;
    let mut mean = vec![0.0; n * n];
    for k in 0..n * n {
        let (lo, hi) = hessians
            .iter()
            .map(|h| h[k])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        max_deviation = max_deviation.max(hi - lo);
        mean[k] = crate::math::sum(hessians.iter().map(|h| h[k])) / hessians.len() as f64;
    }
    Ok(QuadraticRicTest {
        is_quadratic: max_deviation < tolerance,
        h: mean,
        max_deviation,
    })
}

/// Directions used by default for the quadraticity test: the coordinate
/// axes, their negatives, and the pairwise diagonals.
pub fn default_directions(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[i] = sign;
            out.push(v);
        }
    }
    let s = crate::math::sqrt(0.5);
    for i in 0..n {
        for j in i + 1..n {
            let mut v = vec![0.0; n];
            v[i] = s;
            v[j] = s;
            out.push(v);
        }
    }
    out
}

/// Residual of the contracted Bianchi identity of a Riemannian model at `x`.
pub fn contracted_bianchi_riemannian(model: &MetricModel, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
    if !model.flags().riemannian {
        return Err(GeometryError::NotRiemannian {
            model: model.name().into(),
        });
    }
    let n = model.dim();
    let mut y = vec![0.0; n];
    y[0] = 1.0;
    let geo = Geometry::new(model, x, &y, min_order::BIANCHI)?;
    geo.contracted_bianchi()
}

/// `|f(x, λy) − λ^r f(x, y)|` relative to `max(|f(x, y)|, floor)`, the
/// homogeneity residual used across the test-suite.
pub fn homogeneity_residual(at_y: f64, at_scaled: f64, factor: f64, degree: i32, floor: f64) -> f64 {
    let expected = crate::math::powi(factor, degree) * at_y;
    abs(at_scaled - expected) / abs(expected).max(floor)
}
