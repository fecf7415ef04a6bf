//! Einstein, weakly-Landsberg, quadratic-Ricci and Riemannian
//! classification of a model over a base grid.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{CheckSettings, IdentityError};
use crate::geometry::{default_directions, min_order, Geometry};
use crate::jet::JetContext;
use crate::math::{abs, max_abs, sum};
use crate::metric::MetricModel;

/// `ρ(x)` as the direction mean of `Ric/F²`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RhoEstimate {
    pub x: Vec<f64>,
    pub rho: f64,
    /// Largest deviation of `Ric/F²` from `rho` over the directions.
    pub spread: f64,
    /// Largest `|Ric|` over the directions.
    pub max_ricci: f64,
}

/// Estimates `ρ(x)` from `Ric/F²` at the given directions. `ctx` must have
/// order at least [`min_order::RICCI`].
pub fn rho_estimate(
    model: &MetricModel,
    ctx: &Arc<JetContext>,
    x: &[f64],
    directions: &[Vec<f64>],
) -> Result<RhoEstimate, IdentityError> {
    let mut ratios = Vec::with_capacity(directions.len());
    let mut max_ricci: f64 = 0.0;
    for y in directions {
        let geo = Geometry::with_context(model, ctx, x, y)?;
        let ric = geo.ricci_scalar()?;
        max_ricci = max_ricci.max(abs(ric));
        ratios.push(ric / geo.lagrangian());
    }
    let rho = sum(ratios.iter().copied()) / ratios.len() as f64;
    let spread = ratios.iter().map(|r| abs(r - rho)).fold(0.0, f64::max);
    Ok(RhoEstimate {
        x: x.to_vec(),
        rho,
        spread,
        max_ricci,
    })
}

/// A yes/no classification with the measured quantity behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Flag {
    pub verdict: bool,
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassificationReport {
    pub model: String,
    /// `Ric = ρ(x) F²`; the measure is the worst direction spread of
    /// `Ric/F²` relative to `1 + |ρ|`.
    pub einstein: Flag,
    pub rho: Vec<RhoEstimate>,
    /// `max |ρ(x) − mean ρ|` over the grid.
    pub rho_spread: f64,
    /// `P_i ≡ 0`; the measure is `max |P_i|`.
    pub weakly_landsberg: Flag,
    /// `Ric_{·i·j}` independent of `y`; the measure is the largest deviation.
    pub berwald_quadratic: Flag,
    /// `C ≡ 0`; the measure is `max |C_ijk|`.
    pub riemannian: Flag,
    pub tolerance: f64,
}

/// Classifies `model` over `grid`, probing [`default_directions`] at every
/// point.
pub fn classify(
    model: &MetricModel,
    grid: &[Vec<f64>],
    settings: &CheckSettings,
) -> Result<ClassificationReport, IdentityError> {
    let n = model.dim();
    let tol = settings.classification_tolerance;
    let ctx = Arc::new(JetContext::new(n, min_order::RICCI_HESSIAN)?);
    let directions = default_directions(n);
    let mut rho = Vec::with_capacity(grid.len());
    let mut einstein_measure: f64 = 0.0;
    let mut max_p: f64 = 0.0;
    let mut max_c: f64 = 0.0;
    let mut max_dev: f64 = 0.0;
    for x in grid {
        let mut ratios = Vec::with_capacity(directions.len());
        let mut hessians: Vec<Vec<f64>> = Vec::with_capacity(directions.len());
        let mut max_ricci: f64 = 0.0;
        for y in &directions {
            let geo = Geometry::with_context(model, &ctx, x, y)?;
            let ric = geo.ricci_scalar()?;
            max_ricci = max_ricci.max(abs(ric));
            ratios.push(ric / geo.lagrangian());
            max_p = max_p.max(geo.mean_landsberg()?.max_abs());
            max_c = max_c.max(geo.cartan()?.max_abs());
            hessians.push(geo.ricci_vertical_hessian()?.comps.iter().map(|v| 0.5 * v).collect());
        }
        for k in 0..n * n {
            let (lo, hi) = hessians
                .iter()
                .map(|h| h[k])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            max_dev = max_dev.max(hi - lo);
        }
        let mean = sum(ratios.iter().copied()) / ratios.len() as f64;
        let spread = ratios.iter().map(|r| abs(r - mean)).fold(0.0, f64::max);
        einstein_measure = einstein_measure.max(spread / (1.0 + abs(mean)));
        rho.push(RhoEstimate {
            x: x.clone(),
            rho: mean,
            spread,
            max_ricci,
        });
    }
    let values: Vec<f64> = rho.iter().map(|r| r.rho).collect();
    let mean = if values.is_empty() {
        0.0
    } else {
        sum(values.iter().copied()) / values.len() as f64
    };
    let deviations: Vec<f64> = values.iter().map(|v| v - mean).collect();
    Ok(ClassificationReport {
        model: model.name().into(),
        einstein: Flag {
            verdict: einstein_measure < tol,
            measure: einstein_measure,
        },
        rho,
        rho_spread: max_abs(&deviations),
        weakly_landsberg: Flag {
            verdict: max_p < tol,
            measure: max_p,
        },
        berwald_quadratic: Flag {
            verdict: max_dev < tol,
            measure: max_dev,
        },
        riemannian: Flag {
            verdict: max_c < tol,
            measure: max_c,
        },
        tolerance: tol,
    })
}
