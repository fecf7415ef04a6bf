//! Fiber integration over the positively projectivised tangent spaces.
//!
//! Each fiber is parametrised by the Euclidean unit sphere `|u| = 1`, where
//! the contracted form `ι_ℂ dⁿy` is the standard sphere measure, so the
//! Sasaki volume form contributes the weight `det g(x, u) / F(x, u)ⁿ`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geometry::{Geometry, GeometryError};
use crate::jet::JetContext;
use crate::linalg;
use crate::math::{abs, cos, powi, sin, sqrt, CompensatedSum};
use crate::metric::MetricModel;

/// Default resolutions per dimension (index `n − 2`).
pub const DEFAULT_RESOLUTION: [usize; 3] = [128, 32, 24];
/// Smallest accepted resolution.
pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("sphere rules exist for n = 2, 3, 4; got n = {0}")]
    UnsupportedDimension(usize),
    #[error("resolution {0} below the minimum of 8")]
    ResolutionTooLow(usize),
    #[error("indefinite fundamental tensor (det g = {det:e}) at x = {x:?}, u = {u:?}; fiber integration refused")]
    NonPositiveWeight { det: f64, x: Vec<f64>, u: Vec<f64> },
    #[error("integrand is not {degree}-homogeneous: relative residual {residual:e}")]
    Homogeneity { degree: i32, residual: f64 },
    #[error("model {0} is not periodic on the torus")]
    NotPeriodic(alloc::string::String),
    #[error("section scale must be positive, got {0}")]
    InvalidScale(f64),
}

/// Default resolution for dimension `n`.
pub fn default_resolution(n: usize) -> usize {
    DEFAULT_RESOLUTION.get(n.wrapping_sub(2)).copied().unwrap_or(MIN_RESOLUTION)
}

/// Quadrature nodes and positive weights on the Euclidean unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    dim: usize,
    resolution: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereRule {
    /// `n = 2`: `r` equispaced points. `n = 3`: `r` Gauss–Legendre nodes in
    /// `cos θ` times `2r` azimuths. `n = 4`: `r` Gauss–Chebyshev (second
    /// kind) nodes in `cos ψ`, `r` Gauss–Legendre nodes in `cos θ` and `2r`
    /// azimuths.
    pub fn new(dim: usize, resolution: usize) -> Result<Self, QuadratureError> {
        if resolution < MIN_RESOLUTION {
            return Err(QuadratureError::ResolutionTooLow(resolution));
        }
        let r = resolution;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let azimuths = |count: usize| -> Vec<(f64, f64)> {
            (0..count)
                .map(|k| {
                    let phi = 2.0 * PI * k as f64 / count as f64;
                    (cos(phi), sin(phi))
                })
                .collect()
        };
        match dim {
            2 => {
                for (c, s) in azimuths(r) {
                    nodes.extend_from_slice(&[c, s]);
                    weights.push(2.0 * PI / r as f64);
                }
            }
            3 => {
                let (ts, ws) = gauss_legendre(r);
                let phis = azimuths(2 * r);
                let dphi = 2.0 * PI / (2 * r) as f64;
                for (&t, &w) in ts.iter().zip(&ws) {
                    let s = sqrt(1.0 - t * t);
                    for &(c, sn) in &phis {
                        nodes.extend_from_slice(&[s * c, s * sn, t]);
                        weights.push(w * dphi);
                    }
                }
            }
            4 => {
                let (ts, ws) = gauss_legendre(r);
                let phis = azimuths(2 * r);
                let dphi = 2.0 * PI / (2 * r) as f64;
                for k in 1..=r {
                    let angle = k as f64 * PI / (r + 1) as f64;
                    let (cpsi, spsi) = (cos(angle), sin(angle));
                    let wpsi = PI / (r + 1) as f64 * spsi * spsi;
                    for (&t, &w) in ts.iter().zip(&ws) {
                        let st = sqrt(1.0 - t * t);
                        for &(c, sn) in &phis {
                            nodes.extend_from_slice(&[cpsi, spsi * t, spsi * st * c, spsi * st * sn]);
                            weights.push(wpsi * w * dphi);
                        }
                    }
                }
            }
            _ => return Err(QuadratureError::UnsupportedDimension(dim)),
        }
        Ok(Self {
            dim,
            resolution,
            nodes,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.nodes[k * self.dim..(k + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks(self.dim).zip(self.weights.iter().copied())
    }

    /// Area of the unit sphere `S^{n−1}`.
    pub fn sphere_area(dim: usize) -> f64 {
        match dim {
            2 => 2.0 * PI,
            3 => 4.0 * PI,
            4 => 2.0 * PI * PI,
            _ => f64::NAN,
        }
    }

    /// `Σ w_k u_k^i u_k^j`, row-major.
    pub fn second_moments(&self) -> Vec<f64> {
        let n = self.dim;
        (0..n * n)
            .map(|ij| crate::math::sum(self.iter().map(|(u, w)| w * u[ij / n] * u[ij % n])))
            .collect()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..(m + 1) / 2 {
        let mut t = cos(PI * (i as f64 + 0.75) / (m as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, t);
            dp = d;
            let step = p / d;
            t -= step;
            if abs(step) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, t);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        nodes[i] = -t;
        nodes[m - 1 - i] = t;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_m(t), P_m'(t))` by the three-term recurrence.
fn legendre(m: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, m as f64 * (t * p1 - p0) / (t * t - 1.0))
}

/// The Sasaki weight of one fiber node, with the data integrands need.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberNode {
    pub u: Vec<f64>,
    /// Rule weight times `det g / Fⁿ`.
    pub weight: f64,
    pub f: f64,
    /// `g(x, u)`, row-major.
    pub g: Vec<f64>,
}

/// A sphere rule pulled back to the fiber over one base point.
#[derive(Debug, Clone)]
pub struct FiberMeasure {
    x: Vec<f64>,
    nodes: Vec<FiberNode>,
    volume: f64,
    resolution: usize,
}

impl FiberMeasure {
    pub fn new(model: &MetricModel, x: &[f64], rule: &SphereRule) -> Result<Self, QuadratureError> {
        Self::with_section(model, x, rule, 1.0)
    }

    /// Uses the section `y = λu` of the ray bundle instead of `|u| = 1`.
    pub fn with_section(
        model: &MetricModel,
        x: &[f64],
        rule: &SphereRule,
        lambda: f64,
    ) -> Result<Self, QuadratureError> {
        if rule.dim() != model.dim() {
            return Err(QuadratureError::UnsupportedDimension(model.dim()));
        }
        if !(lambda > 0.0) {
            return Err(QuadratureError::InvalidScale(lambda));
        }
        let n = model.dim();
        let ctx = Arc::new(JetContext::new(n, 2).map_err(GeometryError::from)?);
        let mut nodes = Vec::with_capacity(rule.len());
        let mut volume = CompensatedSum::new();
        for (u, w) in rule.iter() {
            let y: Vec<f64> = u.iter().map(|c| lambda * c).collect();
            let (weight, f, g) = node_weight(model, &ctx, x, &y)?;
            // ι_ℂ dⁿy on the section y = λu is λⁿ times the sphere measure
            let weight = w * weight * powi(lambda, n as i32);
            volume.add(weight);
            nodes.push(FiberNode {
                u: u.to_vec(),
                weight,
                f,
                g,
            });
        }
        Ok(Self {
            x: x.to_vec(),
            nodes,
            volume: volume.total(),
            resolution: rule.resolution(),
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn nodes(&self) -> &[FiberNode] {
        &self.nodes
    }

    /// `∫ dΣ⁺_x`
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// `∫ f dΣ⁺_x` for `f` evaluated at the unit directions.
    pub fn integrate<E>(&self, mut f: impl FnMut(&FiberNode) -> Result<f64, E>) -> Result<f64, E> {
        let mut acc = CompensatedSum::new();
        for node in &self.nodes {
            acc.add(node.weight * f(node)?);
        }
        Ok(acc.total())
    }

    /// Componentwise `∫ θ dΣ⁺_x` for an `m`-component integrand.
    pub fn integrate_vector<E>(
        &self,
        m: usize,
        mut f: impl FnMut(&FiberNode) -> Result<Vec<f64>, E>,
    ) -> Result<Vec<f64>, E> {
        let mut acc = vec![CompensatedSum::new(); m];
        for node in &self.nodes {
            let v = f(node)?;
            for (a, c) in acc.iter_mut().zip(v) {
                a.add(node.weight * c);
            }
        }
        Ok(acc.iter().map(CompensatedSum::total).collect())
    }
}

fn node_weight(
    model: &MetricModel,
    ctx: &Arc<JetContext>,
    x: &[f64],
    y: &[f64],
) -> Result<(f64, f64, Vec<f64>), QuadratureError> {
    let n = model.dim();
    let geo = Geometry::with_context(model, ctx, x, y)?;
    let g = geo.fundamental_tensor().comps;
    let det = linalg::determinant(&g, n);
    if !(det > 0.0) || !linalg::is_positive_definite(&g, n) {
        return Err(QuadratureError::NonPositiveWeight {
            det,
            x: x.to_vec(),
            u: y.to_vec(),
        });
    }
    let f = geo.finsler()?;
    Ok((det / powi(f, n as i32), f, g))
}

/// `det g(x, u) / F(x, u)ⁿ`
pub fn fiber_weight(model: &MetricModel, x: &[f64], u: &[f64]) -> Result<f64, QuadratureError> {
    let ctx = Arc::new(JetContext::new(model.dim(), 2).map_err(GeometryError::from)?);
    Ok(node_weight(model, &ctx, x, u)?.0)
}

/// `∫_{(T_xM)⁺} dΣ⁺_x`
pub fn fiber_volume(model: &MetricModel, x: &[f64], rule: &SphereRule) -> Result<f64, QuadratureError> {
    Ok(FiberMeasure::new(model, x, rule)?.volume())
}

/// `|f(x, 2u) − 2^r f(x, u)|` at three nodes, relative to the largest value
/// seen.
fn spot_check_homogeneity(
    rule: &SphereRule,
    degree: i32,
    mut f: impl FnMut(&[f64]) -> Result<Vec<f64>, GeometryError>,
) -> Result<(), QuadratureError> {
    let picks = [0, rule.len() / 3, (2 * rule.len()) / 3];
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for &k in &picks {
        let u = rule.node(k);
        let doubled: Vec<f64> = u.iter().map(|c| 2.0 * c).collect();
        let a = f(u)?;
        let b = f(&doubled)?;
        for (p, q) in a.iter().zip(&b) {
            let expected = powi(2.0, degree) * p;
            worst = worst.max(abs(q - expected));
            scale = scale.max(abs(expected)).max(abs(*q));
        }
    }
    let residual = worst / scale.max(1e-300);
    if worst > 1e-8 * scale + 1e-14 {
        return Err(QuadratureError::Homogeneity { degree, residual });
    }
    Ok(())
}

/// `⟨f⟩(x)` for a 0-homogeneous scalar `f(y)` at fixed `x`.
pub fn fiber_average_scalar(
    model: &MetricModel,
    x: &[f64],
    mut f: impl FnMut(&[f64]) -> Result<f64, GeometryError>,
    rule: &SphereRule,
) -> Result<f64, QuadratureError> {
    spot_check_homogeneity(rule, 0, |y| Ok(vec![f(y)?]))?;
    let measure = FiberMeasure::new(model, x, rule)?;
    let total = measure.integrate(|node| f(&node.u))?;
    Ok(total / measure.volume())
}

/// `⟨F^{−r} θ⟩(x)` for an `r`-homogeneous 1-form `θ(y)` at fixed `x`.
pub fn fiber_average_oneform(
    model: &MetricModel,
    x: &[f64],
    mut theta: impl FnMut(&[f64]) -> Result<Vec<f64>, GeometryError>,
    degree: i32,
    rule: &SphereRule,
) -> Result<Vec<f64>, QuadratureError> {
    spot_check_homogeneity(rule, degree, &mut theta)?;
    let measure = FiberMeasure::new(model, x, rule)?;
    let n = model.dim();
    let total = measure.integrate_vector(n, |node| {
        let scale = powi(node.f, -degree);
        Ok::<_, GeometryError>(theta(&node.u)?.into_iter().map(|c| c * scale).collect())
    })?;
    Ok(total.into_iter().map(|c| c / measure.volume()).collect())
}

/// Relative change of the fiber volume when the section `y = λu` replaces
/// `|u| = 1`.
pub fn section_invariance_check(
    model: &MetricModel,
    x: &[f64],
    rule: &SphereRule,
    lambda: f64,
) -> Result<f64, QuadratureError> {
    let base = FiberMeasure::new(model, x, rule)?.volume();
    let scaled = FiberMeasure::with_section(model, x, rule, lambda)?.volume();
    Ok(abs(scaled - base) / abs(base))
}

/// Equispaced lattice of `m` points per axis on the torus `[0, 2π)ⁿ`.
pub fn torus_lattice(n: usize, m: usize) -> Vec<Vec<f64>> {
    let total = m.pow(n as u32);
    (0..total)
        .map(|mut k| {
            let mut x = vec![0.0; n];
            for c in x.iter_mut().rev() {
                *c = 2.0 * PI * (k % m) as f64 / m as f64;
                k /= m;
            }
            x
        })
        .collect()
}

/// `∫_{(T Tⁿ)⁺} f dΣ⁺` by the tensor trapezoid rule with `base_points` per
/// axis; `f` receives the base point and the fiber node.
pub fn base_integral_torus(
    model: &MetricModel,
    mut f: impl FnMut(&[f64], &FiberNode) -> Result<f64, GeometryError>,
    rule: &SphereRule,
    base_points: usize,
) -> Result<f64, QuadratureError> {
    if !model.is_periodic() {
        return Err(QuadratureError::NotPeriodic(model.name().into()));
    }
    let n = model.dim();
    let cell = powi(2.0 * PI / base_points as f64, n as i32);
    let mut acc = CompensatedSum::new();
    for x in torus_lattice(n, base_points) {
        let measure = FiberMeasure::new(model, &x, rule)?;
        acc.add(cell * measure.integrate(|node| f(&x, node))?);
    }
    Ok(acc.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (t, w) = gauss_legendre(8);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        let m14: f64 = t.iter().zip(&w).map(|(t, w)| w * t.powi(14)).sum();
        assert_relative_eq!(m14, 2.0 / 15.0, epsilon = 1e-14);
        assert!(t.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn weights_sum_to_area() {
        for (n, r) in [(2, 128), (3, 32), (4, 12)] {
            let rule = SphereRule::new(n, r).unwrap();
            let total: f64 = crate::math::sum(rule.weights().iter().copied());
            assert_relative_eq!(total, SphereRule::sphere_area(n), epsilon = 1e-12);
            for (u, _) in rule.iter() {
                assert_relative_eq!(u.iter().map(|c| c * c).sum::<f64>(), 1.0, epsilon = 1e-14);
            }
        }
        let rule = SphereRule::new(3, 32).unwrap();
        assert_eq!(rule.len(), 32 * 64);
        let rule = SphereRule::new(2, 128).unwrap();
        assert!(rule.weights().iter().all(|&w| w == 2.0 * PI / 128.0));
    }

    #[test]
    fn second_moments_are_isotropic() {
        for (n, r) in [(2, 16), (3, 16), (4, 10)] {
            let rule = SphereRule::new(n, r).unwrap();
            let m = rule.second_moments();
            let area = SphereRule::sphere_area(n);
            for i in 0..n {
                for j in 0..n {
                    let expected = if i == j { area / n as f64 } else { 0.0 };
                    assert!((m[i * n + j] - expected).abs() < 1e-12, "n={n} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn rejects_bad_rules() {
        assert_eq!(SphereRule::new(5, 16), Err(QuadratureError::UnsupportedDimension(5)));
        assert_eq!(SphereRule::new(3, 4), Err(QuadratureError::ResolutionTooLow(4)));
    }

    #[test]
    fn torus_lattice_covers_cells() {
        let pts = torus_lattice(2, 3);
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[1], vec![0.0, 2.0 * PI / 3.0]);
    }
}
