//! The individual identity checks.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::classify::{rho_estimate, RhoEstimate};
use super::{grid_spacing, BaseFunction, CheckKind, CheckSettings, IdentityError, IdentityReport, Verdict};
use crate::geometry::{contracted_bianchi_riemannian, default_directions, min_order, Geometry, JetTensor};
use crate::jet::JetContext;
use crate::math::{abs, max_abs, powi, sin, CompensatedSum};
use crate::metric::MetricModel;
use crate::quadrature::{torus_lattice, FiberMeasure, FiberNode, QuadratureError, SphereRule};
use crate::tolerance;

/// Absolute tolerance of the contracted Bianchi residual.
pub const BIANCHI_TOLERANCE: f64 = 1e-6;

fn context(model: &MetricModel, order: usize) -> Result<Arc<JetContext>, IdentityError> {
    Ok(Arc::new(JetContext::new(model.dim(), order)?))
}

/// `y_i / F²` at a fiber node (with `y = u`).
fn lowered_over_l(node: &FiberNode, n: usize) -> Vec<f64> {
    let f2 = node.f * node.f;
    (0..n)
        .map(|i| (0..n).map(|a| node.g[i * n + a] * node.u[a]).sum::<f64>() / f2)
        .collect()
}

fn norm_inf(v: &[f64]) -> f64 {
    max_abs(v)
}

/// `∂_iρ · ∫ dΣ⁺_x = n ∫ (yᵃ ∂_aρ)(y_i/F²) dΣ⁺_x`
pub fn check_lemma2(
    model: &MetricModel,
    rho: &BaseFunction,
    x: &[f64],
    rule: &SphereRule,
    settings: &CheckSettings,
) -> Result<IdentityReport, IdentityError> {
    let n = model.dim();
    let measure = FiberMeasure::new(model, x, rule)?;
    let grad = rho.gradient(x)?;
    let volume = measure.volume();
    let lhs: Vec<f64> = grad.iter().map(|d| d * volume).collect();
    let rhs = measure.integrate_vector(n, |node| {
        let drho: f64 = node.u.iter().zip(&grad).map(|(u, d)| u * d).sum();
        Ok::<_, IdentityError>(
            lowered_over_l(node, n)
                .into_iter()
                .map(|c| n as f64 * drho * c)
                .collect(),
        )
    })?;
    let scale = norm_inf(&lhs).max(norm_inf(&rhs)).max(volume);
    let tol = settings.tolerance_or(tolerance::quadrature(n));
    Ok(IdentityReport::compare(
        CheckKind::Lemma2.name(),
        model,
        x,
        lhs,
        rhs,
        scale,
        tol,
        rule.resolution(),
        min_order::FUNDAMENTAL,
    )
    .with_detail("fiber_volume", volume)
    .with_note(format!("rho = {}", rho.source())))
}

/// `∫ {g^{ab}Ric_{·a·b} − (n+2)Ric/F²}_{|0} (y_i/F²) dΣ⁺_x = −2 ∫ 𝔓_{|0} (y_i/F²) dΣ⁺_x`
pub fn check_lemma1(
    model: &MetricModel,
    x: &[f64],
    rule: &SphereRule,
    settings: &CheckSettings,
) -> Result<IdentityReport, IdentityError> {
    let n = model.dim();
    let measure = FiberMeasure::new(model, x, rule)?;
    let ctx = context(model, settings.order)?;
    let mut lhs = vec![CompensatedSum::new(); n];
    let mut rhs = vec![CompensatedSum::new(); n];
    let mut printed = vec![CompensatedSum::new(); n];
    let mut lhs_abs = vec![CompensatedSum::new(); n];
    let mut max_pointwise: f64 = 0.0;
    for node in measure.nodes() {
        let geo = Geometry::with_context(model, &ctx, x, &node.u)?;
        let integrands = geo.lemma1_integrands()?;
        max_pointwise = max_pointwise.max(abs(integrands.lhs));
        for (i, c) in lowered_over_l(node, n).into_iter().enumerate() {
            let w = node.weight * c;
            lhs[i].add(w * integrands.lhs);
            lhs_abs[i].add(abs(w * integrands.lhs));
            rhs[i].add(w * integrands.rhs_folded);
            printed[i].add(w * integrands.rhs_printed);
        }
    }
    let total = |s: &[CompensatedSum]| s.iter().map(CompensatedSum::total).collect::<Vec<f64>>();
    let (lhs, rhs, printed, lhs_abs) = (total(&lhs), total(&rhs), total(&printed), total(&lhs_abs));
    let volume = measure.volume();
    let sides = norm_inf(&lhs).max(norm_inf(&rhs));
    let scale = sides.max(volume);
    let tol = settings.tolerance_or(tolerance::quadrature(n));
    let fold_gap = max_gap(&rhs, &printed);
    let mut report = IdentityReport::compare(
        CheckKind::Lemma1.name(),
        model,
        x,
        lhs.clone(),
        rhs.clone(),
        scale,
        tol,
        rule.resolution(),
        settings.order,
    )
    .with_detail("fiber_volume", volume)
    .with_detail("lhs_integrand_abs_integral", norm_inf(&lhs_abs))
    .with_detail("lhs_integrand_max", max_pointwise)
    .with_detail("rhs_printed_max", norm_inf(&printed))
    .with_detail("rhs_printed_minus_folded", fold_gap)
    .with_detail(
        "rel_residual_to_sides",
        if sides > 0.0 { max_gap(&lhs, &rhs) / sides } else { 0.0 },
    );
    if fold_gap > tol * scale {
        report = report.with_note(format!(
            "printed and folded right-hand sides differ by {fold_gap:e}"
        ));
    }
    Ok(report)
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| abs(p - q)).fold(0.0, f64::max)
}

/// Evaluates `ρ` on the five-point stencil around `x`, halving the step
/// until every stencil point lies in the domain.
fn stencil(
    model: &MetricModel,
    x: &[f64],
    step: f64,
    ctx: &Arc<JetContext>,
    directions: &[Vec<f64>],
) -> Result<(f64, Vec<[RhoEstimate; 4]>, RhoEstimate), IdentityError> {
    let n = model.dim();
    let centre = rho_estimate(model, ctx, x, directions)?;
    let mut h = step;
    'shrink: for _ in 0..12 {
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(4);
            for k in [-2.0, -1.0, 1.0, 2.0] {
                let mut p = x.to_vec();
                p[i] += k * h;
                if !model.contains(&p, &directions[0]) {
                    h *= 0.5;
                    continue 'shrink;
                }
                row.push(rho_estimate(model, ctx, &p, directions)?);
            }
            let row: [RhoEstimate; 4] = row.try_into().expect("four stencil points");
            rows.push(row);
        }
        return Ok((h, rows, centre));
    }
    Err(crate::geometry::GeometryError::OutsideDomain {
        x: x.to_vec(),
        y: directions[0].clone(),
    }
    .into())
}

/// `(n − 2) ∂_iρ = −2n ⟨F^{-1} 𝔓_{|0} ω⟩_i` for Einstein metrics; refused
/// when `Ric/F²` depends on the direction at any stencil point.
pub fn check_main_theorem(
    model: &MetricModel,
    x: &[f64],
    rule: &SphereRule,
    settings: &CheckSettings,
) -> Result<IdentityReport, IdentityError> {
    let n = model.dim();
    let name = CheckKind::Main.name();
    let tol = settings.tolerance_or(tolerance::quadrature(n));
    let directions = default_directions(n);
    let rho_ctx = context(model, min_order::RICCI)?;
    let step = settings
        .stencil_step
        .unwrap_or_else(|| grid_spacing(model, settings.grid_points));
    let (h, rows, centre) = stencil(model, x, step, &rho_ctx, &directions)?;
    let einstein = rows
        .iter()
        .flatten()
        .chain(core::iter::once(&centre))
        .map(|r| r.spread / (1.0 + abs(r.rho)))
        .fold(0.0, f64::max);
    if einstein >= settings.classification_tolerance {
        return Ok(IdentityReport::refused(
            name,
            model,
            x,
            format!(
                "model not Einstein: Ric/F² varies with direction by {einstein:e} (relative) near x"
            ),
            tol,
        )
        .with_detail("einstein_spread", einstein)
        .with_detail("rho", centre.rho));
    }
    let grad: Vec<f64> = rows
        .iter()
        .map(|r| (r[0].rho - 8.0 * r[1].rho + 8.0 * r[2].rho - r[3].rho) / (12.0 * h))
        .collect();
    let lhs: Vec<f64> = grad.iter().map(|d| (n as f64 - 2.0) * d).collect();

    let measure = FiberMeasure::new(model, x, rule)?;
    let ctx = context(model, settings.order)?;
    let mut max_pointwise: f64 = 0.0;
    let integral = measure.integrate_vector(n, |node| {
        let geo = Geometry::with_context(model, &ctx, x, &node.u)?;
        let p0 = geo.pfrak_dynamical()?;
        max_pointwise = max_pointwise.max(abs(p0));
        Ok::<_, IdentityError>(lowered_over_l(node, n).into_iter().map(|c| p0 * c).collect())
    })?;
    let volume = measure.volume();
    let rhs: Vec<f64> = integral
        .iter()
        .map(|c| -2.0 * n as f64 * c / volume)
        .collect();
    let stencil_spread = rows
        .iter()
        .flatten()
        .map(|r| abs(r.rho - centre.rho))
        .fold(0.0, f64::max);
    let scale = norm_inf(&lhs).max(norm_inf(&rhs)).max(1.0);
    Ok(IdentityReport::compare(name, model, x, lhs, rhs, scale, tol, rule.resolution(), settings.order)
        .with_detail("rho", centre.rho)
        .with_detail("rho_stencil_spread", stencil_spread)
        .with_detail("einstein_spread", einstein)
        .with_detail("stencil_step", h)
        .with_detail("pfrak_dynamical_max", max_pointwise)
        .with_detail("fiber_volume", volume))
}

/// Constancy of `ρ` over `grid` for Einstein metrics of dimension ≥ 3 that
/// are weakly Landsberg or have vanishing Schur scalar.
pub fn check_schur_corollary(
    model: &MetricModel,
    grid: &[Vec<f64>],
    settings: &CheckSettings,
) -> Result<IdentityReport, IdentityError> {
    let n = model.dim();
    let name = CheckKind::Schur.name();
    let tol = settings.tolerance_or(tolerance::RHO_SPREAD);
    let point = single_point(grid);
    if n < 3 {
        return Ok(IdentityReport::refused(name, model, &point, "dimension below 3".into(), tol));
    }
    let rho_ctx = context(model, min_order::RICCI)?;
    let ctx = context(model, settings.order)?;
    let directions = default_directions(n);
    let mut estimates = Vec::with_capacity(grid.len());
    let mut max_p: f64 = 0.0;
    let mut printed_max: f64 = 0.0;
    let mut expanded_max: f64 = 0.0;
    let mut difference_max: f64 = 0.0;
    for x in grid {
        estimates.push(rho_estimate(model, &rho_ctx, x, &directions)?);
        for y in directions.iter().take(n + 1) {
            let geo = Geometry::with_context(model, &ctx, x, y)?;
            max_p = max_p.max(geo.mean_landsberg()?.max_abs());
            let printed = geo.schur_scalar(crate::geometry::SchurVariant::AsPrinted)?;
            let expanded = geo.schur_scalar(crate::geometry::SchurVariant::AsExpanded)?;
            printed_max = printed_max.max(abs(printed));
            expanded_max = expanded_max.max(abs(expanded));
            difference_max = difference_max.max(abs(printed - expanded));
        }
    }
    let einstein = estimates
        .iter()
        .map(|r| r.spread / (1.0 + abs(r.rho)))
        .fold(0.0, f64::max);
    let (mean, spread) = rho_spread(&estimates);
    let decorate = |r: IdentityReport| {
        r.with_detail("rho_mean", mean)
            .with_detail("einstein_spread", einstein)
            .with_detail("mean_landsberg_max", max_p)
            .with_detail("schur_printed_max", printed_max)
            .with_detail("schur_expanded_max", expanded_max)
            .with_detail("schur_printed_minus_expanded_max", difference_max)
            .with_detail("grid_points", grid.len() as f64)
    };
    let class_tol = settings.classification_tolerance;
    if einstein >= class_tol {
        return Ok(decorate(IdentityReport::refused(
            name,
            model,
            &point,
            format!("model not Einstein: Ric/F² direction spread {einstein:e}"),
            tol,
        )));
    }
    if max_p >= class_tol && expanded_max >= class_tol {
        return Ok(decorate(IdentityReport::refused(
            name,
            model,
            &point,
            format!(
                "not weakly Landsberg (max |P_i| = {max_p:e}) and Schur scalar nonzero (max |𝔓_|0| = {expanded_max:e})"
            ),
            tol,
        )));
    }
    Ok(decorate(IdentityReport::compare(
        name,
        model,
        &point,
        vec![spread],
        vec![0.0],
        1.0,
        tol,
        0,
        settings.order,
    )))
}

fn single_point(grid: &[Vec<f64>]) -> Vec<f64> {
    if grid.len() == 1 {
        grid[0].clone()
    } else {
        Vec::new()
    }
}

/// `(mean ρ, max |ρ − mean ρ|)`
fn rho_spread(estimates: &[RhoEstimate]) -> (f64, f64) {
    if estimates.is_empty() {
        return (0.0, 0.0);
    }
    let mean = crate::math::sum(estimates.iter().map(|r| r.rho)) / estimates.len() as f64;
    let spread = estimates.iter().map(|r| abs(r.rho - mean)).fold(0.0, f64::max);
    (mean, spread)
}

/// Dichotomy for Einstein metrics with quadratic Ricci scalar: Ricci-flat
/// or constant `ρ`. Refused when `Ric` is not quadratic or the model is
/// not Einstein; the branch is recorded in the note.
pub fn check_berwald_theorem(
    model: &MetricModel,
    grid: &[Vec<f64>],
    directions: Option<&[Vec<f64>]>,
    settings: &CheckSettings,
) -> Result<IdentityReport, IdentityError> {
    let n = model.dim();
    let name = CheckKind::Berwald.name();
    let tol = settings.tolerance_or(tolerance::RHO_SPREAD);
    let point = single_point(grid);
    if n < 3 {
        return Ok(IdentityReport::refused(name, model, &point, "dimension below 3".into(), tol));
    }
    let defaults;
    let directions = match directions {
        Some(d) => d,
        None => {
            defaults = default_directions(n);
            &defaults
        }
    };
    if directions.len() < 2 {
        return Err(crate::geometry::GeometryError::TooFewDirections {
            required: 2,
            found: directions.len(),
        }
        .into());
    }
    let ctx = context(model, min_order::RICCI_HESSIAN)?;
    let mut max_dev: f64 = 0.0;
    let mut estimates = Vec::with_capacity(grid.len());
    for x in grid {
        let mut hessians: Vec<Vec<f64>> = Vec::with_capacity(directions.len());
        let mut ratios = Vec::with_capacity(directions.len());
        let mut max_ricci: f64 = 0.0;
        for y in directions {
            let geo = Geometry::with_context(model, &ctx, x, y)?;
            hessians.push(geo.ricci_vertical_hessian()?.comps.iter().map(|v| 0.5 * v).collect());
            let ric = geo.ricci_scalar()?;
            max_ricci = max_ricci.max(abs(ric));
            ratios.push(ric / geo.lagrangian());
        }
        for k in 0..n * n {
            let (lo, hi) = hessians
                .iter()
                .map(|h| h[k])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            max_dev = max_dev.max(hi - lo);
        }
        let rho = crate::math::sum(ratios.iter().copied()) / ratios.len() as f64;
        let spread = ratios.iter().map(|r| abs(r - rho)).fold(0.0, f64::max);
        estimates.push(RhoEstimate {
            x: x.clone(),
            rho,
            spread,
            max_ricci,
        });
    }
    let class_tol = settings.classification_tolerance;
    let einstein = estimates
        .iter()
        .map(|r| r.spread / (1.0 + abs(r.rho)))
        .fold(0.0, f64::max);
    let (mean, spread) = rho_spread(&estimates);
    let max_ricci = estimates.iter().map(|r| r.max_ricci).fold(0.0, f64::max);
    let decorate = |r: IdentityReport| {
        r.with_detail("quadratic_deviation", max_dev)
            .with_detail("einstein_spread", einstein)
            .with_detail("rho_mean", mean)
            .with_detail("ricci_max", max_ricci)
    };
    if max_dev >= class_tol {
        return Ok(decorate(IdentityReport::refused(
            name,
            model,
            &point,
            format!("Ric not quadratic (vertical Hessian deviation {max_dev:e}); theorem not applicable"),
            tol,
        )));
    }
    if einstein >= class_tol {
        return Ok(decorate(IdentityReport::refused(
            name,
            model,
            &point,
            format!("model not Einstein: Ric/F² direction spread {einstein:e}"),
            tol,
        )));
    }
    let report = if max_ricci < tol {
        IdentityReport::compare(name, model, &point, vec![max_ricci], vec![0.0], 1.0, tol, 0, min_order::RICCI_HESSIAN)
            .with_note("branch: ricci_flat".into())
            .with_detail("branch", 0.0)
    } else {
        let r = IdentityReport::compare(name, model, &point, vec![spread], vec![0.0], 1.0, tol, 0, min_order::RICCI_HESSIAN);
        let note = if r.verdict == Verdict::Pass {
            "branch: constant_rho"
        } else {
            "neither branch: Ric does not vanish and ρ is not constant"
        };
        r.with_note(note.into()).with_detail("branch", 1.0)
    };
    Ok(decorate(report))
}

/// Contracted Bianchi residual at `x`; refused for non-Riemannian models.
pub fn check_bianchi(
    model: &MetricModel,
    x: &[f64],
    settings: &CheckSettings,
) -> Result<IdentityReport, IdentityError> {
    let name = CheckKind::Bianchi.name();
    let tol = settings.tolerance_or(BIANCHI_TOLERANCE);
    if !model.flags().riemannian {
        return Ok(IdentityReport::refused(name, model, x, "model not Riemannian".into(), tol));
    }
    let residual = contracted_bianchi_riemannian(model, x)?;
    let zeros = vec![0.0; residual.len()];
    Ok(IdentityReport::compare(name, model, x, residual, zeros, 1.0, tol, 0, min_order::BIANCHI))
}

/// The test fields of the torus check: `u = sin(x^a) yᵃ / L` for the
/// horizontal branch and `Yⁱ = sin(x^a) F δⁱ_a` for the vertical one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StokesField {
    /// Zero-based axis `a`.
    pub axis: usize,
}

/// `∫ u_{|0} dΣ⁺` and `∫ div(Yⁱ ∂̇_i) dΣ⁺` over the torus bundle, divided by
/// the volume of the torus `(2π)ⁿ`.
pub fn check_stokes_torus(
    model: &MetricModel,
    field: StokesField,
    rule: &SphereRule,
    settings: &CheckSettings,
) -> Result<IdentityReport, IdentityError> {
    if !model.is_periodic() {
        return Err(QuadratureError::NotPeriodic(model.name().into()).into());
    }
    let n = model.dim();
    let a = field.axis.min(n - 1);
    let ctx = context(model, min_order::CHRISTOFFEL)?;
    let m = settings.torus_points;
    let cell = powi(2.0 * PI / m as f64, n as i32);
    let mut horizontal = CompensatedSum::new();
    let mut vertical = CompensatedSum::new();
    let mut abs_horizontal = CompensatedSum::new();
    let mut abs_vertical = CompensatedSum::new();
    for x in torus_lattice(n, m) {
        let measure = FiberMeasure::new(model, &x, rule)?;
        let s = sin(x[a]);
        for node in measure.nodes() {
            let geo = Geometry::with_context(model, &ctx, &x, &node.u)?;
            let (xs, ys) = geo.variables();
            let u = xs[a].sin().mul(&ys[a]).checked_div(geo.lagrangian_jet())?;
            let u0 = geo.dynamical(&JetTensor::scalar(u, n))?.comps()[0].value();
            let f = geo.finsler_jet()?;
            let dyf = f.derivative(n + a)?.value();
            let mean_cartan = geo.mean_cartan()?.comps[a];
            let y_a: f64 = (0..n).map(|b| node.g[a * n + b] * node.u[b]).sum();
            let div = s * dyf + 2.0 * mean_cartan * s * f.value() - n as f64 * y_a * s * f.value() / geo.lagrangian();
            let w = cell * node.weight;
            horizontal.add(w * u0);
            vertical.add(w * div);
            abs_horizontal.add(abs(w * u0));
            abs_vertical.add(abs(w * div));
        }
    }
    let torus_volume = powi(2.0 * PI, n as i32);
    let lhs = vec![horizontal.total() / torus_volume, vertical.total() / torus_volume];
    let tol = settings.tolerance_or(tolerance::STOKES);
    Ok(IdentityReport::compare(
        CheckKind::Stokes.name(),
        model,
        &[],
        lhs,
        vec![0.0, 0.0],
        1.0,
        tol,
        rule.resolution(),
        min_order::CHRISTOFFEL,
    )
    .with_detail("torus_points", m as f64)
    .with_detail("horizontal_abs_integral", abs_horizontal.total() / torus_volume)
    .with_detail("vertical_abs_integral", abs_vertical.total() / torus_volume))
}

/// Fiber volume computed with the sections `y = λu` against `|u| = 1`.
pub fn check_section_invariance(
    model: &MetricModel,
    x: &[f64],
    rule: &SphereRule,
    lambdas: &[f64],
    settings: &CheckSettings,
) -> Result<IdentityReport, IdentityError> {
    let base = FiberMeasure::new(model, x, rule)?.volume();
    let mut lhs = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        lhs.push(FiberMeasure::with_section(model, x, rule, lambda)?.volume());
    }
    let rhs = vec![base; lambdas.len()];
    let tol = settings.tolerance_or(tolerance::SECTION_INVARIANCE);
    Ok(IdentityReport::compare(
        CheckKind::SectionInvariance.name(),
        model,
        x,
        lhs,
        rhs,
        abs(base),
        tol,
        rule.resolution(),
        min_order::FUNDAMENTAL,
    ))
}
