//! Battery execution over a work pool, with deterministic report assembly.

use std::collections::BTreeMap;
use std::time::Instant;

use finsler_core::identity::{
    base_grid, check_berwald_theorem, check_schur_corollary, check_stokes_torus, classify, run_pointwise,
    BaseFunction, CheckKind, CheckSettings, ClassificationReport, IdentityError, IdentityReport, StokesField,
    Verdict,
};
use finsler_core::quadrature::QuadratureError;
use finsler_core::{MetricError, MetricModel, SphereRule};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Plan, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("cannot start the worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("cannot sample base points for {model}: {source}")]
    Sampling { model: String, source: MetricError },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub refused: usize,
}

impl Summary {
    pub fn tally(reports: &[IdentityReport]) -> Self {
        let mut s = Summary::default();
        for r in reports {
            match r.verdict {
                Verdict::Pass => s.pass += 1,
                Verdict::Fail => s.fail += 1,
                Verdict::Refused => s.refused += 1,
            }
        }
        s
    }

    /// 0 when nothing failed, 1 otherwise; refusals never count.
    pub fn exit_code(&self) -> u8 {
        u8::from(self.fail > 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: RunConfig,
    pub reports: Vec<IdentityReport>,
    pub classifications: Vec<ClassificationReport>,
    /// Classifications that could not be computed, as `model: error`.
    #[serde(default)]
    pub warnings: Vec<String>,
    pub summary: Summary,
    /// Seconds.
    pub wall_time: f64,
}

/// Runs one check, turning unmet hypotheses into refusals and runtime
/// errors into failures that carry the error text.
pub fn execute(
    kind: CheckKind,
    model: &MetricModel,
    x: &[f64],
    rule: &SphereRule,
    rho: Option<&BaseFunction>,
    settings: &CheckSettings,
) -> IdentityReport {
    run_pointwise(kind, model, x, rule, rho, settings).unwrap_or_else(|e| from_error(kind, model, x, e, settings))
}

fn from_error(
    kind: CheckKind,
    model: &MetricModel,
    x: &[f64],
    e: IdentityError,
    settings: &CheckSettings,
) -> IdentityReport {
    let tolerance = settings.tolerance.unwrap_or(0.0);
    let mut r = IdentityReport::refused(kind.name(), model, x, e.to_string(), tolerance);
    if !matches!(e, IdentityError::Quadrature(QuadratureError::NotPeriodic(_))) {
        r.verdict = Verdict::Fail;
        r.note = Some(format!("error: {e}"));
    }
    r
}

#[derive(Debug, Clone)]
enum Work {
    Point { x: Vec<f64>, rho: Option<usize> },
    Grid(Vec<Vec<f64>>),
    Torus,
}

#[derive(Debug, Clone)]
struct Task {
    model: usize,
    kind: CheckKind,
    work: Work,
}

fn settings_for(config: &RunConfig, kind: CheckKind) -> CheckSettings {
    CheckSettings {
        order: config.order,
        tolerance: config.tolerances.get(kind.name()).copied(),
        classification_tolerance: config.classification_tolerance,
        grid_points: config.grid_points,
        stencil_step: None,
        torus_points: config.torus_points,
    }
}

fn base_points(plan: &Plan, index: usize) -> Result<Vec<Vec<f64>>, RunError> {
    let decl = &plan.config.metrics[index];
    if !decl.points.is_empty() {
        return Ok(decl.points.clone());
    }
    let model = &plan.models[index];
    let seed = plan.config.seed.wrapping_add(index as u64);
    model
        .domain_sample(plan.config.points, seed)
        .map(|s| s.into_iter().map(|(x, _)| x).collect())
        .map_err(|source| RunError::Sampling {
            model: model.name().into(),
            source,
        })
}

fn tasks(plan: &Plan) -> Result<Vec<Task>, RunError> {
    let config = &plan.config;
    let mut out = Vec::new();
    for (m, model) in plan.models.iter().enumerate() {
        let points = base_points(plan, m)?;
        for &kind in &plan.checks {
            match kind {
                CheckKind::Schur | CheckKind::Berwald => out.push(Task {
                    model: m,
                    kind,
                    work: Work::Grid(base_grid(model, config.grid_points)),
                }),
                CheckKind::Stokes => out.push(Task {
                    model: m,
                    kind,
                    work: Work::Torus,
                }),
                CheckKind::Lemma2 => {
                    for x in &points {
                        for r in 0..config.rho.len() {
                            out.push(Task {
                                model: m,
                                kind,
                                work: Work::Point {
                                    x: x.clone(),
                                    rho: Some(r),
                                },
                            });
                        }
                    }
                }
                _ => {
                    for x in &points {
                        out.push(Task {
                            model: m,
                            kind,
                            work: Work::Point { x: x.clone(), rho: None },
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Executes the plan on `jobs` threads (0 = all cores). Reports come out in
/// task order: model as declared, then check, point and `ρ`, whatever the
/// parallelism.
pub fn run(plan: &Plan) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let config = &plan.config;
    let mut rules: BTreeMap<usize, SphereRule> = BTreeMap::new();
    for model in &plan.models {
        let n = model.dim();
        if !rules.contains_key(&n) {
            rules.insert(n, SphereRule::new(n, config.resolution.for_dim(n))?);
        }
    }
    let rhos: Vec<Vec<BaseFunction>> = plan
        .models
        .iter()
        .map(|m| {
            config
                .rho
                .iter()
                .map(|src| BaseFunction::parse(src, m.dim()).expect("validated with the config"))
                .collect()
        })
        .collect();
    let tasks = tasks(plan)?;

    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build()?;
    let (reports, classified) = pool.install(|| {
        let reports: Vec<IdentityReport> = tasks
            .par_iter()
            .map(|task| {
                let model = &plan.models[task.model];
                let rule = &rules[&model.dim()];
                let settings = settings_for(config, task.kind);
                match &task.work {
                    Work::Point { x, rho } => {
                        let rho = rho.map(|r| &rhos[task.model][r]);
                        execute(task.kind, model, x, rule, rho, &settings)
                    }
                    Work::Grid(grid) => {
                        let result = if task.kind == CheckKind::Schur {
                            check_schur_corollary(model, grid, &settings)
                        } else {
                            check_berwald_theorem(model, grid, None, &settings)
                        };
                        result.unwrap_or_else(|e| from_error(task.kind, model, &[], e, &settings))
                    }
                    Work::Torus => check_stokes_torus(model, StokesField::default(), rule, &settings)
                        .unwrap_or_else(|e| from_error(task.kind, model, &[], e, &settings)),
                }
            })
            .collect();
        let classified: Vec<Result<ClassificationReport, String>> = if config.classify {
            plan.models
                .par_iter()
                .map(|model| {
                    let settings = settings_for(config, CheckKind::Main);
                    classify(model, &base_grid(model, config.grid_points), &settings)
                        .map_err(|e| format!("{}: {e}", model.name()))
                })
                .collect()
        } else {
            Vec::new()
        };
        (reports, classified)
    });

    let mut classifications = Vec::new();
    let mut warnings = Vec::new();
    for c in classified {
        match c {
            Ok(c) => classifications.push(c),
            Err(w) => warnings.push(w),
        }
    }
    let summary = Summary::tally(&reports);
    Ok(RunReport {
        version: VERSION.into(),
        config: config.clone(),
        reports,
        classifications,
        warnings,
        summary,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
