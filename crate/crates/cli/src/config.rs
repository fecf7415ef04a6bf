//! Run configuration: the TOML schema, defaults and validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use finsler_core::identity::{BaseFunction, CheckKind};
use finsler_core::quadrature::{default_resolution, MIN_RESOLUTION};
use finsler_core::{BaseDomain, MetricModel, ModelFlags};
use serde::{Deserialize, Serialize};

use crate::metric_ref::{parse_metric_ref, RefError};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config declares no metrics")]
    NoMetrics,
    #[error(transparent)]
    UnknownCheck(#[from] finsler_core::identity::IdentityError),
    #[error(
        "jet order {order} is too low for check `{check}`, which needs at least {required}; \
         raise `order` or drop the check"
    )]
    OrderBudget {
        order: usize,
        check: &'static str,
        required: usize,
    },
    #[error("tolerance for `{check}` must be positive, got {value}")]
    Tolerance { check: String, value: f64 },
    #[error("resolution {value} for dimension {dim} is below the minimum {MIN_RESOLUTION}")]
    Resolution { dim: usize, value: usize },
    #[error("`{field}` must be at least {min}, got {value}")]
    TooSmall {
        field: &'static str,
        min: usize,
        value: usize,
    },
    #[error("metric #{index}: {reason}")]
    Declaration { index: usize, reason: String },
    #[error("metric #{index} ({name}) failed validation: {source}")]
    Metric {
        index: usize,
        name: String,
        source: RefError,
    },
    #[error("rho function `{source_text}` is invalid in dimension {dim}: {error}")]
    Rho {
        source_text: String,
        dim: usize,
        error: finsler_core::identity::IdentityError,
    },
}

/// Fiber quadrature resolution per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    #[serde(default = "res2")]
    pub n2: usize,
    #[serde(default = "res3")]
    pub n3: usize,
    #[serde(default = "res4")]
    pub n4: usize,
}

fn res2() -> usize {
    default_resolution(2)
}
fn res3() -> usize {
    default_resolution(3)
}
fn res4() -> usize {
    default_resolution(4)
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            n2: res2(),
            n3: res3(),
            n4: res4(),
        }
    }
}

impl Resolution {
    pub fn for_dim(&self, n: usize) -> usize {
        match n {
            2 => self.n2,
            3 => self.n3,
            _ => self.n4,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// One metric: either a built-in reference (`builtin = "funk(3)"`) or a DSL
/// Lagrangian with its dimension.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDecl {
    pub builtin: Option<String>,
    pub name: Option<String>,
    pub dim: Option<usize>,
    pub lagrangian: Option<String>,
    /// Expression that must be positive on the domain.
    pub domain: Option<String>,
    pub base: Option<BaseDomain>,
    #[serde(default)]
    pub riemannian: bool,
    /// Explicit base points for the pointwise checks; when empty, points are
    /// drawn from the sampling region with the run seed.
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
}

impl MetricDecl {
    pub fn build(&self, index: usize) -> Result<MetricModel, ConfigError> {
        let decl_err = |reason: &str| ConfigError::Declaration {
            index,
            reason: reason.into(),
        };
        let model = match (&self.builtin, &self.lagrangian) {
            (Some(src), None) => {
                if self.dim.is_some() || self.domain.is_some() || self.riemannian {
                    return Err(decl_err("`dim`, `domain` and `riemannian` only apply to `lagrangian` metrics"));
                }
                let model = parse_metric_ref(src).map_err(|source| ConfigError::Metric {
                    index,
                    name: src.clone(),
                    source,
                })?;
                match self.base {
                    Some(base) => model.with_base(base).map_err(|e| ConfigError::Metric {
                        index,
                        name: src.clone(),
                        source: e.into(),
                    })?,
                    None => model,
                }
            }
            (None, Some(src)) => {
                let dim = self.dim.ok_or_else(|| decl_err("`lagrangian` needs `dim`"))?;
                let name = self.name.clone().unwrap_or_else(|| src.clone());
                let flags = ModelFlags {
                    positive_definite: true,
                    riemannian: self.riemannian,
                    x_independent: false,
                };
                let base = self.base.unwrap_or(BaseDomain::Box { lo: -1.0, hi: 1.0 });
                MetricModel::from_expression(&name, dim, src, self.domain.as_deref(), flags, base).map_err(
                    |e| ConfigError::Metric {
                        index,
                        name: name.clone(),
                        source: e.into(),
                    },
                )?
            }
            _ => return Err(decl_err("exactly one of `builtin` and `lagrangian` is required")),
        };
        let model = match &self.name {
            Some(name) => model.renamed(name),
            None => model,
        };
        if let Some(p) = self.points.iter().find(|p| p.len() != model.dim()) {
            return Err(decl_err(&format!(
                "point {p:?} has {} coordinates, the metric has dimension {}",
                p.len(),
                model.dim()
            )));
        }
        Ok(model)
    }
}

fn default_seed() -> u64 {
    42
}
fn default_order() -> usize {
    finsler_core::DEFAULT_JET_ORDER
}
fn default_checks() -> Vec<String> {
    vec!["all".into()]
}
fn default_points() -> usize {
    3
}
fn default_grid_points() -> usize {
    3
}
fn default_torus_points() -> usize {
    16
}
fn default_rho() -> Vec<String> {
    vec!["x1".into()]
}
fn default_classification() -> f64 {
    finsler_core::tolerance::CLASSIFICATION
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads; 0 uses every core. Not echoed into reports, which
    /// must not depend on it.
    #[serde(default, skip_serializing)]
    pub jobs: usize,
    #[serde(default = "default_order")]
    pub order: usize,
    /// Check names, or `"all"`.
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
    #[serde(default)]
    pub resolution: Resolution,
    /// Base points per metric for the pointwise checks.
    #[serde(default = "default_points")]
    pub points: usize,
    /// Lattice points per axis of the base grids (Schur, Berwald,
    /// classification).
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    /// Lattice points per axis on the torus for the Stokes check.
    #[serde(default = "default_torus_points")]
    pub torus_points: usize,
    /// Base functions `ρ` for the `lemma2` check.
    #[serde(default = "default_rho")]
    pub rho: Vec<String>,
    /// Per-check tolerance overrides, keyed by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default = "default_classification")]
    pub classification_tolerance: f64,
    #[serde(default = "default_true")]
    pub classify: bool,
    /// Not echoed into reports.
    #[serde(default, skip_serializing)]
    pub output: Output,
    #[serde(default, rename = "metric")]
    pub metrics: Vec<MetricDecl>,
}

/// A validated configuration with its models built.
#[derive(Debug, Clone)]
pub struct Plan {
    pub config: RunConfig,
    pub checks: Vec<CheckKind>,
    pub models: Vec<MetricModel>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn check_kinds(&self) -> Result<Vec<CheckKind>, ConfigError> {
        if self.checks.iter().any(|c| c == "all") {
            return Ok(CheckKind::ALL.to_vec());
        }
        let mut kinds = self
            .checks
            .iter()
            .map(|c| CheckKind::parse(c))
            .collect::<Result<Vec<_>, _>>()?;
        kinds.sort();
        kinds.dedup();
        Ok(kinds)
    }

    /// Checks every invariant of the schema and builds the models.
    pub fn validate(self) -> Result<Plan, ConfigError> {
        let checks = self.check_kinds()?;
        if let Some(kind) = checks.iter().find(|k| k.min_order() > self.order) {
            return Err(ConfigError::OrderBudget {
                order: self.order,
                check: kind.name(),
                required: kind.min_order(),
            });
        }
        for (check, &value) in &self.tolerances {
            CheckKind::parse(check)?;
            if !(value > 0.0) {
                return Err(ConfigError::Tolerance {
                    check: check.clone(),
                    value,
                });
            }
        }
        if !(self.classification_tolerance > 0.0) {
            return Err(ConfigError::Tolerance {
                check: "classification".into(),
                value: self.classification_tolerance,
            });
        }
        for (dim, value) in [(2, self.resolution.n2), (3, self.resolution.n3), (4, self.resolution.n4)] {
            if value < MIN_RESOLUTION {
                return Err(ConfigError::Resolution { dim, value });
            }
        }
        for (field, min, value) in [
            ("points", 1, self.points),
            ("grid_points", 1, self.grid_points),
            ("torus_points", 2, self.torus_points),
        ] {
            if value < min {
                return Err(ConfigError::TooSmall { field, min, value });
            }
        }
        if self.metrics.is_empty() {
            return Err(ConfigError::NoMetrics);
        }
        let models = self
            .metrics
            .iter()
            .enumerate()
            .map(|(i, d)| d.build(i))
            .collect::<Result<Vec<_>, _>>()?;
        for model in &models {
            for src in &self.rho {
                BaseFunction::parse(src, model.dim()).map_err(|error| ConfigError::Rho {
                    source_text: src.clone(),
                    dim: model.dim(),
                    error,
                })?;
            }
        }
        Ok(Plan {
            config: self,
            checks,
            models,
        })
    }
}
