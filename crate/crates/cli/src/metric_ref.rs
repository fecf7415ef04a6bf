//! Compact metric references such as `funk(3)` or `torus_conformal(3, 0.1)`.

use finsler_core::metric::BUILTIN_SCHEMAS;
use finsler_core::{Builtin, MetricError, MetricModel};

#[derive(Debug, thiserror::Error)]
pub enum RefError {
    #[error("malformed metric reference `{0}`; expected name(arg, ...)")]
    Syntax(String),
    #[error("unknown metric family `{0}`; see `finsler list-metrics`")]
    UnknownFamily(String),
    #[error("`{family}` expects {expected}, got `{args}`")]
    Arguments {
        family: String,
        expected: &'static str,
        args: String,
    },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Splits `a, f(b, c), d` at top-level commas.
fn split_args(src: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in src.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                cur.push(ch);
            }
            ',' if depth == 0 => out.push(std::mem::take(&mut cur).trim().to_string()),
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// Parses a reference and builds (and validates) the model.
///
/// Families: `euclidean(n)`, `minkowski_randers(b1, ..., bn)`,
/// `riemannian(n, g11, ..., gnn)`, `sphere_round(n, R)`,
/// `torus_conformal(n, eps)`, `randers(n, beta1, ..., betan)` (Euclidean α),
/// `funk(n)`, and `dsl(n, L)` for an arbitrary Lagrangian on `[-1, 1]ⁿ`.
pub fn parse_metric_ref(src: &str) -> Result<MetricModel, RefError> {
    let src = src.trim();
    let open = src.find('(').ok_or_else(|| RefError::Syntax(src.into()))?;
    if !src.ends_with(')') {
        return Err(RefError::Syntax(src.into()));
    }
    let family = src[..open].trim();
    let inner = &src[open + 1..src.len() - 1];
    let args = split_args(inner);
    let bad = |expected: &'static str| RefError::Arguments {
        family: family.into(),
        expected,
        args: inner.into(),
    };
    let dim = |s: &str, expected| s.parse::<usize>().map_err(|_| bad(expected));
    let real = |s: &str, expected| s.parse::<f64>().map_err(|_| bad(expected));
    let exprs = |rest: &[String], count: usize, expected| {
        if rest.len() == count {
            Ok(rest.to_vec())
        } else {
            Err(bad(expected))
        }
    };
    let spec = match family {
        "euclidean" => {
            const E: &str = "(dim)";
            match args.as_slice() {
                [n] => Builtin::Euclidean { dim: dim(n, E)? },
                _ => return Err(bad(E)),
            }
        }
        "minkowski_randers" => {
            const E: &str = "(b1, ..., bn)";
            let b = args.iter().map(|a| real(a, E)).collect::<Result<Vec<f64>, _>>()?;
            Builtin::MinkowskiRanders { b }
        }
        "riemannian" => {
            const E: &str = "(dim, g11, ..., gnn)";
            let n = dim(args.first().ok_or_else(|| bad(E))?, E)?;
            Builtin::Riemannian {
                dim: n,
                g: exprs(&args[1..], n * n, E)?,
            }
        }
        "sphere_round" => {
            const E: &str = "(dim, radius)";
            match args.as_slice() {
                [n, r] => Builtin::SphereRound {
                    dim: dim(n, E)?,
                    radius: real(r, E)?,
                },
                _ => return Err(bad(E)),
            }
        }
        "torus_conformal" => {
            const E: &str = "(dim, amplitude)";
            match args.as_slice() {
                [n, a] => Builtin::TorusConformal {
                    dim: dim(n, E)?,
                    amplitude: real(a, E)?,
                },
                _ => return Err(bad(E)),
            }
        }
        "randers" => {
            const E: &str = "(dim, beta1, ..., betan)";
            let n = dim(args.first().ok_or_else(|| bad(E))?, E)?;
            Builtin::Randers {
                dim: n,
                alpha: None,
                beta: exprs(&args[1..], n, E)?,
            }
        }
        "funk" => {
            const E: &str = "(dim)";
            match args.as_slice() {
                [n] => Builtin::Funk { dim: dim(n, E)? },
                _ => return Err(bad(E)),
            }
        }
        "dsl" => {
            const E: &str = "(dim, lagrangian)";
            return match args.as_slice() {
                [n, l] => Ok(MetricModel::parse_dsl(l, dim(n, E)?)?),
                _ => Err(bad(E)),
            };
        }
        other => return Err(RefError::UnknownFamily(other.into())),
    };
    Ok(MetricModel::builtin(spec)?)
}

/// One line per family with its parameter schema.
pub fn list_metrics() -> String {
    let mut out = String::new();
    for (name, schema) in BUILTIN_SCHEMAS {
        out.push_str(&format!("{name:<18} {schema}\n"));
    }
    out.push_str(&format!("{:<18} {}\n", "dsl", "dim: integer; lagrangian: expression in x1..xn, y1..yn"));
    out
}
