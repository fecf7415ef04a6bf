//! JSON and CSV writers and the text renderings printed to the terminal.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use finsler_core::identity::{IdentityReport, Verdict};
use serde::Serialize;

use crate::runner::RunReport;

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Twelve significant digits.
pub fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

fn join(v: &[f64]) -> String {
    v.iter().map(|c| sig12(*c)).collect::<Vec<_>>().join(";")
}

pub fn to_json(report: &RunReport) -> Result<String, OutputError> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn write_json(report: &RunReport, path: &Path) -> Result<(), OutputError> {
    let mut text = to_json(report)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Serialize)]
struct Row<'a> {
    identity: &'a str,
    model: &'a str,
    point: String,
    lhs: String,
    rhs: String,
    abs_residual: String,
    rel_residual: String,
    tolerance: String,
    verdict: &'static str,
    resolution: usize,
    order: usize,
    note: &'a str,
}

/// One row per report; vectors are `;`-separated.
pub fn to_csv(reports: &[IdentityReport]) -> Result<String, OutputError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(Row {
            identity: &r.identity,
            model: &r.model,
            point: join(&r.point),
            lhs: join(&r.lhs),
            rhs: join(&r.rhs),
            abs_residual: sig12(r.abs_residual),
            rel_residual: sig12(r.rel_residual),
            tolerance: sig12(r.tolerance),
            verdict: r.verdict.as_str(),
            resolution: r.resolution,
            order: r.order,
            note: r.note.as_deref().unwrap_or(""),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn write_csv(reports: &[IdentityReport], path: &Path) -> Result<(), OutputError> {
    std::fs::write(path, to_csv(reports)?).map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Pass/fail/refused counts per model and check, then the totals.
pub fn summary_table(report: &RunReport) -> String {
    let mut counts: BTreeMap<(&str, &str), [usize; 3]> = BTreeMap::new();
    let mut worst: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for r in &report.reports {
        let key = (r.model.as_str(), r.identity.as_str());
        let slot = match r.verdict {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Refused => 2,
        };
        counts.entry(key).or_default()[slot] += 1;
        if r.verdict != Verdict::Refused {
            let w = worst.entry(key).or_insert(0.0);
            *w = w.max(r.rel_residual);
        }
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<40} {:<20} {:>5} {:>5} {:>8} {:>14}",
        "model", "check", "pass", "fail", "refused", "max rel resid"
    );
    for ((model, check), [p, f, r]) in &counts {
        let resid = worst.get(&(*model, *check)).map_or("-".to_string(), |w| format!("{w:.3e}"));
        let _ = writeln!(out, "{model:<40} {check:<20} {p:>5} {f:>5} {r:>8} {resid:>14}");
    }
    let s = report.summary;
    let _ = writeln!(
        out,
        "total: {} pass, {} fail, {} refused in {:.1} s",
        s.pass, s.fail, s.refused, report.wall_time
    );
    for w in &report.warnings {
        let _ = writeln!(out, "warning: classification skipped for {w}");
    }
    out
}

/// Human-readable breakdown of a single report.
pub fn render_report(r: &IdentityReport) -> String {
    let vec = |v: &[f64]| {
        let parts: Vec<String> = v.iter().map(|c| sig12(*c)).collect();
        format!("[{}]", parts.join(", "))
    };
    let mut out = String::new();
    let _ = writeln!(out, "check         {}", r.identity);
    let _ = writeln!(out, "model         {}", r.model);
    let _ = writeln!(out, "point         {}", vec(&r.point));
    if !r.lhs.is_empty() {
        let _ = writeln!(out, "lhs           {}", vec(&r.lhs));
        let _ = writeln!(out, "rhs           {}", vec(&r.rhs));
        let _ = writeln!(out, "abs residual  {}", sig12(r.abs_residual));
        let _ = writeln!(out, "rel residual  {}", sig12(r.rel_residual));
        let _ = writeln!(out, "tolerance     {}", sig12(r.tolerance));
        let _ = writeln!(out, "resolution    {}", r.resolution);
        let _ = writeln!(out, "jet order     {}", r.order);
    }
    for (k, v) in &r.details {
        let _ = writeln!(out, "  {k:<24} {}", sig12(*v));
    }
    if let Some(note) = &r.note {
        let _ = writeln!(out, "note          {note}");
    }
    let _ = writeln!(out, "verdict       {}", r.verdict.as_str().to_uppercase());
    out
}
