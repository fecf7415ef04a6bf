use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use finsler_cli::output::{render_report, summary_table, write_csv, write_json};
use finsler_cli::runner::execute;
use finsler_cli::{describe_check, list_metrics, parse_metric_ref, run, RunConfig};
use finsler_core::identity::{base_grid, BaseFunction, CheckKind, CheckSettings};
use finsler_core::quadrature::default_resolution;
use finsler_core::{SphereRule, DEFAULT_JET_ORDER};

#[derive(Parser)]
#[command(name = "finsler", version, about = "Numerical verification of Finsler-geometric identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the battery described by a TOML config.
    Run {
        config: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one check on one metric and print the residual breakdown.
    Single {
        /// Metric reference, e.g. `funk(3)` or `torus_conformal(3, 0.1)`.
        metric: String,
        check: String,
        /// Base point, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Option<Vec<f64>>,
        /// Base function for `lemma2`.
        #[arg(long)]
        rho: Option<String>,
        /// Fiber quadrature resolution.
        #[arg(long)]
        resolution: Option<usize>,
        /// Jet order.
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// List the built-in metric families and their parameters.
    ListMetrics,
    /// Describe what a check verifies.
    DescribeCheck { name: String },
}

fn run_config(
    path: PathBuf,
    jobs: Option<usize>,
    json: Option<PathBuf>,
    csv: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<u8> {
    let mut config = RunConfig::load(&path)?;
    if let Some(j) = jobs {
        config.jobs = j;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    config.output.json = json.or(config.output.json);
    config.output.csv = csv.or(config.output.csv);
    let output = config.output.clone();
    let plan = config.validate()?;
    let report = run(&plan)?;
    if let Some(p) = &output.json {
        write_json(&report, p)?;
    }
    if let Some(p) = &output.csv {
        write_csv(&report.reports, p)?;
    }
    print!("{}", summary_table(&report));
    Ok(report.summary.exit_code())
}

#[allow(clippy::too_many_arguments)]
fn single(
    metric: &str,
    check: &str,
    point: Option<Vec<f64>>,
    rho: Option<String>,
    resolution: Option<usize>,
    order: Option<usize>,
    tolerance: Option<f64>,
    json: bool,
) -> Result<u8> {
    let model = parse_metric_ref(metric)?;
    let kind = CheckKind::parse(check)?;
    let n = model.dim();
    let order = order.unwrap_or(DEFAULT_JET_ORDER);
    if order < kind.min_order() {
        bail!(
            "jet order {order} is too low for check `{}`, which needs at least {}",
            kind.name(),
            kind.min_order()
        );
    }
    if let Some(t) = tolerance {
        if !(t > 0.0) {
            bail!("tolerance must be positive, got {t}");
        }
    }
    let x = match point {
        Some(p) => p,
        None => base_grid(&model, 1)
            .pop()
            .context("the centre of the sampling region is outside the domain; pass --point")?,
    };
    if x.len() != n {
        bail!("--point has {} coordinates, {} has dimension {n}", x.len(), model.name());
    }
    let rho = rho.map(|src| BaseFunction::parse(&src, n)).transpose()?;
    let rule = SphereRule::new(n, resolution.unwrap_or_else(|| default_resolution(n)))?;
    let settings = CheckSettings {
        order,
        tolerance,
        ..CheckSettings::default()
    };
    let report = execute(kind, &model, &x, &rule, rho.as_ref(), &settings);
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", render_report(&report));
    }
    Ok(u8::from(report.verdict == finsler_core::identity::Verdict::Fail))
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run {
            config,
            jobs,
            json,
            csv,
            seed,
        } => run_config(config, jobs, json, csv, seed),
        Command::Single {
            metric,
            check,
            point,
            rho,
            resolution,
            order,
            tolerance,
            json,
        } => single(&metric, &check, point, rho, resolution, order, tolerance, json),
        Command::ListMetrics => {
            print!("{}", list_metrics());
            Ok(0)
        }
        Command::DescribeCheck { name } => {
            println!("{}", describe_check(&name)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
