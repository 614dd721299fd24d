//! finslerlab: curvature, torsion and geodesic checks for Randers-type
//! Finsler charts.
//!
//! Reports are JSON on stdout (or `--out`); human-readable summaries go to
//! stderr. Exit codes: 0 all checks pass, 1 a check failed, 2 invalid
//! configuration, 3 chart validation failure.

use clap::{Args, Parser, Subcommand};
use finslerlab_core::chart::CatalogParams;
use finslerlab_core::report::{to_canonical_bytes, Report, Status};
use finslerlab_core::runs::{
    cmd_classify, cmd_geodesic, cmd_tensors, cmd_verify, ChartSource, RunConfig,
};
use finslerlab_core::{Error, Result};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "finslerlab",
    version,
    about = "Numerical laboratory for Randers-type Finsler charts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Survey tensor magnitudes and identity residuals over random samples
    Tensors(CommonArgs),
    /// Decide the metric class flags (Riemannian, Berwald, Landsberg, ...)
    Classify(CommonArgs),
    /// Integrate the chart's distinguished geodesic and transport a frame vector
    Geodesic(GeodesicArgs),
    /// Run every check family and record pass, fail or not-applicable
    Verify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Built-in chart: euclidean_randers, funk_ball, parallel_beta_product,
    /// riemannian_sphere
    #[arg(long, value_name = "NAME")]
    catalog: Option<String>,
    /// Chart description file (JSON); validated before use
    #[arg(long, value_name = "PATH", conflicts_with = "catalog")]
    chart: Option<PathBuf>,
    /// Dimension for catalog charts (file charts declare their own)
    #[arg(long)]
    dim: Option<usize>,
    /// Constant covector for euclidean_randers, comma separated
    #[arg(long, value_name = "B1,B2,...", value_delimiter = ',', allow_hyphen_values = true)]
    b: Option<Vec<f64>>,
    /// Domain radius for funk_ball
    #[arg(long)]
    radius: Option<f64>,
    /// Number of (point, direction) samples
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Seed of the deterministic sample stream; a fixed seed reproduces the
    /// report byte for byte
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Override a named tolerance, e.g. --tol-override kinematic=2e-4
    #[arg(long = "tol-override", value_name = "NAME=VALUE")]
    tol_override: Vec<String>,
    /// Write the JSON report here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GeodesicArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Integration span in units of arc length
    #[arg(long = "t-end", default_value_t = 3.0, allow_hyphen_values = true)]
    t_end: f64,
    /// Write the per-step trace table here (defaults to the report path
    /// with a .trace.csv suffix when --out is given)
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
}

fn build_config(args: &CommonArgs, t_end: f64) -> Result<RunConfig> {
    let source = match (&args.catalog, &args.chart) {
        (Some(name), None) => ChartSource::Catalog(name.clone()),
        (None, Some(path)) => ChartSource::File(path.clone()),
        _ => {
            return Err(Error::Config(
                "exactly one of --catalog or --chart is required".into(),
            ))
        }
    };
    if args.chart.is_some() && (args.b.is_some() || args.radius.is_some()) {
        return Err(Error::Config(
            "--b and --radius only apply to catalog charts".into(),
        ));
    }
    if args.samples == 0 {
        return Err(Error::Config("--samples must be at least 1".into()));
    }
    let mut config = RunConfig::new(source);
    config.dim = args.dim;
    config.params = CatalogParams {
        b: args.b.clone(),
        radius: args.radius,
    };
    config.samples = args.samples;
    config.seed = args.seed;
    config.tol_overrides = args.tol_override.clone();
    config.t_end = t_end;
    Ok(config)
}

/// Write the report (stdout or `--out`), summarize on stderr, and say
/// whether any check failed.
fn emit(report: &Report, args: &CommonArgs) -> Result<bool> {
    let bytes = to_canonical_bytes(report)?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, &bytes).map_err(|e| {
                Error::Config(format!("cannot write report {}: {e}", path.display()))
            })?;
            eprintln!("report written to {}", path.display());
        }
        None => {
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| Error::Config(format!("cannot write report: {e}")))?;
        }
    }
    eprintln!(
        "{} on {} (dim {}, {} samples, seed {})",
        report.command, report.chart, report.dim, report.samples, report.seed
    );
    for check in &report.checks {
        let tag = match check.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::NotApplicable => "n/a ",
        };
        match (check.residual, check.tolerance) {
            (Some(r), Some(t)) => {
                eprintln!("  {tag}  {:<32} residual {r:9.3e}  tolerance {t:.1e}", check.name)
            }
            _ => match &check.note {
                Some(note) => eprintln!("  {tag}  {:<32} {note}", check.name),
                None => eprintln!("  {tag}  {}", check.name),
            },
        }
    }
    Ok(report.has_failure())
}

fn sidecar_path(out: &PathBuf) -> PathBuf {
    out.with_extension("trace.csv")
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Tensors(args) => {
            let report = cmd_tensors(&build_config(&args, 3.0)?)?;
            emit(&report, &args)
        }
        Command::Classify(args) => {
            let report = cmd_classify(&build_config(&args, 3.0)?)?;
            emit(&report, &args)
        }
        Command::Verify(args) => {
            let report = cmd_verify(&build_config(&args, 3.0)?)?;
            emit(&report, &args)
        }
        Command::Geodesic(geo) => {
            let config = build_config(&geo.common, geo.t_end)?;
            let (report, csv) = cmd_geodesic(&config)?;
            let trace_path = geo
                .trace
                .clone()
                .or_else(|| geo.common.out.as_ref().map(sidecar_path));
            if let Some(path) = &trace_path {
                std::fs::write(path, csv).map_err(|e| {
                    Error::Config(format!("cannot write trace {}: {e}", path.display()))
                })?;
                eprintln!("trace written to {}", path.display());
            }
            emit(&report, &geo.common)
        }
    }
}

fn exit_code(error: &Error) -> i32 {
    match error {
        Error::ChartInvalid(_) | Error::Parse { .. } => 3,
        _ => 2,
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => {}
        Ok(true) => std::process::exit(1),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
