use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use distprod::cli::{parse_complex_vector, run_job, write_report, Job};
use distprod::testfn::TestFunctionSpec;
use distprod::{Error, Result};

/// Pairs a product of boundary-value distributions with test functions and
/// reports the y -> 0 limit, or its extension when the limit diverges.
#[derive(Debug, Parser)]
#[command(name = "distprod", version)]
struct Args {
    /// Product expression, e.g. "delta * pv(1/x)".
    #[arg(long)]
    expr: Option<String>,
    /// Test function as JSON, e.g. '{"poly":[0,1],"sigma":1}'. Repeatable.
    #[arg(long)]
    phi: Vec<String>,
    #[arg(long)]
    y0: Option<f64>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Cutoff plateau half-width.
    #[arg(long)]
    plateau: Option<f64>,
    /// Cutoff support half-width.
    #[arg(long)]
    support: Option<f64>,
    /// Subtraction order override.
    #[arg(long)]
    p: Option<usize>,
    /// Counterterm vector, e.g. "1,0.5-2i". Repeatable.
    #[arg(long, allow_hyphen_values = true)]
    c: Vec<String>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON job file; flags override its fields.
    #[arg(long)]
    job: Option<PathBuf>,
}

fn build_job(args: Args) -> Result<Job> {
    let mut job = match &args.job {
        Some(path) => Job::from_file(path)?,
        None => Job::new(
            args.expr
                .clone()
                .ok_or_else(|| Error::InvalidParameter("either --expr or --job is required".into()))?,
        ),
    };
    if let Some(expr) = args.expr {
        job.expr = expr;
    }
    if !args.phi.is_empty() {
        job.phi = args
            .phi
            .iter()
            .map(|s| serde_json::from_str::<TestFunctionSpec>(s))
            .collect::<std::result::Result<_, _>>()?;
    }
    if !args.c.is_empty() {
        job.c = args
            .c
            .iter()
            .map(|s| Ok(parse_complex_vector(s)?.into_iter().map(|z| [z.re, z.im]).collect()))
            .collect::<Result<_>>()?;
    }
    job.y0 = args.y0.or(job.y0);
    job.ratio = args.ratio.or(job.ratio);
    job.steps = args.steps.or(job.steps);
    job.plateau = args.plateau.or(job.plateau);
    job.support = args.support.or(job.support);
    job.p = args.p.or(job.p);
    job.out = args.out.or(job.out);
    if let Ok(tol) = std::env::var("DISTPROD_TOL") {
        let tol: f64 = tol
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("DISTPROD_TOL is not a number: `{tol}`")))?;
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("DISTPROD_TOL must be positive, got {tol}")));
        }
        job.tolerance = Some(tol);
    }
    Ok(job)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = build_job(args).and_then(|job| {
        let report = run_job(&job)?;
        write_report(&report, job.out.as_deref())
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("distprod: {e}");
            ExitCode::FAILURE
        }
    }
}
