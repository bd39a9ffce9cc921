use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::parse::parse_expression;
use crate::error::{Error, Result};
use crate::extension::{nonuniqueness_scan, omega_independence_check, Extension, ExtensionReport, OmegaCheck, ScanRow};
use crate::pairing::{limit_pairing, subtraction_order, PairingConfig, PairingResult, Schedule, Status, DEFAULT_TOLERANCE};
use crate::testfn::{CutoffSpec, PlateauCutoff, TestFunction, TestFunctionSpec};

/// Derivative order carried by test functions and cutoffs unless a larger
/// subtraction order asks for more.
const DEFAULT_MAX_ORDER: usize = 8;
/// Highest subtraction order searched for.
const DEFAULT_P_MAX: usize = 4;

/// A batch job, as read from `--job file.json` or assembled from flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    pub expr: String,
    /// Test functions; empty means `exp(−x²)`.
    #[serde(default)]
    pub phi: Vec<TestFunctionSpec>,
    #[serde(default)]
    pub y0: Option<f64>,
    #[serde(default)]
    pub ratio: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub plateau: Option<f64>,
    #[serde(default)]
    pub support: Option<f64>,
    /// Subtraction order override.
    #[serde(default)]
    pub p: Option<usize>,
    /// Search bound for the subtraction order.
    #[serde(default)]
    pub p_max: Option<usize>,
    /// Counterterm grid, one vector of `[re, im]` per row.
    #[serde(default)]
    pub c: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl Job {
    pub fn new(expr: impl Into<String>) -> Self {
        Job {
            expr: expr.into(),
            phi: Vec::new(),
            y0: None,
            ratio: None,
            steps: None,
            plateau: None,
            support: None,
            p: None,
            p_max: None,
            c: Vec::new(),
            tolerance: None,
            out: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    fn schedule(&self) -> Result<Schedule> {
        let d = Schedule::default();
        Schedule::new(self.y0.unwrap_or(d.y0), self.ratio.unwrap_or(d.ratio), self.steps.unwrap_or(d.count))
    }

    fn cutoff(&self) -> CutoffSpec {
        CutoffSpec { plateau: self.plateau.unwrap_or(1.0), support: self.support.unwrap_or(2.0) }
    }

    fn phi_specs(&self) -> Vec<TestFunctionSpec> {
        if self.phi.is_empty() {
            vec![TestFunctionSpec { poly: vec![1.0], sigma: std::f64::consts::FRAC_1_SQRT_2, mu: 0.0 }]
        } else {
            self.phi.clone()
        }
    }
}

/// Parses a comma-separated complex vector such as `1,0.5-2i,3i`.
pub fn parse_complex_vector(text: &str) -> Result<Vec<Complex64>> {
    text.split(',')
        .map(|part| {
            let part: String = part.chars().filter(|c| !c.is_whitespace()).collect();
            part.parse::<Complex64>()
                .map_err(|_| Error::InvalidParameter(format!("not a complex number: `{part}`")))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SubtractionBlock {
    pub order: Option<usize>,
    pub required: bool,
    /// `"computed"` or `"override"`.
    pub source: &'static str,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhiReport {
    pub phi: TestFunctionSpec,
    pub pairing: PairingResult,
    pub extension: Option<ExtensionReport>,
    pub omega_check: Option<OmegaCheck>,
    pub scan: Vec<ScanRow>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub expr: String,
    pub schedule: Schedule,
    pub tolerance: f64,
    pub cutoffs: [CutoffSpec; 2],
    pub subtraction: Option<SubtractionBlock>,
    pub results: Vec<PhiReport>,
}

/// Outcomes that belong in the report rather than in the exit code.
fn in_band(e: &Error) -> bool {
    matches!(e, Error::NotExtendable { .. } | Error::ExtensionFailure(_) | Error::Inconclusive { .. })
}

fn grid(job: &Job, p: usize) -> Result<Vec<Vec<Complex64>>> {
    job.c
        .iter()
        .map(|row| {
            if row.len() > p + 1 {
                return Err(Error::InvalidParameter(format!(
                    "counterterm vector of length {} exceeds subtraction order {p}",
                    row.len()
                )));
            }
            let mut c: Vec<Complex64> = row.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
            c.resize(p + 1, Complex64::new(0.0, 0.0));
            Ok(c)
        })
        .collect()
}

/// Runs the pairing for every test function and, when any diverges or a
/// subtraction order is forced, the extension with `c = 0`, the cutoff
/// comparison against the half-size cutoff and the counterterm scan.
pub fn run_job(job: &Job) -> Result<Report> {
    let expr = parse_expression(&job.expr)?;
    let cfg = PairingConfig {
        schedule: job.schedule()?,
        tolerance: job.tolerance.unwrap_or(DEFAULT_TOLERANCE),
        ..PairingConfig::default()
    };
    let omega_1 = job.cutoff();
    let omega_2 = CutoffSpec { plateau: omega_1.plateau / 2.0, support: omega_1.support / 2.0 };
    let p_max = job.p_max.unwrap_or(DEFAULT_P_MAX);
    let order = DEFAULT_MAX_ORDER.max(job.p.unwrap_or(0).max(p_max) + 2);
    let specs = job.phi_specs();
    let phis = specs
        .iter()
        .map(|s| TestFunction::from_spec(s, order))
        .collect::<Result<Vec<_>>>()?;
    let cut_1 = PlateauCutoff::from_spec(omega_1, order)?;
    let cut_2 = PlateauCutoff::from_spec(omega_2, order)?;

    let pairings = phis
        .iter()
        .map(|phi| limit_pairing(&expr, phi, &cfg))
        .collect::<Result<Vec<_>>>()?;

    let subtraction = if let Some(p) = job.p {
        Some(SubtractionBlock { order: Some(p), required: true, source: "override", error: None })
    } else if pairings.iter().any(|r| r.status == Status::Diverged) {
        Some(match subtraction_order(&expr, p_max, &cfg) {
            Ok(s) => SubtractionBlock { order: Some(s.order), required: s.required, source: "computed", error: None },
            Err(e) if in_band(&e) => SubtractionBlock { order: None, required: true, source: "computed", error: Some(e.to_string()) },
            Err(e) => return Err(e),
        })
    } else {
        None
    };
    let p = subtraction.as_ref().and_then(|s| s.order);
    let grid = match p {
        Some(p) => grid(job, p)?,
        None => Vec::new(),
    };

    let mut results = Vec::with_capacity(phis.len());
    for (i, ((spec, phi), pairing)) in specs.into_iter().zip(&phis).zip(pairings).enumerate() {
        let mut row = PhiReport { phi: spec, pairing, extension: None, omega_check: None, scan: Vec::new(), error: None };
        if let Some(p) = p {
            let ext = Extension::minimal(expr.clone(), p, cut_1.clone());
            let outcome = (|| -> Result<()> {
                row.extension = Some(ext.evaluate(phi, &cfg)?);
                row.omega_check = Some(omega_independence_check(&expr, p, phi, &cut_1, &cut_2, &cfg)?);
                let mut scan = nonuniqueness_scan(&ext, &grid, std::slice::from_ref(phi), &cfg)?;
                for r in &mut scan {
                    r.phi_index = i;
                }
                row.scan = scan;
                Ok(())
            })();
            match outcome {
                Ok(()) => {}
                Err(e) if in_band(&e) => row.error = Some(e.to_string()),
                Err(e) => return Err(e),
            }
        }
        results.push(row);
    }

    Ok(Report {
        expr: expr.to_string(),
        schedule: cfg.schedule,
        tolerance: cfg.tolerance,
        cutoffs: [omega_1, omega_2],
        subtraction,
        results,
    })
}

/// Writes the report as pretty JSON, to `out` via a temporary file and a
/// rename, or to stdout.
pub fn write_report(report: &Report, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    match out {
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.persist(path).map_err(|e| Error::Io(e.error))?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
