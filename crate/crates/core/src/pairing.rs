//! Smeared products `∫ x^R·F₁^y⋯F_m^y·φ dx` and their `y → 0` behaviour.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::boundary::HyperfunctionPair;
use crate::error::{Error, Result};
use crate::fit::{linear_fit, richardson_tableau};
use crate::quadrature::{integrate, integrate_on_mesh, QuadConfig};
use crate::testfn::{vanish_probe, Smooth, TestFunction};

/// One factor `x^power·f` of a product.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub pair: HyperfunctionPair,
    pub power: u32,
}

/// Ordered product `x^{r₁}f₁ ⋯ x^{r_m}f_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductExpression {
    factors: Vec<Factor>,
}

impl ProductExpression {
    pub fn new(pairs: Vec<HyperfunctionPair>) -> Result<Self> {
        ProductExpression::with_powers(pairs.into_iter().map(|p| (p, 0)).collect())
    }

    pub fn with_powers(factors: Vec<(HyperfunctionPair, u32)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidParameter("a product needs at least one factor".into()));
        }
        Ok(ProductExpression {
            factors: factors.into_iter().map(|(pair, power)| Factor { pair, power }).collect(),
        })
    }

    pub fn single(pair: HyperfunctionPair) -> Self {
        ProductExpression { factors: vec![Factor { pair, power: 0 }] }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// `Σ rᵢ`
    pub fn total_power(&self) -> u32 {
        self.factors.iter().map(|f| f.power).sum()
    }

    /// Same product with `q` more powers of `x` attached to the first factor.
    pub fn with_extra_power(&self, q: u32) -> ProductExpression {
        let mut out = self.clone();
        out.factors[0].power += q;
        out
    }

    /// `x^R·ΠF_i^y(x)`, multiplied left to right.
    #[inline]
    pub fn integrand(&self, x: f64, y: f64) -> Complex64 {
        let start = Complex64::new(x.powi(self.total_power() as i32), 0.0);
        self.factors.iter().fold(start, |acc, f| acc * f.pair.fy(x, y))
    }
}

impl fmt::Display for ProductExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" * ")?;
            }
            if factor.power > 0 {
                write!(f, "x^{} * ", factor.power)?;
            }
            f.write_str(factor.pair.label())?;
        }
        Ok(())
    }
}

/// Geometric regulator schedule `y_k = y₀·ratio^k`, `k < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Schedule {
    pub y0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { y0: 0.1, ratio: 0.5, count: 12 }
    }
}

impl Schedule {
    pub fn new(y0: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(y0 > 0.0 && y0.is_finite()) {
            return Err(Error::Regulator(y0));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidParameter(format!("schedule ratio must lie in (0, 1), got {ratio}")));
        }
        if count < 6 {
            return Err(Error::InvalidParameter(format!("schedule needs at least 6 points, got {count}")));
        }
        Ok(Schedule { y0, ratio, count })
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.y0 * self.ratio.powi(k as i32)).collect()
    }

    pub fn y_min(&self) -> f64 {
        self.y0 * self.ratio.powi(self.count as i32 - 1)
    }

    /// A second schedule over the same `y` range with a different ratio,
    /// used to confirm the limit does not depend on the sequence.
    pub fn companion(&self) -> Schedule {
        let ratio: f64 = if (self.ratio - 1.0 / 3.0).abs() < 1e-9 { 0.5 } else { 1.0 / 3.0 };
        let span = (self.y_min() / self.y0).ln() / ratio.ln();
        let count = ((span.round() as usize) + 1).max(6);
        Schedule { y0: self.y0, ratio, count }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingConfig {
    pub schedule: Schedule,
    /// Absolute agreement required of the extrapolated tail, per real and
    /// imaginary part.
    pub tolerance: f64,
    /// Deepest Richardson column tried.
    pub richardson_depth: usize,
    pub quad: QuadConfig,
}

impl Default for PairingConfig {
    fn default() -> Self {
        PairingConfig {
            schedule: Schedule::default(),
            tolerance: DEFAULT_TOLERANCE,
            richardson_depth: 4,
            quad: QuadConfig::default(),
        }
    }
}

pub const DEFAULT_TOLERANCE: f64 = 1e-7;
/// Minimum `R²` of the log-log fit before a divergence is declared.
pub const DIVERGENCE_R2: f64 = 0.99;
/// Minimum fitted order before a divergence is declared.
pub const DIVERGENCE_MIN_ORDER: f64 = 0.1;

/// Panel boundaries: the window of `φ`, its own breakpoints, the origin, and
/// a geometric ladder `±y, ±10y, ±100y, …` so the regulator-scale band
/// `[−10y, 10y]` is always resolved.
fn breakpoints(phi: &dyn Smooth, y: f64) -> Vec<f64> {
    let (lo, hi) = phi.window();
    let mut pts = vec![lo, hi, 0.0];
    pts.extend(phi.breakpoints());
    let reach = lo.abs().max(hi.abs());
    let mut r = y;
    while r < reach {
        pts.push(r);
        pts.push(-r);
        r *= 10.0;
    }
    pts.retain(|p| *p >= lo && *p <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `∫ x^R·ΠF_i^y(x)·φ(x) dx` at a fixed regulator `y > 0`.
pub fn pair_at_y(expr: &ProductExpression, phi: &dyn Smooth, y: f64, quad: &QuadConfig) -> Result<Complex64> {
    if !(y > 0.0) {
        return Err(Error::Regulator(y));
    }
    let pts = breakpoints(phi, y);
    if pts.len() < 2 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    integrate(|x| expr.integrand(x, y) * phi.value(x), &pts, quad).map(|r| r.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Converged,
    Diverged,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::Diverged => "diverged",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// Outcome of sending `y → 0` along a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingResult {
    pub y: Vec<f64>,
    pub values: Vec<Complex64>,
    pub status: Status,
    /// Extrapolated limit when converged.
    pub value: Option<Complex64>,
    /// Richardson column that met the tolerance.
    pub order: Option<usize>,
    /// Divergence order `s` in `I(y) ~ C·y^(−s)` when diverged.
    pub s: Option<f64>,
    pub s_ci: Option<(f64, f64)>,
    /// The fitted `C`, with the phase of the smallest-`y` sample.
    pub leading_coefficient: Option<Complex64>,
    /// Extrapolated value from the companion schedule, when one was run.
    pub companion_value: Option<Complex64>,
}

impl PairingResult {
    pub fn is_converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub fn table(&self) -> Vec<(f64, Complex64)> {
        self.y.iter().copied().zip(self.values.iter().copied()).collect()
    }
}

impl Serialize for PairingResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            y: &'a [f64],
            #[serde(rename = "I_re")]
            i_re: Vec<f64>,
            #[serde(rename = "I_im")]
            i_im: Vec<f64>,
            status: Status,
            value: Option<[f64; 2]>,
            s: Option<f64>,
            s_ci: Option<[f64; 2]>,
        }
        Wire {
            y: &self.y,
            i_re: self.values.iter().map(|v| v.re).collect(),
            i_im: self.values.iter().map(|v| v.im).collect(),
            status: self.status,
            value: self.value.map(|v| [v.re, v.im]),
            s: self.s,
            s_ci: self.s_ci.map(|(a, b)| [a, b]),
        }
        .serialize(serializer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Classification {
    Converged { value: Complex64, order: usize },
    Diverged { s: f64, ci: (f64, f64), coefficient: Complex64 },
    Inconclusive,
}

fn spread(values: &[Complex64]) -> (f64, f64) {
    let span = |part: fn(&Complex64) -> f64| {
        let (lo, hi) = values
            .iter()
            .map(part)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        hi - lo
    };
    (span(|c| c.re), span(|c| c.im))
}

fn classify(ys: &[f64], values: &[Complex64], ratio: f64, cfg: &PairingConfig) -> Classification {
    // Lowest Richardson column whose last three entries agree.
    let tableau = richardson_tableau(values, ratio, cfg.richardson_depth);
    for (order, column) in tableau.iter().enumerate() {
        if column.len() < 3 {
            break;
        }
        let tail = &column[column.len() - 3..];
        let (re, im) = spread(tail);
        if re <= cfg.tolerance && im <= cfg.tolerance {
            return Classification::Converged { value: tail[2], order };
        }
    }

    // Power-law fit of |I| on the small-y half of the schedule.
    let k = (values.len() / 2).max(4).min(values.len());
    let start = values.len() - k;
    let (lx, ly): (Vec<f64>, Vec<f64>) = ys[start..]
        .iter()
        .zip(&values[start..])
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(y, v)| (y.ln(), v.norm().ln()))
        .unzip();
    if lx.len() < 3 {
        return Classification::Inconclusive;
    }
    let fit = linear_fit(&lx, &ly);
    let s = -fit.slope;
    if s > DIVERGENCE_MIN_ORDER && fit.r_squared >= DIVERGENCE_R2 {
        let last = values[values.len() - 1];
        let coefficient = last / last.norm() * fit.intercept.exp();
        let half = 2.0 * fit.slope_stderr;
        return Classification::Diverged { s, ci: (s - half, s + half), coefficient };
    }
    Classification::Inconclusive
}

fn sample(expr: &ProductExpression, phi: &dyn Smooth, schedule: &Schedule, quad: &QuadConfig) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let ys = schedule.ys();
    let values = ys
        .par_iter()
        .map(|&y| pair_at_y(expr, phi, y, quad))
        .collect::<Result<Vec<_>>>()?;
    Ok((ys, values))
}

/// Samples the smeared product on the schedule, extrapolates `y → 0`, and
/// classifies the outcome. A converged limit is confirmed on a companion
/// schedule with a different ratio; disagreement beyond `10×` the tolerance
/// downgrades the result to inconclusive.
pub fn limit_pairing(expr: &ProductExpression, phi: &dyn Smooth, cfg: &PairingConfig) -> Result<PairingResult> {
    let schedule = cfg.schedule;
    let (y, values) = sample(expr, phi, &schedule, &cfg.quad)?;
    let mut result = PairingResult {
        y,
        values,
        status: Status::Inconclusive,
        value: None,
        order: None,
        s: None,
        s_ci: None,
        leading_coefficient: None,
        companion_value: None,
    };
    match classify(&result.y, &result.values, schedule.ratio, cfg) {
        Classification::Converged { value, order } => {
            let companion = schedule.companion();
            let (cy, cv) = sample(expr, phi, &companion, &cfg.quad)?;
            let agreed = match classify(&cy, &cv, companion.ratio, cfg) {
                Classification::Converged { value: other, .. } => {
                    result.companion_value = Some(other);
                    let gap = value - other;
                    gap.re.abs() <= 10.0 * cfg.tolerance && gap.im.abs() <= 10.0 * cfg.tolerance
                }
                _ => false,
            };
            if agreed {
                result.status = Status::Converged;
                result.value = Some(value);
                result.order = Some(order);
            }
        }
        Classification::Diverged { s, ci, coefficient } => {
            result.status = Status::Diverged;
            result.s = Some(s);
            result.s_ci = Some(ci);
            result.leading_coefficient = Some(coefficient);
        }
        Classification::Inconclusive => {}
    }
    Ok(result)
}

/// Reference test function for order estimates: `exp(−x²)`.
pub fn reference_gaussian(max_order: usize) -> TestFunction {
    TestFunction::gaussian(std::f64::consts::FRAC_1_SQRT_2, max_order)
}

/// Fitted divergence order against `exp(−x²)`; `0` when the limit exists.
pub fn divergence_order(expr: &ProductExpression, cfg: &PairingConfig) -> Result<f64> {
    let r = limit_pairing(expr, &reference_gaussian(4), cfg)?;
    match r.status {
        Status::Converged => Ok(0.0),
        Status::Diverged => Ok(r.s.expect("diverged result carries s")),
        Status::Inconclusive => Err(Error::Inconclusive { table: r.table() }),
    }
}

/// Smallest number of Taylor subtractions that makes a product finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SubtractionOrder {
    /// The subtraction order `p`; `0` when no subtraction is needed.
    pub order: usize,
    /// `false` when the plain product already converges on every reference
    /// test function.
    pub required: bool,
}

/// Smallest `p ≤ p_max` such that `x^(p+1)·expr` converges on every
/// reference test function and `expr` converges on every
/// `vanish_probe(p, ·)` of them.
pub fn subtraction_order(expr: &ProductExpression, p_max: usize, cfg: &PairingConfig) -> Result<SubtractionOrder> {
    let refs = TestFunction::reference_set(p_max + 2);
    let converges_on = |e: &ProductExpression, phi: &TestFunction| -> Result<bool> {
        Ok(limit_pairing(e, phi, cfg)?.is_converged())
    };

    let mut plain = true;
    for phi in &refs {
        if !converges_on(expr, phi)? {
            plain = false;
            break;
        }
    }
    if plain {
        return Ok(SubtractionOrder { order: 0, required: false });
    }

    for p in 0..=p_max {
        let boosted = expr.with_extra_power(p as u32 + 1);
        let mut ok = true;
        for phi in &refs {
            if !converges_on(&boosted, phi)? || !converges_on(expr, &vanish_probe(p, phi)?)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(SubtractionOrder { order: p, required: true });
        }
    }
    Err(Error::NotExtendable { p_max })
}

/// A product with explicit grouping, for checking the ring axioms of the
/// pointwise product.
#[derive(Debug, Clone, PartialEq)]
pub enum Grouping {
    Factor(HyperfunctionPair),
    /// Exact monomial `x^r`.
    Power(u32),
    Product(Vec<Grouping>),
}

impl Grouping {
    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        match self {
            Grouping::Factor(p) => p.fy(x, y),
            Grouping::Power(r) => Complex64::new(x.powi(*r as i32), 0.0),
            Grouping::Product(parts) => parts
                .iter()
                .fold(Complex64::new(1.0, 0.0), |acc, g| acc * g.eval(x, y)),
        }
    }
}

impl From<&ProductExpression> for Grouping {
    fn from(expr: &ProductExpression) -> Self {
        let mut parts = Vec::new();
        if expr.total_power() > 0 {
            parts.push(Grouping::Power(expr.total_power()));
        }
        parts.extend(expr.factors().iter().map(|f| Grouping::Factor(f.pair.clone())));
        Grouping::Product(parts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RingReport {
    pub y: f64,
    pub value_a: [f64; 2],
    pub value_b: [f64; 2],
    pub difference: f64,
    pub holds: bool,
}

/// Relative bound for [`ring_axiom_check`].
pub const RING_TOL: f64 = 1e-12;

/// Compares two groupings of the same factors at fixed `y`. Both integrands
/// are integrated with the same rule on the mesh adapted to `a`, so the
/// comparison isolates the algebra of the pointwise product from the
/// quadrature's refinement choices.
pub fn ring_axiom_check(a: &Grouping, b: &Grouping, phi: &dyn Smooth, y: f64, quad: &QuadConfig) -> Result<RingReport> {
    if !(y > 0.0) {
        return Err(Error::Regulator(y));
    }
    let pts = breakpoints(phi, y);
    let mesh = integrate(|x| a.eval(x, y) * phi.value(x), &pts, quad)?.mesh;
    let va = integrate_on_mesh(|x| a.eval(x, y) * phi.value(x), &mesh);
    let vb = integrate_on_mesh(|x| b.eval(x, y) * phi.value(x), &mesh);
    let difference = (va - vb).norm();
    Ok(RingReport {
        y,
        value_a: [va.re, va.im],
        value_b: [vb.re, vb.im],
        difference,
        holds: difference <= RING_TOL * (1.0 + va.norm()),
    })
}
