//! Test functions with exact derivatives, plateau cutoffs, and Schwartz
//! seminorms.
//!
//! Every [`TestFunction`] is a finite sum of terms `p(x)·exp(−(x−μ)²/2σ²)`.
//! The family is closed under `d/dx`, so derivatives are carried as
//! polynomial coefficient lists and evaluated in closed form; nothing is
//! differentiated numerically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{horner, real_derivative};
use crate::quadrature::{gk21, integrate_real, QuadConfig};

/// A smooth, rapidly decreasing function with derivative access up to
/// [`Smooth::max_order`].
pub trait Smooth: Send + Sync {
    fn max_order(&self) -> usize;

    /// `q`-th derivative at `x`. Callers must ensure `q ≤ max_order()`.
    fn derivative_unchecked(&self, x: f64, q: usize) -> f64;

    /// Interval outside which the function is negligible (or exactly zero).
    fn window(&self) -> (f64, f64);

    /// Points where the function changes character, such as cutoff edges.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn value(&self, x: f64) -> f64 {
        self.derivative_unchecked(x, 0)
    }

    fn derivative(&self, x: f64, q: usize) -> Result<f64> {
        check_order(q, self.max_order())?;
        Ok(self.derivative_unchecked(x, q))
    }
}

pub(crate) fn check_order(requested: usize, available: usize) -> Result<()> {
    if requested > available {
        return Err(Error::OrderExceeded { requested, available });
    }
    Ok(())
}

/// Gaussian width at which `exp(−(x−μ)²/2σ²)` is below the smallest normal
/// double, in units of `σ`.
const DECAY_WIDTHS: f64 = 38.0;

/// JSON form of a single Gaussian-polynomial term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSpec {
    pub poly: Vec<f64>,
    pub sigma: f64,
    #[serde(default)]
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct GaussianTerm {
    sigma: f64,
    mu: f64,
    /// `derivs[q]` is the polynomial factor of the `q`-th derivative.
    derivs: Vec<Vec<f64>>,
}

impl GaussianTerm {
    fn new(poly: Vec<f64>, sigma: f64, mu: f64, max_order: usize) -> Self {
        let inv_var = 1.0 / (sigma * sigma);
        let mut derivs = Vec::with_capacity(max_order + 1);
        derivs.push(poly);
        for q in 0..max_order {
            let p = &derivs[q];
            // (p e^g)' = (p' − p·(x−μ)/σ²) e^g
            let mut next = real_derivative(p);
            next.resize(p.len() + 1, 0.0);
            for (k, &c) in p.iter().enumerate() {
                next[k] += mu * c * inv_var;
                next[k + 1] -= c * inv_var;
            }
            while next.last() == Some(&0.0) {
                next.pop();
            }
            derivs.push(next);
        }
        GaussianTerm { sigma, mu, derivs }
    }

    fn eval(&self, x: f64, q: usize) -> f64 {
        let d = (x - self.mu) / self.sigma;
        let g = (-0.5 * d * d).exp();
        if g == 0.0 {
            return 0.0;
        }
        horner(&self.derivs[q], x) * g
    }
}

/// Sum of terms `p(x)·exp(−(x−μ)²/2σ²)` with exact derivatives up to
/// `max_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    terms: Vec<GaussianTerm>,
    max_order: usize,
}

impl TestFunction {
    /// `poly(x)·exp(−(x−μ)²/2σ²)`, with `poly` in ascending coefficients.
    pub fn new(poly: Vec<f64>, sigma: f64, mu: f64, max_order: usize) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive and finite, got {sigma}")));
        }
        if !mu.is_finite() || poly.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite test function coefficient".into()));
        }
        Ok(TestFunction {
            terms: vec![GaussianTerm::new(poly, sigma, mu, max_order)],
            max_order,
        })
    }

    pub fn from_spec(spec: &TestFunctionSpec, max_order: usize) -> Result<Self> {
        TestFunction::new(spec.poly.clone(), spec.sigma, spec.mu, max_order)
    }

    /// Centered Gaussian `exp(−x²/2σ²)`.
    pub fn gaussian(sigma: f64, max_order: usize) -> Self {
        TestFunction::new(vec![1.0], sigma, 0.0, max_order).expect("valid gaussian")
    }

    /// The identically zero function.
    pub fn zero(max_order: usize) -> Self {
        TestFunction::gaussian(1.0, max_order).scaled(0.0)
    }

    /// A fixed collection used wherever a rule must hold "for every test
    /// function": varied widths, centers, and parities. All are nonzero at
    /// the origin.
    pub fn reference_set(max_order: usize) -> Vec<TestFunction> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![
            TestFunction::new(vec![1.0], s, 0.0, max_order).unwrap(),
            TestFunction::new(vec![1.0, 1.0], 1.0, 0.0, max_order).unwrap(),
            TestFunction::new(vec![1.0], s, 0.3, max_order).unwrap(),
            TestFunction::new(vec![1.0, -0.5, 0.25], 0.8, -0.2, max_order).unwrap(),
        ]
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// JSON descriptors of the terms, one per Gaussian component.
    pub fn specs(&self) -> Vec<TestFunctionSpec> {
        self.terms
            .iter()
            .map(|t| TestFunctionSpec {
                poly: t.derivs[0].clone(),
                sigma: t.sigma,
                mu: t.mu,
            })
            .collect()
    }

    pub fn eval(&self, x: f64, q: usize) -> Result<f64> {
        check_order(q, self.max_order)?;
        Ok(self.eval_unchecked(x, q))
    }

    fn eval_unchecked(&self, x: f64, q: usize) -> f64 {
        self.terms.iter().map(|t| t.eval(x, q)).sum()
    }

    pub fn scaled(&self, s: f64) -> TestFunction {
        let terms = self
            .terms
            .iter()
            .map(|t| GaussianTerm::new(t.derivs[0].iter().map(|c| c * s).collect(), t.sigma, t.mu, self.max_order))
            .collect();
        TestFunction { terms, max_order: self.max_order }
    }

    /// `a·self + b·other`. Terms sharing a Gaussian envelope are merged.
    pub fn combine(&self, a: f64, other: &TestFunction, b: f64) -> TestFunction {
        let max_order = self.max_order.min(other.max_order);
        let mut polys: Vec<(f64, f64, Vec<f64>)> = Vec::new();
        let scaled = self
            .terms
            .iter()
            .map(|t| (a, t))
            .chain(other.terms.iter().map(|t| (b, t)));
        for (s, t) in scaled {
            let p: Vec<f64> = t.derivs[0].iter().map(|c| c * s).collect();
            match polys.iter_mut().find(|(sg, m, _)| *sg == t.sigma && *m == t.mu) {
                Some((_, _, acc)) => {
                    if acc.len() < p.len() {
                        acc.resize(p.len(), 0.0);
                    }
                    for (k, c) in p.into_iter().enumerate() {
                        acc[k] += c;
                    }
                }
                None => polys.push((t.sigma, t.mu, p)),
            }
        }
        let terms = polys
            .into_iter()
            .map(|(sigma, mu, p)| GaussianTerm::new(p, sigma, mu, max_order))
            .collect();
        TestFunction { terms, max_order }
    }

    /// Multiplies by `x^k`.
    pub fn times_power(&self, k: usize) -> TestFunction {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut p = vec![0.0; k];
                p.extend_from_slice(&t.derivs[0]);
                GaussianTerm::new(p, t.sigma, t.mu, self.max_order)
            })
            .collect();
        TestFunction { terms, max_order: self.max_order }
    }

    /// Taylor coefficients' derivative values `φ^(q)(0)` for `q = 0..=p`.
    pub fn derivatives_at_origin(&self, p: usize) -> Result<Vec<f64>> {
        check_order(p, self.max_order)?;
        Ok((0..=p).map(|q| self.eval_unchecked(0.0, q)).collect())
    }
}

impl Smooth for TestFunction {
    fn max_order(&self) -> usize {
        self.max_order
    }

    fn derivative_unchecked(&self, x: f64, q: usize) -> f64 {
        self.eval_unchecked(x, q)
    }

    fn window(&self) -> (f64, f64) {
        self.terms.iter().fold((0.0, 0.0), |(lo, hi), t| {
            let r = DECAY_WIDTHS * t.sigma;
            (f64::min(lo, t.mu - r), f64::max(hi, t.mu + r))
        })
    }
}

/// `x^(p+1)·base(x)`: a test function whose derivatives of order `0..=p`
/// vanish exactly at the origin.
pub fn vanish_probe(p: usize, base: &TestFunction) -> Result<TestFunction> {
    if base.eval_unchecked(0.0, 0) == 0.0 {
        return Err(Error::InvalidParameter("vanish_probe base must be nonzero at the origin".into()));
    }
    Ok(base.times_power(p + 1))
}

/// JSON form of a cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub plateau: f64,
    pub support: f64,
}

/// Subintervals of `[0, 1]` holding precomputed partial integrals of the bump.
const BUMP_PANELS: usize = 64;

/// Even cutoff `ω`: exactly `1` on `|x| ≤ a`, exactly `0` on `|x| ≥ b`, and a
/// monotone integrated-bump transition in between.
///
/// With `h(t) = exp(−1/(t(1−t)))` and `Z = ∫₀¹ h`, the transition is
/// `ω(x) = 1 − S((|x|−a)/(b−a))` where `S(t) = Z⁻¹∫₀ᵗ h`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauCutoff {
    plateau: f64,
    support: f64,
    max_order: usize,
    norm: f64,
    cumulative: Vec<f64>,
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    (-1.0 / (t * (1.0 - t))).exp()
}

/// `h^(j)(t)` for `j = 0..=n`, via `h' = u'h` with `u = −1/t − 1/(1−t)`.
fn bump_derivatives(t: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    let h = bump(t);
    if h == 0.0 {
        return out;
    }
    // u^(j+1) for j = 0..n
    let mut du = Vec::with_capacity(n);
    let mut fact = 1.0;
    for j in 1..=n {
        fact *= j as f64;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        du.push(-(sign * fact / t.powi(j as i32 + 1) + fact / (1.0 - t).powi(j as i32 + 1)));
    }
    out[0] = h;
    for m in 1..=n {
        // h^(m) = Σ_{k<m} C(m−1,k) u^(k+1) h^(m−1−k)
        let mut binom = 1.0;
        let mut acc = 0.0;
        for k in 0..m {
            acc += binom * du[k] * out[m - 1 - k];
            binom = binom * (m - 1 - k) as f64 / (k + 1) as f64;
        }
        out[m] = acc;
    }
    out
}

impl PlateauCutoff {
    pub fn new(plateau: f64, support: f64, max_order: usize) -> Result<Self> {
        if !(plateau > 0.0 && plateau < support && support.is_finite()) {
            return Err(Error::InvalidGeometry { plateau, support });
        }
        let cfg = QuadConfig { abs_tol: 0.0, rel_tol: 1e-13, max_intervals: 2_000 };
        let mut cumulative = Vec::with_capacity(BUMP_PANELS + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for j in 0..BUMP_PANELS {
            let (lo, hi) = (j as f64 / BUMP_PANELS as f64, (j + 1) as f64 / BUMP_PANELS as f64);
            acc += integrate_real(bump, &[lo, hi], &cfg)?;
            cumulative.push(acc);
        }
        Ok(PlateauCutoff {
            plateau,
            support,
            max_order,
            norm: acc,
            cumulative,
        })
    }

    pub fn from_spec(spec: CutoffSpec, max_order: usize) -> Result<Self> {
        PlateauCutoff::new(spec.plateau, spec.support, max_order)
    }

    pub fn spec(&self) -> CutoffSpec {
        CutoffSpec { plateau: self.plateau, support: self.support }
    }

    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// `∫₀ᵗ h / Z` for `t ∈ [0, 1]`.
    fn partial_mass(&self, t: f64) -> f64 {
        let j = ((t * BUMP_PANELS as f64) as usize).min(BUMP_PANELS - 1);
        let lo = j as f64 / BUMP_PANELS as f64;
        let tail = if t > lo {
            gk21(&|s: f64| num_complex::Complex64::new(bump(s), 0.0), lo, t).0.re
        } else {
            0.0
        };
        (self.cumulative[j] + tail) / self.norm
    }

    pub fn eval(&self, x: f64, q: usize) -> Result<f64> {
        check_order(q, self.max_order)?;
        Ok(self.eval_unchecked(x, q))
    }

    fn eval_unchecked(&self, x: f64, q: usize) -> f64 {
        let r = x.abs();
        if r <= self.plateau {
            return if q == 0 { 1.0 } else { 0.0 };
        }
        if r >= self.support {
            return 0.0;
        }
        let width = self.support - self.plateau;
        let t = (r - self.plateau) / width;
        if q == 0 {
            // Mirror symmetry of h keeps the small side accurate.
            return if t > 0.5 { self.partial_mass(1.0 - t) } else { 1.0 - self.partial_mass(t) };
        }
        let h = bump_derivatives(t, q - 1)[q - 1];
        let sign = if x < 0.0 && q % 2 == 1 { -1.0 } else { 1.0 };
        -sign * h / (self.norm * width.powi(q as i32))
    }
}

impl Smooth for PlateauCutoff {
    fn max_order(&self) -> usize {
        self.max_order
    }

    fn derivative_unchecked(&self, x: f64, q: usize) -> f64 {
        self.eval_unchecked(x, q)
    }

    fn window(&self) -> (f64, f64) {
        (-self.support, self.support)
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![-self.support, -self.plateau, self.plateau, self.support]
    }
}

/// Table of `sup_x |x^k φ^(q)(x)|` for `k, q ≤ order`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormReport {
    pub order: usize,
    /// `values[k][q]`
    pub values: Vec<Vec<f64>>,
    /// Number of uniform grid points used before local polishing.
    pub grid_points: usize,
}

impl SeminormReport {
    pub fn entry(&self, k: usize, q: usize) -> f64 {
        self.values[k][q]
    }

    /// `max_{k,q ≤ N}` of the table, the norm `‖φ‖_N`.
    pub fn norm(&self) -> f64 {
        self.values.iter().flatten().copied().fold(0.0, f64::max)
    }
}

const SEMINORM_RTOL: f64 = 1e-6;
const SEMINORM_MAX_GRID: usize = 1 << 18;

fn seminorm_table(phi: &TestFunction, order: usize, xs: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut best = vec![vec![0.0; order + 1]; order + 1];
    let mut arg = vec![vec![0.0; order + 1]; order + 1];
    for &x in xs {
        let d: Vec<f64> = (0..=order).map(|q| phi.eval_unchecked(x, q).abs()).collect();
        let mut xk = 1.0;
        for k in 0..=order {
            for q in 0..=order {
                let v = xk * d[q];
                if v > best[k][q] {
                    best[k][q] = v;
                    arg[k][q] = x;
                }
            }
            xk *= x.abs();
        }
    }
    (best, arg)
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// Schwartz seminorm table on a uniform grid that is doubled until every
/// entry is stable to `1e−6` relative, then polished near each maximizer.
pub fn seminorm(phi: &TestFunction, order: usize) -> Result<SeminormReport> {
    check_order(order, phi.max_order)?;
    let radius = phi
        .terms
        .iter()
        .map(|t| t.mu.abs() + (15.0 + order as f64) * t.sigma)
        .fold(1.0, f64::max);
    let grid = |n: usize| -> Vec<f64> {
        let h = 2.0 * radius / (n - 1) as f64;
        (0..n).map(|i| -radius + i as f64 * h).collect()
    };

    let mut n = 401;
    let (mut table, mut arg) = seminorm_table(phi, order, &grid(n));
    while n < SEMINORM_MAX_GRID {
        let m = 2 * n - 1;
        let (next, next_arg) = seminorm_table(phi, order, &grid(m));
        let stable = next.iter().flatten().zip(table.iter().flatten()).all(|(&a, &b)| {
            (a - b).abs() <= SEMINORM_RTOL * a.max(f64::MIN_POSITIVE)
        });
        n = m;
        table = next;
        arg = next_arg;
        if stable {
            break;
        }
    }

    let h = 2.0 * radius / (n - 1) as f64;
    for k in 0..=order {
        for q in 0..=order {
            if table[k][q] == 0.0 {
                continue;
            }
            let x0 = arg[k][q];
            let polished = golden_max(
                |x| x.abs().powi(k as i32) * phi.eval_unchecked(x, q).abs(),
                x0 - h,
                x0 + h,
            );
            table[k][q] = table[k][q].max(polished);
        }
    }
    Ok(SeminormReport { order, values: table, grid_points: n })
}
