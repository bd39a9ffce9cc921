//! Distributions as boundary values of rational functions.
//!
//! A [`HyperfunctionPair`] holds `f⁺` (holomorphic in the upper half-plane)
//! and `f⁻` (holomorphic in the lower half-plane). Its regularization
//! `F^y(x) = f⁺(x+iy) − f⁻(x−iy)` converges to the represented distribution
//! as `y → 0⁺`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::poly::{Poly, Rational};

/// Poles farther than this from the real axis (relative to `1 + |pole|`)
/// violate the half-plane holomorphy of a pair.
const POLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct HyperfunctionPair {
    f_plus: Rational,
    f_minus: Rational,
    alpha: f64,
    beta: f64,
    label: String,
}

/// Named entries of the representative catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatalogEntry {
    /// `f± = −1/(2πi z)`, `F^y = y/(π(x²+y²))`
    Delta,
    /// `f± = ±1/(2z)`, `F^y = x/(x²+y²)`
    PvInvX,
    /// `(x+i0)^(−k)`: `f⁺ = z^(−k)`, `f⁻ = 0`
    PlusI0Pow(u32),
    /// `(x−i0)^(−k)`: `f⁺ = 0`, `f⁻ = −z^(−k)`
    MinusI0Pow(u32),
    /// `f± = ±z^r/2`, `F^y = Re (x+iy)^r`
    Monomial(u32),
    /// Ring unity, `F^y = 1`.
    One,
}

impl CatalogEntry {
    /// Resolves a catalog name. `param` is the exponent `k` of the `i0` powers
    /// (given as the negative power, e.g. `-1`) or `r` for `monomial`.
    pub fn from_name(name: &str, param: Option<i64>) -> Result<Self> {
        let need = |name: &str| {
            param.ok_or_else(|| Error::InvalidParameter(format!("`{name}` needs an exponent")))
        };
        let neg_power = |p: i64| -> Result<u32> {
            if p >= 0 {
                return Err(Error::InvalidParameter(format!("expected a negative power, got {p}")));
            }
            u32::try_from(-p).map_err(|_| Error::InvalidParameter(format!("power {p} out of range")))
        };
        match name {
            "delta" => Ok(CatalogEntry::Delta),
            "pv_inv_x" => Ok(CatalogEntry::PvInvX),
            "one" => Ok(CatalogEntry::One),
            "plus_i0_pow" => Ok(CatalogEntry::PlusI0Pow(neg_power(need(name)?)?)),
            "minus_i0_pow" => Ok(CatalogEntry::MinusI0Pow(neg_power(need(name)?)?)),
            "monomial" => {
                let r = need(name)?;
                let r = u32::try_from(r)
                    .map_err(|_| Error::InvalidParameter(format!("monomial power must be nonnegative, got {r}")))?;
                Ok(CatalogEntry::Monomial(r))
            }
            other => Err(Error::UnknownCatalog(other.to_string())),
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `coef·z^(−k)` as a rational function.
fn inverse_power(coef: Complex64, k: u32) -> Rational {
    Rational::new(Poly::constant(coef), Poly::monomial(c(1.0, 0.0), k as usize)).unwrap()
}

/// Builds the standard representative for `entry`.
pub fn catalog(entry: CatalogEntry) -> Result<HyperfunctionPair> {
    let pair = match entry {
        CatalogEntry::Delta => {
            // −1/(2πi z) = i/(2π z)
            let f = inverse_power(c(0.0, 1.0 / (2.0 * PI)), 1);
            HyperfunctionPair::raw(f.clone(), f, 1.0, 0.0, "delta")
        }
        CatalogEntry::PvInvX => HyperfunctionPair::raw(
            inverse_power(c(0.5, 0.0), 1),
            inverse_power(c(-0.5, 0.0), 1),
            1.0,
            0.0,
            "pv(1/x)",
        ),
        CatalogEntry::PlusI0Pow(k) => {
            if k == 0 {
                return Err(Error::InvalidParameter("(x+i0) power must be negative".into()));
            }
            HyperfunctionPair::raw(inverse_power(c(1.0, 0.0), k), Rational::zero(), k as f64, 0.0, &format!("(x+i0)^-{k}"))
        }
        CatalogEntry::MinusI0Pow(k) => {
            if k == 0 {
                return Err(Error::InvalidParameter("(x-i0) power must be negative".into()));
            }
            HyperfunctionPair::raw(Rational::zero(), inverse_power(c(-1.0, 0.0), k), k as f64, 0.0, &format!("(x-i0)^-{k}"))
        }
        CatalogEntry::Monomial(r) => HyperfunctionPair::raw(
            Rational::polynomial(Poly::monomial(c(0.5, 0.0), r as usize)),
            Rational::polynomial(Poly::monomial(c(-0.5, 0.0), r as usize)),
            0.0,
            r as f64,
            &format!("x^{r}"),
        ),
        CatalogEntry::One => HyperfunctionPair::raw(
            Rational::polynomial(Poly::constant(c(0.5, 0.0))),
            Rational::polynomial(Poly::constant(c(-0.5, 0.0))),
            0.0,
            0.0,
            "1",
        ),
    };
    Ok(pair)
}

impl HyperfunctionPair {
    fn raw(f_plus: Rational, f_minus: Rational, alpha: f64, beta: f64, label: &str) -> Self {
        HyperfunctionPair { f_plus, f_minus, alpha, beta, label: label.to_string() }
    }

    /// Validating constructor: both pieces must have only real poles and the
    /// growth exponents must be finite and nonnegative.
    pub fn new(f_plus: Rational, f_minus: Rational, alpha: f64, beta: f64, label: impl Into<String>) -> Result<Self> {
        for (name, e) in [("alpha", alpha), ("beta", beta)] {
            if !(e.is_finite() && e >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be finite and nonnegative, got {e}")));
            }
        }
        for piece in [&f_plus, &f_minus] {
            if let Some(p) = piece.poles().into_iter().find(|p| p.im.abs() > POLE_TOL * (1.0 + p.norm())) {
                return Err(Error::InvalidParameter(format!("pole {p} is off the real axis")));
            }
        }
        Ok(HyperfunctionPair { f_plus, f_minus, alpha, beta, label: label.into() })
    }

    pub fn delta() -> Self {
        catalog(CatalogEntry::Delta).unwrap()
    }

    pub fn pv_inv_x() -> Self {
        catalog(CatalogEntry::PvInvX).unwrap()
    }

    pub fn one() -> Self {
        catalog(CatalogEntry::One).unwrap()
    }

    pub fn plus_i0_pow(k: u32) -> Result<Self> {
        catalog(CatalogEntry::PlusI0Pow(k))
    }

    pub fn minus_i0_pow(k: u32) -> Result<Self> {
        catalog(CatalogEntry::MinusI0Pow(k))
    }

    pub fn monomial(r: u32) -> Self {
        catalog(CatalogEntry::Monomial(r)).unwrap()
    }

    pub fn f_plus(&self) -> &Rational {
        &self.f_plus
    }

    pub fn f_minus(&self) -> &Rational {
        &self.f_minus
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_zero(&self) -> bool {
        self.f_plus.is_zero() && self.f_minus.is_zero()
    }

    /// `F^y(x)` without the regulator check; `y` must be positive.
    #[inline]
    pub fn fy(&self, x: f64, y: f64) -> Complex64 {
        self.f_plus.eval(c(x, y)) - self.f_minus.eval(c(x, -y))
    }

    /// `F^y(x) = f⁺(x+iy) − f⁻(x−iy)`.
    pub fn eval_fy(&self, x: f64, y: f64) -> Result<Complex64> {
        if !(y > 0.0) {
            return Err(Error::Regulator(y));
        }
        Ok(self.fy(x, y))
    }

    /// Termwise derivative; `F^y` of the result is `∂ₓ F^y` of `self`.
    pub fn derivative(&self) -> HyperfunctionPair {
        HyperfunctionPair {
            f_plus: self.f_plus.derivative(),
            f_minus: self.f_minus.derivative(),
            alpha: self.alpha + 1.0,
            beta: self.beta,
            label: format!("d({})", self.label),
        }
    }

    /// `s·self`
    pub fn scale(&self, s: Complex64) -> HyperfunctionPair {
        HyperfunctionPair {
            f_plus: self.f_plus.scale(s),
            f_minus: self.f_minus.scale(s),
            alpha: self.alpha,
            beta: self.beta,
            label: format!("({s})*{}", self.label),
        }
    }

    /// `self + other`
    pub fn add(&self, other: &HyperfunctionPair) -> HyperfunctionPair {
        HyperfunctionPair {
            f_plus: self.f_plus.add(&other.f_plus),
            f_minus: self.f_minus.add(&other.f_minus),
            alpha: self.alpha.max(other.alpha),
            beta: self.beta.max(other.beta),
            label: format!("{}+{}", self.label, other.label),
        }
    }

    /// Envelope used for the growth bound: the larger of `|F^y(x)|` and the
    /// moduli of the two pieces on their own half-planes.
    fn envelope(&self, x: f64, y: f64) -> f64 {
        self.fy(x, y)
            .norm()
            .max(self.f_plus.eval(c(x, y)).norm())
            .max(self.f_minus.eval(c(x, -y)).norm())
    }
}

impl fmt::Display for HyperfunctionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Rectangle `[x_min, x_max] × [y_min, y_max]` on which the growth bound is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRegion {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Default for GrowthRegion {
    fn default() -> Self {
        GrowthRegion { x: (-10.0, 10.0), y: (1e-3, 1.0) }
    }
}

/// Fitted `|f(x+iy)| ≤ C·|y|^(−α)·(1+|x|)^β` on a region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Largest `|f|/(C·y^(−α)·(1+|x|)^β)` on a grid four times finer than the
    /// fitting grid.
    pub max_residual: f64,
    pub region: GrowthRegion,
    pub alpha_r_squared: f64,
    pub beta_r_squared: f64,
    /// `false` when the data do not look like a power law or the bound fails.
    pub ok: bool,
}

/// Residual allowed above `1` before a growth fit is flagged.
pub const GROWTH_TOL: f64 = 1e-2;
const POWER_LAW_R2: f64 = 0.99;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Power-law fit of `ln v` against `ln t`, ignoring samples where `v = 0`.
fn log_log_fit(ts: &[f64], vs: &[f64]) -> Option<crate::fit::LinearFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = ts
        .iter()
        .zip(vs)
        .filter(|(_, v)| **v > 0.0)
        .map(|(t, v)| (t.ln(), v.ln()))
        .unzip();
    (lx.len() >= 2).then(|| linear_fit(&lx, &ly))
}

/// Fits the growth bound of a pair on `region`.
///
/// `α` comes from the `y`-dependence at the column `x = 0` (or the nearest
/// point of the region). `β` describes growth at infinity, so it is read off
/// a log-spaced tail `|x| ∈ [X, 100X]` at `y = y_max`, where `X` is the
/// region half-width. `C` is the largest normalized ratio on the fitting
/// grid and the residual is re-measured on a nested grid four times finer.
pub fn verify_growth_bound(d: &HyperfunctionPair, region: GrowthRegion) -> Result<GrowthReport> {
    let (x_lo, x_hi) = region.x;
    let (y_lo, y_hi) = region.y;
    if !(y_lo > 0.0) {
        return Err(Error::Regulator(y_lo));
    }
    if !(x_lo < x_hi && y_lo < y_hi) {
        return Err(Error::InvalidParameter("empty growth region".into()));
    }

    let x0 = 0.0f64.clamp(x_lo, x_hi);
    let ys = logspace(y_lo, y_hi, 25);
    let col: Vec<f64> = ys.iter().map(|&y| d.envelope(x0, y)).collect();
    let (alpha, alpha_r2) = match log_log_fit(&ys, &col) {
        Some(f) => ((-f.slope).max(0.0), f.r_squared),
        None => (0.0, 1.0),
    };

    let reach = x_lo.abs().max(x_hi.abs()).max(1.0);
    let tail = logspace(reach, 100.0 * reach, 25);
    let (mut ts, mut vs) = (Vec::new(), Vec::new());
    for &x in &tail {
        for s in [x, -x] {
            ts.push(1.0 + x);
            vs.push(d.envelope(s, y_hi));
        }
    }
    let (beta, beta_r2) = match log_log_fit(&ts, &vs) {
        Some(f) => (f.slope.max(0.0), f.r_squared),
        None => (0.0, 1.0),
    };

    let ratio = |x: f64, y: f64| d.envelope(x, y) * y.powf(alpha) / (1.0 + x.abs()).powf(beta);
    let grid_max = |xs: &[f64], ys: &[f64]| {
        xs.iter()
            .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
            .map(|(x, y)| ratio(x, y))
            .fold(0.0, f64::max)
    };
    let c = grid_max(&linspace(x_lo, x_hi, 201), &ys);
    let fine = grid_max(&linspace(x_lo, x_hi, 801), &logspace(y_lo, y_hi, 97));
    let max_residual = if c > 0.0 { fine / c } else if fine == 0.0 { 0.0 } else { f64::INFINITY };

    // A flat or decaying series is a perfect power law with exponent clamped to zero.
    let fit_ok = |exp: f64, r2: f64| exp == 0.0 || r2 >= POWER_LAW_R2;
    let ok = max_residual <= 1.0 + GROWTH_TOL && fit_ok(alpha, alpha_r2) && fit_ok(beta, beta_r2);
    Ok(GrowthReport {
        c,
        alpha,
        beta,
        max_residual,
        region,
        alpha_r_squared: alpha_r2,
        beta_r_squared: beta_r2,
        ok,
    })
}

/// Order `m = α + β + n + 3` of the dual space holding the boundary value,
/// with `n = 1`. Real exponents are rounded up first.
pub fn required_order(alpha: f64, beta: f64) -> Result<usize> {
    if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "growth exponents must be finite and nonnegative, got ({alpha}, {beta})"
        )));
    }
    let sum = alpha + beta;
    // Absorb round-off from fitted exponents that are integers in exact arithmetic.
    let whole = if (sum - sum.round()).abs() < 1e-9 { sum.round() } else { sum.ceil() };
    Ok(whole as usize + 1 + 3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn delta_is_poisson_kernel() {
        let d = HyperfunctionPair::delta();
        let v = d.eval_fy(0.0, 1.0).unwrap();
        assert!((v.re - 1.0 / PI).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
        let v = d.eval_fy(0.0, 0.1).unwrap();
        assert!((v.re - 10.0 / PI).abs() < 1e-13);
        for &(x, y) in &[(0.3, 0.01), (-2.0, 0.5), (1e3, 1e-4)] {
            let exact = y / (PI * (x * x + y * y));
            assert!((d.fy(x, y).re - exact).abs() <= 1e-14 * exact);
        }
    }

    #[test]
    fn pv_kernel() {
        let pv = HyperfunctionPair::pv_inv_x();
        assert_eq!(pv.eval_fy(0.0, 0.3).unwrap(), Complex64::new(0.0, 0.0));
        assert!((pv.fy(2.0, 1e-9).re - 0.5).abs() < 1e-15);
        let (x, y) = (0.7, 0.2);
        assert!((pv.fy(x, y).re - x / (x * x + y * y)).abs() < 1e-15);
    }

    #[test]
    fn plus_i0_inverse_at_unit_height() {
        let p = HyperfunctionPair::plus_i0_pow(1).unwrap();
        assert!(close(p.eval_fy(0.0, 1.0).unwrap(), Complex64::new(0.0, -1.0), 1e-15));
        let m = HyperfunctionPair::minus_i0_pow(2).unwrap();
        let z = Complex64::new(0.4, -0.3);
        assert!(close(m.fy(0.4, 0.3), z.powi(-2), 1e-14));
    }

    #[test]
    fn monomial_and_unity() {
        assert_eq!(HyperfunctionPair::monomial(1).fy(1.7, 0.3), Complex64::new(1.7, 0.0));
        // Re (x+iy)² = x² − y²
        let m2 = HyperfunctionPair::monomial(2).fy(1.5, 0.5);
        assert!((m2.re - 2.0).abs() < 1e-15);
        for &(x, y) in &[(0.0, 1.0), (-3.0, 1e-6), (50.0, 2.0)] {
            assert_eq!(HyperfunctionPair::one().fy(x, y), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn regulator_must_be_positive() {
        let d = HyperfunctionPair::delta();
        assert!(matches!(d.eval_fy(0.0, 0.0), Err(Error::Regulator(_))));
        assert!(matches!(d.eval_fy(0.0, -1.0), Err(Error::Regulator(_))));
    }

    #[test]
    fn catalog_names_and_errors() {
        assert_eq!(CatalogEntry::from_name("delta", None).unwrap(), CatalogEntry::Delta);
        assert_eq!(CatalogEntry::from_name("plus_i0_pow", Some(-2)).unwrap(), CatalogEntry::PlusI0Pow(2));
        assert!(matches!(CatalogEntry::from_name("theta", None), Err(Error::UnknownCatalog(_))));
        assert!(matches!(CatalogEntry::from_name("plus_i0_pow", Some(1)), Err(Error::InvalidParameter(_))));
        assert!(matches!(CatalogEntry::from_name("monomial", Some(-1)), Err(Error::InvalidParameter(_))));
        assert!(catalog(CatalogEntry::PlusI0Pow(0)).is_err());
    }

    #[test]
    fn derivative_power_rule() {
        let d = HyperfunctionPair::pv_inv_x().derivative();
        assert_eq!(d.f_plus(), &inverse_power(c(-0.5, 0.0), 2));
        assert_eq!(d.f_minus(), &inverse_power(c(0.5, 0.0), 2));
        assert_eq!(d.label(), "d(pv(1/x))");
        assert!(HyperfunctionPair::one().derivative().is_zero());
    }

    #[test]
    fn derivative_commutes_with_fy() {
        let h = 1e-5;
        for pair in [
            HyperfunctionPair::delta(),
            HyperfunctionPair::pv_inv_x(),
            HyperfunctionPair::plus_i0_pow(2).unwrap(),
            HyperfunctionPair::delta().derivative(),
        ] {
            let dp = pair.derivative();
            for &(x, y) in &[(0.3, 0.5), (-1.1, 0.2), (2.0, 1.0), (0.05, 0.3)] {
                let fd = (pair.fy(x + h, y) - pair.fy(x - h, y)) / (2.0 * h);
                let exact = dp.fy(x, y);
                assert!((fd - exact).norm() <= 1e-6 * exact.norm().max(1e-3), "{pair} at ({x},{y})");
            }
        }
    }

    #[test]
    fn second_derivative_of_delta_is_reduced() {
        let dd = HyperfunctionPair::delta().derivative().derivative();
        assert_eq!(dd.f_plus().den().degree(), Some(3));
        assert_eq!(dd.f_plus().num().degree(), Some(0));
    }

    #[test]
    fn off_axis_poles_are_rejected() {
        let bad = Rational::new(Poly::constant(c(1.0, 0.0)), Poly::from_real(&[1.0, 0.0, 1.0])).unwrap();
        assert!(HyperfunctionPair::new(bad, Rational::zero(), 0.0, 0.0, "bad").is_err());
        let good = Rational::new(Poly::constant(c(1.0, 0.0)), Poly::from_real(&[-1.0, 0.0, 1.0])).unwrap();
        assert!(HyperfunctionPair::new(good, Rational::zero(), 1.0, 0.0, "ok").is_ok());
        assert!(HyperfunctionPair::new(Rational::zero(), Rational::zero(), -1.0, 0.0, "neg").is_err());
    }

    #[test]
    fn linear_combination_of_pairs() {
        let a = HyperfunctionPair::delta();
        let b = HyperfunctionPair::pv_inv_x();
        let s = Complex64::new(0.7, -1.3);
        let combo = a.scale(s).add(&b);
        for &(x, y) in &[(0.1, 0.05), (-2.0, 0.3), (0.0, 1.0)] {
            let expect = a.fy(x, y) * s + b.fy(x, y);
            assert!((combo.fy(x, y) - expect).norm() <= 1e-12 * expect.norm().max(1e-300));
        }
    }

    #[test]
    fn growth_of_inverse_power() {
        let rep = verify_growth_bound(&HyperfunctionPair::plus_i0_pow(1).unwrap(), GrowthRegion::default()).unwrap();
        assert!((rep.alpha - 1.0).abs() < 0.05, "{rep:?}");
        assert!(rep.beta.abs() < 0.05);
        assert!(rep.max_residual <= 1.0 + GROWTH_TOL);
        assert!(rep.ok);
    }

    #[test]
    fn growth_of_unity_and_monomial() {
        let one = verify_growth_bound(&HyperfunctionPair::one(), GrowthRegion::default()).unwrap();
        assert!(one.alpha.abs() < 0.05 && one.beta.abs() < 0.05);
        assert!((one.c - 1.0).abs() < 1e-12);
        let m = verify_growth_bound(&HyperfunctionPair::monomial(1), GrowthRegion::default()).unwrap();
        assert!((m.beta - 1.0).abs() < 0.05, "{m:?}");
        assert!(m.ok);
    }

    #[test]
    fn growth_needs_positive_y_floor() {
        let region = GrowthRegion { x: (-1.0, 1.0), y: (0.0, 1.0) };
        assert!(matches!(verify_growth_bound(&HyperfunctionPair::delta(), region), Err(Error::Regulator(_))));
    }

    #[test]
    fn required_order_plugs_in() {
        assert_eq!(required_order(1.0, 0.0).unwrap(), 5);
        assert_eq!(required_order(0.0, 0.0).unwrap(), 4);
        assert_eq!(required_order(1.5, 0.2).unwrap(), 6);
        assert_eq!(required_order(1.0 + 1e-12, 0.0).unwrap(), 5);
        assert!(required_order(-0.1, 0.0).is_err());
    }
}
