//! Continuation of a divergent product by Taylor subtraction.
//!
//! For subtraction order `p`, cutoff `ω` and counterterms `c₀…c_p`:
//!
//! ```text
//! (f₁⋯f_m, φ) = (T̄, φ̄) + Σ_{κ≤p} c_κ (δ^(κ), φ)
//! φ̄(x)       = φ(x) − Σ_{κ≤p} φ^(κ)(0) ω(x) x^κ/κ!
//! ```
//!
//! with `(δ^(κ), φ) = (−1)^κ φ^(κ)(0)`. `φ̄` vanishes to order `p` at the
//! origin, so `(T̄, φ̄)` is a convergent smeared product.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::pairing::{limit_pairing, PairingConfig, PairingResult, ProductExpression, Status};
use crate::testfn::{check_order, CutoffSpec, PlateauCutoff, Smooth, TestFunction};

/// `φ̄ = φ − Σ_{κ≤p} φ^(κ)(0) ω x^κ/κ!` with exact derivatives by Leibniz' rule.
#[derive(Debug, Clone)]
pub struct SubtractedFunction {
    phi: TestFunction,
    omega: PlateauCutoff,
    /// `φ^(κ)(0)/κ!`
    taylor: Vec<f64>,
    max_order: usize,
}

pub fn taylor_subtract(phi: &TestFunction, omega: &PlateauCutoff, p: usize) -> Result<SubtractedFunction> {
    check_order(p, phi.max_order())?;
    check_order(phi.max_order(), omega.max_order())?;
    let mut fact = 1.0;
    let taylor = phi
        .derivatives_at_origin(p)?
        .into_iter()
        .enumerate()
        .map(|(k, d)| {
            if k > 0 {
                fact *= k as f64;
            }
            d / fact
        })
        .collect();
    Ok(SubtractedFunction {
        phi: phi.clone(),
        omega: omega.clone(),
        taylor,
        max_order: phi.max_order(),
    })
}

impl SubtractedFunction {
    pub fn order(&self) -> usize {
        self.taylor.len() - 1
    }
}

impl Smooth for SubtractedFunction {
    fn max_order(&self) -> usize {
        self.max_order
    }

    fn derivative_unchecked(&self, x: f64, q: usize) -> f64 {
        let mut out = self.phi.derivative_unchecked(x, q);
        if x.abs() >= self.omega.support() {
            return out;
        }
        let omega: Vec<f64> = (0..=q).map(|j| self.omega.derivative_unchecked(x, j)).collect();
        for (k, &a) in self.taylor.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            // (ω·x^k)^(q) = Σ_j C(q,j) ω^(q−j) (x^k)^(j)
            let mut term = 0.0;
            let mut binom = 1.0;
            let mut falling = 1.0;
            for j in 0..=q.min(k) {
                term += binom * omega[q - j] * falling * x.powi((k - j) as i32);
                binom = binom * (q - j) as f64 / (j + 1) as f64;
                falling *= (k - j) as f64;
            }
            out -= a * term;
        }
        out
    }

    fn window(&self) -> (f64, f64) {
        let (lo, hi) = self.phi.window();
        let b = self.omega.support();
        (lo.min(-b), hi.max(b))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.omega.breakpoints()
    }
}

/// `(δ^(κ), φ) = (−1)^κ φ^(κ)(0)`
pub fn delta_derivative_pairing(kappa: usize, phi: &TestFunction) -> Result<f64> {
    let d = phi.eval(0.0, kappa)?;
    Ok(if kappa % 2 == 0 { d } else { -d })
}

/// One member of the continuation family.
#[derive(Debug, Clone)]
pub struct Extension {
    expr: ProductExpression,
    p: usize,
    counterterms: Vec<Complex64>,
    cutoff: PlateauCutoff,
}

impl Extension {
    pub fn new(expr: ProductExpression, p: usize, counterterms: Vec<Complex64>, cutoff: PlateauCutoff) -> Result<Self> {
        if counterterms.len() != p + 1 {
            return Err(Error::InvalidParameter(format!(
                "subtraction order {p} needs {} counterterms, got {}",
                p + 1,
                counterterms.len()
            )));
        }
        Ok(Extension { expr, p, counterterms, cutoff })
    }

    /// The `c = 0` member.
    pub fn minimal(expr: ProductExpression, p: usize, cutoff: PlateauCutoff) -> Self {
        Extension::new(expr, p, vec![Complex64::new(0.0, 0.0); p + 1], cutoff).unwrap()
    }

    pub fn expr(&self) -> &ProductExpression {
        &self.expr
    }

    pub fn order(&self) -> usize {
        self.p
    }

    pub fn counterterms(&self) -> &[Complex64] {
        &self.counterterms
    }

    pub fn cutoff(&self) -> &PlateauCutoff {
        &self.cutoff
    }

    pub fn with_counterterms(&self, counterterms: Vec<Complex64>) -> Result<Self> {
        Extension::new(self.expr.clone(), self.p, counterterms, self.cutoff.clone())
    }

    pub fn with_cutoff(&self, cutoff: PlateauCutoff) -> Self {
        Extension { cutoff, ..self.clone() }
    }

    /// `Σ c_κ (δ^(κ), φ)`
    pub fn counterterm_part(&self, phi: &TestFunction) -> Result<Complex64> {
        counterterm_sum(&self.counterterms, phi)
    }

    /// `(T̄, φ̄)`, which must converge.
    pub fn subtracted_pairing(&self, phi: &TestFunction, cfg: &PairingConfig) -> Result<(Complex64, PairingResult)> {
        let phibar = taylor_subtract(phi, &self.cutoff, self.p)?;
        let r = limit_pairing(&self.expr, &phibar, cfg)?;
        match (r.status, r.value) {
            (Status::Converged, Some(v)) => Ok((v, r)),
            (status, _) => Err(Error::ExtensionFailure(format!(
                "subtracted pairing of `{}` at order {} is {status}",
                self.expr, self.p
            ))),
        }
    }

    /// `(T̄, φ̄) + Σ c_κ (δ^(κ), φ)`
    pub fn evaluate(&self, phi: &TestFunction, cfg: &PairingConfig) -> Result<ExtensionReport> {
        check_order(self.p, phi.max_order())?;
        let (tbar_phibar, _) = self.subtracted_pairing(phi, cfg)?;
        self.assemble(tbar_phibar, phi)
    }

    fn assemble(&self, tbar_phibar: Complex64, phi: &TestFunction) -> Result<ExtensionReport> {
        let counterterm_part = self.counterterm_part(phi)?;
        Ok(ExtensionReport {
            p: self.p,
            c: self.counterterms.clone(),
            omega: self.cutoff.spec(),
            value: tbar_phibar + counterterm_part,
            tbar_phibar,
            counterterm_part,
        })
    }
}

fn counterterm_sum(c: &[Complex64], phi: &TestFunction) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, ck) in c.iter().enumerate() {
        acc += ck * delta_derivative_pairing(k, phi)?;
    }
    Ok(acc)
}

pub fn evaluate_extension(e: &Extension, phi: &TestFunction, cfg: &PairingConfig) -> Result<ExtensionReport> {
    e.evaluate(phi, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionReport {
    pub p: usize,
    pub c: Vec<Complex64>,
    pub omega: CutoffSpec,
    pub value: Complex64,
    pub tbar_phibar: Complex64,
    pub counterterm_part: Complex64,
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

impl Serialize for ExtensionReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            p: usize,
            c: Vec<[f64; 2]>,
            omega: CutoffSpec,
            value: [f64; 2],
            #[serde(rename = "Tbar_phibar")]
            tbar_phibar: [f64; 2],
            counterterm_part: [f64; 2],
        }
        Wire {
            p: self.p,
            c: self.c.iter().copied().map(pair).collect(),
            omega: self.omega,
            value: pair(self.value),
            tbar_phibar: pair(self.tbar_phibar),
            counterterm_part: pair(self.counterterm_part),
        }
        .serialize(serializer)
    }
}

/// Relative bound for cutoff independence.
pub const OMEGA_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaCheck {
    pub omega_1: CutoffSpec,
    pub omega_2: CutoffSpec,
    pub value_1: [f64; 2],
    pub value_2: [f64; 2],
    pub difference: f64,
    pub holds: bool,
}

/// `|E_ω₁(φ) − E_ω₂(φ)|` for the `c = 0` extension.
pub fn omega_independence_check(
    expr: &ProductExpression,
    p: usize,
    phi: &TestFunction,
    omega_1: &PlateauCutoff,
    omega_2: &PlateauCutoff,
    cfg: &PairingConfig,
) -> Result<OmegaCheck> {
    if omega_1 == omega_2 {
        return Err(Error::InvalidParameter("cutoffs must differ".into()));
    }
    let v1 = Extension::minimal(expr.clone(), p, omega_1.clone()).evaluate(phi, cfg)?.value;
    let v2 = Extension::minimal(expr.clone(), p, omega_2.clone()).evaluate(phi, cfg)?.value;
    let difference = (v1 - v2).norm();
    Ok(OmegaCheck {
        omega_1: omega_1.spec(),
        omega_2: omega_2.spec(),
        value_1: pair(v1),
        value_2: pair(v2),
        difference,
        holds: difference <= OMEGA_TOL * (1.0 + v1.norm()),
    })
}

/// Absolute agreement required by [`factorization_identity_check`].
pub const FACTORIZATION_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationReport {
    pub kappa: usize,
    /// `(T̄, x^(κ+1)ψ)`
    pub lhs: Option<[f64; 2]>,
    /// `(x^(κ+1)T̄, ψ)`
    pub rhs: Option<[f64; 2]>,
    pub lhs_status: Status,
    pub rhs_status: Status,
    pub difference: Option<f64>,
    pub agrees: bool,
}

/// Compares `(T̄, x^(κ+1)ψ)` with `(x^(κ+1)T̄, ψ)`: the monomial moved from the
/// test function onto the product.
pub fn factorization_identity_check(
    expr: &ProductExpression,
    kappa: usize,
    psi: &TestFunction,
    cfg: &PairingConfig,
) -> Result<FactorizationReport> {
    let probe = crate::testfn::vanish_probe(kappa, psi)?;
    let lhs = limit_pairing(expr, &probe, cfg)?;
    let rhs = limit_pairing(&expr.with_extra_power(kappa as u32 + 1), psi, cfg)?;
    let difference = match (lhs.value, rhs.value) {
        (Some(a), Some(b)) if lhs.is_converged() && rhs.is_converged() => Some((a - b).norm()),
        _ => None,
    };
    Ok(FactorizationReport {
        kappa,
        lhs: lhs.value.map(pair),
        rhs: rhs.value.map(pair),
        lhs_status: lhs.status,
        rhs_status: rhs.status,
        difference,
        agrees: difference.is_some_and(|d| d <= FACTORIZATION_TOL),
    })
}

/// Relative bound on the counterterm offsets in [`nonuniqueness_scan`].
pub const SCAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub phi_index: usize,
    pub c: Vec<[f64; 2]>,
    pub value: [f64; 2],
    /// Value minus the `c = 0` value.
    pub offset: [f64; 2],
    /// `Σ c_κ (−1)^κ φ^(κ)(0)`
    pub expected_offset: [f64; 2],
    pub exact: bool,
}

/// Evaluates the family over a grid of counterterm vectors. `(T̄, φ̄)` is
/// computed once per test function; each row's offset from the `c = 0` row
/// is checked against the pure counterterm sum.
pub fn nonuniqueness_scan(
    e: &Extension,
    grid: &[Vec<Complex64>],
    phis: &[TestFunction],
    cfg: &PairingConfig,
) -> Result<Vec<ScanRow>> {
    let zero = vec![Complex64::new(0.0, 0.0); e.p + 1];
    let base_ext = e.with_counterterms(zero)?;
    let mut rows = Vec::with_capacity(grid.len() * phis.len());
    for (i, phi) in phis.iter().enumerate() {
        check_order(e.p, phi.max_order())?;
        let (tbar, _) = e.subtracted_pairing(phi, cfg)?;
        let base = base_ext.assemble(tbar, phi)?.value;
        for c in grid {
            let member = e.with_counterterms(c.clone())?;
            let value = member.assemble(tbar, phi)?.value;
            let offset = value - base;
            let expected = counterterm_sum(c, phi)?;
            let scale = expected.norm().max(value.norm()).max(base.norm());
            rows.push(ScanRow {
                phi_index: i,
                c: c.iter().copied().map(pair).collect(),
                value: pair(value),
                offset: pair(offset),
                expected_offset: pair(expected),
                exact: (offset - expected).norm() <= SCAN_TOL * scale,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::HyperfunctionPair;
    use crate::testfn::vanish_probe;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn gauss() -> TestFunction {
        TestFunction::gaussian(FRAC_1_SQRT_2, 6)
    }

    fn omega() -> PlateauCutoff {
        PlateauCutoff::new(1.0, 2.0, 6).unwrap()
    }

    fn delta_sq() -> ProductExpression {
        ProductExpression::new(vec![HyperfunctionPair::delta(), HyperfunctionPair::delta()]).unwrap()
    }

    #[test]
    fn subtraction_is_identity_on_vanishing_functions() {
        let phi = vanish_probe(1, &gauss()).unwrap();
        let bar = taylor_subtract(&phi, &omega(), 1).unwrap();
        for &x in &[-1.7, -0.3, 0.0, 0.4, 1.5, 3.0] {
            for q in 0..=6 {
                assert_eq!(bar.derivative_unchecked(x, q), phi.eval(x, q).unwrap());
            }
        }
    }

    #[test]
    fn subtraction_on_plateau() {
        let bar = taylor_subtract(&gauss(), &omega(), 0).unwrap();
        for &x in &[-0.9, 0.2, 0.8] {
            assert!((bar.value(x) - ((-x * x).exp() - 1.0)).abs() < 1e-15);
        }
        let bar1 = taylor_subtract(&gauss(), &omega(), 1).unwrap();
        for &x in &[-1.9, -0.5, 0.3, 1.2, 1.7] {
            assert_eq!(bar.value(x), bar1.value(x));
        }
    }

    #[test]
    fn subtracted_derivatives_vanish_exactly_at_origin() {
        let phi = TestFunction::new(vec![1.0, -2.0, 0.5, 3.0], 0.9, 0.25, 6).unwrap();
        for p in 0..=4 {
            let bar = taylor_subtract(&phi, &omega(), p).unwrap();
            for q in 0..=p {
                assert_eq!(bar.derivative_unchecked(0.0, q), 0.0, "p={p} q={q}");
            }
        }
    }

    #[test]
    fn subtracted_derivatives_match_finite_differences() {
        let phi = TestFunction::new(vec![1.0, 1.0], 1.0, 0.1, 6).unwrap();
        let bar = taylor_subtract(&phi, &omega(), 2).unwrap();
        let h = 1e-4;
        for i in 0..20 {
            let x = -2.5 + 0.25 * i as f64 + 0.01;
            for q in 0..4 {
                let f = |d: f64| bar.derivative_unchecked(x + d, q);
                let fd = (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
                let exact = bar.derivative_unchecked(x + 0.0, q + 1);
                assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "x={x} q={q}");
            }
        }
    }

    #[test]
    fn subtraction_order_shortfall() {
        let phi = TestFunction::gaussian(1.0, 2);
        assert!(matches!(taylor_subtract(&phi, &omega(), 3), Err(Error::OrderExceeded { .. })));
        let weak = PlateauCutoff::new(1.0, 2.0, 1).unwrap();
        assert!(matches!(taylor_subtract(&phi, &weak, 1), Err(Error::OrderExceeded { .. })));
    }

    #[test]
    fn counterterm_length_must_match_order() {
        assert!(Extension::new(delta_sq(), 1, vec![Complex64::new(0.0, 0.0)], omega()).is_err());
    }

    #[test]
    fn delta_derivative_sign_convention() {
        let phi = TestFunction::new(vec![0.0, 1.0], FRAC_1_SQRT_2, 0.0, 3).unwrap();
        assert!((delta_derivative_pairing(1, &phi).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(delta_derivative_pairing(0, &gauss()).unwrap(), 1.0);
    }

    #[test]
    fn counterterm_shifts_value_by_phi_at_origin() {
        let cfg = PairingConfig::default();
        let e0 = Extension::minimal(delta_sq(), 0, omega());
        let r0 = e0.evaluate(&gauss(), &cfg).unwrap();
        let r1 = e0.with_counterterms(vec![Complex64::new(1.0, 0.0)]).unwrap().evaluate(&gauss(), &cfg).unwrap();
        assert!((r1.value - r0.value - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(r1.tbar_phibar, r0.tbar_phibar);
    }

    #[test]
    fn convergent_product_extension_matches_direct_limit() {
        let cfg = PairingConfig::default();
        let e = Extension::minimal(ProductExpression::single(HyperfunctionPair::delta()), 0, omega());
        let phi = gauss();
        let direct = limit_pairing(e.expr(), &phi, &cfg).unwrap().value.unwrap();
        assert!((direct.re - 1.0).abs() < 1e-7);
        // On a function vanishing at 0 the subtraction is inactive.
        let probe = vanish_probe(0, &phi).unwrap();
        let ext = e.evaluate(&probe, &cfg).unwrap().value;
        let lim = limit_pairing(e.expr(), &probe, &cfg).unwrap().value.unwrap();
        assert!((ext - lim).norm() < 1e-7);
    }

    #[test]
    fn extension_report_json_shape() {
        let r = ExtensionReport {
            p: 0,
            c: vec![Complex64::new(1.0, -1.0)],
            omega: CutoffSpec { plateau: 1.0, support: 2.0 },
            value: Complex64::new(2.0, 0.0),
            tbar_phibar: Complex64::new(1.0, 0.0),
            counterterm_part: Complex64::new(1.0, 0.0),
        };
        assert_eq!(
            serde_json::to_value(&r).unwrap(),
            serde_json::json!({
                "p": 0, "c": [[1.0, -1.0]], "omega": {"plateau": 1.0, "support": 2.0},
                "value": [2.0, 0.0], "Tbar_phibar": [1.0, 0.0], "counterterm_part": [1.0, 0.0]
            })
        );
    }
}
