//! Property tests over random test functions, regulators and expressions.

use distprod::boundary::verify_growth_bound;
use distprod::cli::parse_expression;
use distprod::pairing::{limit_pairing, pair_at_y, PairingConfig};
use distprod::quadrature::QuadConfig;
use distprod::{Complex64, GrowthRegion, HyperfunctionPair, PlateauCutoff, Status, TestFunction};
use proptest::prelude::*;

fn catalog() -> Vec<HyperfunctionPair> {
    vec![
        HyperfunctionPair::delta(),
        HyperfunctionPair::pv_inv_x(),
        HyperfunctionPair::plus_i0_pow(1).unwrap(),
        HyperfunctionPair::plus_i0_pow(2).unwrap(),
        HyperfunctionPair::minus_i0_pow(1).unwrap(),
        HyperfunctionPair::minus_i0_pow(3).unwrap(),
        HyperfunctionPair::monomial(1),
        HyperfunctionPair::monomial(2),
        HyperfunctionPair::one(),
    ]
}

fn test_function() -> impl Strategy<Value = TestFunction> {
    (prop::collection::vec(-2.0..2.0f64, 1..4), 0.5..1.5f64, -0.5..0.5f64)
        .prop_map(|(poly, sigma, mu)| TestFunction::new(poly, sigma, mu, 4).unwrap())
}

fn atom() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("delta".to_string()),
        Just("pv(1/x)".to_string()),
        Just("1".to_string()),
        (1u32..4).prop_map(|k| format!("(x+i0)^-{k}")),
        (1u32..4).prop_map(|k| format!("(x-i0)^-{k}")),
    ];
    leaf.prop_recursive(2, 4, 1, |inner| inner.prop_map(|a| format!("d({a})")))
}

fn expression() -> impl Strategy<Value = String> {
    let term = prop_oneof![3 => atom(), 1 => (0u32..4).prop_map(|r| format!("x^{r}"))];
    prop::collection::vec(term, 1..5).prop_map(|terms| terms.join(" * "))
}

fn rel_close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parse_print_parse_round_trip(text in expression()) {
        let first = parse_expression(&text).unwrap();
        let printed = first.to_string();
        let second = parse_expression(&printed).unwrap();
        prop_assert_eq!(first, second, "printed as `{}`", printed);
    }

    #[test]
    fn pairing_is_linear_in_phi(
        phi1 in test_function(),
        phi2 in test_function(),
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
        y in 0.01..0.5f64,
        which in 0usize..4,
    ) {
        let expr = ["delta * delta", "delta * pv(1/x)", "(x+i0)^-1 * (x-i0)^-2", "x^2 * d(delta)"][which];
        let e = parse_expression(expr).unwrap();
        let q = QuadConfig::default();
        let combined = pair_at_y(&e, &phi1.combine(a, &phi2, b), y, &q).unwrap();
        let separate = pair_at_y(&e, &phi1, y, &q).unwrap() * a + pair_at_y(&e, &phi2, y, &q).unwrap() * b;
        prop_assert!(rel_close(combined, separate, 1e-9), "{} vs {}", combined, separate);
    }

    #[test]
    fn boundary_values_are_linear(
        i in 0usize..9,
        j in 0usize..9,
        a in (-2.0..2.0f64, -2.0..2.0f64),
        b in (-2.0..2.0f64, -2.0..2.0f64),
        x in -5.0..5.0f64,
        y in 0.01..1.0f64,
    ) {
        let cat = catalog();
        let (a, b) = (Complex64::new(a.0, a.1), Complex64::new(b.0, b.1));
        let sum = cat[i].scale(a).add(&cat[j].scale(b));
        let direct = a * cat[i].eval_fy(x, y).unwrap() + b * cat[j].eval_fy(x, y).unwrap();
        prop_assert!(rel_close(sum.eval_fy(x, y).unwrap(), direct, 1e-10));
    }

    #[test]
    fn derivative_commutes_with_boundary_value(i in 0usize..9, x in -3.0..3.0f64, y in 0.05..1.0f64) {
        let pair = &catalog()[i];
        let h = 1e-4 * y;
        let fd = (pair.fy(x - 2.0 * h, y) - pair.fy(x - h, y) * 8.0 + pair.fy(x + h, y) * 8.0 - pair.fy(x + 2.0 * h, y))
            / (12.0 * h);
        let exact = pair.derivative().eval_fy(x, y).unwrap();
        prop_assert!(rel_close(exact, fd, 1e-6), "{}: {} vs {}", pair, exact, fd);
    }

    #[test]
    fn upper_piece_satisfies_cauchy_riemann(i in 0usize..9, x in -3.0..3.0f64, y in 0.05..1.0f64) {
        let f = catalog()[i].f_plus().clone();
        let h = 1e-5 * y;
        let at = |dx: f64, dy: f64| f.eval(Complex64::new(x + dx, y + dy));
        let dfdx = (at(h, 0.0) - at(-h, 0.0)) / (2.0 * h);
        let dfdy = (at(0.0, h) - at(0.0, -h)) / (2.0 * h);
        prop_assert!(rel_close(dfdy, dfdx * Complex64::i(), 1e-6), "{} vs {}", dfdy, dfdx * Complex64::i());
    }

    #[test]
    fn cutoff_shape(a in 0.2..2.0f64, width in 0.2..2.0f64, x in -5.0..5.0f64) {
        let b = a + width;
        let w = PlateauCutoff::new(a, b, 4).unwrap();
        let v = w.eval(x, 0).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        if x.abs() <= a {
            prop_assert_eq!(v, 1.0);
        }
        if x.abs() >= b {
            prop_assert_eq!(v, 0.0);
        }
        prop_assert_eq!(v, w.eval(-x, 0).unwrap());
    }
}

#[test]
fn growth_bound_holds_across_catalog() {
    for pair in catalog() {
        let g = verify_growth_bound(&pair, GrowthRegion::default()).unwrap();
        assert!(g.ok && g.max_residual <= 1.01, "{pair}: {g:?}");
    }
}

#[test]
fn first_power_prefactor_equals_monomial_factor() {
    let q = QuadConfig::default();
    let phi = TestFunction::reference_set(4).swap_remove(1);
    for y in [0.5, 0.05, 0.005] {
        let a = pair_at_y(&parse_expression("x^1 * delta * pv(1/x)").unwrap(), &phi, y, &q).unwrap();
        let b = pair_at_y(&parse_expression("delta * pv(1/x) * x^1").unwrap(), &phi, y, &q).unwrap();
        assert!(rel_close(a, b, 1e-12), "y = {y}: {a} vs {b}");
    }
}

#[test]
fn higher_power_prefactor_equals_monomial_factor_in_the_limit() {
    // x^2 and the boundary value of x^2 differ by y²·T^y, which vanishes when T^y has a limit.
    let cfg = PairingConfig::default();
    let phi = TestFunction::reference_set(4).swap_remove(2);
    let a = limit_pairing(&parse_expression("x^2 * (x+i0)^-1 * (x+i0)^-1").unwrap(), &phi, &cfg).unwrap();
    let b = limit_pairing(&parse_expression("(x+i0)^-1 * (x+i0)^-1 * x^2").unwrap(), &phi, &cfg).unwrap();
    assert_eq!(a.status, Status::Converged);
    assert_eq!(b.status, Status::Converged);
    assert!(rel_close(a.value.unwrap(), b.value.unwrap(), 1e-6), "{:?} vs {:?}", a.value, b.value);
}
