//! Globally adaptive 21-point Gauss–Kronrod quadrature for complex-valued
//! integrands on a union of finite panels.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

// Kronrod abscissae; odd indices are the embedded 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Stopping rule: the summed error estimate must fall below
/// `max(abs_tol, rel_tol · ∫|f|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-13,
            max_intervals: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    /// Estimate of `∫|f|`.
    pub abs_integral: f64,
    /// Final subintervals, sorted left to right.
    pub mesh: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// Single 21-point Gauss–Kronrod panel. Returns `(value, error, ∫|f|)`.
pub fn gk21<F>(f: &F, a: f64, b: f64) -> (Complex64, f64, f64)
where
    F: Fn(f64) -> Complex64 + ?Sized,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];

    let mut res_gauss = Complex64::new(0.0, 0.0);
    let mut res_kronrod = f_center * WGK[10];
    let mut res_abs = WGK[10] * f_center.norm();

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_gauss += (f1 + f2) * WG[j];
        res_kronrod += (f1 + f2) * WGK[jtw];
        res_abs += WGK[jtw] * (f1.norm() + f2.norm());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_kronrod += (f1 + f2) * WGK[jtwm1];
        res_abs += WGK[jtwm1] * (f1.norm() + f2.norm());
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }

    let abs_half = half.abs();
    let err = (res_kronrod - res_gauss).norm() * abs_half;
    let res_abs = res_abs * abs_half;
    let res_asc = res_asc * abs_half;
    (res_kronrod * half, rescale_error(err, res_abs, res_asc), res_abs)
}

/// Integrates `f` over `[points[0], points[last]]`, treating every entry of
/// `points` as a mandatory panel boundary. `points` must be sorted.
pub fn integrate<F>(f: F, points: &[f64], cfg: &QuadConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> Complex64,
{
    assert!(points.len() >= 2, "need at least one panel");
    let mut heap = BinaryHeap::new();
    let mut frozen = Vec::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (value, error, abs) = gk21(&f, w[0], w[1]);
            heap.push(Panel { a: w[0], b: w[1], value, error, abs });
        }
    }

    let totals = |heap: &BinaryHeap<Panel>, frozen: &[Panel]| {
        heap.iter()
            .chain(frozen)
            .fold((0.0, 0.0), |(e, s), p| (e + p.error, s + p.abs))
    };

    loop {
        let (err, abs) = totals(&heap, &frozen);
        let tol = cfg.abs_tol.max(cfg.rel_tol * abs);
        if err <= tol {
            return Ok(finish(heap, frozen, err, abs));
        }
        if heap.len() + frozen.len() >= cfg.max_intervals {
            let partial = finish(heap, frozen, err, abs);
            return Err(Error::Quadrature {
                partial: partial.value,
                error_estimate: err,
            });
        }
        let Some(worst) = heap.pop() else {
            let partial = finish(heap, frozen, err, abs);
            return Err(Error::Quadrature {
                partial: partial.value,
                error_estimate: err,
            });
        };
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e3 * f64::EPSILON * scale {
            // Too narrow to bisect further; its error stays in the budget.
            frozen.push(worst);
            continue;
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error, abs) = gk21(&f, a, b);
            heap.push(Panel { a, b, value, error, abs });
        }
    }
}

fn finish(heap: BinaryHeap<Panel>, frozen: Vec<Panel>, error: f64, abs: f64) -> QuadResult {
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(frozen);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = panels
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
    QuadResult {
        value,
        error,
        abs_integral: abs,
        mesh: panels.iter().map(|p| (p.a, p.b)).collect(),
    }
}

/// Applies the fixed Kronrod rule on every panel of `mesh`, summing left to right.
pub fn integrate_on_mesh<F>(f: F, mesh: &[(f64, f64)]) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    mesh.iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &(a, b)| acc + gk21(&f, a, b).0)
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(f: F, points: &[f64], cfg: &QuadConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), points, cfg).map(|r| r.value.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact_on_one_panel() {
        // K21 is exact through degree 31.
        let f = |x: f64| Complex64::new(x.powi(20), 0.0);
        let (v, _, _) = gk21(&f, -1.0, 1.0);
        assert!((v.re - 2.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_over_wide_window() {
        let v = integrate_real(|x| (-x * x).exp(), &[-30.0, 0.0, 30.0], &QuadConfig::default()).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn narrow_lorentzian_needs_breakpoints_only_for_speed() {
        let y = 1e-4;
        let cfg = QuadConfig::default();
        let pts = [-10.0, -10.0 * y, 0.0, 10.0 * y, 10.0];
        let v = integrate_real(|x| y / (std::f64::consts::PI * (x * x + y * y)), &pts, &cfg).unwrap();
        let exact = 2.0 / std::f64::consts::PI * (10.0 / y).atan();
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
    }

    #[test]
    fn complex_integrand_parts_are_independent() {
        let r = integrate(
            |x| Complex64::new(x.cos(), x.sin()),
            &[0.0, std::f64::consts::PI],
            &QuadConfig::default(),
        )
        .unwrap();
        assert!(r.value.re.abs() < 1e-13);
        assert!((r.value.im - 2.0).abs() < 1e-13);
    }

    #[test]
    fn interval_cap_reports_partial_value() {
        let cfg = QuadConfig { abs_tol: 0.0, rel_tol: 0.0, max_intervals: 4 };
        let err = integrate(|x| Complex64::new(x.abs().sqrt(), 0.0), &[-1.0, 1.0], &cfg).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn fixed_mesh_reproduces_adaptive_value() {
        let f = |x: f64| Complex64::new(1.0 / (1.0 + x * x), 0.0);
        let r = integrate(f, &[-5.0, 5.0], &QuadConfig::default()).unwrap();
        assert_eq!(integrate_on_mesh(f, &r.mesh), r.value);
    }
}
