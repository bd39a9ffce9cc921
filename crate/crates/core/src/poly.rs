//! Dense polynomials in ascending-coefficient order and rational functions
//! over the complex numbers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Coefficients whose magnitude falls below this fraction of the largest one
/// are treated as cancellation noise during division and gcd.
const NOISE: f64 = 1e-12;

/// Evaluates a real polynomial (ascending coefficients) with Horner's rule.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Derivative of a real polynomial.
pub fn real_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| k as f64 * c)
        .collect()
}

/// Complex polynomial, `coeffs[k]` multiplies `z^k`. Trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    /// `c·z^k`
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Poly::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<Complex64> {
        self.coeffs.last().copied()
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if *c == Complex64::new(0.0, 0.0)) {
            self.coeffs.pop();
        }
    }

    /// Drops coefficients that are negligible relative to the largest one.
    fn denoise(&mut self) {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for c in &mut self.coeffs {
            if c.norm() <= NOISE * scale {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        self.trim();
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        Poly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(zero)
                        + other.coeffs.get(k).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Euclidean division, returning `(quotient, remainder)`.
    ///
    /// Panics on division by the zero polynomial.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let d_deg = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.leading().unwrap();
        let mut rem = self.coeffs.clone();
        let Some(n_deg) = self.degree() else {
            return (Poly::zero(), Poly::zero());
        };
        if n_deg < d_deg {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![Complex64::new(0.0, 0.0); n_deg - d_deg + 1];
        for k in (0..=n_deg - d_deg).rev() {
            let q = rem[k + d_deg] / lead;
            quot[k] = q;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * d;
            }
            rem[k + d_deg] = Complex64::new(0.0, 0.0);
        }
        rem.truncate(d_deg);
        let mut r = Poly::new(rem);
        r.denoise();
        (Poly::new(quot), r)
    }

    /// Monic greatest common divisor, with remainders below the noise floor
    /// treated as zero.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        a.denoise();
        b.denoise();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        match a.leading() {
            Some(lead) => a.scale(Complex64::new(1.0, 0.0) / lead),
            None => Poly::constant(Complex64::new(1.0, 0.0)),
        }
    }

    /// All complex roots by Durand–Kerner iteration. Exact zeros at the
    /// origin are factored out first so repeated roots at `0` are exact.
    pub fn roots(&self) -> Vec<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        let lead_zeros = self.coeffs.iter().take_while(|c| **c == zero).count();
        let mut roots = vec![zero; lead_zeros];
        let rest = Poly::new(self.coeffs[lead_zeros..].to_vec());
        let Some(n) = rest.degree() else {
            return roots;
        };
        if n == 0 {
            return roots;
        }
        let lead = rest.leading().unwrap();
        let monic = rest.scale(Complex64::new(1.0, 0.0) / lead);
        let radius = 1.0
            + monic.coeffs[..n]
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
        let seed = Complex64::new(0.4, 0.9);
        let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
        for _ in 0..500 {
            let mut moved = 0.0f64;
            for i in 0..n {
                let mut denom = Complex64::new(1.0, 0.0);
                for j in 0..n {
                    if i != j {
                        denom *= z[i] - z[j];
                    }
                }
                let step = monic.eval(z[i]) / denom;
                z[i] -= step;
                moved = moved.max(step.norm());
            }
            if moved < 1e-15 * radius {
                break;
            }
        }
        roots.extend(z);
        roots
    }
}

/// Ratio of complex polynomials, normalized so the denominator is monic and
/// coprime to the numerator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rational {
    num: Poly,
    den: Poly,
}

impl Rational {
    /// Builds and normalizes `num/den`. Returns `None` for a zero denominator.
    pub fn new(num: Poly, den: Poly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        let mut r = Rational { num, den };
        r.normalize();
        Some(r)
    }

    pub fn zero() -> Self {
        Rational {
            num: Poly::zero(),
            den: Poly::constant(Complex64::new(1.0, 0.0)),
        }
    }

    pub fn polynomial(p: Poly) -> Self {
        Rational::new(p, Poly::constant(Complex64::new(1.0, 0.0))).unwrap()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalize(&mut self) {
        self.num.denoise();
        if self.num.is_zero() {
            self.den = Poly::constant(Complex64::new(1.0, 0.0));
            return;
        }
        let g = self.num.gcd(&self.den);
        if g.degree().unwrap_or(0) > 0 {
            self.num = self.num.div_rem(&g).0;
            self.den = self.den.div_rem(&g).0;
        }
        let lead = self.den.leading().unwrap();
        let inv = Complex64::new(1.0, 0.0) / lead;
        self.num = self.num.scale(inv);
        self.den = self.den.scale(inv);
        // Pin the monic leading coefficient against rounding in `inv`.
        let mut den = self.den.coeffs.clone();
        *den.last_mut().unwrap() = Complex64::new(1.0, 0.0);
        self.den = Poly::new(den);
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        if self.num.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.num.eval(z) / self.den.eval(z)
    }

    pub fn derivative(&self) -> Rational {
        // (N'D − ND') / D²
        let num = self
            .num
            .derivative()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative()));
        Rational::new(num, self.den.mul(&self.den)).unwrap()
    }

    pub fn scale(&self, s: Complex64) -> Rational {
        Rational::new(self.num.scale(s), self.den.clone()).unwrap()
    }

    pub fn add(&self, other: &Rational) -> Rational {
        if self.den == other.den {
            return Rational::new(self.num.add(&other.num), self.den.clone()).unwrap();
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        Rational::new(num, self.den.mul(&other.den)).unwrap()
    }

    /// Poles (roots of the normalized denominator).
    pub fn poles(&self) -> Vec<Complex64> {
        self.den.roots()
    }
}
