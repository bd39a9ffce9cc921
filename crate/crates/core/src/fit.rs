//! Least-squares line fitting and Richardson extrapolation helpers.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; `1` when the data have no spread.
    pub r_squared: f64,
    /// Standard error of the slope (zero with fewer than three points).
    pub slope_stderr: f64,
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
///
/// Panics with fewer than two points.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert!(xs.len() == ys.len() && xs.len() >= 2, "need at least two paired points");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy <= 1e-24 * (1.0 + my * my) * n { 1.0 } else { 1.0 - sse / syy };
    let slope_stderr = if xs.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    LinearFit { slope, intercept, r_squared, slope_stderr }
}

/// Richardson tableau for samples taken at `h_k = h₀·ratio^k`, assuming an
/// error expansion in integer powers `h, h², …`.
///
/// `columns[j][i]` eliminates the first `j` error terms using samples
/// `i ..= i + j`; column `0` is the raw sequence.
pub fn richardson_tableau(values: &[Complex64], ratio: f64, depth: usize) -> Vec<Vec<Complex64>> {
    let mut columns = vec![values.to_vec()];
    for j in 1..=depth.min(values.len().saturating_sub(1)) {
        let prev = &columns[j - 1];
        let factor = ratio.powi(j as i32);
        let next: Vec<Complex64> = prev
            .windows(2)
            .map(|w| (w[1] - w[0] * factor) / (1.0 - factor))
            .collect();
        columns.push(next);
    }
    columns
}
