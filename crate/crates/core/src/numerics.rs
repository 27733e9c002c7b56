//! Small numerical helpers shared across modules.

/// Least-squares line through `(x, y)`; returns `(slope, intercept)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Slope of the least-squares line.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    least_squares(x, y).0
}

/// Composite Simpson rule for samples on a uniform grid of `[0, len]`.
/// Needs an odd number of samples.
pub fn simpson(values: &[f64], len: f64) -> f64 {
    let m = values.len();
    assert!(m >= 3 && m % 2 == 1, "Simpson needs an odd sample count ≥ 3");
    let h = len / (m - 1) as f64;
    let mut s = values[0] + values[m - 1];
    for (k, v) in values.iter().enumerate().take(m - 1).skip(1) {
        s += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v: Vec<f64> = (0..9).map(|k| (k as f64 / 8.0).powi(3)).collect();
        assert!((simpson(&v, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn fits_a_line() {
        let (a, b) = least_squares(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((a - 2.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14);
    }
}
