//! Small numeric helpers shared by the harness and the bound calculators.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Sample mean and standard error of the mean (zero for a single sample).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ordinary least squares with intercept; returns `[intercept, coef_1, ...]`.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let n = rows.len();
    if n == 0 || n != y.len() {
        return Err(Error::input("least squares needs matching, nonempty inputs"));
    }
    let p = rows[0].len() + 1;
    if n < p {
        return Err(Error::input("least squares needs at least as many points as coefficients"));
    }
    let x = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { rows[i][j - 1] });
    let yv = DVector::from_column_slice(y);
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * yv;
    let beta = xtx
        .lu()
        .solve(&xty)
        .ok_or_else(|| Error::Numerical("least-squares design matrix is singular".into()))?;
    Ok(beta.iter().copied().collect())
}

/// Plug-in Shannon entropy (nats) of a count vector, with the delta-method
/// standard error `sd(-log p_hat(X)) / sqrt(n)`.
pub fn plugin_entropy(counts: &[u64]) -> (f64, f64) {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let mut h = 0.0;
    let mut second = 0.0;
    for &c in counts.iter().filter(|&&c| c > 0) {
        let p = c as f64 / nf;
        let l = -p.ln();
        h += p * l;
        second += p * l * l;
    }
    let var = (second - h * h).max(0.0);
    (h, (var / nf).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(mean_stderr(&[2.0, 2.0, 2.0]), (2.0, 0.0));
        let (m, s) = mean_stderr(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_line_is_recovered() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..5).map(|i| 3.0 - 0.5 * i as f64).collect();
        let b = least_squares(&rows, &y).unwrap();
        assert!((b[0] - 3.0).abs() < 1e-12 && (b[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn fair_coin_entropy() {
        let (h, se) = plugin_entropy(&[500, 500]);
        assert!((h - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(se < 1e-12);
        assert_eq!(plugin_entropy(&[7]).0, 0.0);
    }
}
