use crate::error::{Error, Result};

/// Covering-number envelope of the closed unit ball in `R^d`.
///
/// Returns `(1, 1)` for `epsilon >= 1`, else `((1/eps)^d, (1 + 2/eps)^d)`.
pub fn covering_number_bounds(d: usize, epsilon: f64) -> Result<(f64, f64)> {
    if d == 0 {
        return Err(Error::input("dimension must be at least 1"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::input(format!("epsilon must be positive, got {epsilon}")));
    }
    if epsilon >= 1.0 {
        return Ok((1.0, 1.0));
    }
    let d = d as i32;
    Ok(((1.0 / epsilon).powi(d), (1.0 + 2.0 / epsilon).powi(d)))
}

/// `log` of the upper envelope, computed without forming the power.
pub fn log_covering_upper(d: usize, epsilon: f64) -> f64 {
    if epsilon >= 1.0 {
        0.0
    } else {
        d as f64 * (1.0 + 2.0 / epsilon).ln()
    }
}
