use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance of the reduction contract.
pub const LEMMA_TOL: f64 = 1e-12;

/// Mixture `q * delta(a1) + (1 - q) * delta(a2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPoint {
    pub a1: usize,
    pub a2: usize,
    pub q: f64,
}

const Q_ROUNDING: f64 = 1e-12;

fn slack(bound: f64) -> f64 {
    LEMMA_TOL * bound.abs().max(f64::MIN_POSITIVE)
}

fn check_inputs(q: &[f64], f: &[f64], g: &[f64]) -> Result<()> {
    if q.is_empty() {
        return Err(Error::input("two-point reduction needs a nonempty space"));
    }
    if f.len() != q.len() || g.len() != q.len() {
        return Err(Error::input("Q, f and g must have the same length"));
    }
    if q.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::input("Q must be nonnegative"));
    }
    let total: f64 = q.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::input(format!("Q sums to {total}, not 1")));
    }
    if f.iter().chain(g).any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::input("f and g must be finite and nonnegative"));
    }
    Ok(())
}

/// Whether `t` satisfies both mixture inequalities within [`LEMMA_TOL`].
pub fn satisfies_reduction(q: &[f64], f: &[f64], g: &[f64], t: &TwoPoint) -> bool {
    let f_bar: f64 = q.iter().zip(f).map(|(p, v)| p * v).sum();
    let g_bar: f64 = q.iter().zip(g).map(|(p, v)| p * v).sum();
    if !(0.0..=1.0).contains(&t.q) || t.a1 >= f.len() || t.a2 >= f.len() {
        return false;
    }
    let lf = t.q * f[t.a1] + (1.0 - t.q) * f[t.a2];
    let lg = t.q * g[t.a1] + (1.0 - t.q) * g[t.a2];
    lf <= f_bar + slack(f_bar) && lg <= g_bar + slack(g_bar)
}

/// Finds `(a1, a2, q)` with `q f(a1) + (1-q) f(a2) <= E_Q f` and the same for `g`.
///
/// If some action has both `f <= E_Q f` and `g <= E_Q g`, the lowest such
/// index is returned with `q = 1`. Otherwise pairs `a1` in `{f <= E_Q f}`,
/// `a2` in `{g <= E_Q g}` are scanned in lexicographic order and the first
/// nonempty interval of admissible `q` yields its midpoint.
pub fn two_point_reduction(q: &[f64], f: &[f64], g: &[f64]) -> Result<TwoPoint> {
    check_inputs(q, f, g)?;
    let f_bar: f64 = q.iter().zip(f).map(|(p, v)| p * v).sum();
    let g_bar: f64 = q.iter().zip(g).map(|(p, v)| p * v).sum();
    let in_f: Vec<bool> = f.iter().map(|&v| v <= f_bar + slack(f_bar)).collect();
    let in_g: Vec<bool> = g.iter().map(|&v| v <= g_bar + slack(g_bar)).collect();

    if let Some(a) = (0..q.len()).find(|&a| in_f[a] && in_g[a]) {
        return Ok(TwoPoint { a1: a, a2: a, q: 1.0 });
    }

    for a1 in (0..q.len()).filter(|&a| in_f[a]) {
        for a2 in (0..q.len()).filter(|&a| in_g[a]) {
            // disjoint sets: f(a1) < f(a2) and g(a1) > g(a2)
            let lo = ((f[a2] - f_bar) / (f[a2] - f[a1])).max(0.0);
            let hi = ((g_bar - g[a2]) / (g[a1] - g[a2])).min(1.0);
            // a single admissible q can come out as lo slightly above hi
            if lo > hi + Q_ROUNDING {
                continue;
            }
            for cand in [0.5 * (lo + hi), lo.min(1.0), hi.max(0.0)] {
                let t = TwoPoint { a1, a2, q: cand };
                if satisfies_reduction(q, f, g, &t) {
                    return Ok(t);
                }
            }
        }
    }
    Err(Error::invariant(format!(
        "two-point reduction found no admissible pair (E f = {f_bar}, E g = {g_bar})"
    )))
}
