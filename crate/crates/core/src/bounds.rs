//! Regret bound calculators.
//!
//! Entropies are in nats throughout. Series that run to infinity are
//! truncated and carry an explicit tail certificate.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::BanditModel;
use crate::error::{Error, Result};
use crate::nets::{log_covering_upper, QuantizationChain};
use crate::quad;
use crate::rng;
use crate::stats::plugin_entropy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    /// `sum_k sqrt(2 * gamma_k * T * H_k)`.
    Chained,
    /// `12 * sum_k 2^-k * sqrt(d * T * H_k)`.
    SmoothLinear,
    /// Chained bound with `gamma_k = 2 rho_k^2 d`, `rho_1 = 1`, root at the ball center.
    SmoothLinearBall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub k: i32,
    pub gamma_bar: f64,
    pub entropy_nats: f64,
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub formula: FormulaId,
    pub rows: Vec<BoundRow>,
    /// Sum of the row terms.
    pub total: f64,
    /// Upper bound on the omitted terms beyond the last row (0 when none are omitted).
    pub tail_bound: f64,
}

impl BoundReport {
    fn from_rows(formula: FormulaId, rows: Vec<BoundRow>, tail_bound: f64) -> Self {
        let total = rows.iter().map(|r| r.term).sum();
        BoundReport {
            formula,
            rows,
            total,
            tail_bound,
        }
    }

    /// Total plus the tail certificate.
    pub fn certified_total(&self) -> f64 {
        self.total + self.tail_bound
    }

    /// CSV with columns `k, gamma_bar, H_k_nats, term`, then an optional
    /// `TAIL` row and a final `TOTAL` row (both carry only `term`).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "gamma_bar", "H_k_nats", "term"])?;
        for r in &self.rows {
            w.write_record([
                r.k.to_string(),
                r.gamma_bar.to_string(),
                r.entropy_nats.to_string(),
                r.term.to_string(),
            ])?;
        }
        if self.tail_bound > 0.0 {
            w.write_record(["TAIL", "", "", &self.tail_bound.to_string()])?;
        }
        w.write_record(["TOTAL", "", "", &self.total.to_string()])?;
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, formula: FormulaId) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        let mut tail_bound = 0.0;
        let mut total = None;
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::input(format!("bad number {s:?}: {e}")));
        for rec in rd.records() {
            let rec = rec?;
            match &rec[0] {
                "TAIL" => tail_bound = num(&rec[3])?,
                "TOTAL" => total = Some(num(&rec[3])?),
                k => rows.push(BoundRow {
                    k: k.parse().map_err(|e| Error::input(format!("bad level {k:?}: {e}")))?,
                    gamma_bar: num(&rec[1])?,
                    entropy_nats: num(&rec[2])?,
                    term: num(&rec[3])?,
                }),
            }
        }
        let total = total.ok_or_else(|| Error::input("bound CSV has no TOTAL row"))?;
        Ok(BoundReport {
            formula,
            rows,
            total,
            tail_bound,
        })
    }
}

fn check_horizon(t: f64) -> Result<()> {
    if t >= 1.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("horizon T must be >= 1, got {t}")))
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::input("dimension must be at least 1"))
    } else {
        Ok(())
    }
}

fn check_entropies(entropies: &[f64]) -> Result<()> {
    if entropies.iter().any(|&h| !(h >= 0.0) || !h.is_finite()) {
        return Err(Error::input("entropies must be finite and nonnegative"));
    }
    Ok(())
}

/// Chain-link ratio bound for `d`-dimensional linear bandits: `2 * (6 * 2^-k)^2 * d`.
pub fn gamma_bar_linear(k: i32, d: usize) -> f64 {
    gamma_bar_from_radius(6.0 * 2f64.powi(-k), d)
}

/// `2 * rho^2 * d`, with `rho` a bound on the distance between consecutive
/// sampled representatives.
pub fn gamma_bar_from_radius(rho: f64, d: usize) -> f64 {
    2.0 * rho * rho * d as f64
}

/// `sum_k sqrt(2 * gamma_k * T * H_k)` over rows `(k, gamma_k, H_k)`.
pub fn chained_bound(horizon: f64, rows: &[(i32, f64, f64)]) -> Result<BoundReport> {
    check_horizon(horizon)?;
    let rows = rows
        .iter()
        .map(|&(k, gamma_bar, h)| {
            if !(gamma_bar >= 0.0) || !(h >= 0.0) {
                return Err(Error::input(format!(
                    "level {k}: gamma_bar and entropy must be nonnegative"
                )));
            }
            Ok(BoundRow {
                k,
                gamma_bar,
                entropy_nats: h,
                term: (2.0 * gamma_bar * horizon * h).sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundReport::from_rows(FormulaId::Chained, rows, 0.0))
}

/// Tail of `12 sum_{k > last} 2^-k sqrt(d T H_k)` with `H_k` replaced by the
/// log of the unit-ball covering envelope at scale `2^-k`.
fn smooth_tail(d: usize, horizon: f64, last: i32) -> f64 {
    const EXPLICIT: i32 = 200;
    let df = d as f64;
    let explicit: f64 = ((last + 1)..=(last + EXPLICIT))
        .map(|k| {
            let scale = 2f64.powi(-k);
            12.0 * scale * (df * horizon * log_covering_upper(d, scale)).sqrt()
        })
        .sum();
    // beyond m: log(1 + 2^(k+1)) <= (k + 2) ln 2 <= (k + 2)^2 ln 2, and
    // sum_{k>m} (k + 2) 2^-k = (m + 4) 2^-m
    let m = last + EXPLICIT;
    let rest = 12.0 * df * horizon.sqrt() * std::f64::consts::LN_2.sqrt() * (m as f64 + 4.0) * 2f64.powi(-m);
    explicit + rest
}

/// `12 * sum_{k = k0+1}^{K} 2^-k * sqrt(d * T * H_k)` where `entropies[i]`
/// is `H_{k0 + 1 + i}`; the tail beyond `K` is certified with the unit-ball
/// covering envelope.
pub fn smooth_linear_bound(d: usize, horizon: f64, k0: i32, entropies: &[f64]) -> Result<BoundReport> {
    check_dim(d)?;
    check_horizon(horizon)?;
    check_entropies(entropies)?;
    let df = d as f64;
    let rows: Vec<BoundRow> = entropies
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let k = k0 + 1 + i as i32;
            BoundRow {
                k,
                gamma_bar: gamma_bar_linear(k, d),
                entropy_nats: h,
                term: 12.0 * 2f64.powi(-k) * (df * horizon * h).sqrt(),
            }
        })
        .collect();
    let last = k0 + entropies.len() as i32;
    Ok(BoundReport::from_rows(FormulaId::SmoothLinear, rows, smooth_tail(d, horizon, last)))
}

/// Link radius under the ball convention: `rho_1 = 1`, else
/// `2 alpha^-k + 2 alpha^-(k-1)`.
pub fn ball_link_radius(alpha: f64, k: i32) -> f64 {
    if k <= 1 {
        1.0
    } else {
        2.0 * alpha.powi(-k) + 2.0 * alpha.powi(-(k - 1))
    }
}

/// Chained bound for ball action sets rooted at the center (`k0 = 0`) with
/// `gamma_k = 2 rho_k^2 d`; `entropies[i]` is `H_{1 + i}`.
pub fn smooth_linear_bound_ball(d: usize, horizon: f64, alpha: f64, entropies: &[f64]) -> Result<BoundReport> {
    check_dim(d)?;
    check_entropies(entropies)?;
    if !(alpha > 1.0) {
        return Err(Error::input(format!("alpha must exceed 1, got {alpha}")));
    }
    let rows: Vec<(i32, f64, f64)> = entropies
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let k = 1 + i as i32;
            (k, gamma_bar_from_radius(ball_link_radius(alpha, k), d), h)
        })
        .collect();
    let mut report = chained_bound(horizon, &rows)?;
    report.formula = FormulaId::SmoothLinearBall;
    Ok(report)
}

/// `24 * sqrt(d T) * integral_0^diam sqrt(log N(eps)) d eps`, the integrand
/// vanishing beyond `diam`.
pub fn entropy_integral_bound<F>(d: usize, horizon: f64, log_covering: F, diam: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_dim(d)?;
    check_horizon(horizon)?;
    if !(diam > 0.0) || !diam.is_finite() {
        return Err(Error::input(format!("diameter must be positive and finite, got {diam}")));
    }
    let integral = quad::integrate(|eps| log_covering(eps).max(0.0).sqrt(), 0.0, diam, 1e-6)?;
    Ok(24.0 * (d as f64 * horizon).sqrt() * integral)
}

/// `7 * d * sqrt(T)`.
pub fn unit_ball_bound(d: usize, horizon: f64) -> Result<f64> {
    check_dim(d)?;
    check_horizon(horizon)?;
    Ok(7.0 * d as f64 * horizon.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSeries {
    pub alpha: f64,
    /// Number of `k >= 2` terms summed explicitly.
    pub tail_terms: usize,
    /// `2 * (first + sum of explicit terms)`.
    pub value: f64,
    /// Upper bound on `2 * (omitted terms)`; infinite when no geometric
    /// envelope applies yet.
    pub tail_bound: f64,
    pub converged: bool,
}

impl AlphaSeries {
    /// Term `k >= 2` of the series inside the factor 2.
    pub fn term(alpha: f64, k: i32) -> f64 {
        (2.0 * alpha.powi(-k) + 2.0 * alpha.powi(-(k - 1))) * (2.0 * (2.0 * alpha.powi(k) + 1.0).ln()).sqrt()
    }
}

/// The constant `2 (sqrt(2 log(2a + 1)) + sum_{k>=2} (2a^-k + 2a^-(k-1)) sqrt(2 log(2a^k + 1)))`
/// of the `alpha^-k`-net version of the unit-ball bound.
pub fn alpha_series_constant(alpha: f64, tail_terms: usize) -> Result<AlphaSeries> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::input(format!("alpha must be a finite real > 1, got {alpha}")));
    }
    if tail_terms == 0 {
        return Err(Error::input("tail_terms must be at least 1"));
    }
    let first = (2.0 * (2.0 * alpha + 1.0).ln()).sqrt();
    let last = 1 + tail_terms as i32;
    let partial: f64 = first + (2..=last).map(|k| AlphaSeries::term(alpha, k)).sum::<f64>();

    // For k > last: term_k <= 2 (1 + a) a^-k sqrt(2 (ln 3 + k ln a)) =: e_k, and
    // e_{k+1} / e_k <= a^-1 sqrt(1 + ln a / (ln 3 + k ln a)) which decreases in k.
    let ln3 = 3f64.ln();
    let la = alpha.ln();
    let next = last + 1;
    let envelope = 2.0 * (1.0 + alpha) * alpha.powi(-next) * (2.0 * (ln3 + next as f64 * la)).sqrt();
    let ratio = (1.0 + la / (ln3 + next as f64 * la)).sqrt() / alpha;
    let tail = if ratio < 1.0 {
        envelope / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    Ok(AlphaSeries {
        alpha,
        tail_terms,
        value: 2.0 * partial,
        tail_bound: 2.0 * tail,
        converged: 2.0 * tail < 1e-6,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub k: i32,
    pub entropy_nats: f64,
    pub stderr: f64,
    /// Number of level-`k` centers hit by at least one sample.
    pub support: usize,
    /// Number of level-`k` centers.
    pub net_size: usize,
}

const SAMPLE_CHUNK: usize = 4096;

/// Plug-in entropies of `A*_k` for every chain level, from one shared set of
/// prior draws.
///
/// The optimal action of each draw is snapped to the nearest chain point and
/// quantized; chunk `c` of the draws uses `rng::stream(master_seed, c)`.
pub fn empirical_quantized_entropies<M: BanditModel>(
    chain: &QuantizationChain,
    model: &M,
    samples: usize,
    master_seed: u64,
) -> Result<Vec<EntropyEstimate>> {
    if samples == 0 {
        return Err(Error::input("samples must be at least 1"));
    }
    let n_chunks = samples.div_ceil(SAMPLE_CHUNK);
    let snapped: Vec<Vec<usize>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(master_seed, c as u64);
            let count = SAMPLE_CHUNK.min(samples - c * SAMPLE_CHUNK);
            (0..count)
                .map(|_| {
                    let theta = model.sample_prior(&mut rng);
                    let best = model.optimal_action(&theta);
                    chain.points.nearest(&model.action_point(&best))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let n_points = chain.points.len();
    let mut hits = vec![0u64; n_points];
    for &a in snapped.iter().flatten() {
        hits[a] += 1;
    }
    chain
        .levels
        .iter()
        .map(|lvl| {
            let mut counts = vec![0u64; n_points];
            for (a, &h) in hits.iter().enumerate() {
                counts[lvl.net.assignment[a]] += h;
            }
            let (entropy_nats, stderr) = plugin_entropy(&counts);
            Ok(EntropyEstimate {
                k: lvl.k,
                entropy_nats,
                stderr,
                support: counts.iter().filter(|&&c| c > 0).count(),
                net_size: lvl.net.len(),
            })
        })
        .collect()
}

/// Plug-in entropy of `A*_k` at a single level.
pub fn empirical_quantized_entropy<M: BanditModel>(
    chain: &QuantizationChain,
    model: &M,
    k: i32,
    samples: usize,
    master_seed: u64,
) -> Result<EntropyEstimate> {
    chain.level(k)?;
    let all = empirical_quantized_entropies(chain, model, samples, master_seed)?;
    Ok(all.into_iter().find(|e| e.k == k).expect("level checked above"))
}
