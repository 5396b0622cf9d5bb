use serde::{Deserialize, Serialize};

use crate::bounds::gamma_bar_from_radius;
use crate::error::{Error, Result};
use crate::nets::QuantizationChain;

use super::model::{PosteriorModel, MAX_CONFIGURATIONS};
use super::pmf::JointPMF;
use super::sampling::{regret_difference, SamplingFunctionFamily};

/// Denominators at or below this are treated as zero.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Allowed `|sum of link terms - regret|` when the finest level is all singletons.
pub const TELESCOPING_TOL: f64 = 1e-12;

/// One level of the chain-link information ratio.
///
/// `denominator_nats` takes the pair `(f^k(A*_k), f^{k-1}(A*_{k-1}))` as the
/// target; `denominator_alt_nats` takes `A*_k`. Both observe the actions
/// `f^k(A_k)`, `f^{k-1}(A_{k-1})` and their rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLinkReport {
    pub k: i32,
    pub numerator: f64,
    pub denominator_nats: f64,
    pub gamma: Option<f64>,
    pub bound: f64,
    pub link_term: f64,
    pub denominator_alt_nats: f64,
    pub gamma_alt: Option<f64>,
}

impl ChainLinkReport {
    /// Whether every defined ratio respects `bound`.
    pub fn within_bound(&self) -> bool {
        self.gamma.is_none_or(|g| g <= self.bound) && self.gamma_alt.is_none_or(|g| g <= self.bound)
    }
}

fn ratio(numerator: f64, denominator: f64) -> Option<f64> {
    (denominator > DENOMINATOR_FLOOR).then(|| numerator / denominator)
}

fn check_level(family: &SamplingFunctionFamily, k: i32) -> Result<()> {
    if k <= family.k0 || k > family.k_max {
        return Err(Error::input(format!(
            "link level {k} outside {}..={}",
            family.k0 + 1,
            family.k_max
        )));
    }
    Ok(())
}

/// `I_t((f^k(A*_k), f^{k-1}(A*_{k-1})); f^k(A_k), f^{k-1}(A_{k-1}), R(.), R(.))`,
/// enumerating both parameters, both random functions and both rewards.
fn pair_target_information(
    model: &PosteriorModel<'_>,
    chain: &QuantizationChain,
    family: &SamplingFunctionFamily,
    k: i32,
) -> Result<f64> {
    let n = model.n_actions();
    let v = model.n_values();
    let size = n * n * n * n * v * v;
    if size > MAX_CONFIGURATIONS {
        return Err(Error::input(format!("joint of {size} configurations is too large")));
    }
    let fine = model.quantized_labels(chain, Some(k))?;
    let coarse = model.quantized_labels(chain, Some(k - 1))?;
    let w = model.weights();
    let mut table = vec![0.0; size];
    for (j, &wj) in w.iter().enumerate() {
        for (jh, &wh) in w.iter().enumerate() {
            let base = wj * wh;
            if base == 0.0 {
                continue;
            }
            let outer = family.coupled(k, fine[j], fine[jh])?;
            let inner = family.coupled(k - 1, coarse[j], coarse[jh])?;
            for &(t1, x1, p1) in &outer {
                for &(t2, x2, p2) in &inner {
                    let p = base * p1 * p2;
                    let head = ((t1 * n + t2) * n + x1) * n + x2;
                    for v1 in 0..v {
                        let l1 = model.likelihood(x1, j, v1);
                        if l1 == 0.0 {
                            continue;
                        }
                        for v2 in 0..v {
                            table[(head * v + v1) * v + v2] += p * l1 * model.likelihood(x2, j, v2);
                        }
                    }
                }
            }
        }
    }
    let joint = JointPMF::from_weights(
        vec![
            ("target".into(), n * n),
            ("x1".into(), n),
            ("x2".into(), n),
            ("r1".into(), v),
            ("r2".into(), v),
        ],
        table,
    )?;
    joint.mutual_information_between(&[0], &[1, 2, 3, 4])
}

/// `I_t(A*_k; f^k(A_k), f^{k-1}(A_{k-1}), R(.), R(.))`.
fn level_target_information(
    model: &PosteriorModel<'_>,
    chain: &QuantizationChain,
    family: &SamplingFunctionFamily,
    k: i32,
) -> Result<f64> {
    let n = model.n_actions();
    let p_hat = model.optimal_law();
    let mut plan = vec![vec![0.0; n]; n];
    for (center, members) in chain.cells(k)? {
        let mass: f64 = members.iter().map(|&a| p_hat[a]).sum();
        if mass == 0.0 {
            continue;
        }
        let parent = chain.quantize(center, k - 1)?;
        for (x1, p1) in family.law(k, center)? {
            for (x2, p2) in family.law(k - 1, parent)? {
                plan[x1][x2] += mass * p1 * p2;
            }
        }
    }
    let table = model.pair_info_table(&model.quantized_labels(chain, Some(k))?);
    Ok(model.plan_info(&table, &plan))
}

/// Chain-link information ratio at level `k`, against the bound
/// `2 (6 alpha^-k)^2 d` with `d` the action dimension.
pub fn chain_link_ratio(
    model: &PosteriorModel<'_>,
    chain: &QuantizationChain,
    family: &SamplingFunctionFamily,
    k: i32,
) -> Result<ChainLinkReport> {
    check_level(family, k)?;
    let link_term = regret_difference(model, chain, family, k)? - regret_difference(model, chain, family, k - 1)?;
    let numerator = link_term * link_term;
    let denominator_nats = pair_target_information(model, chain, family, k)?;
    let denominator_alt_nats = level_target_information(model, chain, family, k)?;
    let d = model.spec().actions().dim();
    Ok(ChainLinkReport {
        k,
        numerator,
        denominator_nats,
        gamma: ratio(numerator, denominator_nats),
        bound: gamma_bar_from_radius(6.0 * chain.scale(k), d),
        link_term,
        denominator_alt_nats,
        gamma_alt: ratio(numerator, denominator_alt_nats),
    })
}

/// Reports for every `k0 < k <= k_max`.
pub fn chain_link_reports(
    model: &PosteriorModel<'_>,
    chain: &QuantizationChain,
    family: &SamplingFunctionFamily,
) -> Result<Vec<ChainLinkReport>> {
    ((family.k0 + 1)..=family.k_max)
        .map(|k| chain_link_ratio(model, chain, family, k))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Telescoping {
    /// `(k, D_k - D_{k-1})` for `k > k0`.
    pub link_terms: Vec<(i32, f64)>,
    pub sum: f64,
    /// `E_t[R(A*) - R(A)]`.
    pub regret: f64,
}

impl Telescoping {
    pub fn gap(&self) -> f64 {
        (self.sum - self.regret).abs()
    }
}

/// Sum of link terms against the one-step regret. The finest level must be
/// all singletons for the two to agree.
pub fn telescoping(
    model: &PosteriorModel<'_>,
    chain: &QuantizationChain,
    family: &SamplingFunctionFamily,
) -> Result<Telescoping> {
    let diffs = (family.k0..=family.k_max)
        .map(|k| regret_difference(model, chain, family, k))
        .collect::<Result<Vec<_>>>()?;
    let link_terms: Vec<(i32, f64)> = diffs
        .windows(2)
        .enumerate()
        .map(|(i, w)| (family.k0 + 1 + i as i32, w[1] - w[0]))
        .collect();
    Ok(Telescoping {
        sum: link_terms.iter().map(|t| t.1).sum(),
        link_terms,
        regret: model.expected_regret(),
    })
}
