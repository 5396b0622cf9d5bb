use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{FiniteBanditSpec, History};
use crate::error::{Error, Result};
use crate::nets::QuantizationChain;

use super::lemma::{two_point_reduction, TwoPoint};
use super::model::PosteriorModel;

/// Slack allowed on the constructed mutual-information inequalities.
pub const INEQUALITY_TOL: f64 = 1e-9;

/// Randomized representative of one level-`k` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRule {
    pub center: usize,
    /// Posterior probability that the sampled action falls in the cell.
    pub mass: f64,
    pub a1: usize,
    pub a2: usize,
    /// Probability of `a1`.
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelFunction {
    pub k: i32,
    pub cells: Vec<CellRule>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub k: i32,
    pub lhs: f64,
    pub rhs: f64,
}

impl InequalityCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + INEQUALITY_TOL
    }
}

/// Everything verified while building a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionChecks {
    /// Regret difference at the root level; exactly zero.
    pub root_difference: f64,
    /// `I(A*_k; R(f^k(A_k)), R(f^{k-1}(A_{k-1}))) <= I(A*_k; R(A), R(f^{k-1}(A_{k-1})))`, `k > k0`.
    pub first: Vec<InequalityCheck>,
    /// `I(A*_{k+1}; R(f^k(A_k)), R(A')) <= I(A*_{k+1}; R(A), R(A'))` with `A'` an
    /// independent copy, `k >= k0`; `A*_{k_max + 1}` is `A*`.
    pub second: Vec<InequalityCheck>,
    /// The second inequality with `f^k` evaluated at the quantization of the
    /// same draw `A` that is pulled alongside it. Reported, not enforced.
    pub second_same_draw: Vec<InequalityCheck>,
    /// Largest `rho(f^k(c), c) / alpha^-k` over levels and centers.
    pub max_center_ratio: f64,
    /// Largest `rho(f^k(pi_k(a)), a) / alpha^-k` over levels and actions.
    pub max_action_ratio: f64,
}

/// Random functions `f^k` for `k = k0..=k_max` on one posterior.
///
/// `f^{k0}` maps the root to an action drawn from the posterior law of `A*`;
/// for `k > k0` each cell maps to `a1` with probability `q`, else `a2`.
/// Distinct cells and levels draw independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingFunctionFamily {
    pub alpha: f64,
    pub k0: i32,
    pub k_max: i32,
    pub root: usize,
    pub root_law: Vec<f64>,
    pub levels: Vec<LevelFunction>,
    pub checks: ConstructionChecks,
}

impl SamplingFunctionFamily {
    fn cell_rule(&self, k: i32, center: usize) -> Result<&CellRule> {
        let level = self
            .levels
            .get((k - self.k0 - 1) as usize)
            .filter(|l| l.k == k)
            .ok_or_else(|| Error::input(format!("no sampling function at level {k}")))?;
        level
            .cells
            .iter()
            .find(|c| c.center == center)
            .ok_or_else(|| Error::input(format!("{center} is not a level {k} center")))
    }

    /// Law of `f^k(center)` as `(action, probability)` pairs.
    pub fn law(&self, k: i32, center: usize) -> Result<Vec<(usize, f64)>> {
        if k == self.k0 {
            if center != self.root {
                return Err(Error::input(format!("{center} is not the root")));
            }
            return Ok(self
                .root_law
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(a, &p)| (a, p))
                .collect());
        }
        let c = self.cell_rule(k, center)?;
        Ok(if c.a1 == c.a2 || c.q == 1.0 {
            vec![(c.a1, 1.0)]
        } else if c.q == 0.0 {
            vec![(c.a2, 1.0)]
        } else {
            vec![(c.a1, c.q), (c.a2, 1.0 - c.q)]
        })
    }

    fn dense_law(&self, k: i32, center: usize) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.root_law.len()];
        for (a, p) in self.law(k, center)? {
            v[a] += p;
        }
        Ok(v)
    }

    /// Draws `f^k(center)`.
    pub fn sample<R: Rng + ?Sized>(&self, k: i32, center: usize, rng: &mut R) -> Result<usize> {
        let law = self.law(k, center)?;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for &(a, p) in &law {
            acc += p;
            if u < acc {
                return Ok(a);
            }
        }
        Ok(law.last().expect("laws are nonempty").0)
    }

    /// Outcomes `(f^k(c1), f^k(c2), prob)` of one draw of the random function;
    /// equal arguments give equal outputs.
    pub fn coupled(&self, k: i32, c1: usize, c2: usize) -> Result<Vec<(usize, usize, f64)>> {
        let l1 = self.law(k, c1)?;
        if c1 == c2 {
            return Ok(l1.into_iter().map(|(a, p)| (a, a, p)).collect());
        }
        let l2 = self.law(k, c2)?;
        Ok(l1
            .iter()
            .flat_map(|&(a, p)| l2.iter().map(move |&(b, r)| (a, b, p * r)))
            .collect())
    }
}

fn check_chain(model: &PosteriorModel<'_>, chain: &QuantizationChain) -> Result<()> {
    if chain.points.points() != model.spec().actions().points() {
        return Err(Error::input("the chain must be built over the spec's action points"));
    }
    Ok(())
}

/// `E_t[R(f^k(A*_k)) - R(f^k(A_k))]`, the sampled action `A` coming from an
/// independent posterior draw.
pub fn regret_difference(
    model: &PosteriorModel<'_>,
    chain: &QuantizationChain,
    family: &SamplingFunctionFamily,
    k: i32,
) -> Result<f64> {
    let labels = model.quantized_labels(chain, Some(k))?;
    let w = model.weights();
    let mut total = 0.0;
    for (j, &wj) in w.iter().enumerate() {
        for (jh, &wh) in w.iter().enumerate() {
            if labels[j] == labels[jh] {
                // same argument, same output
                continue;
            }
            let star: f64 = family.law(k, labels[j])?.iter().map(|&(a, p)| p * model.mean(a, j)).sum();
            let hat: f64 = family.law(k, labels[jh])?.iter().map(|&(a, p)| p * model.mean(a, j)).sum();
            total += wj * wh * (star - hat);
        }
    }
    Ok(total)
}

fn outer(x: &[f64], y: &[f64]) -> Vec<Vec<f64>> {
    x.iter().map(|&a| y.iter().map(|&b| a * b).collect()).collect()
}

/// Builds `f^{k0}, .., f^{k_max}` on the posterior of `model`, the inductive
/// step applying the two-point reduction in every cell, and verifies the
/// resulting invariants.
pub fn build_sampling_functions_for(
    model: &PosteriorModel<'_>,
    chain: &QuantizationChain,
) -> Result<SamplingFunctionFamily> {
    check_chain(model, chain)?;
    let n = model.n_actions();
    let p_hat = model.optimal_law();
    let k0 = chain.k0;
    let k_max = chain.k_max();
    let mut family = SamplingFunctionFamily {
        alpha: chain.alpha,
        k0,
        k_max,
        root: chain.root(),
        root_law: p_hat.clone(),
        levels: Vec::new(),
        checks: ConstructionChecks {
            root_difference: 0.0,
            first: Vec::new(),
            second: Vec::new(),
            second_same_draw: Vec::new(),
            max_center_ratio: 0.0,
            max_action_ratio: 0.0,
        },
    };

    let target_table = |k: i32| -> Result<Vec<Vec<f64>>> {
        let level = if k > k_max { None } else { Some(k) };
        Ok(model.pair_info_table(&model.quantized_labels(chain, level)?))
    };

    let mut table_k = target_table(k0 + 1)?;
    for k in (k0 + 1)..=k_max {
        let table_next = target_table(k + 1)?;
        let mut cells = Vec::new();
        for (center, members) in chain.cells(k)? {
            let mass: f64 = members.iter().map(|&a| p_hat[a]).sum();
            if mass == 0.0 {
                cells.push(CellRule { center, mass, a1: center, a2: center, q: 1.0 });
                continue;
            }
            let parent_law = family.dense_law(k - 1, chain.quantize(center, k - 1)?)?;
            let q: Vec<f64> = members.iter().map(|&a| p_hat[a] / mass).collect();
            let f: Vec<f64> = members
                .iter()
                .map(|&a| (0..n).map(|b| parent_law[b] * table_k[a][b]).sum())
                .collect();
            let g: Vec<f64> = members
                .iter()
                .map(|&a| (0..n).map(|b| p_hat[b] * table_next[a][b]).sum())
                .collect();
            let TwoPoint { a1, a2, q } = two_point_reduction(&q, &f, &g)?;
            cells.push(CellRule { center, mass, a1: members[a1], a2: members[a2], q });
        }
        family.levels.push(LevelFunction { k, cells });
        table_k = table_next;
    }

    verify(model, chain, &mut family)?;
    Ok(family)
}

/// [`build_sampling_functions_for`] on the posterior after `history`.
pub fn build_sampling_functions(
    spec: &FiniteBanditSpec,
    chain: &QuantizationChain,
    history: &History<usize>,
) -> Result<SamplingFunctionFamily> {
    let model = PosteriorModel::new(spec, history)?;
    build_sampling_functions_for(&model, chain)
}

/// Law of `f^k(A_k)` where `A` is the sampled action.
fn sampled_law(family: &SamplingFunctionFamily, chain: &QuantizationChain, p_hat: &[f64], k: i32) -> Result<Vec<f64>> {
    let mut law = vec![0.0; p_hat.len()];
    for (center, members) in chain.cells(k)? {
        let mass: f64 = members.iter().map(|&a| p_hat[a]).sum();
        for (a, p) in family.law(k, center)? {
            law[a] += mass * p;
        }
    }
    Ok(law)
}

fn verify(model: &PosteriorModel<'_>, chain: &QuantizationChain, family: &mut SamplingFunctionFamily) -> Result<()> {
    let n = model.n_actions();
    let p_hat = model.optimal_law();
    let (k0, k_max) = (family.k0, family.k_max);

    let mut center_ratio: f64 = 0.0;
    let mut action_ratio: f64 = 0.0;
    for k in k0..=k_max {
        let scale = chain.scale(k);
        for (center, members) in chain.cells(k)? {
            for (a, _) in family.law(k, center)? {
                let d = chain.points.distance(a, center);
                center_ratio = center_ratio.max(d / scale);
                if d > scale {
                    return Err(Error::invariant(format!(
                        "level {k}: representative {a} is {d} from center {center}"
                    )));
                }
                for &m in &members {
                    action_ratio = action_ratio.max(chain.points.distance(a, m) / scale);
                }
            }
        }
    }
    if action_ratio > 2.0 {
        return Err(Error::invariant(format!("representative drifted {action_ratio} scales from an action")));
    }
    family.checks.max_center_ratio = center_ratio;
    family.checks.max_action_ratio = action_ratio;

    let root_difference = regret_difference(model, chain, family, k0)?;
    if root_difference != 0.0 {
        return Err(Error::invariant(format!("root regret difference is {root_difference}")));
    }
    family.checks.root_difference = root_difference;

    let independent = outer(&p_hat, &p_hat);
    for k in k0..=k_max {
        let next = if k < k_max { Some(k + 1) } else { None };
        let table_next = model.pair_info_table(&model.quantized_labels(chain, next)?);
        let f_k = sampled_law(family, chain, &p_hat, k)?;
        let rhs = model.plan_info(&table_next, &independent);
        let lhs = model.plan_info(&table_next, &outer(&f_k, &p_hat));
        family.checks.second.push(InequalityCheck { k, lhs, rhs });

        let mut same = vec![vec![0.0; n]; n];
        for x1 in 0..n {
            if p_hat[x1] == 0.0 {
                continue;
            }
            for (x2, p) in family.law(k, chain.quantize(x1, k)?)? {
                same[x1][x2] += p_hat[x1] * p;
            }
        }
        let lhs_same = model.plan_info(&table_next, &same);
        family.checks.second_same_draw.push(InequalityCheck { k, lhs: lhs_same, rhs });

        if k > k0 {
            let table_k = model.pair_info_table(&model.quantized_labels(chain, Some(k))?);
            let mut reduced = vec![vec![0.0; n]; n];
            for (center, members) in chain.cells(k)? {
                let mass: f64 = members.iter().map(|&a| p_hat[a]).sum();
                if mass == 0.0 {
                    continue;
                }
                let parent = chain.quantize(center, k - 1)?;
                for (x1, p1) in family.law(k, center)? {
                    for (x2, p2) in family.law(k - 1, parent)? {
                        reduced[x1][x2] += mass * p1 * p2;
                    }
                }
            }
            let mut mixed = vec![vec![0.0; n]; n];
            for x1 in 0..n {
                if p_hat[x1] == 0.0 {
                    continue;
                }
                for (x2, p) in family.law(k - 1, chain.quantize(x1, k - 1)?)? {
                    mixed[x1][x2] += p_hat[x1] * p;
                }
            }
            family.checks.first.push(InequalityCheck {
                k,
                lhs: model.plan_info(&table_k, &reduced),
                rhs: model.plan_info(&table_k, &mixed),
            });
        }
    }
    if let Some(c) = family.checks.first.iter().chain(&family.checks.second).find(|c| !c.holds()) {
        return Err(Error::invariant(format!(
            "level {}: constructed information {} exceeds {}",
            c.k, c.lhs, c.rhs
        )));
    }
    Ok(())
}
