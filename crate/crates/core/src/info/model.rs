use crate::env::{FiniteBanditSpec, History};
use crate::error::{Error, Result};
use crate::inference::DiscretePosterior;
use crate::nets::QuantizationChain;

use super::pmf::JointPMF;

/// Largest joint table any enumeration here may build.
pub const MAX_CONFIGURATIONS: usize = 1_000_000;

/// What a mutual information is about.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// The environment parameter itself.
    Parameter,
    /// The optimal action `A*`.
    OptimalAction,
    /// Any function of the parameter, given as one label per parameter.
    Labels(Vec<usize>),
}

/// Exact posterior over a finite bandit given a frozen history.
///
/// Only the committed part of the history conditions the posterior. Rewards
/// are indexed in the union of all pmf supports.
#[derive(Debug, Clone)]
pub struct PosteriorModel<'a> {
    spec: &'a FiniteBanditSpec,
    weights: Vec<f64>,
    optimal: Vec<usize>,
    values: Vec<f64>,
    /// `lik[a][j][v]`.
    lik: Vec<Vec<Vec<f64>>>,
    /// `means[a][j]`.
    means: Vec<Vec<f64>>,
}

impl<'a> PosteriorModel<'a> {
    pub fn new(spec: &'a FiniteBanditSpec, history: &History<usize>) -> Result<Self> {
        let mut post = DiscretePosterior::new(spec.prior_weights())?;
        for &(a, r) in history.committed() {
            if a >= spec.n_actions() {
                return Err(Error::input(format!("history action {a} out of range")));
            }
            let lik: Vec<f64> = (0..spec.n_params()).map(|j| spec.likelihood(a, r, j)).collect();
            post = post.update(&lik)?;
        }
        Self::from_weights(spec, post.weights().to_vec())
    }

    pub fn from_weights(spec: &'a FiniteBanditSpec, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != spec.n_params() {
            return Err(Error::input("one posterior weight per parameter is required"));
        }
        let optimal = (0..spec.n_params())
            .map(|j| spec.optimal_action(j))
            .collect::<Result<Vec<_>>>()?;
        let values = spec.reward_values();
        let lik = (0..spec.n_actions())
            .map(|a| {
                (0..spec.n_params())
                    .map(|j| values.iter().map(|&r| spec.likelihood(a, r, j)).collect())
                    .collect()
            })
            .collect();
        let means = (0..spec.n_actions())
            .map(|a| (0..spec.n_params()).map(|j| spec.pmf(a, j).mean()).collect())
            .collect();
        Ok(PosteriorModel {
            spec,
            weights,
            optimal,
            values,
            lik,
            means,
        })
    }

    pub fn spec(&self) -> &FiniteBanditSpec {
        self.spec
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_actions(&self) -> usize {
        self.spec.n_actions()
    }

    pub fn n_params(&self) -> usize {
        self.spec.n_params()
    }

    pub fn n_values(&self) -> usize {
        self.values.len()
    }

    /// `psi(j)`, the optimal action of parameter `j`.
    pub fn optimal(&self) -> &[usize] {
        &self.optimal
    }

    pub fn mean(&self, a: usize, j: usize) -> f64 {
        self.means[a][j]
    }

    pub fn likelihood(&self, a: usize, j: usize, v: usize) -> f64 {
        self.lik[a][j][v]
    }

    /// Posterior law of `A*`, which is also the law of the sampled action.
    pub fn optimal_law(&self) -> Vec<f64> {
        let mut law = vec![0.0; self.n_actions()];
        for (j, &w) in self.weights.iter().enumerate() {
            law[self.optimal[j]] += w;
        }
        law
    }

    /// `E_t[R(A*)] - E_t[R(A_hat)]` with `A_hat` from an independent posterior draw.
    pub fn expected_regret(&self) -> f64 {
        let mut total = 0.0;
        for (j, &w) in self.weights.iter().enumerate() {
            for (jh, &wh) in self.weights.iter().enumerate() {
                total += w * wh * (self.means[self.optimal[j]][j] - self.means[self.optimal[jh]][j]);
            }
        }
        total
    }

    /// Labels `pi_k(A*)` per parameter; `None` as level means `A*` itself.
    pub fn quantized_labels(&self, chain: &QuantizationChain, k: Option<i32>) -> Result<Vec<usize>> {
        match k {
            None => Ok(self.optimal.clone()),
            Some(k) => self.optimal.iter().map(|&a| chain.quantize(a, k)).collect(),
        }
    }

    fn labels_of(&self, target: &Target) -> Result<(Vec<usize>, usize)> {
        let labels = match target {
            Target::Parameter => (0..self.n_params()).collect(),
            Target::OptimalAction => self.optimal.clone(),
            Target::Labels(l) => {
                if l.len() != self.n_params() {
                    return Err(Error::input("one label per parameter is required"));
                }
                l.clone()
            }
        };
        let n = labels.iter().max().map_or(0, |m| m + 1);
        Ok((labels, n))
    }

    /// `I_t(T; R(a), R(b))` for two separate pulls of the fixed actions `a`, `b`.
    pub fn pair_info(&self, labels: &[usize], a: usize, b: usize) -> f64 {
        let v = self.n_values();
        let n_labels = labels.iter().max().map_or(0, |m| m + 1);
        let mut ptv = vec![0.0; n_labels * v * v];
        let mut pt = vec![0.0; n_labels];
        let mut pv = vec![0.0; v * v];
        for (j, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let t = labels[j];
            pt[t] += w;
            for v1 in 0..v {
                let p1 = w * self.lik[a][j][v1];
                if p1 == 0.0 {
                    continue;
                }
                for v2 in 0..v {
                    let p = p1 * self.lik[b][j][v2];
                    ptv[(t * v + v1) * v + v2] += p;
                    pv[v1 * v + v2] += p;
                }
            }
        }
        let mut total = 0.0;
        for t in 0..n_labels {
            for vv in 0..v * v {
                let p = ptv[t * v * v + vv];
                if p > 0.0 {
                    total += p * (p / (pt[t] * pv[vv])).ln();
                }
            }
        }
        total.max(0.0)
    }

    /// `[a][b] -> I_t(T; R(a), R(b))`.
    pub fn pair_info_table(&self, labels: &[usize]) -> Vec<Vec<f64>> {
        let n = self.n_actions();
        (0..n)
            .map(|a| (0..n).map(|b| self.pair_info(labels, a, b)).collect())
            .collect()
    }

    /// Information about `labels` from a random action pair drawn from `plan`
    /// (`plan[x1][x2]`, independent of the parameter) whose actions and
    /// rewards are both observed: `sum plan(x1, x2) I_t(T; R(x1), R(x2))`.
    pub fn plan_info(&self, table: &[Vec<f64>], plan: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        for (x1, row) in plan.iter().enumerate() {
            for (x2, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    total += p * table[x1][x2];
                }
            }
        }
        total
    }

    /// The full joint over `(target, x1, x2, r1, r2)` for an action plan.
    #[allow(clippy::needless_range_loop)]
    pub fn plan_joint(&self, labels: &[usize], plan: &[Vec<f64>]) -> Result<JointPMF> {
        let n = self.n_actions();
        let v = self.n_values();
        let n_labels = labels.iter().max().map_or(0, |m| m + 1);
        let size = n_labels * n * n * v * v;
        if size > MAX_CONFIGURATIONS {
            return Err(Error::input(format!("joint of {size} configurations is too large")));
        }
        let mut w = vec![0.0; size];
        for (j, &wj) in self.weights.iter().enumerate() {
            let t = labels[j];
            for x1 in 0..n {
                for x2 in 0..n {
                    let p = wj * plan[x1][x2];
                    if p == 0.0 {
                        continue;
                    }
                    for v1 in 0..v {
                        for v2 in 0..v {
                            let idx = (((t * n + x1) * n + x2) * v + v1) * v + v2;
                            w[idx] += p * self.lik[x1][j][v1] * self.lik[x2][j][v2];
                        }
                    }
                }
            }
        }
        JointPMF::from_weights(
            vec![
                ("target".into(), n_labels),
                ("x1".into(), n),
                ("x2".into(), n),
                ("r1".into(), v),
                ("r2".into(), v),
            ],
            w,
        )
    }

    /// Joint over `(target, R(observe_0), .., R(given_0), ..)` with every listed
    /// action pulled once.
    pub fn fixed_joint(&self, target: &Target, observe: &[usize], given: &[usize]) -> Result<JointPMF> {
        let (labels, n_labels) = self.labels_of(target)?;
        let pulls: Vec<usize> = observe.iter().chain(given).copied().collect();
        if let Some(&a) = pulls.iter().find(|&&a| a >= self.n_actions()) {
            return Err(Error::input(format!("action {a} out of range")));
        }
        let v = self.n_values();
        let size = pulls
            .iter()
            .try_fold(n_labels, |acc, _| acc.checked_mul(v))
            .filter(|&s| s <= MAX_CONFIGURATIONS)
            .ok_or_else(|| Error::input("joint too large for exact enumeration"))?;
        let block = size / n_labels;
        let mut w = vec![0.0; size];
        for (j, &wj) in self.weights.iter().enumerate() {
            if wj == 0.0 {
                continue;
            }
            let base = labels[j] * block;
            for r in 0..block {
                let mut p = wj;
                let mut rest = r;
                for &a in pulls.iter().rev() {
                    p *= self.lik[a][j][rest % v];
                    rest /= v;
                }
                w[base + r] += p;
            }
        }
        let mut axes = vec![("target".to_string(), n_labels)];
        axes.extend(observe.iter().enumerate().map(|(i, _)| (format!("r{i}"), v)));
        axes.extend(given.iter().enumerate().map(|(i, _)| (format!("g{i}"), v)));
        JointPMF::from_weights(axes, w)
    }
}

/// History-conditional mutual information
/// `I_t(target; R(observe..) | R(given..))` by exact enumeration.
pub fn disintegrated_cmi(
    spec: &FiniteBanditSpec,
    history: &History<usize>,
    target: &Target,
    observe: &[usize],
    given: &[usize],
) -> Result<f64> {
    if observe.is_empty() {
        return Err(Error::input("at least one observed action is required"));
    }
    let model = PosteriorModel::new(spec, history)?;
    let joint = model.fixed_joint(target, observe, given)?;
    let obs: Vec<usize> = (1..=observe.len()).collect();
    let cond: Vec<usize> = (observe.len() + 1..=observe.len() + given.len()).collect();
    joint.conditional_mutual_information(&[0], &obs, &cond)
}
