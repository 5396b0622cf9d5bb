//! Bandit environments: a prior over the parameter, an action set and a
//! reward law.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nets::PointSet;

const SIMPLEX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionSet {
    /// The closed Euclidean unit ball.
    UnitBall,
    /// A finite set of actions, e.g. a net-discretized ball.
    Finite { points: PointSet },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Prior {
    /// `N(0, I_d)`.
    #[default]
    StandardGaussian,
    /// Uniform on the unit sphere.
    UniformSphere,
}

/// `E[R(a, theta)] = <a, theta>` with additive `N(0, noise_sigma^2)` noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearGaussianSpec {
    pub d: usize,
    pub action_set: ActionSet,
    pub prior: Prior,
    pub noise_sigma: f64,
}

/// Result of maximizing the expected reward for a given parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalAction {
    pub point: Vec<f64>,
    /// Index into the action set when it is finite.
    pub index: Option<usize>,
    /// Set when the maximizer is not unique in a way the tie rule cannot
    /// resolve (ball action set with `theta = 0`); the origin is returned.
    pub degenerate: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LinearGaussianSpec {
    pub fn new(d: usize, action_set: ActionSet, prior: Prior, noise_sigma: f64) -> Result<Self> {
        let spec = LinearGaussianSpec {
            d,
            action_set,
            prior,
            noise_sigma,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Unit-ball actions, Gaussian prior.
    pub fn unit_ball(d: usize, noise_sigma: f64) -> Result<Self> {
        Self::new(d, ActionSet::UnitBall, Prior::StandardGaussian, noise_sigma)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::input(format!(
                "noise_sigma must be a finite nonnegative real, got {}",
                self.noise_sigma
            )));
        }
        if let ActionSet::Finite { points } = &self.action_set {
            if points.dim() != self.d {
                return Err(Error::input(format!(
                    "action set has dimension {}, spec has {}",
                    points.dim(),
                    self.d
                )));
            }
        }
        Ok(())
    }

    fn check_dim(&self, v: &[f64], what: &str) -> Result<()> {
        if v.len() != self.d {
            return Err(Error::input(format!(
                "{what} has {} coordinates, expected {}",
                v.len(),
                self.d
            )));
        }
        Ok(())
    }

    pub fn sample_parameter<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut theta: Vec<f64> = (0..self.d).map(|_| rng.sample(StandardNormal)).collect();
        if self.prior == Prior::UniformSphere {
            let norm = dot(&theta, &theta).sqrt();
            for x in &mut theta {
                *x /= norm;
            }
        }
        theta
    }

    pub fn expected_reward(&self, a: &[f64], theta: &[f64]) -> Result<f64> {
        self.check_dim(a, "action")?;
        self.check_dim(theta, "parameter")?;
        Ok(dot(a, theta))
    }

    pub fn draw_reward<R: Rng + ?Sized>(&self, a: &[f64], theta: &[f64], rng: &mut R) -> Result<f64> {
        let mean = self.expected_reward(a, theta)?;
        if self.noise_sigma == 0.0 {
            return Ok(mean);
        }
        let z: f64 = rng.sample(StandardNormal);
        Ok(mean + self.noise_sigma * z)
    }

    pub fn optimal_action(&self, theta: &[f64]) -> Result<OptimalAction> {
        self.check_dim(theta, "parameter")?;
        match &self.action_set {
            ActionSet::UnitBall => {
                let norm = dot(theta, theta).sqrt();
                if norm == 0.0 {
                    return Ok(OptimalAction {
                        point: vec![0.0; self.d],
                        index: None,
                        degenerate: true,
                    });
                }
                Ok(OptimalAction {
                    point: theta.iter().map(|x| x / norm).collect(),
                    index: None,
                    degenerate: false,
                })
            }
            ActionSet::Finite { points } => {
                let mut best = 0;
                let mut best_v = f64::NEG_INFINITY;
                for (i, p) in points.points().iter().enumerate() {
                    let v = dot(p, theta);
                    if v > best_v {
                        best = i;
                        best_v = v;
                    }
                }
                Ok(OptimalAction {
                    point: points.point(best).to_vec(),
                    index: Some(best),
                    degenerate: false,
                })
            }
        }
    }
}

/// A pmf on a finite set of real reward values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardPmf {
    pub support: Vec<f64>,
    pub probs: Vec<f64>,
}

impl RewardPmf {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let pmf = RewardPmf { support, probs };
        pmf.validate()?;
        Ok(pmf)
    }

    pub fn point_mass(value: f64) -> Self {
        RewardPmf {
            support: vec![value],
            probs: vec![1.0],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.support.is_empty() || self.support.len() != self.probs.len() {
            return Err(Error::input("pmf support and probs must be nonempty and equally long"));
        }
        if self.support.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("pmf support must be finite"));
        }
        if self.probs.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::input("pmf probabilities must be nonnegative"));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::input(format!("pmf sums to {total}, not 1")));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.probs).map(|(x, p)| x * p).sum()
    }

    /// Probability of observing exactly `r`.
    pub fn prob_of(&self, r: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .filter(|&(&x, _)| x == r)
            .map(|(_, &p)| p)
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (x, p) in self.support.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return *x;
            }
        }
        // u landed in the rounding slack above the final partial sum
        let last = self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        self.support[last]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub theta: Vec<f64>,
    pub weight: f64,
}

/// Finite parameter space with a prior on the simplex, finite actions and a
/// reward pmf for every (action, parameter) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteBanditSpec {
    parameters: Vec<Parameter>,
    actions: PointSet,
    /// `reward_pmf[action][parameter]`.
    reward_pmf: Vec<Vec<RewardPmf>>,
}

#[derive(Serialize, Deserialize)]
struct FiniteBanditJson {
    parameters: Vec<Parameter>,
    actions: PointSet,
    reward_pmf: BTreeMap<String, RewardPmf>,
}

fn parse_pair_key(key: &str) -> Result<(usize, usize)> {
    let inner = key
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::input(format!("reward_pmf key {key:?} is not of the form \"(i,j)\"")))?;
    let mut parts = inner.split(',').map(|s| s.trim().parse::<usize>());
    match (parts.next(), parts.next(), parts.next()) {
        (Some(Ok(i)), Some(Ok(j)), None) => Ok((i, j)),
        _ => Err(Error::input(format!("reward_pmf key {key:?} is not of the form \"(i,j)\""))),
    }
}

impl FiniteBanditSpec {
    pub fn new(
        parameters: Vec<Parameter>,
        actions: PointSet,
        reward_pmf: Vec<Vec<RewardPmf>>,
    ) -> Result<Self> {
        let spec = FiniteBanditSpec {
            parameters,
            actions,
            reward_pmf,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.parameters.is_empty() {
            return Err(Error::input("finite spec needs at least one parameter"));
        }
        if self.parameters.iter().any(|p| !(p.weight >= 0.0)) {
            return Err(Error::input("prior weights must be nonnegative"));
        }
        let total: f64 = self.parameters.iter().map(|p| p.weight).sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::input(format!("prior weights sum to {total}, not 1")));
        }
        if self.reward_pmf.len() != self.actions.len() {
            return Err(Error::input("reward_pmf must have one row per action"));
        }
        for (i, row) in self.reward_pmf.iter().enumerate() {
            if row.len() != self.parameters.len() {
                return Err(Error::input(format!(
                    "reward_pmf row for action {i} must cover every parameter"
                )));
            }
            for pmf in row {
                pmf.validate()?;
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: FiniteBanditJson = serde_json::from_str(s)?;
        let n_a = raw.actions.len();
        let n_p = raw.parameters.len();
        let mut table: Vec<Vec<Option<RewardPmf>>> = vec![vec![None; n_p]; n_a];
        for (key, pmf) in raw.reward_pmf {
            let (i, j) = parse_pair_key(&key)?;
            if i >= n_a || j >= n_p {
                return Err(Error::input(format!("reward_pmf key {key} out of range")));
            }
            if table[i][j].replace(pmf).is_some() {
                return Err(Error::input(format!("duplicate reward_pmf key {key}")));
            }
        }
        let mut rows = Vec::with_capacity(n_a);
        for (i, row) in table.into_iter().enumerate() {
            let row = row
                .into_iter()
                .enumerate()
                .map(|(j, p)| p.ok_or_else(|| Error::input(format!("missing reward_pmf for ({i},{j})"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        FiniteBanditSpec::new(raw.parameters, raw.actions, rows)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut map = BTreeMap::new();
        for (i, row) in self.reward_pmf.iter().enumerate() {
            for (j, pmf) in row.iter().enumerate() {
                map.insert(format!("({i},{j})"), pmf.clone());
            }
        }
        let raw = FiniteBanditJson {
            parameters: self.parameters.clone(),
            actions: self.actions.clone(),
            reward_pmf: map,
        };
        Ok(serde_json::to_string_pretty(&raw)?)
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn n_params(&self) -> usize {
        self.parameters.len()
    }

    pub fn actions(&self) -> &PointSet {
        &self.actions
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.parameters
    }

    pub fn prior_weights(&self) -> Vec<f64> {
        self.parameters.iter().map(|p| p.weight).collect()
    }

    pub fn pmf(&self, action: usize, param: usize) -> &RewardPmf {
        &self.reward_pmf[action][param]
    }

    fn check(&self, action: usize, param: usize) -> Result<()> {
        if action >= self.n_actions() {
            return Err(Error::input(format!("action {action} out of range")));
        }
        if param >= self.n_params() {
            return Err(Error::input(format!("parameter {param} out of range")));
        }
        Ok(())
    }

    pub fn sample_parameter<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (j, p) in self.parameters.iter().enumerate() {
            acc += p.weight;
            if u < acc {
                return j;
            }
        }
        self.parameters
            .iter()
            .rposition(|p| p.weight > 0.0)
            .unwrap_or(0)
    }

    pub fn expected_reward(&self, action: usize, param: usize) -> Result<f64> {
        self.check(action, param)?;
        Ok(self.reward_pmf[action][param].mean())
    }

    pub fn draw_reward<R: Rng + ?Sized>(&self, action: usize, param: usize, rng: &mut R) -> Result<f64> {
        self.check(action, param)?;
        Ok(self.reward_pmf[action][param].sample(rng))
    }

    /// Argmax of the expected reward, lowest index on ties.
    pub fn optimal_action(&self, param: usize) -> Result<usize> {
        self.check(0, param)?;
        let mut best = 0;
        let mut best_v = f64::NEG_INFINITY;
        for a in 0..self.n_actions() {
            let v = self.reward_pmf[a][param].mean();
            if v > best_v {
                best = a;
                best_v = v;
            }
        }
        Ok(best)
    }

    pub fn likelihood(&self, action: usize, reward: f64, param: usize) -> f64 {
        self.reward_pmf[action][param].prob_of(reward)
    }

    /// Every reward value any pmf can emit, sorted and deduplicated.
    pub fn reward_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .reward_pmf
            .iter()
            .flatten()
            .flat_map(|p| p.support.iter().copied())
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

/// Action/reward pairs with batched commits.
///
/// Only the first `committed_len` pairs are visible to the posterior; a batch
/// of `batch_size` pairs is committed once it is complete.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History<A> {
    pairs: Vec<(A, f64)>,
    batch_size: usize,
    committed_len: usize,
}

impl<A> History<A> {
    pub fn new(batch_size: usize) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::input("batch size must be at least 1"));
        }
        Ok(History {
            pairs: Vec::new(),
            batch_size,
            committed_len: 0,
        })
    }

    /// Records a pair; returns the newly committed batch, if one completed.
    pub fn push(&mut self, action: A, reward: f64) -> Option<&[(A, f64)]> {
        self.pairs.push((action, reward));
        if self.pairs.len().is_multiple_of(self.batch_size) {
            let start = self.committed_len;
            self.committed_len = self.pairs.len();
            Some(&self.pairs[start..])
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn committed_len(&self) -> usize {
        self.committed_len
    }

    pub fn committed(&self) -> &[(A, f64)] {
        &self.pairs[..self.committed_len]
    }

    pub fn pairs(&self) -> &[(A, f64)] {
        &self.pairs
    }
}
