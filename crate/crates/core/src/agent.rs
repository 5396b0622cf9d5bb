//! Batched Thompson sampling.
//!
//! With batch size `m` the posterior only sees observations in completed
//! batches: rounds `t` with `t mod m == 0` commit the batch. `m = 1` is
//! vanilla Thompson sampling, `m = 2` is the two-step variant.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{ActionSet, FiniteBanditSpec, History, LinearGaussianSpec, Prior};
use crate::error::{Error, Result};
use crate::inference::{DiscretePosterior, GaussianPosterior};

/// An environment together with the posterior family the agent keeps for it.
pub trait BanditModel: Sync {
    type Param: Clone + Send;
    type Action: Clone + Send + PartialEq + std::fmt::Debug;
    type Posterior: Clone + Send;

    fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Param;
    fn initial_posterior(&self) -> Result<Self::Posterior>;
    fn sample_posterior<R: Rng + ?Sized>(&self, post: &Self::Posterior, rng: &mut R) -> Result<Self::Param>;
    fn update(&self, post: &Self::Posterior, action: &Self::Action, reward: f64) -> Result<Self::Posterior>;
    fn optimal_action(&self, param: &Self::Param) -> Self::Action;
    fn expected_reward(&self, action: &Self::Action, param: &Self::Param) -> f64;
    fn draw_reward<R: Rng + ?Sized>(&self, action: &Self::Action, param: &Self::Param, rng: &mut R) -> f64;
    /// Coordinates of an action in the metric action space.
    fn action_point(&self, action: &Self::Action) -> Vec<f64>;
}

impl BanditModel for LinearGaussianSpec {
    type Param = Vec<f64>;
    type Action = Vec<f64>;
    type Posterior = GaussianPosterior;

    fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.sample_parameter(rng)
    }

    fn initial_posterior(&self) -> Result<GaussianPosterior> {
        match self.prior {
            Prior::StandardGaussian => Ok(GaussianPosterior::standard(self.d, self.noise_sigma)),
            Prior::UniformSphere => Err(Error::Unsupported(
                "the sphere prior has no conjugate posterior; use the Gaussian prior for simulation".into(),
            )),
        }
    }

    fn sample_posterior<R: Rng + ?Sized>(&self, post: &GaussianPosterior, rng: &mut R) -> Result<Vec<f64>> {
        post.sample(rng)
    }

    fn update(&self, post: &GaussianPosterior, action: &Vec<f64>, reward: f64) -> Result<GaussianPosterior> {
        post.update(action, reward)
    }

    fn optimal_action(&self, param: &Vec<f64>) -> Vec<f64> {
        match &self.action_set {
            ActionSet::UnitBall => {
                let norm = param.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 {
                    vec![0.0; self.d]
                } else {
                    param.iter().map(|x| x / norm).collect()
                }
            }
            ActionSet::Finite { points } => {
                let mut best = 0;
                let mut best_v = f64::NEG_INFINITY;
                for (i, p) in points.points().iter().enumerate() {
                    let v: f64 = p.iter().zip(param).map(|(a, b)| a * b).sum();
                    if v > best_v {
                        best = i;
                        best_v = v;
                    }
                }
                points.point(best).to_vec()
            }
        }
    }

    fn expected_reward(&self, action: &Vec<f64>, param: &Vec<f64>) -> f64 {
        action.iter().zip(param).map(|(a, b)| a * b).sum()
    }

    fn draw_reward<R: Rng + ?Sized>(&self, action: &Vec<f64>, param: &Vec<f64>, rng: &mut R) -> f64 {
        let mean = <Self as BanditModel>::expected_reward(self, action, param);
        if self.noise_sigma == 0.0 {
            mean
        } else {
            mean + self.noise_sigma * rng.sample::<f64, _>(rand_distr::StandardNormal)
        }
    }

    fn action_point(&self, action: &Vec<f64>) -> Vec<f64> {
        action.clone()
    }
}

impl BanditModel for FiniteBanditSpec {
    type Param = usize;
    type Action = usize;
    type Posterior = DiscretePosterior;

    fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sample_parameter(rng)
    }

    fn initial_posterior(&self) -> Result<DiscretePosterior> {
        DiscretePosterior::new(self.prior_weights())
    }

    fn sample_posterior<R: Rng + ?Sized>(&self, post: &DiscretePosterior, rng: &mut R) -> Result<usize> {
        Ok(post.sample(rng))
    }

    fn update(&self, post: &DiscretePosterior, action: &usize, reward: f64) -> Result<DiscretePosterior> {
        let lik: Vec<f64> = (0..self.n_params())
            .map(|j| self.likelihood(*action, reward, j))
            .collect();
        post.update(&lik)
    }

    fn optimal_action(&self, param: &usize) -> usize {
        FiniteBanditSpec::optimal_action(self, *param).expect("parameter index comes from this spec")
    }

    fn expected_reward(&self, action: &usize, param: &usize) -> f64 {
        self.pmf(*action, *param).mean()
    }

    fn draw_reward<R: Rng + ?Sized>(&self, action: &usize, param: &usize, rng: &mut R) -> f64 {
        self.pmf(*action, *param).sample(rng)
    }

    fn action_point(&self, action: &usize) -> Vec<f64> {
        self.actions().point(*action).to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            batch_size: 2,
            seed: 0,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self, horizon: usize) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::input("batch size must be at least 1"));
        }
        if horizon == 0 {
            return Err(Error::input("horizon T must be at least 1"));
        }
        if !horizon.is_multiple_of(self.batch_size) {
            return Err(Error::input(format!(
                "T must be a multiple of batch size (T = {horizon}, m = {})",
                self.batch_size
            )));
        }
        Ok(())
    }
}

/// What happened in one episode.
#[derive(Debug, Clone)]
pub struct Episode<A> {
    pub history: History<A>,
    /// Expected regret `E[R(A*) | theta] - E[R(A_t) | theta]` per round.
    pub regret: Vec<f64>,
    /// Number of observations the posterior had seen when round `t` sampled.
    pub posterior_len: Vec<usize>,
}

/// Runs batched Thompson sampling for `horizon` rounds against `theta`.
pub fn run_episode<M: BanditModel, R: Rng + ?Sized>(
    model: &M,
    config: &AgentConfig,
    horizon: usize,
    theta: &M::Param,
    rng: &mut R,
) -> Result<Episode<M::Action>> {
    config.validate(horizon)?;
    let best = model.optimal_action(theta);
    let best_value = model.expected_reward(&best, theta);
    let mut posterior = model.initial_posterior()?;
    let mut history = History::new(config.batch_size)?;
    let mut regret = Vec::with_capacity(horizon);
    let mut posterior_len = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        posterior_len.push(history.committed_len());
        let sampled = model.sample_posterior(&posterior, rng)?;
        let action = model.optimal_action(&sampled);
        let reward = model.draw_reward(&action, theta, rng);
        regret.push(best_value - model.expected_reward(&action, theta));
        if let Some(batch) = history.push(action, reward) {
            for (a, r) in batch {
                posterior = model.update(&posterior, a, *r)?;
            }
        }
    }
    Ok(Episode {
        history,
        regret,
        posterior_len,
    })
}
