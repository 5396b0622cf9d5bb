//! Small finite bandits for exact enumeration.

use rand::Rng;

use crate::agent::{run_episode, AgentConfig};
use crate::env::{FiniteBanditSpec, History, Parameter, RewardPmf};
use crate::error::{Error, Result};
use crate::nets::{build_quantization_chain, finest_singleton_level, K0Rule, PointSet, QuantizationChain};

/// Eight actions on the unit circle, six parameters of norm 0.9 and rewards
/// in `{-1, +1}` with mean `<a, theta>`.
pub fn circle_spec() -> Result<FiniteBanditSpec> {
    let actions = PointSet::circle(8, 0.0)?;
    let params: Vec<Parameter> = (0..6)
        .map(|j| {
            let angle = std::f64::consts::TAU * j as f64 / 6.0 + 0.3;
            Parameter {
                theta: vec![0.9 * angle.cos(), 0.9 * angle.sin()],
                weight: 1.0 / 6.0,
            }
        })
        .collect();
    let pmfs = actions
        .points()
        .iter()
        .map(|a| {
            params
                .iter()
                .map(|p| {
                    let mean: f64 = a.iter().zip(&p.theta).map(|(x, y)| x * y).sum();
                    let up = 0.5 * (1.0 + mean);
                    RewardPmf::new(vec![-1.0, 1.0], vec![1.0 - up, up])
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    FiniteBanditSpec::new(params, actions, pmfs)
}

/// Random spec with `2..=max_actions` planar actions in the unit disk (pairwise
/// at least 0.05 apart), `2..=max_params` parameters and a shared reward
/// support of `2..=max_support` values in `[0, 1]`.
pub fn random_finite_spec<R: Rng + ?Sized>(
    rng: &mut R,
    max_actions: usize,
    max_params: usize,
    max_support: usize,
) -> Result<FiniteBanditSpec> {
    if max_actions < 2 || max_params < 1 || max_support < 2 {
        return Err(Error::input("need at least 2 actions, 1 parameter and 2 reward values"));
    }
    let n_a = rng.random_range(2..=max_actions);
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n_a);
    while points.len() < n_a {
        let p = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let norm: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1.0 && points.iter().all(|q| crate::nets::euclidean(q, &p) >= 0.05) {
            points.push(p);
        }
    }
    let n_p = rng.random_range(1..=max_params);
    let raw: Vec<f64> = (0..n_p).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let params = raw
        .iter()
        .enumerate()
        .map(|(j, w)| Parameter {
            theta: vec![j as f64],
            weight: w / total,
        })
        .collect();
    let n_v = rng.random_range(2..=max_support);
    let mut support: Vec<f64> = Vec::with_capacity(n_v);
    while support.len() < n_v {
        let r = (rng.random_range(0.0..1.0f64) * 1000.0).round() / 1000.0;
        if !support.contains(&r) {
            support.push(r);
        }
    }
    support.sort_by(f64::total_cmp);
    let pmfs = (0..n_a)
        .map(|_| {
            (0..n_p)
                .map(|_| {
                    let raw: Vec<f64> = (0..n_v).map(|_| rng.random_range(0.02..1.0)).collect();
                    let s: f64 = raw.iter().sum();
                    RewardPmf::new(support.clone(), raw.iter().map(|x| x / s).collect())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    FiniteBanditSpec::new(params, PointSet::new(points)?, pmfs)
}

/// History of a batch-2 Thompson rollout of `steps` rounds (even) against a
/// parameter drawn from the prior.
pub fn rollout_history<R: Rng + ?Sized>(spec: &FiniteBanditSpec, steps: usize, rng: &mut R) -> Result<History<usize>> {
    let config = AgentConfig {
        batch_size: 2,
        seed: 0,
    };
    if steps == 0 {
        return History::new(2);
    }
    let theta = spec.sample_parameter(rng);
    Ok(run_episode(spec, &config, steps, &theta, rng)?.history)
}

/// Chain over the spec's actions with `alpha` and the finest level at which
/// every cell is a singleton.
pub fn singleton_chain(spec: &FiniteBanditSpec, alpha: f64) -> Result<QuantizationChain> {
    let k_max = finest_singleton_level(spec.actions(), alpha, K0Rule::Diameter)?;
    build_quantization_chain(spec.actions(), alpha, k_max, K0Rule::Diameter)
}
