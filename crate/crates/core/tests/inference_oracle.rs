use cbl_core::inference::{DiscretePosterior, GaussianPosterior};
use cbl_core::rng::seeded;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;

/// Mean and variance of the 1-D posterior by midpoint quadrature on [-6, 6].
fn grid_posterior(prior_mean: f64, prior_prec: f64, sigma: f64, obs: &[(f64, f64)]) -> (f64, f64) {
    let h = 1e-3;
    let n = (12.0 / h) as usize;
    let log_density = |x: f64| {
        let mut l = -0.5 * prior_prec * (x - prior_mean).powi(2);
        for &(a, r) in obs {
            l -= 0.5 * (r - a * x).powi(2) / (sigma * sigma);
        }
        l
    };
    let xs: Vec<f64> = (0..n).map(|i| -6.0 + (i as f64 + 0.5) * h).collect();
    let top = xs.iter().map(|&x| log_density(x)).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = xs.iter().map(|&x| (log_density(x) - top).exp()).collect();
    let z: f64 = w.iter().sum();
    let mean = xs.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / z;
    let var = xs.iter().zip(&w).map(|(x, w)| (x - mean).powi(2) * w).sum::<f64>() / z;
    (mean, var)
}

#[test]
fn one_dimensional_posterior_matches_quadrature() {
    let mut rng = seeded(31);
    for _ in 0..40 {
        let sigma = rng.random_range(0.5..2.0);
        let k = rng.random_range(0..=5);
        let obs: Vec<(f64, f64)> = (0..k)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-2.0..2.0)))
            .collect();
        let mut post = GaussianPosterior::standard(1, sigma);
        for &(a, r) in &obs {
            post = post.update(&[a], r).unwrap();
        }
        let (mean, var) = grid_posterior(0.0, 1.0, sigma, &obs);
        assert!((post.mean[0] - mean).abs() < 1e-5, "{} vs {mean}", post.mean[0]);
        assert!((post.covariance().unwrap()[(0, 0)] - var).abs() < 1e-5);
    }
}

#[test]
fn sequential_discrete_updates_equal_one_shot_bayes() {
    let mut rng = seeded(37);
    for _ in 0..200 {
        let n = rng.random_range(1..=8);
        let prior: Vec<f64> = {
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|x| x / s).collect()
        };
        let steps = rng.random_range(1..=10);
        let liks: Vec<Vec<f64>> = (0..steps)
            .map(|_| (0..n).map(|_| rng.random_range(0.05..1.0)).collect())
            .collect();
        let mut post = DiscretePosterior::new(prior.clone()).unwrap();
        for l in &liks {
            post = post.update(l).unwrap();
        }
        let joint: Vec<f64> = (0..n)
            .map(|j| prior[j] * liks.iter().map(|l| l[j]).product::<f64>())
            .collect();
        let z: f64 = joint.iter().sum();
        for (w, p) in post.weights().iter().zip(&joint) {
            assert!((w - p / z).abs() < 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn precision_only_grows(d in 1usize..5, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let mut post = GaussianPosterior::standard(d, 1.0);
        let mut prev = post.min_precision_eigenvalue();
        for _ in 0..8 {
            let a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            post = post.update(&a, rng.random_range(-1.0..1.0)).unwrap();
            let now = post.min_precision_eigenvalue();
            prop_assert!(now >= prev - 1e-12);
            prev = now;
        }
    }
}

#[test]
fn general_prior_conjugacy() {
    let prec = DMatrix::from_row_slice(1, 1, &[4.0]);
    let post = GaussianPosterior::new(DVector::from_vec(vec![0.5]), prec, 1.0).unwrap();
    let post = post.update(&[1.0], 1.0).unwrap();
    let (mean, var) = grid_posterior(0.5, 4.0, 1.0, &[(1.0, 1.0)]);
    assert!((post.mean[0] - mean).abs() < 1e-5);
    assert!((1.0 / post.precision[(0, 0)] - var).abs() < 1e-5);
}
