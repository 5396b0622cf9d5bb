//! Posteriors for the two environment families: conjugate Gaussian for the
//! linear model and exact tabular Bayes for finite parameter spaces.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

const SIMPLEX_TOL: f64 = 1e-12;

/// `N(mean, precision^-1)` belief over the linear parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPosterior {
    pub mean: DVector<f64>,
    pub precision: DMatrix<f64>,
    pub noise_sigma: f64,
}

impl GaussianPosterior {
    /// The `N(0, I_d)` prior.
    pub fn standard(d: usize, noise_sigma: f64) -> Self {
        GaussianPosterior {
            mean: DVector::zeros(d),
            precision: DMatrix::identity(d, d),
            noise_sigma,
        }
    }

    pub fn new(mean: DVector<f64>, precision: DMatrix<f64>, noise_sigma: f64) -> Result<Self> {
        let d = mean.len();
        if precision.nrows() != d || precision.ncols() != d {
            return Err(Error::input("precision must be d x d"));
        }
        let asym = (&precision - precision.transpose()).amax();
        if asym > 1e-10 {
            return Err(Error::input(format!("precision is not symmetric (max gap {asym:e})")));
        }
        if precision.clone().cholesky().is_none() {
            return Err(Error::input("precision is not positive definite"));
        }
        Ok(GaussianPosterior {
            mean,
            precision,
            noise_sigma,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Conjugate update with one observation `r = <a, theta> + noise`.
    pub fn update(&self, a: &[f64], r: f64) -> Result<Self> {
        if a.len() != self.dim() {
            return Err(Error::input(format!(
                "action has {} coordinates, posterior has {}",
                a.len(),
                self.dim()
            )));
        }
        if !(self.noise_sigma > 0.0) {
            return Err(Error::Unsupported(
                "conjugate update needs noise_sigma > 0 (noiseless likelihood is degenerate)".into(),
            ));
        }
        if a.iter().all(|&x| x == 0.0) {
            return Ok(self.clone());
        }
        let a = DVector::from_column_slice(a);
        let inv_var = 1.0 / (self.noise_sigma * self.noise_sigma);
        let precision = &self.precision + (&a * a.transpose()) * inv_var;
        let info = &self.precision * &self.mean + &a * (r * inv_var);
        let chol = precision
            .clone()
            .cholesky()
            .ok_or_else(|| self.factorization_error(&precision))?;
        let mean = chol.solve(&info);
        Ok(GaussianPosterior {
            mean,
            precision,
            noise_sigma: self.noise_sigma,
        })
    }

    fn factorization_error(&self, m: &DMatrix<f64>) -> Error {
        let diag = m.diagonal();
        Error::Numerical(format!(
            "cholesky of precision failed; diagonal range [{:e}, {:e}]",
            diag.min(),
            diag.max()
        ))
    }

    /// Exact draw `mean + L^-T z` where `precision = L L^T`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let chol = self
            .precision
            .clone()
            .cholesky()
            .ok_or_else(|| self.factorization_error(&self.precision))?;
        let z = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        let offset = chol
            .l()
            .transpose()
            .solve_upper_triangular(&z)
            .ok_or_else(|| self.factorization_error(&self.precision))?;
        Ok((&self.mean + offset).iter().copied().collect())
    }

    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        self.precision
            .clone()
            .cholesky()
            .map(|c| c.inverse())
            .ok_or_else(|| self.factorization_error(&self.precision))
    }

    pub fn min_precision_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.precision.clone()).eigenvalues.min()
    }
}

/// Posterior weights over a finite parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePosterior {
    weights: Vec<f64>,
}

impl DiscretePosterior {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::input("posterior weights must be nonempty and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::input(format!("posterior weights sum to {total}, not 1")));
        }
        Ok(DiscretePosterior { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Bayes rule with per-parameter likelihoods of the observation.
    pub fn update(&self, likelihoods: &[f64]) -> Result<Self> {
        if likelihoods.len() != self.weights.len() {
            return Err(Error::input("one likelihood per parameter is required"));
        }
        if likelihoods.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
            return Err(Error::input("likelihoods must be finite and nonnegative"));
        }
        let mut w: Vec<f64> = self.weights.iter().zip(likelihoods).map(|(w, l)| w * l).collect();
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ImpossibleObservation(
                "observation has zero probability under every parameter with prior mass".into(),
            ));
        }
        for x in &mut w {
            *x /= total;
        }
        Ok(DiscretePosterior { weights: w })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (j, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return j;
            }
        }
        self.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn zero_action_leaves_posterior_unchanged() {
        let post = GaussianPosterior::standard(3, 1.0).update(&[0.3, 0.1, 0.0], 1.0).unwrap();
        assert_eq!(post.update(&[0.0; 3], 5.0).unwrap(), post);
    }

    #[test]
    fn one_dimensional_conjugate_update() {
        let post = GaussianPosterior::standard(1, 1.0).update(&[1.0], 2.0).unwrap();
        assert!((post.precision[(0, 0)] - 2.0).abs() < 1e-15);
        assert!((post.mean[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn update_order_does_not_matter() {
        let prior = GaussianPosterior::standard(2, 0.7);
        let ab = prior.update(&[0.6, 0.8], 1.3).unwrap().update(&[-1.0, 0.2], -0.4).unwrap();
        let ba = prior.update(&[-1.0, 0.2], -0.4).unwrap().update(&[0.6, 0.8], 1.3).unwrap();
        assert!((ab.mean - ba.mean).amax() < 1e-10);
        assert!((ab.precision - ba.precision).amax() < 1e-10);
    }

    #[test]
    fn noiseless_update_is_unsupported() {
        let prior = GaussianPosterior::standard(1, 0.0);
        assert!(matches!(prior.update(&[1.0], 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn sample_mean_concentrates() {
        let post = GaussianPosterior::standard(2, 1.0)
            .update(&[1.0, 0.0], 0.5)
            .unwrap()
            .update(&[0.3, 0.9], -1.0)
            .unwrap();
        let cov = post.covariance().unwrap();
        let n = 100_000;
        let mut rng = seeded(10);
        let mut sum = [0.0; 2];
        for _ in 0..n {
            let s = post.sample(&mut rng).unwrap();
            sum[0] += s[0];
            sum[1] += s[1];
        }
        let tol = 4.0 * cov.diagonal().max().sqrt() / (n as f64).sqrt();
        for (s, m) in sum.iter().zip(post.mean.iter()) {
            assert!((s / n as f64 - m).abs() < tol);
        }
    }

    #[test]
    fn sharp_posterior_samples_near_mean() {
        let mut post = GaussianPosterior::standard(2, 1.0).update(&[1.0, 1.0], 0.4).unwrap();
        post.precision *= 1e6;
        let mut rng = seeded(3);
        for _ in 0..100 {
            let s = post.sample(&mut rng).unwrap();
            assert!((s[0] - post.mean[0]).abs() < 1e-2 && (s[1] - post.mean[1]).abs() < 1e-2);
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let post = GaussianPosterior::standard(4, 1.0);
        assert_eq!(post.sample(&mut seeded(5)).unwrap(), post.sample(&mut seeded(5)).unwrap());
    }

    #[test]
    fn rejects_invalid_precision() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(GaussianPosterior::new(DVector::zeros(2), asym, 1.0).is_err());
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(GaussianPosterior::new(DVector::zeros(2), indefinite, 1.0).is_err());
    }

    #[test]
    fn discrete_updates() {
        let prior = DiscretePosterior::new(vec![0.5, 0.5]).unwrap();
        let post = prior.update(&[0.2, 0.8]).unwrap();
        assert!((post.weights()[0] - 0.2).abs() < 1e-15);
        assert!((post.weights()[1] - 0.8).abs() < 1e-15);
        assert_eq!(prior.update(&[0.3, 0.3]).unwrap(), prior);
        let excluded = DiscretePosterior::new(vec![0.2, 0.3, 0.5]).unwrap().update(&[0.0, 0.4, 0.1]).unwrap();
        assert_eq!(excluded.weights()[0], 0.0);
        assert!(matches!(
            DiscretePosterior::new(vec![1.0, 0.0]).unwrap().update(&[0.0, 1.0]),
            Err(Error::ImpossibleObservation(_))
        ));
    }
}
