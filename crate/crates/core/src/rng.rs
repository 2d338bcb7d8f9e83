//! Seeded random sampling of Gaussian phase-space points.
//!
//! All Monte-Carlo code in the crate consumes a [`rand_chacha::ChaCha12Rng`]
//! seeded explicitly, so every run is reproducible byte-for-byte.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::phase_space::GaussianState;

/// Creates the crate's standard seeded generator.
pub fn seeded(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Samples quadrature outcome vectors from the Wigner density of a Gaussian
/// state: a normal distribution with mean d and covariance γ/2.
pub struct GaussianSampler {
    mean: DVector<f64>,
    /// Cholesky-like factor L with L·Lᵀ = γ/2.
    factor: DMatrix<f64>,
}

impl GaussianSampler {
    /// Prepares a sampler for the given state.
    pub fn new(state: &GaussianState) -> Result<Self> {
        let half = state.covariance() * 0.5;
        let factor = match half.clone().cholesky() {
            Some(ch) => ch.l(),
            None => {
                // Semi-definite covariance (e.g. infinitely squeezed
                // directions after measurement): fall back to an
                // eigendecomposition square root.
                crate::linalg::sqrt_psd(&half, 1e-12 * (1.0 + half.amax()))?
            }
        };
        if factor.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite covariance factor".into()));
        }
        Ok(Self {
            mean: state.displacement().clone(),
            factor,
        })
    }

    /// Draws one phase-space point.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_iterator(
            self.mean.len(),
            (0..self.mean.len()).map(|_| rng.sample::<f64, _>(StandardNormal)),
        );
        &self.mean + &self.factor * z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_matches_first_and_second_moments() {
        let state = GaussianState::two_mode_squeezed(0.5);
        let sampler = GaussianSampler::new(&state).unwrap();
        let mut rng = seeded(7);
        let n = 200_000;
        let mut mean = DVector::zeros(4);
        let mut second = DMatrix::zeros(4, 4);
        for _ in 0..n {
            let x = sampler.sample(&mut rng);
            mean += &x;
            second += &x * x.transpose();
        }
        mean /= n as f64;
        second /= n as f64;
        let cov = second - &mean * mean.transpose();
        let expected = state.covariance() * 0.5;
        assert!((cov - expected).amax() < 0.02);
        assert!(mean.amax() < 0.01);
    }

    #[test]
    fn fixed_seed_reproduces() {
        let state = GaussianState::vacuum(2);
        let sampler = GaussianSampler::new(&state).unwrap();
        let a: Vec<_> = {
            let mut rng = seeded(42);
            (0..5).map(|_| sampler.sample(&mut rng)).collect()
        };
        let b: Vec<_> = {
            let mut rng = seeded(42);
            (0..5).map(|_| sampler.sample(&mut rng)).collect()
        };
        assert_eq!(a, b);
    }
}
