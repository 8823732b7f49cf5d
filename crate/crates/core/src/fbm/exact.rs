//! Exact fBm on a finite grid by Cholesky factorisation of its covariance.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fbm::driver::{check_grid, DriverKind, DriverPath};
use crate::fbm::kernels::fbm_covariance;
use crate::rng::{Component, RngSeed};

/// Largest grid accepted by the dense factorisation.
pub const MAX_EXACT_POINTS: usize = 4096;

const JITTER: f64 = 1e-12;

/// Cholesky factor of the fBm covariance on a grid, reusable across replicas.
#[derive(Debug, Clone)]
pub struct ExactFbmSampler {
    hurst: f64,
    grid: Vec<f64>,
    // grid points with t > 0 start here; earlier points are pinned to 0
    offset: usize,
    factor: DMatrix<f64>,
}

impl ExactFbmSampler {
    pub fn new(hurst: f64, grid: &[f64]) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(Error::invalid("hurst", format!("must lie in (0, 1), got {hurst}")));
        }
        check_grid(grid, None)?;
        if grid.len() > MAX_EXACT_POINTS {
            return Err(Error::invalid(
                "grid",
                format!("{} points exceed the dense limit {MAX_EXACT_POINTS}", grid.len()),
            ));
        }
        let offset = usize::from(grid[0] == 0.0);
        let times = &grid[offset..];
        let k = times.len();
        let mut cov = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let c = fbm_covariance(hurst, times[i], times[j])?;
                cov[(i, j)] = c;
                cov[(j, i)] = c;
            }
        }
        let factor = match Cholesky::new(cov.clone()) {
            Some(ch) => ch.unpack(),
            None => {
                for i in 0..k {
                    cov[(i, i)] += JITTER;
                }
                Cholesky::new(cov)
                    .ok_or_else(|| {
                        Error::Factorization(format!(
                            "covariance on {k} points not positive definite after jitter {JITTER:e}"
                        ))
                    })?
                    .unpack()
            }
        };
        Ok(Self {
            hurst,
            grid: grid.to_vec(),
            offset,
            factor,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn sample(&self, seed: RngSeed) -> DriverPath {
        let mut rng = seed.rng(Component::Gaussian);
        let k = self.grid.len() - self.offset;
        let z = DVector::from_iterator(k, (0..k).map(|_| StandardNormal.sample(&mut rng)));
        let x = &self.factor * z;
        let mut values = vec![0.0; self.offset];
        values.extend(x.iter());
        DriverPath {
            grid: self.grid.clone(),
            values,
            kind: DriverKind::ExactFbm,
            hurst: self.hurst,
            params: None,
            seed: Some(seed),
            lipschitz_certificate: None,
        }
    }
}

/// One exact fBm sample on `grid`. `H = 1/2` (Brownian motion) is allowed.
pub fn exact_fbm(hurst: f64, grid: &[f64], seed: RngSeed) -> Result<DriverPath> {
    Ok(ExactFbmSampler::new(hurst, grid)?.sample(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_is_pinned() {
        let d = exact_fbm(0.7, &[0.0, 0.5, 1.0], RngSeed::new(3, 0)).unwrap();
        assert_eq!(d.values[0], 0.0);
        assert_eq!(d.kind, DriverKind::ExactFbm);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(exact_fbm(0.7, &[0.5, 0.5], RngSeed::new(3, 0)).is_err());
        assert!(exact_fbm(1.2, &[0.5], RngSeed::new(3, 0)).is_err());
        let big: Vec<f64> = (1..=MAX_EXACT_POINTS + 1).map(|k| k as f64).collect();
        assert!(matches!(
            ExactFbmSampler::new(0.7, &big),
            Err(Error::InvalidParameter { name: "grid", .. })
        ));
    }

    #[test]
    fn same_seed_same_sample() {
        let s = ExactFbmSampler::new(0.6, &[0.25, 0.5, 0.75, 1.0]).unwrap();
        assert_eq!(s.sample(RngSeed::new(9, 4)), s.sample(RngSeed::new(9, 4)));
        assert_ne!(s.sample(RngSeed::new(9, 4)), s.sample(RngSeed::new(9, 5)));
    }
}
