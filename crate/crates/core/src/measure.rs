//! Measures supported on a frequency grid.

use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::grid::FrequencyGrid;
use crate::poly::eval_kernel;

/// A pair of nonnegative spectra `(mu, nu)` on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasurePair {
    grid: Arc<FrequencyGrid>,
    mu: Vec<f64>,
    nu: Vec<f64>,
}

impl DiscreteMeasurePair {
    pub fn new(grid: Arc<FrequencyGrid>, mu: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        if mu.len() != grid.len() || nu.len() != grid.len() {
            return Err(CoreError::InvalidSpec(format!(
                "measure weights ({}, {}) do not match grid size {}",
                mu.len(),
                nu.len(),
                grid.len()
            )));
        }
        if mu.iter().chain(&nu).any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(CoreError::InvalidSpec(
                "measure weights must be finite and nonnegative".into(),
            ));
        }
        Ok(DiscreteMeasurePair { grid, mu, nu })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn mu_weights(&self) -> &[f64] {
        &self.mu
    }

    pub fn nu_weights(&self) -> &[f64] {
        &self.nu
    }

    pub fn total_mass(&self) -> f64 {
        self.mu.iter().sum::<f64>() + self.nu.iter().sum::<f64>()
    }

    /// `r_mu(tau) = sum_j g_tau(theta_j) mu_j`.
    pub fn mu_covariance(&self, tau: f64) -> Complex64 {
        weighted_kernel_sum(self.grid.points(), &self.mu, tau)
    }

    pub fn nu_covariance(&self, tau: f64) -> Complex64 {
        weighted_kernel_sum(self.grid.points(), &self.nu, tau)
    }

    /// `r_mu(tau) - r_nu(tau)`.
    pub fn covariance_difference(&self, tau: f64) -> Complex64 {
        self.grid
            .points()
            .iter()
            .zip(self.mu.iter().zip(&self.nu))
            .map(|(&th, (m, n))| eval_kernel(tau, th) * (m - n))
            .sum()
    }

    /// Atoms `(theta, mu, nu)` where either weight exceeds `threshold`.
    pub fn atoms(&self, threshold: f64) -> Vec<(f64, f64, f64)> {
        self.grid
            .points()
            .iter()
            .zip(self.mu.iter().zip(&self.nu))
            .filter(|(_, (m, n))| **m > threshold || **n > threshold)
            .map(|(&th, (&m, &n))| (th, m, n))
            .collect()
    }
}

fn weighted_kernel_sum(points: &[f64], w: &[f64], tau: f64) -> Complex64 {
    points
        .iter()
        .zip(w)
        .map(|(&th, &w)| eval_kernel(tau, th) * w)
        .sum()
}

/// `r_mu(tau) - r_nu(tau)` by quadrature over the grid.
pub fn covariance_at(pair: &DiscreteMeasurePair, tau: f64) -> Complex64 {
    pair.covariance_difference(tau)
}

/// A complex measure on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMeasure {
    grid: Arc<FrequencyGrid>,
    weights: Vec<Complex64>,
}

impl ComplexMeasure {
    pub fn new(grid: Arc<FrequencyGrid>, weights: Vec<Complex64>) -> Result<Self> {
        if weights.len() != grid.len() {
            return Err(CoreError::InvalidSpec(format!(
                "{} weights for a grid of {} points",
                weights.len(),
                grid.len()
            )));
        }
        Ok(ComplexMeasure { grid, weights })
    }

    pub fn zero(grid: Arc<FrequencyGrid>) -> Self {
        let weights = vec![Complex64::new(0.0, 0.0); grid.len()];
        ComplexMeasure { grid, weights }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// `sum_j |psi_j|`.
    pub fn tv_norm(&self) -> f64 {
        self.weights.iter().map(|w| w.norm()).sum()
    }

    /// `sum_j exp(i 2 pi theta_j k) psi_j`.
    pub fn moment(&self, k: i64) -> Complex64 {
        self.pair_with_kernel(k as f64)
    }

    /// `<psi, g_tau> = sum_j g_tau(theta_j) psi_j`.
    pub fn pair_with_kernel(&self, tau: f64) -> Complex64 {
        self.grid
            .points()
            .iter()
            .zip(&self.weights)
            .map(|(&th, w)| eval_kernel(tau, th) * w)
            .sum()
    }

    /// `psi*(theta) = conj(psi(-theta))`; requires a mirror-symmetric grid.
    pub fn conj_reflect(&self) -> Option<Self> {
        let refl = self.grid.reflection()?;
        Some(ComplexMeasure {
            grid: Arc::clone(&self.grid),
            weights: refl.iter().map(|&r| self.weights[r].conj()).collect(),
        })
    }

    /// `(psi + psi*) / 2`.
    pub fn symmetrized(&self) -> Option<Self> {
        let refl = self.conj_reflect()?;
        Some(ComplexMeasure {
            grid: Arc::clone(&self.grid),
            weights: self
                .weights
                .iter()
                .zip(&refl.weights)
                .map(|(a, b)| (a + b) * 0.5)
                .collect(),
        })
    }

    /// `|psi - psi*|_TV / 2`, zero exactly when `psi = psi*`.
    pub fn asymmetry(&self) -> Option<f64> {
        let refl = self.conj_reflect()?;
        Some(
            self.weights
                .iter()
                .zip(&refl.weights)
                .map(|(a, b)| (a - b).norm())
                .sum::<f64>()
                / 2.0,
        )
    }

    /// Split into a reflection-symmetric real part and a reflection-antisymmetric
    /// imaginary part, `psi = hat + i * breve`.
    pub fn symmetric_decomposition(&self) -> Option<SymmetricDecomposition> {
        let refl = self.grid.reflection()?;
        let w = &self.weights;
        let hat: Vec<f64> = refl
            .iter()
            .enumerate()
            .map(|(j, &r)| 0.5 * (w[j].re + w[r].re))
            .collect();
        let breve: Vec<f64> = refl
            .iter()
            .enumerate()
            .map(|(j, &r)| 0.5 * (w[j].im - w[r].im))
            .collect();
        let residual = w
            .iter()
            .zip(hat.iter().zip(&breve))
            .map(|(z, (h, b))| (z - Complex64::new(*h, *b)).norm())
            .sum();
        Some(SymmetricDecomposition {
            hat,
            breve,
            residual,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricDecomposition {
    /// Real part with `hat(theta) = hat(-theta)`.
    pub hat: Vec<f64>,
    /// Imaginary part with `breve(theta) = -breve(-theta)`.
    pub breve: Vec<f64>,
    /// `|psi - (hat + i breve)|_TV`.
    pub residual: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band::make_band;
    use crate::grid::discretize;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn grid(lo: f64, hi: f64, step: f64) -> Arc<FrequencyGrid> {
        Arc::new(discretize(&make_band(&[(lo, hi)]).unwrap(), step).unwrap())
    }

    #[test]
    fn equal_measures_cancel() {
        let g = grid(-0.3, 0.3, 0.1);
        let w: Vec<f64> = (0..g.len()).map(|i| i as f64 * 0.1).collect();
        let pair = DiscreteMeasurePair::new(g, w.clone(), w).unwrap();
        for tau in [0.0, 0.7, 3.3] {
            assert_eq!(covariance_at(&pair, tau).norm(), 0.0);
        }
    }

    #[test]
    fn unit_atom_at_dc_has_flat_covariance() {
        let g = grid(-0.3, 0.3, 0.1);
        let mut mu = vec![0.0; g.len()];
        mu[g.nearest(0.0)] = 1.0;
        let pair = DiscreteMeasurePair::new(g.clone(), mu, vec![0.0; g.len()]).unwrap();
        for tau in [0.0, 1.3, -7.9] {
            let r = covariance_at(&pair, tau);
            assert_abs_diff_eq!(r.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(r.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn negative_weights_are_rejected() {
        let g = grid(0.0, 0.2, 0.1);
        assert!(DiscreteMeasurePair::new(g, vec![0.0, -1.0, 0.0], vec![0.0; 3]).is_err());
    }

    #[test]
    fn symmetric_measure_has_real_moments() {
        let g = grid(-0.3, 0.3, 0.05);
        let n = g.len();
        let raw: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 1.3).cos()))
            .collect();
        let psi = ComplexMeasure::new(g, raw).unwrap().symmetrized().unwrap();
        assert!(psi.asymmetry().unwrap() <= 1e-15);
        for k in -3..4 {
            assert!(psi.moment(k).im.abs() <= 1e-13);
        }
        let d = psi.symmetric_decomposition().unwrap();
        assert!(d.residual <= 1e-14);
    }

    #[test]
    fn asymmetric_grid_has_no_reflection() {
        let g = grid(-0.2, 0.3, 0.05);
        assert!(ComplexMeasure::zero(g).conj_reflect().is_none());
    }

    proptest! {
        #[test]
        fn covariance_difference_is_bounded_by_mass(
            w in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 13),
            tau in -10.0..10.0f64,
        ) {
            let g = grid(-0.3, 0.3, 0.05);
            let (mu, nu): (Vec<f64>, Vec<f64>) = w.into_iter().unzip();
            let pair = DiscreteMeasurePair::new(g, mu, nu).unwrap();
            prop_assert!(covariance_at(&pair, tau).norm() <= pair.total_mass() + 1e-12);
            let split = pair.mu_covariance(tau) - pair.nu_covariance(tau);
            prop_assert!((split - covariance_at(&pair, tau)).norm() <= 1e-12);
        }
    }
}
