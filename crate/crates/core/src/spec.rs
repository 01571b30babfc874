use serde::{Deserialize, Serialize};

use crate::band::FrequencyBand;
use crate::error::{CoreError, Result};

/// One uncertainty query: how far can two covariance functions with spectra in
/// `band`, equal on the lags `-n..=n` and of total power `sigma2`, differ at `tau`?
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub band: FrequencyBand,
    pub n: usize,
    pub tau: f64,
    pub sigma2: f64,
}

impl ProblemSpec {
    pub fn new(band: FrequencyBand, n: usize, tau: f64, sigma2: f64) -> Result<Self> {
        if !tau.is_finite() {
            return Err(CoreError::InvalidSpec(format!(
                "lag must be finite, got {tau}"
            )));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(CoreError::InvalidSpec(format!(
                "total power must be positive and finite, got {sigma2}"
            )));
        }
        if n > 10_000 {
            return Err(CoreError::InvalidSpec(format!(
                "maximal lag {n} is unreasonably large"
            )));
        }
        Ok(ProblemSpec {
            band,
            n,
            tau,
            sigma2,
        })
    }

    /// The same query at another lag.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.band.clone(), self.n, tau, self.sigma2)
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.band.clone(), n, self.tau, self.sigma2)
    }

    pub fn with_sigma2(&self, sigma2: f64) -> Result<Self> {
        Self::new(self.band.clone(), self.n, self.tau, sigma2)
    }

    pub fn with_band(&self, band: FrequencyBand) -> Result<Self> {
        Self::new(band, self.n, self.tau, self.sigma2)
    }

    /// `Some(k)` when `tau` is exactly an integer lag with `|k| <= n`.
    pub fn specified_lag(&self) -> Option<i64> {
        (self.tau.fract() == 0.0 && self.tau.abs() <= self.n as f64).then_some(self.tau as i64)
    }

    /// The specified lags `-n..=n`.
    pub fn lags(&self) -> impl Iterator<Item = i64> {
        let n = self.n as i64;
        -n..=n
    }
}
