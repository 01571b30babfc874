//! Finite frequency grids standing in for a band.
//!
//! Interior points sit on the absolute lattice `j * step`, so halving the step
//! always yields a superset and symmetric bands give exactly mirrored grids.
//! Interval endpoints are always included.

use serde::Serialize;

use crate::band::FrequencyBand;
use crate::error::{CoreError, Result};

pub const MAX_GRID_POINTS: usize = 20_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyGrid {
    band: FrequencyBand,
    points: Vec<f64>,
    step: f64,
}

impl FrequencyGrid {
    pub fn band(&self) -> &FrequencyBand {
        &self.band
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index map `j -> j'` with `points[j'] == -points[j]`, when the grid is mirror-symmetric.
    pub fn reflection(&self) -> Option<Vec<usize>> {
        let n = self.points.len();
        let tol = crate::band::FREQUENCY_EPS;
        (0..n)
            .all(|j| (self.points[j] + self.points[n - 1 - j]).abs() <= tol)
            .then(|| (0..n).rev().collect())
    }

    /// Every point translated by `delta`, paired with the translated band.
    pub fn shifted(&self, delta: f64) -> FrequencyGrid {
        FrequencyGrid {
            band: self.band.shifted(delta),
            points: self.points.iter().map(|p| p + delta).collect(),
            step: self.step,
        }
    }

    /// Index of the grid point nearest to `theta`.
    pub fn nearest(&self, theta: f64) -> usize {
        match self.points.binary_search_by(|p| p.total_cmp(&theta)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i == self.points.len() => i - 1,
            Err(i) => {
                if theta - self.points[i - 1] <= self.points[i] - theta {
                    i - 1
                } else {
                    i
                }
            }
        }
    }
}

/// Sample every interval of `band` with spacing at most `step`, endpoints included.
pub fn discretize(band: &FrequencyBand, step: f64) -> Result<FrequencyGrid> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(CoreError::BadStep(step));
    }
    let estimate = (band.total_length() / step).ceil() + 2.0 * band.intervals().len() as f64;
    if estimate > MAX_GRID_POINTS as f64 {
        return Err(CoreError::GridTooLarge(estimate as usize));
    }
    let dedup = 1e-9 * step;
    let mut points = Vec::with_capacity(estimate as usize + 1);
    for iv in band.intervals() {
        points.push(iv.lo);
        let first = (iv.lo / step).ceil() as i64;
        let last = (iv.hi / step).floor() as i64;
        for j in first..=last {
            let theta = j as f64 * step;
            if theta > iv.lo + dedup && theta < iv.hi - dedup {
                points.push(theta);
            }
        }
        if iv.hi > iv.lo {
            points.push(iv.hi);
        }
    }
    Ok(FrequencyGrid {
        band: band.clone(),
        points,
        step,
    })
}
