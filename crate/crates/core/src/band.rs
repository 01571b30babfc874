//! Spectral supports: finite unions of closed frequency intervals.
//!
//! Frequencies are in cycles per sample, so `exp(i 2 pi theta k)` with integer
//! `k` is the covariance kernel at the `k`-th specified lag.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Two frequencies closer than this are treated as equal when testing symmetry.
pub const FREQUENCY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lo <= theta && theta <= self.hi
    }
}

/// Sorted, pairwise-disjoint closed intervals. Touching intervals are merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct FrequencyBand {
    intervals: Vec<Interval>,
}

impl FrequencyBand {
    pub fn new(intervals: &[(f64, f64)]) -> Result<Self> {
        if intervals.is_empty() {
            return Err(CoreError::EmptyBand);
        }
        let mut sorted = Vec::with_capacity(intervals.len());
        for &(lo, hi) in intervals {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(CoreError::NonFinite("band interval"));
            }
            if lo > hi {
                return Err(CoreError::MalformedInterval { lo, hi });
            }
            sorted.push(Interval { lo, hi });
        }
        sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut merged: Vec<Interval> = Vec::with_capacity(sorted.len());
        for iv in sorted {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        Ok(FrequencyBand { intervals: merged })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn lo(&self) -> f64 {
        self.intervals[0].lo
    }

    pub fn hi(&self) -> f64 {
        self.intervals[self.intervals.len() - 1].hi
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(theta))
    }

    /// True iff the band is invariant under `theta -> -theta`.
    pub fn is_symmetric(&self) -> bool {
        let k = self.intervals.len();
        (0..k).all(|i| {
            let a = self.intervals[i];
            let b = self.intervals[k - 1 - i];
            (a.lo + b.hi).abs() <= FREQUENCY_EPS && (a.hi + b.lo).abs() <= FREQUENCY_EPS
        })
    }

    /// The band translated by `delta` along the frequency axis.
    pub fn shifted(&self, delta: f64) -> FrequencyBand {
        FrequencyBand {
            intervals: self
                .intervals
                .iter()
                .map(|iv| Interval {
                    lo: iv.lo + delta,
                    hi: iv.hi + delta,
                })
                .collect(),
        }
    }

    /// True iff every interval of `other` lies inside one interval of `self`.
    pub fn contains_band(&self, other: &FrequencyBand) -> bool {
        other
            .intervals
            .iter()
            .all(|o| self.intervals.iter().any(|s| s.lo <= o.lo && o.hi <= s.hi))
    }

    pub fn to_pairs(&self) -> Vec<(f64, f64)> {
        self.intervals.iter().map(|iv| (iv.lo, iv.hi)).collect()
    }
}

impl TryFrom<Vec<(f64, f64)>> for FrequencyBand {
    type Error = CoreError;

    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        FrequencyBand::new(&v)
    }
}

impl From<FrequencyBand> for Vec<(f64, f64)> {
    fn from(b: FrequencyBand) -> Self {
        b.to_pairs()
    }
}

impl std::fmt::Display for FrequencyBand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, " U ")?;
            }
            write!(f, "[{}, {}]", iv.lo, iv.hi)?;
        }
        Ok(())
    }
}

/// Normalize a list of `(lo, hi)` pairs into a band.
pub fn make_band(intervals: &[(f64, f64)]) -> Result<FrequencyBand> {
    FrequencyBand::new(intervals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_interval() {
        let b = make_band(&[(-0.3, 0.3)]).unwrap();
        assert_eq!(b.intervals().len(), 1);
        assert_abs_diff_eq!(b.total_length(), 0.6, epsilon = 1e-15);
        assert!(b.is_symmetric());
    }

    #[test]
    fn overlapping_intervals_merge() {
        let b = make_band(&[(-0.2, 0.1), (0.0, 0.3)]).unwrap();
        assert_eq!(b.to_pairs(), vec![(-0.2, 0.3)]);
    }

    #[test]
    fn touching_intervals_merge_and_unsorted_input_is_sorted() {
        let b = make_band(&[(0.1, 0.2), (-0.3, -0.1), (-0.1, 0.0)]).unwrap();
        assert_eq!(b.to_pairs(), vec![(-0.3, 0.0), (0.1, 0.2)]);
    }

    #[test]
    fn empty_and_malformed_inputs_fail() {
        assert!(matches!(make_band(&[]), Err(CoreError::EmptyBand)));
        assert!(matches!(
            make_band(&[(0.2, 0.1)]),
            Err(CoreError::MalformedInterval { .. })
        ));
        assert!(matches!(
            make_band(&[(f64::NAN, 0.1)]),
            Err(CoreError::NonFinite(_))
        ));
    }

    #[test]
    fn degenerate_interval_is_allowed() {
        let b = make_band(&[(0.1, 0.1)]).unwrap();
        assert_eq!(b.total_length(), 0.0);
        assert!(b.contains(0.1));
    }

    #[test]
    fn symmetry_detection() {
        assert!(make_band(&[(-0.3, -0.1), (0.1, 0.3)])
            .unwrap()
            .is_symmetric());
        assert!(!make_band(&[(-0.3, -0.1), (0.05, 0.3)])
            .unwrap()
            .is_symmetric());
        assert!(!make_band(&[(-0.25, 0.35)]).unwrap().is_symmetric());
        assert!(make_band(&[(-0.25, 0.35)])
            .unwrap()
            .shifted(-0.05)
            .is_symmetric());
    }

    #[test]
    fn serde_round_trip_validates() {
        let b = make_band(&[(-0.3, -0.1), (0.05, 0.3)]).unwrap();
        let s = serde_json_like(&b);
        assert_eq!(s, vec![(-0.3, -0.1), (0.05, 0.3)]);
        assert!(FrequencyBand::try_from(vec![(0.3, 0.1)]).is_err());
    }

    fn serde_json_like(b: &FrequencyBand) -> Vec<(f64, f64)> {
        b.clone().into()
    }
}
