//! Structural invariants of the bound and the phase sweep on random instances.

use covbound::{
    covariance_at, discretize, make_band, phase_sweep, upper_bound, BoundConfig, FrequencyBand,
    ProblemSpec, SolverConfig,
};
use proptest::prelude::*;
use std::sync::Arc;

const STEP: f64 = 2.5e-3;

fn bound(band: &FrequencyBand, n: usize, tau: f64, sigma2: f64) -> f64 {
    let grid = Arc::new(discretize(band, STEP).unwrap());
    let spec = ProblemSpec::new(band.clone(), n, tau, sigma2).unwrap();
    let cfg = BoundConfig {
        cross_check_dual: false,
        ..BoundConfig::default()
    };
    upper_bound(&spec, &grid, &cfg).unwrap().bound
}

/// One or two intervals inside `(-0.5, 0.5)`, endpoints on a 0.01 lattice.
fn band_strategy() -> impl Strategy<Value = FrequencyBand> {
    (-45i32..20, 5i32..40, prop::option::of((2i32..10, 2i32..20))).prop_map(|(lo, len, second)| {
        let lo = lo as f64 * 0.01;
        let hi = lo + len as f64 * 0.01;
        let mut iv = vec![(lo, hi)];
        if let Some((gap, len2)) = second {
            let a = hi + gap as f64 * 0.01;
            if a < 0.49 {
                iv.push((a, (a + len2 as f64 * 0.01).min(0.5)));
            }
        }
        make_band(&iv).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bound_lies_between_zero_and_cap(band in band_strategy(), n in 0usize..5, tau in -8.0..8.0f64, sigma2 in 0.1..10.0f64) {
        let b = bound(&band, n, tau, sigma2);
        prop_assert!(b >= 0.0);
        prop_assert!(b <= 2.0 * sigma2 + 1e-6 * sigma2, "bound {b}");
    }

    #[test]
    fn bound_is_linear_in_power(band in band_strategy(), n in 0usize..4, tau in 0.0..7.0f64, sigma2 in 0.1..10.0f64) {
        let unit = bound(&band, n, tau, 1.0);
        prop_assert!((bound(&band, n, tau, sigma2) - sigma2 * unit).abs() <= 1e-12 * sigma2);
    }

    #[test]
    fn more_specified_lags_never_loosen(band in band_strategy(), n in 0usize..4, tau in 0.0..7.0f64) {
        prop_assert!(bound(&band, n + 1, tau, 1.0) <= bound(&band, n, tau, 1.0) + 1e-7);
    }

    #[test]
    fn enlarging_the_band_never_tightens(lo in -40i32..0, len in 5i32..30, grow_lo in 0i32..10, grow_hi in 0i32..10, n in 1usize..4, tau in 0.0..7.0f64) {
        let inner = make_band(&[(lo as f64 * 0.01, (lo + len) as f64 * 0.01)]).unwrap();
        let outer = make_band(&[((lo - grow_lo) as f64 * 0.01, (lo + len + grow_hi) as f64 * 0.01)]).unwrap();
        prop_assert!(bound(&outer, n, tau, 1.0) >= bound(&inner, n, tau, 1.0) - 1e-7);
    }

    #[test]
    fn negated_lag_gives_same_bound(band in band_strategy(), n in 0usize..4, tau in 0.0..7.0f64) {
        prop_assert!((bound(&band, n, -tau, 1.0) - bound(&band, n, tau, 1.0)).abs() <= 1e-7);
    }

    #[test]
    fn translating_the_band_preserves_the_bound(band in band_strategy(), n in 0usize..4, tau in 0.0..7.0f64, shift in -0.3..0.3f64) {
        let grid = Arc::new(discretize(&band, STEP).unwrap());
        let moved = Arc::new(grid.shifted(shift));
        let cfg = BoundConfig { cross_check_dual: false, ..BoundConfig::default() };
        let spec = ProblemSpec::new(band.clone(), n, tau, 1.0).unwrap();
        let a = upper_bound(&spec, &grid, &cfg).unwrap().bound;
        let b = upper_bound(&spec.with_band(moved.band().clone()).unwrap(), &moved, &cfg).unwrap().bound;
        prop_assert!((a - b).abs() <= 2e-6, "{a} vs {b}");
    }

    #[test]
    fn specified_lags_have_zero_bound(band in band_strategy(), n in 0usize..5, k in 0usize..5) {
        let k = k.min(n) as f64;
        prop_assert!(bound(&band, n, k, 1.0) <= 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sweep_is_below_bound_and_witnessed(band in band_strategy(), n in 0usize..4, tau in 0.0..7.0f64) {
        let grid = Arc::new(discretize(&band, 5e-3).unwrap());
        let spec = ProblemSpec::new(band, n, tau, 1.0).unwrap();
        let b = upper_bound(&spec, &grid, &BoundConfig::default()).unwrap();
        let s = phase_sweep(&spec, &grid, 24, &SolverConfig::default()).unwrap();
        prop_assert!(s.value <= b.bound + 2e-6, "sweep {} above bound {}", s.value, b.bound);
        for k in spec.lags() {
            prop_assert!(covariance_at(&s.pair0, k as f64).norm() <= 1e-6);
        }
        prop_assert!(covariance_at(&s.pair0, tau).norm() >= s.value - 1e-6);
        prop_assert!((b.t_star - b.dual_value.unwrap()).abs() <= 1e-6);
    }
}
