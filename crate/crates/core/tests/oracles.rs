//! Engines checked against exhaustive reference computations on small instances.

use covbound::{
    discretize, dual_bound, make_band, phase_sweep, solve_fixed_phase, upper_bound, BoundConfig,
    ProblemSpec, SolverConfig,
};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

/// `min over constants l of max_theta |e^{i 2 pi theta} - l|` on `[lo, hi]`, by a
/// coarse 2-D scan of `l` followed by a fine scan around the coarse winner.
fn brute_force_constant_fit(lo: f64, hi: f64) -> f64 {
    let sup = |l: Complex64, step: f64| -> f64 {
        let count = ((hi - lo) / step).round() as usize;
        (0..=count)
            .map(|i| (Complex64::cis(TAU * (lo + (hi - lo) * i as f64 / count as f64)) - l).norm())
            .fold(0.0, f64::max)
    };
    let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
    for i in 0..=400 {
        for j in 0..=400 {
            let l = Complex64::new(-2.0 + 0.01 * i as f64, -2.0 + 0.01 * j as f64);
            let v = sup(l, 1e-3);
            if v < best.0 {
                best = (v, l);
            }
        }
    }
    let centre = best.1;
    let mut fine = f64::INFINITY;
    for i in -20..=20 {
        for j in -20..=20 {
            let l = centre + Complex64::new(1e-3 * i as f64, 1e-3 * j as f64);
            fine = fine.min(sup(l, 1e-4));
        }
    }
    fine
}

// Value of `brute_force_constant_fit(-0.25, 0.25)`, frozen.
const CONSTANT_FIT_QUARTER_BAND: f64 = 1.0;

#[test]
fn constant_fit_oracle_reproduces_frozen_value() {
    let v = brute_force_constant_fit(-0.25, 0.25);
    assert!(
        (v - CONSTANT_FIT_QUARTER_BAND).abs() <= 1e-4,
        "scan gives {v}"
    );
}

#[test]
fn zero_degree_bound_matches_constant_fit() {
    let band = make_band(&[(-0.25, 0.25)]).unwrap();
    let grid = Arc::new(discretize(&band, 1e-4).unwrap());
    let spec = ProblemSpec::new(band, 0, 1.0, 1.0).unwrap();
    let cfg = BoundConfig::default();
    let r = upper_bound(&spec, &grid, &cfg).unwrap();
    assert!(
        (r.bound - 2.0 * CONSTANT_FIT_QUARTER_BAND).abs() <= 2e-3,
        "bound {}",
        r.bound
    );
    let d = dual_bound(&spec, &grid, &cfg).unwrap();
    assert!(
        (d.value - CONSTANT_FIT_QUARTER_BAND).abs() <= 2e-3,
        "dual {}",
        d.value
    );
}

/// With only the mass constraints, the fixed-phase problem puts all of `mu` on the
/// grid maximizer of `Re(phi g)` and all of `nu` on its minimizer.
fn range_of_real_part(points: &[f64], tau: f64, phi: Complex64) -> f64 {
    let vals: Vec<f64> = points
        .iter()
        .map(|&th| (phi * Complex64::cis(TAU * th * tau)).re)
        .collect();
    vals.iter().copied().fold(f64::MIN, f64::max) - vals.iter().copied().fold(f64::MAX, f64::min)
}

#[test]
fn zero_degree_fixed_phase_matches_range_scan() {
    let band = make_band(&[(-0.3, -0.1), (0.05, 0.3)]).unwrap();
    let grid = Arc::new(discretize(&band, 2e-3).unwrap());
    let cfg = SolverConfig::default();
    for (tau, m) in [(1.0, 0usize), (2.7, 5), (0.4, 11), (6.1, 17)] {
        let spec = ProblemSpec::new(band.clone(), 0, tau, 1.0).unwrap();
        let phi = Complex64::from_polar(1.0, PI * m as f64 / 18.0);
        let sol = solve_fixed_phase(&spec, &grid, phi, &cfg).unwrap();
        let expected = range_of_real_part(grid.points(), tau, phi);
        assert!(
            (sol.value - expected).abs() <= 1e-8,
            "tau {tau}: lp {} vs scan {expected}",
            sol.value
        );
    }
}

#[test]
fn zero_degree_sweep_matches_range_scan() {
    let band = make_band(&[(-0.25, 0.25)]).unwrap();
    let grid = Arc::new(discretize(&band, 1e-3).unwrap());
    let spec = ProblemSpec::new(band, 0, 1.0, 1.0).unwrap();
    let p = 60;
    let res = phase_sweep(&spec, &grid, p, &SolverConfig::default()).unwrap();
    let expected = (0..p)
        .map(|m| {
            range_of_real_part(
                grid.points(),
                1.0,
                Complex64::from_polar(1.0, PI * m as f64 / p as f64),
            )
        })
        .fold(f64::MIN, f64::max);
    assert!(
        (res.value - expected).abs() <= 1e-8,
        "sweep {} vs scan {expected}",
        res.value
    );
}
