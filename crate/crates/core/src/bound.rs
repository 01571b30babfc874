//! Convex upper bound on the covariance uncertainty.
//!
//! The worst-case discrepancy `|r_mu(tau) - r_nu(tau)|` over spectra that agree on
//! the lags `-n..=n` is bounded by `2 sigma^2 min_Q |g_tau - Q|_sup`, where `Q`
//! ranges over trigonometric polynomials of degree `n`. On a grid the minimum is
//! a small second-order cone program; its multipliers form an annihilating
//! measure `psi0` in the unit TV ball that certifies the optimum, and the same
//! certificate problem is also solved on its own as a cross-check.

use covbound_conic::{
    solve_conic, solve_minimax, Cone, ConicProblem, MinimaxProblem, SolveDiagnostics, SolveStatus,
    SolverConfig, SolverError,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{CoreError, Result};
use crate::grid::FrequencyGrid;
use crate::measure::ComplexMeasure;
use crate::poly::{eval_kernel, TrigPolynomial};
use crate::spec::ProblemSpec;
use crate::tolerances::{CLUSTER_WINDOW_STEPS, OMEGA_TOL, ZERO_RESIDUAL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMode {
    /// Restrict to real coefficients whenever band and grid are mirror-symmetric.
    Auto,
    /// Always optimize over complex coefficients.
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundConfig {
    pub solver: SolverConfig,
    pub omega_tol: f64,
    pub cluster_window: usize,
    pub coefficients: CoefficientMode,
    /// Also solve the certificate problem independently and report the gap.
    pub cross_check_dual: bool,
}

impl Default for BoundConfig {
    fn default() -> Self {
        BoundConfig {
            solver: SolverConfig::default(),
            omega_tol: OMEGA_TOL,
            cluster_window: CLUSTER_WINDOW_STEPS,
            coefficients: CoefficientMode::Auto,
            cross_check_dual: true,
        }
    }
}

/// Frequencies where the residual modulus `|g_tau - Q0|` attains its maximum.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ExtremalSet {
    /// The residual vanishes identically (the lag is one of the specified lags).
    DegenerateZeroResidual,
    Points(Vec<f64>),
}

impl ExtremalSet {
    pub fn points(&self) -> &[f64] {
        match self {
            ExtremalSet::DegenerateZeroResidual => &[],
            ExtremalSet::Points(p) => p,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, ExtremalSet::DegenerateZeroResidual)
    }

    /// Largest distance from a point to the nearest mirror image `-omega'`.
    pub fn mirror_mismatch(&self) -> f64 {
        let pts = self.points();
        pts.iter()
            .map(|w| {
                pts.iter()
                    .map(|v| (w + v).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub spec: ProblemSpec,
    /// `2 sigma^2 t_star`.
    pub bound: f64,
    /// Grid sup-norm of `g_tau - Q0`.
    pub t_star: f64,
    pub q0: TrigPolynomial,
    /// Dual certificate; the zero measure in the degenerate case.
    pub psi0: ComplexMeasure,
    pub omega: ExtremalSet,
    /// `Re <psi0, g_tau>`.
    pub certificate_value: f64,
    /// Optimum of the independently solved certificate problem.
    pub dual_value: Option<f64>,
    /// `t_star` minus the dual value (independent one when available).
    pub duality_gap: f64,
    pub real_coefficients: bool,
    pub diag: SolveDiagnostics,
    pub dual_diag: Option<SolveDiagnostics>,
}

#[derive(Debug, Clone)]
pub struct DualBound {
    /// `max Re <psi, g_tau>` over annihilating measures with `|psi|_TV <= 1`.
    pub value: f64,
    pub psi: ComplexMeasure,
    pub diag: SolveDiagnostics,
}

fn check_grid(spec: &ProblemSpec, grid: &FrequencyGrid) -> Result<()> {
    if grid.band() != &spec.band {
        return Err(CoreError::GridMismatch);
    }
    if grid.is_empty() {
        return Err(CoreError::InvalidSpec("empty frequency grid".into()));
    }
    Ok(())
}

fn use_real_coefficients(spec: &ProblemSpec, grid: &FrequencyGrid, mode: CoefficientMode) -> bool {
    mode == CoefficientMode::Auto && spec.band.is_symmetric() && grid.reflection().is_some()
}

fn minimax_problem(spec: &ProblemSpec, grid: &FrequencyGrid, real: bool) -> Result<MinimaxProblem> {
    let pts = grid.points();
    let n = spec.n as i64;
    let targets = pts.iter().map(|&th| eval_kernel(spec.tau, th)).collect();
    let basis = DMatrix::from_fn(pts.len(), 2 * spec.n + 1, |j, k| {
        eval_kernel((k as i64 - n) as f64, pts[j])
    });
    Ok(MinimaxProblem::new(targets, basis, real)?)
}

/// Solve the discretized minimax problem and assemble its certificate.
pub fn upper_bound(
    spec: &ProblemSpec,
    grid: &Arc<FrequencyGrid>,
    cfg: &BoundConfig,
) -> Result<BoundReport> {
    check_grid(spec, grid)?;
    let real = use_real_coefficients(spec, grid, cfg.coefficients);
    let problem = minimax_problem(spec, grid, real)?;
    let sol = solve_minimax(&problem, &cfg.solver)?;

    let q0 = TrigPolynomial::new(spec.n, sol.coeffs)?;
    let t_star = sol.t_star;
    let degenerate = t_star <= ZERO_RESIDUAL_TOL;

    let psi0 = if degenerate {
        ComplexMeasure::zero(Arc::clone(grid))
    } else {
        let raw = ComplexMeasure::new(Arc::clone(grid), sol.dual_weights)?;
        if real {
            // the restricted solve only annihilates real parts of the moments;
            // symmetrizing restores full annihilation at equal objective
            raw.symmetrized()
                .expect("real mode requires a mirrored grid")
        } else {
            raw
        }
    };
    let omega = extract_support(&q0, spec, grid, cfg.omega_tol, cfg.cluster_window);
    let certificate_value = psi0.pair_with_kernel(spec.tau).re;

    let (dual_value, dual_diag) = if cfg.cross_check_dual {
        let d = dual_bound(spec, grid, cfg)?;
        (Some(d.value), Some(d.diag))
    } else {
        (None, None)
    };
    let duality_gap = t_star - dual_value.unwrap_or(certificate_value);

    Ok(BoundReport {
        spec: spec.clone(),
        bound: 2.0 * spec.sigma2 * t_star,
        t_star,
        q0,
        psi0,
        omega,
        certificate_value,
        dual_value,
        duality_gap,
        real_coefficients: real,
        diag: sol.diagnostics,
        dual_diag,
    })
}

/// Maximize `Re <psi, g_tau>` over grid measures with vanishing moments on
/// `-n..=n` and total variation at most one.
pub fn dual_bound(
    spec: &ProblemSpec,
    grid: &Arc<FrequencyGrid>,
    cfg: &BoundConfig,
) -> Result<DualBound> {
    check_grid(spec, grid)?;
    let pts = grid.points();
    let npts = pts.len();
    let n = spec.n as i64;
    let nvars = 3 * npts + 1;
    let nrows = 1 + 2 * (2 * spec.n + 1);

    let mut at = DMatrix::zeros(nvars, nrows);
    let mut c = vec![0.0; nvars];
    for (j, &th) in pts.iter().enumerate() {
        let r = 3 * j;
        at[(r, 0)] = 1.0;
        let g = eval_kernel(spec.tau, th);
        c[r + 1] = -g.re;
        c[r + 2] = g.im;
        for (idx, k) in (-n..=n).enumerate() {
            let e = eval_kernel(k as f64, th);
            let col = 1 + 2 * idx;
            at[(r + 1, col)] = e.re;
            at[(r + 2, col)] = -e.im;
            at[(r + 1, col + 1)] = e.im;
            at[(r + 2, col + 1)] = e.re;
        }
    }
    at[(3 * npts, 0)] = 1.0;
    let mut b = vec![0.0; nrows];
    b[0] = 1.0;
    let mut cones = vec![Cone::SecondOrder(3); npts];
    cones.push(Cone::Nonneg(1));

    let sol = solve_conic(
        &ConicProblem {
            c: &c,
            at: &at,
            b: &b,
            cones: &cones,
        },
        &cfg.solver,
    )?;
    if !matches!(
        sol.diagnostics.status,
        SolveStatus::Optimal | SolveStatus::MaxIter
    ) {
        return Err(SolverError::NumericalFailure(format!(
            "certificate program reported {:?}",
            sol.diagnostics.status
        ))
        .into());
    }
    let weights = (0..npts)
        .map(|j| Complex64::new(sol.x[3 * j + 1], sol.x[3 * j + 2]))
        .collect();
    let psi = ComplexMeasure::new(Arc::clone(grid), weights)?;
    Ok(DualBound {
        value: psi.pair_with_kernel(spec.tau).re,
        psi,
        diag: sol.diagnostics,
    })
}

/// Cluster the grid points where `|g_tau - Q0|` is within `omega_tol * max` of its
/// maximum; each cluster of points no more than `window` steps apart is
/// represented by its residual maximizer.
pub fn extract_support(
    q0: &TrigPolynomial,
    spec: &ProblemSpec,
    grid: &FrequencyGrid,
    omega_tol: f64,
    window: usize,
) -> ExtremalSet {
    let pts = grid.points();
    let resid: Vec<f64> = pts
        .iter()
        .map(|&th| (eval_kernel(spec.tau, th) - q0.eval(th)).norm())
        .collect();
    let max = resid.iter().copied().fold(0.0, f64::max);
    if max <= ZERO_RESIDUAL_TOL {
        return ExtremalSet::DegenerateZeroResidual;
    }
    let threshold = (1.0 - omega_tol) * max;
    let reach = window.max(1) as f64 * grid.step() * (1.0 + 1e-9);

    let mut out = Vec::new();
    let mut cluster: Vec<usize> = Vec::new();
    let flush = |cluster: &mut Vec<usize>, out: &mut Vec<f64>| {
        if cluster.is_empty() {
            return;
        }
        let top = cluster.iter().map(|&j| resid[j]).fold(f64::MIN, f64::max);
        // ties resolved towards the cluster centre so mirrored clusters pick mirrored points
        let centre = 0.5 * (pts[cluster[0]] + pts[*cluster.last().unwrap()]);
        let best = cluster
            .iter()
            .copied()
            .filter(|&j| resid[j] >= top * (1.0 - 1e-14))
            .min_by(|&a, &b| (pts[a] - centre).abs().total_cmp(&(pts[b] - centre).abs()))
            .unwrap();
        out.push(pts[best]);
        cluster.clear();
    };
    for (j, &r) in resid.iter().enumerate() {
        if r < threshold {
            continue;
        }
        if let Some(&last) = cluster.last() {
            if pts[j] - pts[last] > reach {
                flush(&mut cluster, &mut out);
            }
        }
        cluster.push(j);
    }
    flush(&mut cluster, &mut out);
    ExtremalSet::Points(out)
}

/// Total variation of `psi` at grid points farther than `window` steps from every
/// point of `omega`.
pub fn off_support_mass(psi: &ComplexMeasure, omega: &ExtremalSet, window: usize) -> f64 {
    let reach = window as f64 * psi.grid().step() * (1.0 + 1e-9);
    let omega = omega.points();
    psi.grid()
        .points()
        .iter()
        .zip(psi.weights())
        .filter(|(th, _)| omega.iter().all(|w| (*th - w).abs() > reach))
        .map(|(_, w)| w.norm())
        .sum()
}
