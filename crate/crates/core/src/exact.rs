//! Phase-swept lower bound on the covariance uncertainty.
//!
//! For a fixed unimodular phase `phi`, maximizing `Re(phi (r_mu(tau) - r_nu(tau)))`
//! over grid spectra that agree on `0..=n` with total power `2 sigma^2` is a linear
//! program. Sweeping `phi` over the half circle and keeping the best value gives a
//! lower bound attained by an explicit pair of spectra.

use covbound_conic::{solve_lp, LinearProgram, SolveDiagnostics, SolveStatus, SolverConfig};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::bound::{upper_bound, BoundConfig, BoundReport};
use crate::error::{CoreError, Result};
use crate::grid::FrequencyGrid;
use crate::measure::DiscreteMeasurePair;
use crate::poly::eval_kernel;
use crate::spec::ProblemSpec;

#[derive(Debug, Clone)]
pub struct FixedPhaseSolution {
    pub value: f64,
    pub pair: DiscreteMeasurePair,
    pub diag: SolveDiagnostics,
}

#[derive(Debug, Clone)]
pub struct PhaseSweepResult {
    pub spec: ProblemSpec,
    /// Best value over the phases that solved.
    pub value: f64,
    pub phi0: Complex64,
    pub pair0: DiscreteMeasurePair,
    /// `(phi, value)` for every phase that solved, in phase order.
    pub per_phase_values: Vec<(Complex64, f64)>,
    /// Indices of phases whose solve failed.
    pub failed_phases: Vec<usize>,
    pub diag: SolveDiagnostics,
}

#[derive(Debug, Clone)]
pub struct GapReport {
    pub bound: BoundReport,
    pub sweep: PhaseSweepResult,
    /// `bound.bound - sweep.value`.
    pub gap: f64,
}

/// Constraint rows shared by every phase: real and imaginary moment differences
/// for `k = 0..=n` (the identically zero imaginary row at `k = 0` is dropped) and
/// the total mass.
struct MomentSystem {
    a: DMatrix<f64>,
    b: Vec<f64>,
    kernel: Vec<Complex64>,
}

impl MomentSystem {
    fn new(spec: &ProblemSpec, grid: &FrequencyGrid) -> Self {
        let pts = grid.points();
        let npts = pts.len();
        let rows = 2 * spec.n + 2;
        let mut a = DMatrix::zeros(rows, 2 * npts);
        for (j, &th) in pts.iter().enumerate() {
            a[(0, j)] = 1.0;
            a[(0, npts + j)] = -1.0;
            for k in 1..=spec.n {
                let e = eval_kernel(k as f64, th);
                let r = 2 * k - 1;
                a[(r, j)] = e.re;
                a[(r, npts + j)] = -e.re;
                a[(r + 1, j)] = e.im;
                a[(r + 1, npts + j)] = -e.im;
            }
            a[(rows - 1, j)] = 1.0;
            a[(rows - 1, npts + j)] = 1.0;
        }
        let mut b = vec![0.0; rows];
        b[rows - 1] = 2.0;
        let kernel = pts.iter().map(|&th| eval_kernel(spec.tau, th)).collect();
        MomentSystem { a, b, kernel }
    }

    fn solve(
        &self,
        spec: &ProblemSpec,
        grid: &Arc<FrequencyGrid>,
        phi: Complex64,
        cfg: &SolverConfig,
    ) -> Result<FixedPhaseSolution> {
        let npts = self.kernel.len();
        let gain: Vec<f64> = self.kernel.iter().map(|g| (phi * g).re).collect();
        let c: Vec<f64> = gain
            .iter()
            .copied()
            .chain(gain.iter().map(|g| -g))
            .collect();
        let lp = LinearProgram::maximize(c, &self.a, self.b.clone())?;
        let sol = solve_lp(&lp, cfg)?;
        // solved at unit power; spectra scale linearly
        let mu: Vec<f64> = sol.x[..npts]
            .iter()
            .map(|w| w.max(0.0) * spec.sigma2)
            .collect();
        let nu: Vec<f64> = sol.x[npts..]
            .iter()
            .map(|w| w.max(0.0) * spec.sigma2)
            .collect();
        let pair = DiscreteMeasurePair::new(Arc::clone(grid), mu, nu)?;
        let value = (phi * pair.covariance_difference(spec.tau)).re;
        Ok(FixedPhaseSolution {
            value,
            pair,
            diag: sol.diagnostics,
        })
    }
}

fn check_inputs(spec: &ProblemSpec, grid: &FrequencyGrid) -> Result<()> {
    if grid.band() != &spec.band {
        return Err(CoreError::GridMismatch);
    }
    if grid.is_empty() {
        return Err(CoreError::InvalidSpec("empty frequency grid".into()));
    }
    Ok(())
}

/// Best pair of spectra for one phase.
pub fn solve_fixed_phase(
    spec: &ProblemSpec,
    grid: &Arc<FrequencyGrid>,
    phi: Complex64,
    cfg: &SolverConfig,
) -> Result<FixedPhaseSolution> {
    if !phi.re.is_finite() || !phi.im.is_finite() || (phi.norm() - 1.0).abs() > 1e-9 {
        return Err(CoreError::NonUnimodularPhase(phi.norm()));
    }
    check_inputs(spec, grid)?;
    MomentSystem::new(spec, grid).solve(spec, grid, phi, cfg)
}

/// The `m`-th of `num_phases` phases on the upper half circle.
pub fn sweep_phase(m: usize, num_phases: usize) -> Complex64 {
    Complex64::from_polar(1.0, PI * m as f64 / num_phases as f64)
}

/// Maximize over `phi = exp(i pi m / num_phases)`, `m = 0..num_phases`.
///
/// Phases are solved in parallel on the current rayon pool. Ties go to the lowest
/// phase index. Failed phases are listed and degrade the aggregated status; the
/// sweep fails only when no phase solves.
pub fn phase_sweep(
    spec: &ProblemSpec,
    grid: &Arc<FrequencyGrid>,
    num_phases: usize,
    cfg: &SolverConfig,
) -> Result<PhaseSweepResult> {
    if num_phases == 0 {
        return Err(CoreError::NoPhases);
    }
    check_inputs(spec, grid)?;
    let system = MomentSystem::new(spec, grid);
    let results: Vec<Result<FixedPhaseSolution>> = (0..num_phases)
        .into_par_iter()
        .map(|m| system.solve(spec, grid, sweep_phase(m, num_phases), cfg))
        .collect();

    let mut best: Option<(usize, FixedPhaseSolution)> = None;
    let mut per_phase_values = Vec::with_capacity(num_phases);
    let mut failed_phases = Vec::new();
    let mut diags = Vec::with_capacity(num_phases);
    let mut first_err = None;
    for (m, r) in results.into_iter().enumerate() {
        match r {
            Ok(sol) => {
                per_phase_values.push((sweep_phase(m, num_phases), sol.value));
                diags.push(sol.diag);
                if best.as_ref().is_none_or(|(_, b)| sol.value > b.value) {
                    best = Some((m, sol));
                }
            }
            Err(e) => {
                failed_phases.push(m);
                first_err.get_or_insert(e);
            }
        }
    }
    let Some((m0, sol0)) = best else {
        return Err(first_err.expect("at least one phase was attempted"));
    };
    let mut diag = SolveDiagnostics::worst_of(&diags).expect("at least one phase solved");
    if !failed_phases.is_empty() && diag.status == SolveStatus::Optimal {
        diag.status = SolveStatus::MaxIter;
    }
    Ok(PhaseSweepResult {
        spec: spec.clone(),
        value: sol0.value,
        phi0: sweep_phase(m0, num_phases),
        pair0: sol0.pair,
        per_phase_values,
        failed_phases,
        diag,
    })
}

/// Difference between the convex upper bound and the phase-swept lower bound.
pub fn gap(
    spec: &ProblemSpec,
    grid: &Arc<FrequencyGrid>,
    num_phases: usize,
    cfg: &BoundConfig,
) -> Result<GapReport> {
    let bound = upper_bound(spec, grid, cfg)?;
    let sweep = phase_sweep(spec, grid, num_phases, &cfg.solver)?;
    Ok(GapReport {
        gap: bound.bound - sweep.value,
        bound,
        sweep,
    })
}
