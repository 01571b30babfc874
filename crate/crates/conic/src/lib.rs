//! Dense interior-point solvers for small linear and second-order cone programs.
//!
//! The crate exposes one shared conic core ([`solve_conic`]) and two front ends
//! built on it:
//!
//! * [`solve_minimax`]: complex Chebyshev (sup-norm) fitting over a finite
//!   point set, posed as an epigraph program over 3-dimensional quadratic cones.
//!   The cone multipliers are returned as a dual certificate.
//! * [`solve_lp`]: linear programs in equality form with nonnegative variables.

mod cone;
mod ipm;
mod lp;
mod minimax;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cone::Cone;
pub use ipm::{solve_conic, ConicProblem, ConicSolution};
pub use lp::{solve_lp, LinearProgram, LpSolution, Sense};
pub use minimax::{solve_minimax, MinimaxProblem, MinimaxSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
    Unbounded,
}

/// Convergence report attached to every solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    /// `|A x - b|_inf / (1 + |b|_inf)`.
    pub primal_residual: f64,
    /// `|A'y + s - c|_inf / (1 + |c|_inf)`.
    pub dual_residual: f64,
    pub rel_gap: f64,
    pub status: SolveStatus,
}

impl SolveDiagnostics {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Combine diagnostics of several solves, keeping the worst of each field.
    pub fn worst_of<'a>(
        items: impl IntoIterator<Item = &'a SolveDiagnostics>,
    ) -> Option<SolveDiagnostics> {
        items.into_iter().copied().reduce(|a, b| SolveDiagnostics {
            iterations: a.iterations.max(b.iterations),
            primal_residual: a.primal_residual.max(b.primal_residual),
            dual_residual: a.dual_residual.max(b.dual_residual),
            rel_gap: a.rel_gap.max(b.rel_gap),
            status: if a.status == SolveStatus::Optimal {
                b.status
            } else {
                a.status
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Relative tolerance on residuals and duality gap.
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Snap LP solutions to an exactly feasible vertex when one is identifiable.
    pub polish: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_iter: 200,
            step_fraction: 0.99,
            polish: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("problem data contains non-finite values")]
    NonFinite,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("problem is infeasible")]
    Infeasible(SolveDiagnostics),
    #[error("objective is unbounded")]
    Unbounded(SolveDiagnostics),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}
