//! Complex sup-norm approximation over a finite point set.
//!
//! Given targets `g_j` and basis evaluations `B_jk`, find coefficients `c` minimizing
//! `max_j |g_j - sum_k B_jk c_k|`. The epigraph form
//!
//! ```text
//!   max -t   s.t.   (t, Re r_j, Im r_j) in Q3,   r_j = g_j - (B c)_j
//! ```
//!
//! is the dual side of a standard-form cone program; the primal cone variables
//! are the multipliers of the residual constraints and form a dual certificate.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cone::Cone;
use crate::ipm::{solve_conic, ConicProblem};
use crate::{SolveDiagnostics, SolveStatus, SolverConfig, SolverError};

#[derive(Debug, Clone)]
pub struct MinimaxProblem {
    targets: Vec<Complex64>,
    basis: DMatrix<Complex64>,
    real_coefficients_only: bool,
}

#[derive(Debug, Clone)]
pub struct MinimaxSolution {
    /// `max_j |g_j - (B c)_j|` evaluated at the returned coefficients.
    pub t_star: f64,
    pub coeffs: Vec<Complex64>,
    /// Multipliers `psi_j` of the residual constraints. They satisfy
    /// `sum |psi_j| <= 1` and `Re sum_j g_j psi_j = t_star` at optimality; they
    /// annihilate every basis column (`sum_j B_jk psi_j = 0`) for complex
    /// coefficients, and only its real part when coefficients are restricted to
    /// be real.
    pub dual_weights: Vec<Complex64>,
    pub diagnostics: SolveDiagnostics,
}

impl MinimaxProblem {
    /// `basis` is `points x coefficients`; `targets` has one entry per point.
    pub fn new(
        targets: Vec<Complex64>,
        basis: DMatrix<Complex64>,
        real_coefficients_only: bool,
    ) -> Result<Self, SolverError> {
        if targets.is_empty() {
            return Err(SolverError::Dimension(
                "minimax problem needs at least one point".into(),
            ));
        }
        if basis.nrows() != targets.len() {
            return Err(SolverError::Dimension(format!(
                "basis has {} rows for {} targets",
                basis.nrows(),
                targets.len()
            )));
        }
        let finite = targets
            .iter()
            .chain(basis.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(SolverError::NonFinite);
        }
        Ok(MinimaxProblem {
            targets,
            basis,
            real_coefficients_only,
        })
    }

    pub fn targets(&self) -> &[Complex64] {
        &self.targets
    }

    pub fn basis(&self) -> &DMatrix<Complex64> {
        &self.basis
    }

    pub fn real_coefficients_only(&self) -> bool {
        self.real_coefficients_only
    }

    pub fn num_points(&self) -> usize {
        self.targets.len()
    }

    pub fn num_coefficients(&self) -> usize {
        self.basis.ncols()
    }

    /// `max_j |g_j - (B c)_j|`.
    pub fn max_residual(&self, coeffs: &[Complex64]) -> f64 {
        (0..self.num_points())
            .map(|j| self.residual(j, coeffs).norm())
            .fold(0.0, f64::max)
    }

    pub fn residual(&self, j: usize, coeffs: &[Complex64]) -> Complex64 {
        let fit: Complex64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| self.basis[(j, k)] * c)
            .sum();
        self.targets[j] - fit
    }
}

pub fn solve_minimax(
    p: &MinimaxProblem,
    cfg: &SolverConfig,
) -> Result<MinimaxSolution, SolverError> {
    let npts = p.num_points();
    let ncoef = p.num_coefficients();
    let per_coef = if p.real_coefficients_only { 1 } else { 2 };
    let m = 1 + per_coef * ncoef;
    let n = 3 * npts;

    let mut at = DMatrix::zeros(n, m);
    let mut c = vec![0.0; n];
    for j in 0..npts {
        let r = 3 * j;
        at[(r, 0)] = -1.0;
        c[r + 1] = p.targets[j].re;
        c[r + 2] = p.targets[j].im;
        for k in 0..ncoef {
            let bjk = p.basis[(j, k)];
            let col = 1 + per_coef * k;
            at[(r + 1, col)] = bjk.re;
            at[(r + 2, col)] = bjk.im;
            if !p.real_coefficients_only {
                // imaginary part of the coefficient multiplies i * B_jk
                at[(r + 1, col + 1)] = -bjk.im;
                at[(r + 2, col + 1)] = bjk.re;
            }
        }
    }
    let mut b = vec![0.0; m];
    b[0] = -1.0;
    let cones = vec![Cone::SecondOrder(3); npts];

    let sol = solve_conic(
        &ConicProblem {
            c: &c,
            at: &at,
            b: &b,
            cones: &cones,
        },
        cfg,
    )?;
    match sol.diagnostics.status {
        SolveStatus::Optimal | SolveStatus::MaxIter => {}
        status => {
            return Err(SolverError::NumericalFailure(format!(
                "minimax epigraph program reported {status:?}"
            )))
        }
    }

    let coeffs: Vec<Complex64> = (0..ncoef)
        .map(|k| {
            let col = 1 + per_coef * k;
            if p.real_coefficients_only {
                Complex64::new(sol.y[col], 0.0)
            } else {
                Complex64::new(sol.y[col], sol.y[col + 1])
            }
        })
        .collect();
    let dual_weights = (0..npts)
        .map(|j| Complex64::new(-sol.x[3 * j + 1], sol.x[3 * j + 2]))
        .collect();

    Ok(MinimaxSolution {
        t_star: p.max_residual(&coeffs),
        coeffs,
        dual_weights,
        diagnostics: sol.diagnostics,
    })
}
