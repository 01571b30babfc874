//! Equality-form linear programs over the nonnegative orthant.

use nalgebra::{DMatrix, DVector};

use crate::cone::Cone;
use crate::ipm::{solve_conic, ConicProblem};
use crate::{SolveDiagnostics, SolveStatus, SolverConfig, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// `opt c'x  s.t.  A x = b,  x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    sense: Sense,
    c: Vec<f64>,
    /// `A'`, stored with one column per equality row.
    at: DMatrix<f64>,
    b: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    /// `c'x` at the returned point, in the caller's sense.
    pub value: f64,
    pub x: Vec<f64>,
    /// Equality multipliers (for the minimization form).
    pub y: Vec<f64>,
    pub diagnostics: SolveDiagnostics,
    /// Whether `x` was snapped to a basic solution of `A x = b`.
    pub polished: bool,
}

impl LinearProgram {
    /// `a` is the `rows x variables` constraint matrix.
    pub fn new(
        sense: Sense,
        c: Vec<f64>,
        a: &DMatrix<f64>,
        b: Vec<f64>,
    ) -> Result<Self, SolverError> {
        if a.ncols() != c.len() || a.nrows() != b.len() {
            return Err(SolverError::Dimension(format!(
                "constraint matrix is {}x{}, objective has {} entries, rhs has {}",
                a.nrows(),
                a.ncols(),
                c.len(),
                b.len()
            )));
        }
        if c.is_empty() {
            return Err(SolverError::Dimension(
                "linear program has no variables".into(),
            ));
        }
        Ok(LinearProgram {
            sense,
            c,
            at: a.transpose(),
            b,
        })
    }

    pub fn maximize(c: Vec<f64>, a: &DMatrix<f64>, b: Vec<f64>) -> Result<Self, SolverError> {
        Self::new(Sense::Maximize, c, a, b)
    }

    pub fn minimize(c: Vec<f64>, a: &DMatrix<f64>, b: Vec<f64>) -> Result<Self, SolverError> {
        Self::new(Sense::Minimize, c, a, b)
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// `|A x - b|_inf`.
    pub fn constraint_violation(&self, x: &[f64]) -> f64 {
        let ax = self.at.tr_mul(&DVector::from_column_slice(x));
        ax.iter()
            .zip(&self.b)
            .fold(0.0, |acc, (l, r)| acc.max((l - r).abs()))
    }
}

pub fn solve_lp(p: &LinearProgram, cfg: &SolverConfig) -> Result<LpSolution, SolverError> {
    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let c: Vec<f64> = p.c.iter().map(|v| sign * v).collect();
    let cones = [Cone::Nonneg(p.num_vars())];
    let sol = solve_conic(
        &ConicProblem {
            c: &c,
            at: &p.at,
            b: &p.b,
            cones: &cones,
        },
        cfg,
    )?;
    match sol.diagnostics.status {
        SolveStatus::Infeasible => return Err(SolverError::Infeasible(sol.diagnostics)),
        SolveStatus::Unbounded => return Err(SolverError::Unbounded(sol.diagnostics)),
        SolveStatus::Optimal | SolveStatus::MaxIter => {}
    }

    let mut x: Vec<f64> = sol.x.iter().map(|v| v.max(0.0)).collect();
    let mut polished = false;
    if cfg.polish && sol.diagnostics.is_optimal() {
        if let Some(vertex) = polish_to_vertex(p, &c, &x, cfg.tol) {
            x = vertex;
            polished = true;
        }
    }
    Ok(LpSolution {
        value: p.objective(&x),
        x,
        y: sol.y,
        diagnostics: sol.diagnostics,
        polished,
    })
}

/// Try to recover the optimal vertex from an interior-point solution by solving
/// `B x_B = b` on the columns carrying the largest entries.
fn polish_to_vertex(p: &LinearProgram, c_min: &[f64], x: &[f64], tol: f64) -> Option<Vec<f64>> {
    let m = p.num_rows();
    let n = p.num_vars();
    if m == 0 || m > n {
        return None;
    }
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps the selection deterministic under ties
    order.sort_by(|&i, &j| x[j].total_cmp(&x[i]));
    let basis = &order[..m];
    let bmat = DMatrix::from_fn(m, m, |r, k| p.at[(basis[k], r)]);
    let xb = bmat.lu().solve(&DVector::from_column_slice(&p.b))?;
    let scale = 1.0 + xb.amax();
    if xb.iter().any(|v| !v.is_finite() || *v < -1e-10 * scale) {
        return None;
    }
    let mut vertex = vec![0.0; n];
    for (k, &i) in basis.iter().enumerate() {
        vertex[i] = xb[k].max(0.0);
    }
    let bnorm = p.b.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if p.constraint_violation(&vertex) > 1e-11 * (1.0 + bnorm) {
        return None;
    }
    let obj = |v: &[f64]| -> f64 { c_min.iter().zip(v).map(|(c, v)| c * v).sum() };
    let (old, new) = (obj(x), obj(&vertex));
    if new > old + tol * (1.0 + old.abs()) {
        return None;
    }
    Some(vertex)
}
