//! Homogeneous self-dual primal-dual interior-point method.
//!
//! Solves the standard-form pair
//!
//! ```text
//!   primal:  min c'x  s.t.  A x = b,  x in K
//!   dual:    max b'y  s.t.  A'y + s = c,  s in K
//! ```
//!
//! through the embedding `A x = b tau`, `A'y + s = c tau`, `b'y - c'x = kappa`
//! with `tau, kappa >= 0`, using Nesterov-Todd scaling and a Mehrotra
//! predictor-corrector. Newton systems are reduced to the `m x m` normal
//! equations `A W^2 A'`, which stay tiny for the problems this crate targets.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::cone::{self, Cone, NtScaling};
use crate::{SolveDiagnostics, SolveStatus, SolverConfig, SolverError};

/// A standard-form conic program. `at` holds `A'` (one column per equality row),
/// so `at.nrows()` is the number of primal variables.
#[derive(Debug, Clone, Copy)]
pub struct ConicProblem<'a> {
    pub c: &'a [f64],
    pub at: &'a DMatrix<f64>,
    pub b: &'a [f64],
    pub cones: &'a [Cone],
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    /// Primal point (or a dual-infeasibility ray when `Unbounded`).
    pub x: Vec<f64>,
    /// Dual multipliers (or a primal-infeasibility certificate when `Infeasible`).
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub diagnostics: SolveDiagnostics,
}

impl ConicProblem<'_> {
    fn validate(&self) -> Result<(), SolverError> {
        let n = self.at.nrows();
        let m = self.at.ncols();
        if self.c.len() != n {
            return Err(SolverError::Dimension(format!(
                "objective has {} entries, constraint matrix has {n} columns",
                self.c.len()
            )));
        }
        if self.b.len() != m {
            return Err(SolverError::Dimension(format!(
                "right-hand side has {} entries, constraint matrix has {m} rows",
                self.b.len()
            )));
        }
        if cone::total_dim(self.cones) != n {
            return Err(SolverError::Dimension(format!(
                "cones cover {} variables, problem has {n}",
                cone::total_dim(self.cones)
            )));
        }
        if self.cones.iter().any(|c| c.dim() == 0) {
            return Err(SolverError::Dimension("zero-dimensional cone".into()));
        }
        let finite = self
            .c
            .iter()
            .chain(self.b)
            .chain(self.at.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(SolverError::NonFinite);
        }
        Ok(())
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Factorization of the scaled normal matrix `A W^2 A'`.
struct NormalEquations {
    /// `W A'`, one column per equality row.
    g: DMatrix<f64>,
    chol: Cholesky<f64, nalgebra::Dyn>,
}

impl NormalEquations {
    fn new(at: &DMatrix<f64>, w: &NtScaling) -> Result<Self, SolverError> {
        let (n, m) = at.shape();
        let mut g = DMatrix::zeros(n, m);
        for j in 0..m {
            w.apply(at.column(j).as_slice(), g.column_mut(j).as_mut_slice());
        }
        let base = g.tr_mul(&g);
        let scale = base.diagonal().iter().fold(1.0_f64, |a, &d| a.max(d));
        let mut reg = 1e-14 * scale;
        for _ in 0..8 {
            let mut mat = base.clone();
            for i in 0..m {
                mat[(i, i)] += reg;
            }
            if let Some(chol) = Cholesky::new(mat) {
                return Ok(NormalEquations { g, chol });
            }
            reg *= 100.0;
        }
        Err(SolverError::NumericalFailure(
            "normal equations could not be factored".into(),
        ))
    }

    fn mul(&self, v: &DVector<f64>) -> DVector<f64> {
        self.g.tr_mul(&(&self.g * v))
    }

    /// Solve with a few rounds of iterative refinement against the unregularized matrix.
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut sol = self.chol.solve(rhs);
        for _ in 0..3 {
            let res = rhs - self.mul(&sol);
            if res.amax() <= 1e-15 * (1.0 + rhs.amax()) {
                break;
            }
            sol += self.chol.solve(&res);
        }
        sol
    }
}

#[derive(Clone)]
struct Iterate {
    x: Vec<f64>,
    y: DVector<f64>,
    s: Vec<f64>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    dx: Vec<f64>,
    dy: DVector<f64>,
    ds: Vec<f64>,
    dtau: f64,
    dkappa: f64,
}

struct Residuals {
    rp: DVector<f64>,
    rd: Vec<f64>,
    rg: f64,
}

/// Solve a standard-form conic program.
pub fn solve_conic(p: &ConicProblem<'_>, cfg: &SolverConfig) -> Result<ConicSolution, SolverError> {
    p.validate()?;
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(SolverError::InvalidConfig(
            "tolerance must be positive".into(),
        ));
    }
    let n = p.at.nrows();
    let m = p.at.ncols();
    let cones = p.cones;
    let nu = cone::total_degree(cones) as f64;
    let b = DVector::from_column_slice(p.b);
    let c = p.c;
    let bnorm = inf_norm(p.b);
    let cnorm = inf_norm(c);

    let mut it = Iterate {
        x: vec![0.0; n],
        y: DVector::zeros(m),
        s: vec![0.0; n],
        tau: 1.0,
        kappa: 1.0,
    };
    cone::set_identity(cones, &mut it.x);
    cone::set_identity(cones, &mut it.s);

    let mut e = vec![0.0; n];
    cone::set_identity(cones, &mut e);

    let mut diag = SolveDiagnostics {
        iterations: 0,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        rel_gap: f64::INFINITY,
        status: SolveStatus::MaxIter,
    };

    // best iterate seen so far, returned if the method stalls or breaks down
    let mut best: Option<(f64, Iterate, SolveDiagnostics)> = None;
    let mut iter = 0;
    loop {
        let res = residuals(p, &b, &it);
        let xs = dot(&it.x, &it.s);
        let mu = (xs + it.tau * it.kappa) / (nu + 1.0);

        let pcost = dot(c, &it.x) / it.tau;
        let dcost = b.dot(&it.y) / it.tau;
        diag.iterations = iter;
        diag.primal_residual = res.rp.amax() / it.tau / (1.0 + bnorm);
        diag.dual_residual = inf_norm(&res.rd) / it.tau / (1.0 + cnorm);
        let abs_gap = (pcost - dcost).abs().max(xs / (it.tau * it.tau));
        diag.rel_gap = abs_gap / (1.0 + pcost.abs().min(dcost.abs()));

        let score = diag
            .primal_residual
            .max(diag.dual_residual)
            .max(diag.rel_gap);
        if score.is_finite() && best.as_ref().is_none_or(|b| score < b.0) {
            best = Some((score, it.clone(), diag));
        }
        if diag.primal_residual <= cfg.tol
            && diag.dual_residual <= cfg.tol
            && diag.rel_gap <= cfg.tol
        {
            diag.status = SolveStatus::Optimal;
            break;
        }
        if let Some(status) = infeasibility(p, &b, &it, cfg.tol) {
            diag.status = status;
            break;
        }
        if iter >= cfg.max_iter {
            diag.status = SolveStatus::MaxIter;
            break;
        }

        let w = NtScaling::new(cones, &it.x, &it.s);
        let kkt = match NormalEquations::new(p.at, &w) {
            Ok(k) => k,
            Err(e) if best.is_none() => return Err(e),
            Err(_) => {
                diag.status = SolveStatus::MaxIter;
                break;
            }
        };

        // Direction components that do not depend on the right-hand side.
        let mut wc = vec![0.0; n];
        w.apply(c, &mut wc);
        let rhs2 = kkt.g.tr_mul(&DVector::from_column_slice(&wc)) + &b;
        let dy2 = kkt.solve(&rhs2);
        let mut gdy2: Vec<f64> = (&kkt.g * &dy2).iter().copied().collect();
        for (g, wc) in gdy2.iter_mut().zip(&wc) {
            *g -= wc;
        }
        let mut dx2 = vec![0.0; n];
        w.apply(&gdy2, &mut dx2);
        let fixed = (dy2, dx2);

        // Predictor.
        let mut rc = vec![0.0; n];
        cone::jordan_product(cones, &w.lambda, &w.lambda, &mut rc);
        rc.iter_mut().for_each(|v| *v = -*v);
        let rtau = -it.tau * it.kappa;
        let aff = direction(p, &w, &kkt, &fixed, &res, &it, 1.0, &rc, rtau);
        let alpha_aff = step_length(cones, &it, &aff);
        let sigma = (1.0 - alpha_aff).clamp(0.0, 1.0).powi(3);

        // Corrector with Mehrotra second-order term.
        let mut winv_dx = vec![0.0; n];
        let mut w_ds = vec![0.0; n];
        w.apply_inv(&aff.dx, &mut winv_dx);
        w.apply(&aff.ds, &mut w_ds);
        let mut cross = vec![0.0; n];
        cone::jordan_product(cones, &winv_dx, &w_ds, &mut cross);
        cone::jordan_product(cones, &w.lambda, &w.lambda, &mut rc);
        for i in 0..n {
            rc[i] = -rc[i] + sigma * mu * e[i] - cross[i];
        }
        let rtau = -it.tau * it.kappa + sigma * mu - aff.dtau * aff.dkappa;
        let dir = direction(p, &w, &kkt, &fixed, &res, &it, 1.0 - sigma, &rc, rtau);
        let alpha = (cfg.step_fraction * step_length(cones, &it, &dir)).min(1.0);

        let finite = alpha.is_finite()
            && dir.dtau.is_finite()
            && dir.dkappa.is_finite()
            && dir
                .dx
                .iter()
                .chain(&dir.ds)
                .chain(dir.dy.iter())
                .all(|v| v.is_finite());
        if !finite || alpha < 1e-14 {
            diag.status = SolveStatus::MaxIter;
            break;
        }
        for i in 0..n {
            it.x[i] += alpha * dir.dx[i];
            it.s[i] += alpha * dir.ds[i];
        }
        it.y.axpy(alpha, &dir.dy, 1.0);
        it.tau += alpha * dir.dtau;
        it.kappa += alpha * dir.dkappa;
        iter += 1;
    }

    if diag.status == SolveStatus::MaxIter {
        if let Some((_, b, d)) = best {
            it = b;
            diag = SolveDiagnostics {
                status: SolveStatus::MaxIter,
                iterations: iter,
                ..d
            };
        }
    }

    let scale = match diag.status {
        SolveStatus::Optimal | SolveStatus::MaxIter => 1.0 / it.tau,
        _ => 1.0,
    };
    let x: Vec<f64> = it.x.iter().map(|v| v * scale).collect();
    let y: Vec<f64> = it.y.iter().map(|v| v * scale).collect();
    let s: Vec<f64> = it.s.iter().map(|v| v * scale).collect();
    if !x.iter().chain(&y).chain(&s).all(|v| v.is_finite()) {
        return Err(SolverError::NumericalFailure(
            "iterate left the finite range".into(),
        ));
    }
    Ok(ConicSolution {
        primal_objective: dot(c, &x),
        dual_objective: dot(p.b, &y),
        x,
        y,
        s,
        diagnostics: diag,
    })
}

fn residuals(p: &ConicProblem<'_>, b: &DVector<f64>, it: &Iterate) -> Residuals {
    let x = DVector::from_column_slice(&it.x);
    let rp = p.at.tr_mul(&x) - b * it.tau;
    let aty = p.at * &it.y;
    let rd: Vec<f64> = (0..it.x.len())
        .map(|i| aty[i] + it.s[i] - p.c[i] * it.tau)
        .collect();
    let rg = it.kappa + dot(p.c, &it.x) - b.dot(&it.y);
    Residuals { rp, rd, rg }
}

fn infeasibility(
    p: &ConicProblem<'_>,
    b: &DVector<f64>,
    it: &Iterate,
    tol: f64,
) -> Option<SolveStatus> {
    let by = b.dot(&it.y);
    if by > 0.0 {
        let aty = p.at * &it.y;
        let r = (0..it.s.len()).fold(0.0_f64, |acc, i| acc.max((aty[i] + it.s[i]).abs()));
        if r <= tol * by {
            return Some(SolveStatus::Infeasible);
        }
    }
    let cx = dot(p.c, &it.x);
    if cx < 0.0 {
        let ax = p.at.tr_mul(&DVector::from_column_slice(&it.x));
        if ax.amax() <= tol * (-cx) {
            return Some(SolveStatus::Unbounded);
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn direction(
    p: &ConicProblem<'_>,
    w: &NtScaling,
    kkt: &NormalEquations,
    fixed: &(DVector<f64>, Vec<f64>),
    res: &Residuals,
    it: &Iterate,
    eta: f64,
    rc: &[f64],
    rtau: f64,
) -> Direction {
    let n = it.x.len();
    let cones = p.cones;
    let (dy2, dx2) = fixed;

    let mut dc = vec![0.0; n];
    cone::jordan_solve(cones, &w.lambda, rc, &mut dc);
    let mut winv_dc = vec![0.0; n];
    w.apply_inv(&dc, &mut winv_dc);
    let q: Vec<f64> = (0..n).map(|i| eta * res.rd[i] + winv_dc[i]).collect();

    let mut wq = vec![0.0; n];
    w.apply(&q, &mut wq);
    let wq = DVector::from_column_slice(&wq);
    let rhs1 = -(&res.rp * eta) - kkt.g.tr_mul(&wq);
    let dy1 = kkt.solve(&rhs1);
    let inner = &kkt.g * &dy1 + &wq;
    let mut dx1 = vec![0.0; n];
    w.apply(inner.as_slice(), &mut dx1);

    let b = p.b;
    let num = -eta * res.rg - rtau / it.tau - dot(p.c, &dx1) + dot(b, dy1.as_slice());
    let den = dot(p.c, dx2) - dot(b, dy2.as_slice()) - it.kappa / it.tau;
    let dtau = num / den;

    let dx: Vec<f64> = (0..n).map(|i| dx1[i] + dtau * dx2[i]).collect();
    let dy = dy1 + dy2 * dtau;
    // taken from the linearized dual equality rather than the complementarity
    // row, which keeps the dual residual from drifting once W is badly scaled
    let atdy = p.at * &dy;
    let ds: Vec<f64> = (0..n)
        .map(|i| -eta * res.rd[i] - atdy[i] + p.c[i] * dtau)
        .collect();
    let dkappa = (rtau - it.kappa * dtau) / it.tau;
    Direction {
        dx,
        dy,
        ds,
        dtau,
        dkappa,
    }
}

fn step_length(cones: &[Cone], it: &Iterate, d: &Direction) -> f64 {
    let mut alpha = cone::max_step(cones, &it.x, &d.dx, f64::INFINITY);
    alpha = alpha.min(cone::max_step(cones, &it.s, &d.ds, alpha));
    if d.dtau < 0.0 {
        alpha = alpha.min(-it.tau / d.dtau);
    }
    if d.dkappa < 0.0 {
        alpha = alpha.min(-it.kappa / d.dkappa);
    }
    alpha.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solves_small_socp() {
        // min x0 s.t. x1 = 3, x2 = 4, (x0, x1, x2) in Q3 -> x0 = 5
        let at = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let p = ConicProblem {
            c: &[1.0, 0.0, 0.0],
            at: &at,
            b: &[3.0, 4.0],
            cones: &[Cone::SecondOrder(3)],
        };
        let sol = solve_conic(&p, &SolverConfig::default()).unwrap();
        assert_eq!(sol.diagnostics.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.primal_objective, 5.0, epsilon = 1e-7);
        assert_relative_eq!(sol.dual_objective, 5.0, epsilon = 1e-7);
    }

    #[test]
    fn detects_infeasible_orthant_problem() {
        let at = DMatrix::from_row_slice(1, 1, &[1.0]);
        let p = ConicProblem {
            c: &[1.0],
            at: &at,
            b: &[-1.0],
            cones: &[Cone::Nonneg(1)],
        };
        let sol = solve_conic(&p, &SolverConfig::default()).unwrap();
        assert_eq!(sol.diagnostics.status, SolveStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded_orthant_problem() {
        // min -x0 s.t. x0 - x1 = 1
        let at = DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let p = ConicProblem {
            c: &[-1.0, 0.0],
            at: &at,
            b: &[1.0],
            cones: &[Cone::Nonneg(2)],
        };
        let sol = solve_conic(&p, &SolverConfig::default()).unwrap();
        assert_eq!(sol.diagnostics.status, SolveStatus::Unbounded);
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let at = DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let p = ConicProblem {
            c: &[-1.0],
            at: &at,
            b: &[1.0],
            cones: &[Cone::Nonneg(2)],
        };
        assert!(matches!(
            solve_conic(&p, &SolverConfig::default()),
            Err(SolverError::Dimension(_))
        ));
    }
}
