//! Symmetric cones and the Nesterov-Todd scaling used by the interior-point core.
//!
//! Every vector handled here is a concatenation of cone blocks laid out in the
//! order given by a `&[Cone]` slice. Second-order cone blocks are stored as
//! `(u0, u1)` with the scalar head first.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cone {
    /// Nonnegative orthant `{u : u_i >= 0}` of the given dimension.
    Nonneg(usize),
    /// Second-order cone `{(u0, u1) : u0 >= |u1|}` of the given dimension (>= 1).
    SecondOrder(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Nonneg(d) | Cone::SecondOrder(d) => d,
        }
    }

    /// Barrier degree of the cone.
    pub fn degree(&self) -> usize {
        match *self {
            Cone::Nonneg(d) => d,
            Cone::SecondOrder(_) => 1,
        }
    }
}

pub(crate) fn total_dim(cones: &[Cone]) -> usize {
    cones.iter().map(Cone::dim).sum()
}

pub(crate) fn total_degree(cones: &[Cone]) -> usize {
    cones.iter().map(Cone::degree).sum()
}

/// `u0^2 - |u1|^2`, evaluated as a product to limit cancellation.
fn soc_residual(u: &[f64]) -> f64 {
    let tail = norm(&u[1..]);
    (u[0] - tail) * (u[0] + tail)
}

fn norm(u: &[f64]) -> f64 {
    u.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Write the cone identity element into `out`.
pub(crate) fn set_identity(cones: &[Cone], out: &mut [f64]) {
    let mut off = 0;
    for cone in cones {
        let d = cone.dim();
        let blk = &mut out[off..off + d];
        match cone {
            Cone::Nonneg(_) => blk.fill(1.0),
            Cone::SecondOrder(_) => {
                blk.fill(0.0);
                blk[0] = 1.0;
            }
        }
        off += d;
    }
}

/// Jordan product `a ∘ b`.
pub(crate) fn jordan_product(cones: &[Cone], a: &[f64], b: &[f64], out: &mut [f64]) {
    let mut off = 0;
    for cone in cones {
        let d = cone.dim();
        let (ab, bb) = (&a[off..off + d], &b[off..off + d]);
        let ob = &mut out[off..off + d];
        match cone {
            Cone::Nonneg(_) => {
                for i in 0..d {
                    ob[i] = ab[i] * bb[i];
                }
            }
            Cone::SecondOrder(_) => {
                ob[0] = dot(ab, bb);
                for i in 1..d {
                    ob[i] = ab[0] * bb[i] + bb[0] * ab[i];
                }
            }
        }
        off += d;
    }
}

/// Solve `lambda ∘ z = r` for `z`; `lambda` must lie in the cone interior.
pub(crate) fn jordan_solve(cones: &[Cone], lambda: &[f64], r: &[f64], out: &mut [f64]) {
    let mut off = 0;
    for cone in cones {
        let d = cone.dim();
        let (lb, rb) = (&lambda[off..off + d], &r[off..off + d]);
        let ob = &mut out[off..off + d];
        match cone {
            Cone::Nonneg(_) => {
                for i in 0..d {
                    ob[i] = rb[i] / lb[i];
                }
            }
            Cone::SecondOrder(_) => {
                let det = soc_residual(lb).max(f64::MIN_POSITIVE);
                let z0 = (lb[0] * rb[0] - dot(&lb[1..], &rb[1..])) / det;
                ob[0] = z0;
                for i in 1..d {
                    ob[i] = (rb[i] - z0 * lb[i]) / lb[0];
                }
            }
        }
        off += d;
    }
}

/// Largest `alpha <= alpha_max` keeping `u + alpha * du` inside the cone product.
pub(crate) fn max_step(cones: &[Cone], u: &[f64], du: &[f64], alpha_max: f64) -> f64 {
    let mut alpha = alpha_max;
    let mut off = 0;
    for cone in cones {
        let d = cone.dim();
        let (ub, db) = (&u[off..off + d], &du[off..off + d]);
        match cone {
            Cone::Nonneg(_) => {
                for i in 0..d {
                    if db[i] < 0.0 {
                        alpha = alpha.min(-ub[i] / db[i]);
                    }
                }
            }
            Cone::SecondOrder(_) => {
                alpha = alpha.min(soc_step(ub, db, alpha_max));
            }
        }
        off += d;
    }
    alpha.max(0.0)
}

fn soc_step(u: &[f64], du: &[f64], alpha_max: f64) -> f64 {
    // f(a) = (u0 + a d0)^2 - |u1 + a d1|^2 = qa a^2 + qb a + qc, with qc > 0 inside
    let qa = soc_residual(du);
    let qb = 2.0 * (u[0] * du[0] - dot(&u[1..], &du[1..]));
    let qc = soc_residual(u).max(0.0);
    let mut alpha = alpha_max;
    // the head must also stay nonnegative
    if du[0] < 0.0 {
        alpha = alpha.min(-u[0] / du[0]);
    }
    if qa.abs() <= f64::EPSILON * (du[0] * du[0] + 1e-300) {
        if qb < 0.0 {
            alpha = alpha.min(-qc / qb);
        }
        return alpha;
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return alpha;
    }
    let q = -0.5 * (qb + qb.signum() * disc.sqrt());
    let mut roots = [f64::INFINITY; 2];
    if q != 0.0 {
        roots[0] = q / qa;
        roots[1] = qc / q;
    }
    for r in roots {
        if r > 0.0 && r.is_finite() {
            alpha = alpha.min(r);
        }
    }
    alpha
}

/// Nesterov-Todd scaling for a primal-dual pair `(x, s)`: a symmetric positive
/// definite `W` with `W^{-1} x = W s = lambda`.
#[derive(Debug, Clone)]
pub(crate) struct NtScaling {
    cones: Vec<Cone>,
    /// Nonnegative blocks: `sqrt(x_i / s_i)`. Second-order blocks: the vector `v`.
    v: Vec<f64>,
    /// One entry per cone; only meaningful for second-order blocks.
    beta: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl NtScaling {
    pub fn new(cones: &[Cone], x: &[f64], s: &[f64]) -> Self {
        let n = x.len();
        let mut v = vec![0.0; n];
        let mut beta = vec![1.0; cones.len()];
        let mut off = 0;
        for (ci, cone) in cones.iter().enumerate() {
            let d = cone.dim();
            let (xb, sb) = (&x[off..off + d], &s[off..off + d]);
            match cone {
                Cone::Nonneg(_) => {
                    for i in 0..d {
                        v[off + i] = (xb[i] / sb[i]).sqrt();
                    }
                }
                Cone::SecondOrder(_) => {
                    let xr = soc_residual(xb).max(f64::MIN_POSITIVE).sqrt();
                    let sr = soc_residual(sb).max(f64::MIN_POSITIVE).sqrt();
                    let xbar: Vec<f64> = xb.iter().map(|u| u / xr).collect();
                    let sbar: Vec<f64> = sb.iter().map(|u| u / sr).collect();
                    let gamma = ((1.0 + dot(&xbar, &sbar)) / 2.0)
                        .max(f64::MIN_POSITIVE)
                        .sqrt();
                    let mut wbar = vec![0.0; d];
                    wbar[0] = (xbar[0] + sbar[0]) / (2.0 * gamma);
                    for i in 1..d {
                        wbar[i] = (xbar[i] - sbar[i]) / (2.0 * gamma);
                    }
                    let scale = (2.0 * (wbar[0] + 1.0)).sqrt();
                    v[off] = (wbar[0] + 1.0) / scale;
                    for i in 1..d {
                        v[off + i] = wbar[i] / scale;
                    }
                    beta[ci] = (xr / sr).sqrt();
                }
            }
            off += d;
        }
        let mut scaling = NtScaling {
            cones: cones.to_vec(),
            v,
            beta,
            lambda: vec![0.0; n],
        };
        let mut lambda = vec![0.0; n];
        scaling.apply(s, &mut lambda);
        scaling.lambda = lambda;
        scaling
    }

    /// `out = W u`.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let mut off = 0;
        for (ci, cone) in self.cones.iter().enumerate() {
            let d = cone.dim();
            let (ub, vb) = (&u[off..off + d], &self.v[off..off + d]);
            let ob = &mut out[off..off + d];
            match cone {
                Cone::Nonneg(_) => {
                    for i in 0..d {
                        ob[i] = vb[i] * ub[i];
                    }
                }
                Cone::SecondOrder(_) => {
                    // beta * (2 v v^T - J) u
                    let beta = self.beta[ci];
                    let vu = dot(vb, ub);
                    ob[0] = beta * (2.0 * vb[0] * vu - ub[0]);
                    for i in 1..d {
                        ob[i] = beta * (2.0 * vb[i] * vu + ub[i]);
                    }
                }
            }
            off += d;
        }
    }

    /// `out = W^{-1} u`.
    pub fn apply_inv(&self, u: &[f64], out: &mut [f64]) {
        let mut off = 0;
        for (ci, cone) in self.cones.iter().enumerate() {
            let d = cone.dim();
            let (ub, vb) = (&u[off..off + d], &self.v[off..off + d]);
            let ob = &mut out[off..off + d];
            match cone {
                Cone::Nonneg(_) => {
                    for i in 0..d {
                        ob[i] = ub[i] / vb[i];
                    }
                }
                Cone::SecondOrder(_) => {
                    // (1/beta) * (2 J v v^T J - J) u
                    let beta = self.beta[ci];
                    let jv_u = vb[0] * ub[0] - dot(&vb[1..], &ub[1..]);
                    ob[0] = (2.0 * vb[0] * jv_u - ub[0]) / beta;
                    for i in 1..d {
                        ob[i] = (-2.0 * vb[i] * jv_u + ub[i]) / beta;
                    }
                }
            }
            off += d;
        }
    }
}
