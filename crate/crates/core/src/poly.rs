//! The covariance kernel `g_tau(theta) = exp(i 2 pi theta tau)` and trigonometric
//! polynomials `Q(theta) = sum_{|k| <= n} lambda_k exp(i 2 pi theta k)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{CoreError, Result};

/// Default tolerance for deciding that a coefficient vector is real.
pub const REAL_COEFFICIENT_TOL: f64 = 1e-6;

/// `exp(i 2 pi theta tau)`. The phase is reduced modulo one turn before the
/// trigonometric evaluation, which keeps `g(-theta) = conj(g(theta))` exact.
pub fn eval_kernel(tau: f64, theta: f64) -> Complex64 {
    let turns = theta * tau;
    Complex64::cis(TAU * (turns - turns.round()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    n: usize,
    /// `lambda_{-n}, ..., lambda_n`.
    coeffs: Vec<Complex64>,
}

impl TrigPolynomial {
    pub fn new(n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * n + 1 {
            return Err(CoreError::InvalidSpec(format!(
                "degree {n} polynomial needs {} coefficients, got {}",
                2 * n + 1,
                coeffs.len()
            )));
        }
        Ok(TrigPolynomial { n, coeffs })
    }

    pub fn zero(n: usize) -> Self {
        TrigPolynomial {
            n,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * n + 1],
        }
    }

    /// The polynomial equal to `g_k` for an integer lag `|k| <= n`.
    pub fn kernel(n: usize, k: i64) -> Option<Self> {
        if k.unsigned_abs() as usize > n {
            return None;
        }
        let mut q = Self::zero(n);
        q.coeffs[(k + n as i64) as usize] = Complex64::new(1.0, 0.0);
        Some(q)
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `lambda_k`, or zero outside `-n..=n`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k + self.n as i64;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        let n = self.n as i64;
        (-n..=n)
            .map(|k| self.coeff(k) * eval_kernel(k as f64, theta))
            .sum()
    }

    /// `Q*(theta) = conj(Q(-theta))`, i.e. conjugated coefficients.
    pub fn conj_reflect(&self) -> Self {
        TrigPolynomial {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    /// `max_k |Im lambda_k| / (1 + max_k |lambda_k|)`.
    pub fn imaginary_fraction(&self) -> f64 {
        let max_im = self.coeffs.iter().fold(0.0_f64, |a, c| a.max(c.im.abs()));
        let max_abs = self.coeffs.iter().fold(0.0_f64, |a, c| a.max(c.norm()));
        max_im / (1.0 + max_abs)
    }

    pub fn is_real_coefficient(&self) -> bool {
        self.is_real_coefficient_within(REAL_COEFFICIENT_TOL)
    }

    pub fn is_real_coefficient_within(&self, tol: f64) -> bool {
        self.imaginary_fraction() <= tol
    }
}

/// `Q(theta)`.
pub fn eval_poly(q: &TrigPolynomial, theta: f64) -> Complex64 {
    q.eval(theta)
}
