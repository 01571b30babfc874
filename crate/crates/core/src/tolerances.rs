//! Default discretization parameters and comparison thresholds.

/// Default frequency grid spacing (cycles/sample).
pub const DEFAULT_GRID_STEP: f64 = 1.0 / 2000.0;

/// Default number of phases on the half circle for the lower-bound sweep.
pub const DEFAULT_NUM_PHASES: usize = 360;

/// Relative tolerance (w.r.t. the optimal sup-norm) for membership in the extremal set.
pub const OMEGA_TOL: f64 = 1e-4;

/// Qualifying grid points closer than this many steps belong to one extremal cluster.
pub const CLUSTER_WINDOW_STEPS: usize = 2;

/// A sup-norm optimum at or below this value is treated as an exact fit.
pub const ZERO_RESIDUAL_TOL: f64 = 1e-7;

/// Absolute tolerance for dual-certificate checks (annihilation, TV ball, alignment).
pub const CERTIFICATE_TOL: f64 = 1e-6;

/// Maximum admissible change of a bound when the grid step is halved.
pub const GRID_REFINEMENT_TOL: f64 = 1e-4;

/// Maximum admissible change of a sweep value when the phase count is doubled.
pub const PHASE_REFINEMENT_TOL: f64 = 1e-5;

/// Fraction of the certificate's total variation allowed outside the
/// neighborhoods of the extremal set.
pub const OFF_SUPPORT_MASS_FRACTION: f64 = 1e-4;

/// Allowed asymmetry of the symmetrized certificate, relative to its TV norm.
pub const SYMMETRY_RESIDUAL_FRACTION: f64 = 1e-4;

/// Threshold below which a bound/sweep gap is indistinguishable from solver noise.
pub fn sharpness_tol(sigma2: f64, solver_tol: f64) -> f64 {
    1e-5_f64.max(10.0 * solver_tol) * 2.0 * sigma2
}

/// Slack used when comparing the convex bound against the phase sweep.
pub fn cross_tol(sigma2: f64) -> f64 {
    1e-6 * 2.0 * sigma2
}
