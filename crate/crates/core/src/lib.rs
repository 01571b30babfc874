//! Bounds on the uncertainty of a bandlimited covariance function at lags where
//! it is not specified.

pub mod analysis;
pub mod band;
pub mod bound;
pub mod error;
pub mod exact;
pub mod grid;
pub mod measure;
pub mod poly;
pub mod spec;
pub mod tolerances;

pub use analysis::{
    diagnostics_battery, linspace, refinement_study, sweep_tau, AnalysisConfig, Check, CheckStatus,
    DiagnosticsReport, RefinementReport, SweepCurve, SweepMetadata,
};
pub use band::{make_band, FrequencyBand, Interval};
pub use bound::{
    dual_bound, extract_support, off_support_mass, upper_bound, BoundConfig, BoundReport,
    CoefficientMode, DualBound, ExtremalSet,
};
pub use error::{CoreError, Result};
pub use exact::{
    gap, phase_sweep, solve_fixed_phase, FixedPhaseSolution, GapReport, PhaseSweepResult,
};
pub use grid::{discretize, FrequencyGrid};
pub use measure::{covariance_at, ComplexMeasure, DiscreteMeasurePair};
pub use poly::{eval_kernel, eval_poly, TrigPolynomial};
pub use spec::ProblemSpec;

pub use covbound_conic::{SolveDiagnostics, SolveStatus, SolverConfig};
