//! Lag sweeps, certificate diagnostics and discretization refinement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::band::FrequencyBand;
use crate::bound::{dual_bound, off_support_mass, upper_bound, BoundConfig, CoefficientMode};
use crate::error::{CoreError, Result};
use crate::exact::phase_sweep;
use crate::grid::{discretize, FrequencyGrid};
use crate::spec::ProblemSpec;
use crate::tolerances::{
    cross_tol, CERTIFICATE_TOL, DEFAULT_GRID_STEP, DEFAULT_NUM_PHASES, GRID_REFINEMENT_TOL,
    OFF_SUPPORT_MASS_FRACTION, PHASE_REFINEMENT_TOL, SYMMETRY_RESIDUAL_FRACTION,
};

/// Probe translations used by the shift-invariance check.
pub const SHIFT_PROBES: [f64; 3] = [0.05, 0.1, 0.2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub bound: BoundConfig,
    pub grid_step: f64,
    pub num_phases: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            bound: BoundConfig::default(),
            grid_step: DEFAULT_GRID_STEP,
            num_phases: DEFAULT_NUM_PHASES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub tau: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub grid_step: f64,
    pub grid_points: usize,
    pub num_phases: Option<usize>,
    pub config: BoundConfig,
    pub failures: Vec<SweepFailure>,
}

/// Bound (and optionally lower bound and gap) as a function of the lag.
/// Entries are `None` where a solve failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub band: FrequencyBand,
    pub n: usize,
    pub sigma2: f64,
    pub tau_values: Vec<f64>,
    pub bound_values: Vec<Option<f64>>,
    pub exact_values: Option<Vec<Option<f64>>>,
    pub gap_values: Option<Vec<Option<f64>>>,
    pub metadata: SweepMetadata,
}

/// `num` equally spaced values from `lo` to `hi`, both included.
pub fn linspace(lo: f64, hi: f64, num: usize) -> Vec<f64> {
    if num == 1 {
        return vec![lo];
    }
    (0..num)
        .map(|i| {
            if i + 1 == num {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (num - 1) as f64
            }
        })
        .collect()
}

struct SweepPoint {
    bound: Result<f64>,
    exact: Option<Result<f64>>,
}

pub fn sweep_tau(
    band: &FrequencyBand,
    n: usize,
    sigma2: f64,
    tau_range: (f64, f64),
    num_tau: usize,
    include_exact: bool,
    cfg: &AnalysisConfig,
) -> Result<SweepCurve> {
    let (lo, hi) = tau_range;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(CoreError::InvalidSpec(format!(
            "lag range {lo}:{hi} is not an ordered pair of finite values"
        )));
    }
    if num_tau < 2 {
        return Err(CoreError::InvalidSpec(format!(
            "a sweep needs at least two lags, got {num_tau}"
        )));
    }
    let template = ProblemSpec::new(band.clone(), n, lo, sigma2)?;
    let grid = Arc::new(discretize(band, cfg.grid_step)?);
    let taus = linspace(lo, hi, num_tau);

    let points: Vec<SweepPoint> = taus
        .par_iter()
        .map(|&tau| {
            let spec = match template.with_tau(tau) {
                Ok(s) => s,
                Err(e) => {
                    return SweepPoint {
                        bound: Err(e),
                        exact: None,
                    }
                }
            };
            let bound = upper_bound(&spec, &grid, &cfg.bound).map(|r| r.bound);
            let exact = include_exact.then(|| {
                phase_sweep(&spec, &grid, cfg.num_phases, &cfg.bound.solver).map(|r| r.value)
            });
            SweepPoint { bound, exact }
        })
        .collect();

    let mut failures = Vec::new();
    let mut bound_values = Vec::with_capacity(num_tau);
    let mut exact_values = Vec::with_capacity(num_tau);
    let mut gap_values = Vec::with_capacity(num_tau);
    for (&tau, p) in taus.iter().zip(points) {
        let b = p
            .bound
            .map_err(|e| {
                failures.push(SweepFailure {
                    tau,
                    error: e.to_string(),
                })
            })
            .ok();
        let x = p.exact.and_then(|r| {
            r.map_err(|e| {
                failures.push(SweepFailure {
                    tau,
                    error: e.to_string(),
                })
            })
            .ok()
        });
        bound_values.push(b);
        exact_values.push(x);
        gap_values.push(b.zip(x).map(|(b, x)| b - x));
    }

    Ok(SweepCurve {
        band: band.clone(),
        n,
        sigma2,
        tau_values: taus,
        bound_values,
        exact_values: include_exact.then_some(exact_values),
        gap_values: include_exact.then_some(gap_values),
        metadata: SweepMetadata {
            grid_step: cfg.grid_step,
            grid_points: grid.len(),
            num_phases: include_exact.then_some(cfg.num_phases),
            config: cfg.bound,
            failures,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub measured: Option<f64>,
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            status: if measured <= threshold {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            measured: Some(measured),
            threshold: Some(threshold),
            note: None,
        }
    }

    fn skipped(name: impl Into<String>, why: &str) -> Self {
        Check {
            name: name.into(),
            status: CheckStatus::NotApplicable,
            measured: None,
            threshold: None,
            note: Some(why.into()),
        }
    }

    fn failed(name: impl Into<String>, err: &CoreError) -> Self {
        Check {
            name: name.into(),
            status: CheckStatus::Fail,
            measured: None,
            threshold: None,
            note: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub spec: ProblemSpec,
    pub bound: Option<f64>,
    pub t_star: Option<f64>,
    pub checks: Vec<Check>,
}

impl DiagnosticsReport {
    /// True when no check failed.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Structural checks on the bound and its certificate. Problems become failed
/// entries rather than errors.
pub fn diagnostics_battery(
    spec: &ProblemSpec,
    grid: &Arc<FrequencyGrid>,
    cfg: &BoundConfig,
) -> DiagnosticsReport {
    let mut checks = Vec::new();
    let mut cfg = *cfg;
    cfg.cross_check_dual = true;
    let symmetric = spec.band.is_symmetric() && grid.reflection().is_some();

    let report = match upper_bound(spec, grid, &cfg) {
        Ok(r) => r,
        Err(e) => {
            checks.push(Check::failed("upper_bound", &e));
            return DiagnosticsReport {
                spec: spec.clone(),
                bound: None,
                t_star: None,
                checks,
            };
        }
    };
    let t_star = report.t_star;
    let degenerate = report.omega.is_degenerate();

    // the corollary is tested against an unrestricted solve
    if symmetric {
        let complex = BoundConfig {
            coefficients: CoefficientMode::Complex,
            cross_check_dual: false,
            ..cfg
        };
        match upper_bound(spec, grid, &complex) {
            Ok(r) => {
                let scale = 1.0 + r.q0.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
                let worst_im = r.q0.coeffs().iter().map(|c| c.im.abs()).fold(0.0, f64::max);
                checks.push(Check::at_most(
                    "real_coefficients",
                    worst_im / scale,
                    CERTIFICATE_TOL,
                ));
                let unsym = if degenerate {
                    None
                } else {
                    r.psi0.symmetrized()
                };
                match unsym {
                    Some(sym) => {
                        let tv = sym.tv_norm().max(f64::MIN_POSITIVE);
                        let drift = (sym.pair_with_kernel(spec.tau).re - r.certificate_value).abs();
                        checks.push(Check::at_most(
                            "symmetrized_certificate_residual",
                            sym.asymmetry().unwrap_or(f64::INFINITY) / tv,
                            SYMMETRY_RESIDUAL_FRACTION,
                        ));
                        checks.push(Check::at_most(
                            "symmetrization_objective_drift",
                            drift,
                            CERTIFICATE_TOL,
                        ));
                    }
                    None => checks.push(Check::skipped(
                        "symmetrized_certificate_residual",
                        "zero residual",
                    )),
                }
            }
            Err(e) => checks.push(Check::failed("real_coefficients", &e)),
        }
    } else {
        checks.push(Check::skipped("real_coefficients", "band is not symmetric"));
        checks.push(Check::skipped(
            "symmetrized_certificate_residual",
            "band is not symmetric",
        ));
    }

    if !symmetric {
        checks.push(Check::skipped("omega_symmetry", "band is not symmetric"));
    } else if degenerate {
        checks.push(Check::skipped("omega_symmetry", "zero residual"));
    } else {
        checks.push(Check::at_most(
            "omega_symmetry",
            report.omega.mirror_mismatch(),
            grid.step() * (1.0 + 1e-9),
        ));
    }

    let worst_moment = spec
        .lags()
        .map(|k| report.psi0.moment(k).norm())
        .fold(0.0, f64::max);
    checks.push(Check::at_most(
        "annihilator_moments",
        worst_moment,
        CERTIFICATE_TOL,
    ));
    checks.push(Check::at_most(
        "tv_norm",
        report.psi0.tv_norm(),
        1.0 + CERTIFICATE_TOL,
    ));
    checks.push(Check::at_most(
        "alignment_shortfall",
        t_star - report.certificate_value,
        CERTIFICATE_TOL,
    ));
    if degenerate {
        checks.push(Check::skipped("support_concentration", "zero residual"));
    } else {
        let tv = report.psi0.tv_norm().max(f64::MIN_POSITIVE);
        checks.push(Check::at_most(
            "support_concentration",
            off_support_mass(&report.psi0, &report.omega, cfg.cluster_window) / tv,
            OFF_SUPPORT_MASS_FRACTION,
        ));
    }

    for delta in SHIFT_PROBES {
        let name = format!("shift_invariance_{delta}");
        let shifted_grid = Arc::new(grid.shifted(delta));
        let shifted = spec.with_band(shifted_grid.band().clone()).and_then(|s| {
            upper_bound(
                &s,
                &shifted_grid,
                &BoundConfig {
                    cross_check_dual: false,
                    ..cfg
                },
            )
        });
        match shifted {
            Ok(r) => checks.push(Check::at_most(
                name,
                (r.bound - report.bound).abs(),
                2.0 * CERTIFICATE_TOL * spec.sigma2,
            )),
            Err(e) => checks.push(Check::failed(name, &e)),
        }
    }

    match dual_bound(spec, grid, &cfg) {
        Ok(d) => checks.push(Check::at_most(
            "duality_gap",
            (t_star - d.value).abs(),
            CERTIFICATE_TOL,
        )),
        Err(e) => checks.push(Check::failed("duality_gap", &e)),
    }

    DiagnosticsReport {
        spec: spec.clone(),
        bound: Some(report.bound),
        t_star: Some(t_star),
        checks,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridLevel {
    pub step: f64,
    pub grid_points: usize,
    pub bound: Option<f64>,
    pub exact: Option<f64>,
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseLevel {
    pub num_phases: usize,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementReport {
    pub spec: ProblemSpec,
    /// Grid steps `s`, `s/2`, `s/4`.
    pub grid_levels: Vec<GridLevel>,
    /// `|bound(s/2^(i+1)) - bound(s/2^i)|`.
    pub bound_deltas: Vec<Option<f64>>,
    pub gap_deltas: Vec<Option<f64>>,
    /// Sweep values on the coarsest grid at `P` and `2P` phases.
    pub phase_levels: Vec<PhaseLevel>,
    /// `value(2P) - value(P)`.
    pub phase_delta: Option<f64>,
    pub grid_unstable: bool,
    pub phase_unstable: bool,
    pub failures: Vec<String>,
}

impl RefinementReport {
    /// Whether every gap agrees with the finest one to `digits` significant figures.
    pub fn gap_stable_to(&self, digits: i32) -> bool {
        let gaps: Option<Vec<f64>> = self.grid_levels.iter().map(|l| l.gap).collect();
        let Some(gaps) = gaps else { return false };
        let Some(&finest) = gaps.last() else {
            return false;
        };
        gaps.iter()
            .all(|g| (g - finest).abs() <= 0.5 * 10f64.powi(1 - digits) * finest.abs())
    }
}

fn successive_deltas(values: impl Iterator<Item = Option<f64>>) -> Vec<Option<f64>> {
    let v: Vec<Option<f64>> = values.collect();
    v.windows(2)
        .map(|w| w[0].zip(w[1]).map(|(a, b)| (b - a).abs()))
        .collect()
}

/// Re-solve at finer grids and denser phase sweeps and report the changes.
/// With `include_exact` unset only the bound is refined.
pub fn refinement_study(
    spec: &ProblemSpec,
    include_exact: bool,
    cfg: &AnalysisConfig,
) -> Result<RefinementReport> {
    let steps = [cfg.grid_step, cfg.grid_step / 2.0, cfg.grid_step / 4.0];
    let grids = steps
        .iter()
        .map(|&s| discretize(&spec.band, s).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    let mut failures = Vec::new();
    let mut note = |what: String, e: CoreError| failures.push(format!("{what}: {e}"));

    let mut grid_levels = Vec::new();
    for grid in &grids {
        let bound = upper_bound(spec, grid, &cfg.bound)
            .map(|r| r.bound)
            .map_err(|e| note(format!("bound at step {}", grid.step()), e))
            .ok();
        let exact = if include_exact {
            phase_sweep(spec, grid, cfg.num_phases, &cfg.bound.solver)
                .map(|r| r.value)
                .map_err(|e| note(format!("sweep at step {}", grid.step()), e))
                .ok()
        } else {
            None
        };
        grid_levels.push(GridLevel {
            step: grid.step(),
            grid_points: grid.len(),
            bound,
            exact,
            gap: bound.zip(exact).map(|(b, x)| b - x),
        });
    }

    let mut phase_levels = Vec::new();
    if include_exact {
        phase_levels.push(PhaseLevel {
            num_phases: cfg.num_phases,
            value: grid_levels[0].exact,
        });
        let doubled = phase_sweep(spec, &grids[0], 2 * cfg.num_phases, &cfg.bound.solver)
            .map(|r| r.value)
            .map_err(|e| note(format!("sweep with {} phases", 2 * cfg.num_phases), e))
            .ok();
        phase_levels.push(PhaseLevel {
            num_phases: 2 * cfg.num_phases,
            value: doubled,
        });
    }

    let bound_deltas = successive_deltas(grid_levels.iter().map(|l| l.bound));
    let gap_deltas = successive_deltas(grid_levels.iter().map(|l| l.gap));
    let phase_delta = match phase_levels.as_slice() {
        [a, b] => a.value.zip(b.value).map(|(a, b)| b - a),
        _ => None,
    };
    let grid_unstable = bound_deltas
        .iter()
        .any(|d| d.is_none_or(|d| d > GRID_REFINEMENT_TOL));
    let phase_unstable = include_exact
        && phase_delta
            .is_none_or(|d| d.abs() > PHASE_REFINEMENT_TOL || d < -cross_tol(spec.sigma2));

    Ok(RefinementReport {
        spec: spec.clone(),
        grid_levels,
        bound_deltas,
        gap_deltas,
        phase_levels,
        phase_delta,
        grid_unstable,
        phase_unstable,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band::make_band;

    fn coarse(step: f64, phases: usize) -> AnalysisConfig {
        AnalysisConfig {
            grid_step: step,
            num_phases: phases,
            ..AnalysisConfig::default()
        }
    }

    #[test]
    fn linspace_hits_endpoints_and_integers() {
        let t = linspace(0.0, 7.0, 141);
        assert_eq!(t.len(), 141);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[140], 7.0);
        for k in 0..=7 {
            assert_eq!(t[20 * k], k as f64);
        }
    }

    #[test]
    fn sweep_curve_shape() {
        let band = make_band(&[(-0.3, 0.3)]).unwrap();
        let c = sweep_tau(&band, 3, 1.0, (0.0, 7.0), 15, false, &coarse(2e-3, 36)).unwrap();
        assert_eq!(c.bound_values.len(), 15);
        assert!(c.exact_values.is_none() && c.gap_values.is_none());
        assert!(c.metadata.failures.is_empty());
        let b: Vec<f64> = c.bound_values.iter().map(|v| v.unwrap()).collect();
        for k in 0..=3 {
            assert!(b[2 * k] <= 1e-8, "tau {k}: {}", b[2 * k]);
        }
        assert!(b.iter().all(|&v| (0.0..=2.0 + 1e-6).contains(&v)));
        assert!(b[14] >= 1.8);
    }

    #[test]
    fn sweep_with_exact_columns() {
        let band = make_band(&[(-0.3, 0.3)]).unwrap();
        let c = sweep_tau(&band, 3, 1.0, (1.0, 2.0), 3, true, &coarse(5e-3, 36)).unwrap();
        let gaps = c.gap_values.unwrap();
        assert_eq!(gaps.len(), 3);
        for g in gaps {
            assert!(g.unwrap() >= -cross_tol(1.0));
        }
    }

    #[test]
    fn bad_sweep_ranges_fail() {
        let band = make_band(&[(-0.3, 0.3)]).unwrap();
        let cfg = coarse(1e-2, 8);
        assert!(sweep_tau(&band, 3, 1.0, (2.0, 1.0), 5, false, &cfg).is_err());
        assert!(sweep_tau(&band, 3, 1.0, (0.0, 1.0), 1, false, &cfg).is_err());
        assert!(sweep_tau(&band, 3, 1.0, (0.0, f64::NAN), 5, false, &cfg).is_err());
    }

    #[test]
    fn symmetric_band_passes_every_check() {
        let band = make_band(&[(-0.3, 0.3)]).unwrap();
        let grid = Arc::new(discretize(&band, 1e-3).unwrap());
        let spec = ProblemSpec::new(band, 5, 4.7, 1.0).unwrap();
        let r = diagnostics_battery(&spec, &grid, &BoundConfig::default());
        assert!(r.all_passed(), "{:#?}", r.checks);
        assert!(r.checks.iter().all(|c| c.status == CheckStatus::Pass));
    }

    #[test]
    fn asymmetric_band_skips_corollary_checks() {
        let band = make_band(&[(-0.3, -0.1), (0.05, 0.3)]).unwrap();
        let grid = Arc::new(discretize(&band, 1e-3).unwrap());
        let spec = ProblemSpec::new(band, 3, 2.5, 1.0).unwrap();
        let r = diagnostics_battery(&spec, &grid, &BoundConfig::default());
        assert!(r.all_passed(), "{:#?}", r.checks);
        assert_eq!(
            r.check("real_coefficients").unwrap().status,
            CheckStatus::NotApplicable
        );
        assert_eq!(
            r.check("omega_symmetry").unwrap().status,
            CheckStatus::NotApplicable
        );
    }

    #[test]
    fn battery_is_deterministic() {
        let band = make_band(&[(-0.25, 0.35)]).unwrap();
        let grid = Arc::new(discretize(&band, 2e-3).unwrap());
        let spec = ProblemSpec::new(band, 3, 1.5, 1.0).unwrap();
        let a = diagnostics_battery(&spec, &grid, &BoundConfig::default());
        let b = diagnostics_battery(&spec, &grid, &BoundConfig::default());
        assert_eq!(a, b);
    }

    #[test]
    fn refinement_of_specified_lag_is_all_zero() {
        let spec = ProblemSpec::new(make_band(&[(-0.3, 0.3)]).unwrap(), 3, 2.0, 1.0).unwrap();
        let r = refinement_study(&spec, true, &coarse(4e-3, 12)).unwrap();
        for l in &r.grid_levels {
            assert!(l.bound.unwrap() <= 1e-8 && l.exact.unwrap().abs() <= 1e-8);
        }
        assert!(!r.grid_unstable && !r.phase_unstable);
    }

    #[test]
    fn refinement_of_interval_bound_is_stable() {
        let spec = ProblemSpec::new(make_band(&[(-0.3, 0.3)]).unwrap(), 3, 1.5, 1.0).unwrap();
        let r = refinement_study(&spec, false, &coarse(DEFAULT_GRID_STEP, 0)).unwrap();
        assert_eq!(r.grid_levels.len(), 3);
        assert!(
            r.bound_deltas.iter().all(|d| d.unwrap() <= 1e-4),
            "{:?}",
            r.bound_deltas
        );
        assert!(!r.grid_unstable);
        assert!(r.phase_levels.is_empty());
    }
}
