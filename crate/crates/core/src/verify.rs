//! Property checks tying computed trajectories back to the theory: maximum
//! principle, monotone envelopes, bound and barrier domination, supersolution
//! residual sign, mass conservation, gradient envelopes, and empirical
//! decay-rate extraction.
//!
//! Every check is a pure function of its inputs and yields a [`CheckRecord`]
//! with the measured margin, the tolerance it was held to, and the worst
//! offending space-time sample when there is one.

use crate::bound::{Barrier, RateBound};
use crate::flux::FluxModel;
use crate::solver::{discrete_gradient, Trajectory, TrajectoryForm};
use std::fmt::Write as _;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("check expects a {expected} trajectory, found {found}")]
    WrongForm {
        expected: &'static str,
        found: &'static str,
    },
    #[error(
        "bound was computed for data level {expected:.17e} but the trajectory starts at \
         {actual:.17e}"
    )]
    MismatchedScenario { expected: f64, actual: f64 },
    #[error("decay fit is degenerate: {0}")]
    DegenerateData(String),
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    /// Measured margin; its sign convention is per check and documented there.
    pub margin: f64,
    pub tolerance: f64,
    /// Worst offending `(x, t)`, when the check has a spatial localization.
    pub worst: Option<(f64, f64)>,
}

/// Collected check records for one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub scenario: String,
    pub bound: Option<RateBound>,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(scenario: impl Into<String>) -> Self {
        VerificationReport {
            scenario: scenario.into(),
            bound: None,
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.checks.push(record);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Aligned plain-text rendering.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", self.scenario);
        if let Some(b) = &self.bound {
            let _ = writeln!(
                out,
                "bound: gamma = {:.6e}, prefactor = {:.6e} (tau = {:.6}, lambda = {:.6}, m = {:.6}, \
                 theta = {:.6e}, theta_tilde = {:.6e}, s = {:.6e})",
                b.decay_rate,
                b.prefactor,
                b.params.tau(),
                b.params.lambda(),
                b.params.m(),
                b.diffusivity_min,
                b.curvature_max,
                b.offset,
            );
        }
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(5)
            .max(5);
        let _ = writeln!(
            out,
            "{:<width$}  {:<6}  {:>13}  {:>10}  worst (x, t)",
            "check", "status", "margin", "tolerance"
        );
        for c in &self.checks {
            let worst = match c.worst {
                // Instant-level checks carry no spatial coordinate.
                Some((x, t)) if x.is_nan() => format!("(-, {t:.6})"),
                Some((x, t)) => format!("({x:.6}, {t:.6})"),
                None => "-".to_string(),
            };
            let _ = writeln!(
                out,
                "{:<width$}  {:<6}  {:>13.6e}  {:>10.1e}  {}",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.margin,
                c.tolerance,
                worst
            );
        }
        out
    }

    /// CSV rendering: `check,pass,margin,tolerance,x,t`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "check,pass,margin,tolerance,x,t")?;
        for c in &self.checks {
            let (x, t) = match c.worst {
                Some((x, t)) if x.is_nan() => (String::new(), format!("{t:.16e}")),
                Some((x, t)) => (format!("{x:.16e}"), format!("{t:.16e}")),
                None => (String::new(), String::new()),
            };
            writeln!(
                out,
                "{},{},{:.16e},{:.16e},{},{}",
                c.name, c.passed, c.margin, c.tolerance, x, t
            )?;
        }
        Ok(())
    }
}

/// Every value stays inside `[min ρ0 − tol, max ρ0 + tol]`.
/// Margin is the worst excursion beyond the initial range (0 when inside).
pub fn check_maximum_principle(traj: &Trajectory, tol: f64) -> CheckRecord {
    let initial = &traj.states[0];
    let lo = initial.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = initial.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let xs = traj.positions();
    let mut worst_excursion = 0.0f64;
    let mut worst = None;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        for (x, &v) in xs.iter().zip(state) {
            let excursion = (lo - v).max(v - hi).max(0.0);
            if excursion > worst_excursion {
                worst_excursion = excursion;
                worst = Some((*x, *t));
            }
        }
    }
    CheckRecord {
        name: "maximum_principle".into(),
        passed: worst_excursion <= tol,
        margin: worst_excursion,
        tolerance: tol,
        worst,
    }
}

/// Per-instant max is nonincreasing and min nondecreasing, within `tol`.
/// Margin is the worst monotonicity violation between consecutive instants.
pub fn check_monotone_envelopes(traj: &Trajectory, tol: f64) -> CheckRecord {
    let envelopes: Vec<(f64, f64)> = traj
        .states
        .iter()
        .map(|s| {
            (
                s.iter().cloned().fold(f64::INFINITY, f64::min),
                s.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            )
        })
        .collect();
    let mut worst_violation = 0.0f64;
    let mut worst = None;
    for (k, w) in envelopes.windows(2).enumerate() {
        let (min_prev, max_prev) = w[0];
        let (min_next, max_next) = w[1];
        let violation = (max_next - max_prev).max(min_prev - min_next).max(0.0);
        if violation > worst_violation {
            worst_violation = violation;
            worst = Some((f64::NAN, traj.times[k + 1]));
        }
    }
    CheckRecord {
        name: "monotone_envelopes".into(),
        passed: worst_violation <= tol,
        margin: worst_violation,
        tolerance: tol,
        worst: worst.map(|(_, t)| (f64::NAN, t)),
    }
}

fn require_density_like(traj: &Trajectory) -> Result<(), VerifyError> {
    match traj.form {
        TrajectoryForm::DensityDirichlet | TrajectoryForm::FaceGradient => Ok(()),
        TrajectoryForm::PrimitiveNeumann => Err(VerifyError::WrongForm {
            expected: "density_dirichlet or face_gradient",
            found: traj.form.name(),
        }),
    }
}

fn require_matching_amplitude(traj: &Trajectory, bound: &RateBound) -> Result<(), VerifyError> {
    let actual = traj.states[0]
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let expected = bound.params.rho0_norm();
    if (actual - expected).abs() > 1e-12 {
        return Err(VerifyError::MismatchedScenario { expected, actual });
    }
    Ok(())
}

/// `sup_x |v(x, t)| ≤ C e^{−γt} + slack` at every output instant.
/// Margin is the minimum of `bound − measured` over the instants.
pub fn check_bound_domination(
    traj: &Trajectory,
    bound: &RateBound,
    slack: f64,
) -> Result<CheckRecord, VerifyError> {
    require_density_like(traj)?;
    require_matching_amplitude(traj, bound)?;
    let mut min_margin = f64::INFINITY;
    let mut worst = None;
    for (t, sup) in traj.sup_norm_history() {
        let margin = bound.evaluate(t) - sup;
        if margin < min_margin {
            min_margin = margin;
            worst = Some((f64::NAN, t));
        }
    }
    Ok(CheckRecord {
        name: "bound_domination".into(),
        passed: min_margin >= -slack,
        margin: min_margin,
        tolerance: slack,
        worst,
    })
}

/// Pointwise strengthening: `|v(x, t)| ≤ ψ(x, t) + slack` at every node and
/// instant. Margin is the minimum of `ψ − |v|`.
pub fn check_barrier_domination(
    traj: &Trajectory,
    barrier: &Barrier,
    slack: f64,
) -> Result<CheckRecord, VerifyError> {
    require_density_like(traj)?;
    require_matching_amplitude(traj, barrier.rate_bound())?;
    let xs = traj.positions();
    let mut min_margin = f64::INFINITY;
    let mut worst = None;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        for (x, &v) in xs.iter().zip(state) {
            let margin = barrier.value(*x, *t) - v.abs();
            if margin < min_margin {
                min_margin = margin;
                worst = Some((*x, *t));
            }
        }
    }
    Ok(CheckRecord {
        name: "barrier_domination".into(),
        passed: min_margin >= -slack,
        margin: min_margin,
        tolerance: slack,
        worst,
    })
}

/// Samples the barrier residual `Lψ` on a `grid_density × grid_density`
/// lattice over `(0, L) × (0, 3/γ]` and requires every value negative.
/// Margin is the largest residual found (negative on pass).
pub fn check_supersolution(
    barrier: &Barrier,
    flux: &FluxModel,
    grid_density: usize,
) -> CheckRecord {
    let length = barrier.rate_bound().params.domain_length();
    let horizon = 3.0 / barrier.decay_rate();
    let mut max_residual = f64::NEG_INFINITY;
    let mut worst = None;
    for j in 1..=grid_density {
        let x = length * j as f64 / (grid_density + 1) as f64;
        for k in 1..=grid_density {
            let t = horizon * k as f64 / grid_density as f64;
            let r = barrier.residual(flux, x, t);
            if r > max_residual {
                max_residual = r;
                worst = Some((x, t));
            }
        }
    }
    CheckRecord {
        name: "supersolution_residual".into(),
        passed: max_residual < 0.0,
        margin: max_residual,
        tolerance: 0.0,
        worst,
    }
}

/// Least-squares fit of `log(sup-norm)` against `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Fitted decay exponent (minus the slope).
    pub rate: f64,
    /// Fitted prefactor `exp(intercept)`.
    pub prefactor: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Sup-norms below this are floored out of the fit as floating-point noise.
pub const FIT_FLOOR: f64 = 1e-13;

/// Fits `sup(t) ≈ C e^{−γt}` over the instants with `t ∈ [window.0, window.1]`.
pub fn fit_decay_rate(history: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit, VerifyError> {
    if window.0 >= window.1 || window.0.is_nan() || window.1.is_nan() {
        return Err(VerifyError::DegenerateData(format!(
            "window ({}, {}) is empty",
            window.0, window.1
        )));
    }
    let in_window: Vec<(f64, f64)> = history
        .iter()
        .copied()
        .filter(|(t, _)| (window.0..=window.1).contains(t))
        .collect();
    if in_window.iter().any(|&(_, s)| s <= 0.0) {
        return Err(VerifyError::DegenerateData(
            "sup-norm is not positive inside the fit window".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = in_window
        .into_iter()
        .filter(|&(_, s)| s > FIT_FLOOR)
        .collect();
    if pts.len() < 5 {
        return Err(VerifyError::DegenerateData(format!(
            "need at least 5 usable instants in the window, found {}",
            pts.len()
        )));
    }

    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_log = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(t, s) in &pts {
        sxx += (t - mean_t) * (t - mean_t);
        sxy += (t - mean_t) * (s.ln() - mean_log);
    }
    if sxx == 0.0 {
        return Err(VerifyError::DegenerateData("all instants coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_log - slope * mean_t;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for &(t, s) in &pts {
        let log_s = s.ln();
        ss_res += (log_s - (intercept + slope * t)).powi(2);
        ss_tot += (log_s - mean_log).powi(2);
    }
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= 1e-24 {
        1.0
    } else {
        0.0
    };
    Ok(DecayFit {
        rate: -slope,
        prefactor: intercept.exp(),
        r_squared,
        points_used: pts.len(),
    })
}

/// Trapezoid-rule mass per instant; relative drift must stay within `tol`.
/// The denominator is floored at 1e-6 of the initial L¹ mass so that
/// zero-mean data does not divide roundoff by roundoff; identically zero data
/// falls back to absolute drift. Margin is the worst drift.
pub fn check_conservation(traj: &Trajectory, tol: f64) -> Result<CheckRecord, VerifyError> {
    if traj.form != TrajectoryForm::PrimitiveNeumann {
        return Err(VerifyError::WrongForm {
            expected: "primitive_neumann",
            found: traj.form.name(),
        });
    }
    let h = traj.grid.spacing();
    let mass = |u: &[f64]| {
        let inner: f64 = u[1..u.len() - 1].iter().sum();
        h * (inner + 0.5 * (u[0] + u[u.len() - 1]))
    };
    let m0 = mass(&traj.states[0]);
    let l1_mass = {
        let u = &traj.states[0];
        let inner: f64 = u[1..u.len() - 1].iter().map(|v| v.abs()).sum();
        h * (inner + 0.5 * (u[0].abs() + u[u.len() - 1].abs()))
    };
    let denom = m0.abs().max(1e-6 * l1_mass).max(f64::MIN_POSITIVE);
    let denom = if l1_mass == 0.0 { 1.0 } else { denom };
    let mut worst_drift = 0.0f64;
    let mut worst = None;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let drift = (mass(state) - m0).abs() / denom;
        if drift > worst_drift {
            worst_drift = drift;
            worst = Some((f64::NAN, *t));
        }
    }
    Ok(CheckRecord {
        name: "mass_conservation".into(),
        passed: worst_drift <= tol,
        margin: worst_drift,
        tolerance: tol,
        worst,
    })
}

/// Face-gradient max nonincreasing, min nondecreasing, and 0 between them
/// (the boundary faces hold the Neumann value 0 and are included as such).
pub fn check_gradient_envelope(traj: &Trajectory, tol: f64) -> Result<CheckRecord, VerifyError> {
    if traj.form != TrajectoryForm::PrimitiveNeumann {
        return Err(VerifyError::WrongForm {
            expected: "primitive_neumann",
            found: traj.form.name(),
        });
    }
    let grad = discrete_gradient(traj).map_err(|_| VerifyError::WrongForm {
        expected: "primitive_neumann",
        found: traj.form.name(),
    })?;
    let envelopes: Vec<(f64, f64)> = grad
        .states
        .iter()
        .map(|g| {
            // Boundary faces carry the value 0.
            let lo = g.iter().cloned().fold(0.0f64, f64::min);
            let hi = g.iter().cloned().fold(0.0f64, f64::max);
            (lo, hi)
        })
        .collect();
    let mut worst_violation = 0.0f64;
    let mut worst = None;
    for (k, w) in envelopes.windows(2).enumerate() {
        let (min_prev, max_prev) = w[0];
        let (min_next, max_next) = w[1];
        let violation = (max_next - max_prev).max(min_prev - min_next).max(0.0);
        if violation > worst_violation {
            worst_violation = violation;
            worst = Some((f64::NAN, grad.times[k + 1]));
        }
    }
    // 0 between min and max holds by inclusion of the boundary faces; assert
    // it anyway so a representation change cannot silently drop it.
    for (lo, hi) in &envelopes {
        debug_assert!(*lo <= 0.0 && 0.0 <= *hi);
        worst_violation = worst_violation.max(*lo).max(-*hi);
    }
    Ok(CheckRecord {
        name: "gradient_envelope".into(),
        passed: worst_violation <= tol,
        margin: worst_violation,
        tolerance: tol,
        worst,
    })
}
