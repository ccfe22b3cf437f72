//! Scenario execution: bound selection, flux extension, time integration,
//! verification, and file output.

use crate::scenario::{BoundSpec, ExtensionSpec, MFloor, ProblemForm, Scenario, ScenarioError};
use rate_lab_core::{
    check_barrier_domination, check_bound_domination, check_conservation, check_gradient_envelope,
    check_maximum_principle, check_monotone_envelopes, check_supersolution, compute_rate_bound,
    discrete_gradient, fit_decay_rate, midpoint_match_radius, mstar_for_threshold,
    optimize_rate_traced, Barrier, BoundError, BoundParams, DecayFit, FluxError, FluxModel, Grid,
    OptimizedRate, Parabolicity, RateBound, SearchStage, SolverError, Trajectory,
    VerificationReport, VerifyError,
};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("bound computation failed: {0}")]
    Bound(#[from] BoundError),
    #[error("flux construction failed: {0}")]
    Flux(#[from] FluxError),
    #[error("solver failed: {0}")]
    Solver(#[from] SolverError),
    #[error("verification failed: {0}")]
    Verify(#[from] VerifyError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// Everything one scenario run produces.
pub struct RunOutcome {
    pub scenario: Scenario,
    /// The solved trajectory (density or primitive, per the scenario form).
    pub trajectory: Trajectory,
    /// Face-gradient reduction, for primitive runs.
    pub gradient: Option<Trajectory>,
    pub bound: RateBound,
    pub barrier: Barrier,
    /// The flux the solver integrated (the extension when one was requested).
    pub solver_flux: FluxModel,
    /// Search trace when the bound was optimized.
    pub search: Option<OptimizedRate>,
    pub fit: Option<DecayFit>,
    pub report: VerificationReport,
}

impl RunOutcome {
    /// The trajectory the decay bound applies to.
    pub fn bound_target(&self) -> &Trajectory {
        self.gradient.as_ref().unwrap_or(&self.trajectory)
    }
}

/// The m floor an optimizer run uses: 1 for globally parabolic fluxes, the
/// threshold-derived smallest admissible m otherwise.
pub fn auto_m_floor(flux: &FluxModel, data_level: f64) -> Result<f64, PipelineError> {
    let parabolicity = flux.parabolicity()?;
    match parabolicity {
        Parabolicity::Global => Ok(1.0),
        Parabolicity::Degenerate { radius } => {
            Err(PipelineError::Bound(BoundError::InvalidParams(format!(
                "degenerate parabolic flux (diffusivity double root at {radius:.6})"
            ))))
        }
        Parabolicity::Bounded { radius } => {
            if data_level == 0.0 {
                Ok(1.0)
            } else {
                Ok(mstar_for_threshold(radius, data_level)?)
            }
        }
    }
}

fn select_bound(
    scenario: &Scenario,
    data_level: f64,
) -> Result<(RateBound, Option<OptimizedRate>), PipelineError> {
    match &scenario.bound {
        BoundSpec::Fixed { tau, lambda, m } => {
            let params = BoundParams::new(*tau, *lambda, *m, data_level, scenario.length)?;
            Ok((compute_rate_bound(&scenario.flux.base, &params)?, None))
        }
        BoundSpec::Optimize { m_floor } => {
            let floor = match m_floor {
                MFloor::Auto => auto_m_floor(&scenario.flux.base, data_level)?,
                MFloor::Value(v) => *v,
            };
            let search =
                optimize_rate_traced(&scenario.flux.base, data_level, scenario.length, floor)?;
            Ok((search.bound, Some(search)))
        }
    }
}

fn build_solver_flux(scenario: &Scenario, bound: &RateBound) -> Result<FluxModel, PipelineError> {
    match scenario.flux.extension {
        ExtensionSpec::None => Ok(scenario.flux.base.clone()),
        ExtensionSpec::Auto => {
            let match_radius = midpoint_match_radius(&scenario.flux.base, bound.interval_radius)?;
            Ok(scenario
                .flux
                .base
                .extend(match_radius, 0.5 * match_radius)?)
        }
        ExtensionSpec::Explicit {
            match_radius,
            blend_width,
        } => Ok(scenario.flux.base.extend(match_radius, blend_width)?),
    }
}

/// Runs one scenario end to end: choose the bound, integrate, verify.
pub fn run_scenario(scenario: &Scenario) -> Result<RunOutcome, PipelineError> {
    let grid = Grid::new(scenario.length, scenario.cells)?;
    let datum = scenario.sample_initial();
    let data_level = scenario.data_level();

    let (bound, search) = select_bound(scenario, data_level)?;
    let barrier = Barrier::from_rate_bound(&bound);
    let solver_flux = build_solver_flux(scenario, &bound)?;

    let trajectory = match scenario.form {
        ProblemForm::DensityDirichlet => {
            rate_lab_core::solve_dirichlet(&solver_flux, &datum, grid, &scenario.solver)?
        }
        ProblemForm::PrimitiveNeumann => {
            rate_lab_core::solve_neumann_primitive(&solver_flux, &datum, grid, &scenario.solver)?
        }
    };
    let gradient = match scenario.form {
        ProblemForm::DensityDirichlet => None,
        ProblemForm::PrimitiveNeumann => Some(discrete_gradient(&trajectory)?),
    };

    let v = &scenario.verify;
    let mut report = VerificationReport::new(scenario.name.clone());
    report.bound = Some(bound);

    if v.max_principle {
        report.push(check_maximum_principle(&trajectory, v.tol_max_principle));
    }
    if v.monotone_envelopes {
        report.push(check_monotone_envelopes(&trajectory, v.tol_envelopes));
    }
    if scenario.form == ProblemForm::PrimitiveNeumann {
        if v.conservation {
            report.push(check_conservation(&trajectory, v.tol_conservation)?);
        }
        if v.gradient_envelope {
            report.push(check_gradient_envelope(
                &trajectory,
                v.tol_gradient_envelope,
            )?);
        }
    }
    let target = gradient.as_ref().unwrap_or(&trajectory);
    if v.bound_domination {
        report.push(check_bound_domination(target, &bound, v.bound_slack)?);
    }
    if v.barrier_domination {
        report.push(check_barrier_domination(target, &barrier, v.barrier_slack)?);
    }
    if v.supersolution {
        report.push(check_supersolution(
            &barrier,
            &solver_flux,
            v.supersolution_density,
        ));
    }

    let window = (
        v.fit_window.0 * scenario.solver.t_final,
        v.fit_window.1 * scenario.solver.t_final,
    );
    let fit = fit_decay_rate(&target.sup_norm_history(), window).ok();

    Ok(RunOutcome {
        scenario: scenario.clone(),
        trajectory,
        gradient,
        bound,
        barrier,
        solver_flux,
        search,
        fit,
        report,
    })
}

fn write_history_csv(path: &Path, header: &str, rows: &[(f64, f64)]) -> io::Result<()> {
    let mut out = fs::File::create(path)?;
    writeln!(out, "{header}")?;
    for (t, v) in rows {
        writeln!(out, "{t:.16e},{v:.16e}")?;
    }
    Ok(())
}

/// Writes trajectory, sup-norm, bound-curve, and report files; returns the
/// paths written.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let path = dir.join("trajectory.csv");
    outcome.trajectory.write_csv(fs::File::create(&path)?)?;
    written.push(path);

    if let Some(gradient) = &outcome.gradient {
        let path = dir.join("gradient.csv");
        gradient.write_csv(fs::File::create(&path)?)?;
        written.push(path);
    }

    let target = outcome.bound_target();
    let path = dir.join("sup_norm.csv");
    write_history_csv(&path, "t,sup_norm", &target.sup_norm_history())?;
    written.push(path);

    let bound_rows: Vec<(f64, f64)> = target
        .times
        .iter()
        .map(|&t| (t, outcome.bound.evaluate(t)))
        .collect();
    let path = dir.join("bound_curve.csv");
    write_history_csv(&path, "t,bound", &bound_rows)?;
    written.push(path);

    let path = dir.join("report.txt");
    let mut text = outcome.report.render_text();
    if let Some(fit) = &outcome.fit {
        text.push_str(&format!(
            "measured decay: gamma_emp = {:.6e} (r^2 = {:.6}, {} instants) vs bound gamma = {:.6e}\n",
            fit.rate,
            fit.r_squared,
            fit.points_used,
            outcome.bound.decay_rate
        ));
    }
    fs::write(&path, text)?;
    written.push(path);

    let path = dir.join("report.csv");
    outcome.report.write_csv(fs::File::create(&path)?)?;
    written.push(path);

    Ok(written)
}

/// Result of the standalone optimizer command.
pub struct OptimizeOutcome {
    pub search: OptimizedRate,
    pub m_floor: f64,
}

pub fn run_optimize(
    flux: &FluxModel,
    rho0_norm: f64,
    length: f64,
    m_floor: Option<f64>,
) -> Result<OptimizeOutcome, PipelineError> {
    let m_floor = match m_floor {
        Some(v) => v,
        None => auto_m_floor(flux, rho0_norm)?,
    };
    let search = optimize_rate_traced(flux, rho0_norm, length, m_floor)?;
    Ok(OptimizeOutcome { search, m_floor })
}

/// Plain-text table for the optimizer command.
pub fn render_optimize(outcome: &OptimizeOutcome) -> String {
    let b = &outcome.search.bound;
    let mut out = String::new();
    out.push_str(&format!(
        "best rate: gamma = {:.8e}, prefactor C = {:.8e}\n",
        b.decay_rate, b.prefactor
    ));
    // Full-precision display: the constraints tau < 1 and m > m_floor are
    // open, so the best point may sit within an ulp of them.
    out.push_str(&format!(
        "at tau = {}, lambda = {}, m = {} (m floor {})\n",
        b.params.tau(),
        b.params.lambda(),
        b.params.m(),
        outcome.m_floor
    ));
    out.push_str(&format!(
        "extrema: theta = {:.8e}, theta_tilde = {:.8e}, radius = {:.6e}, s = {:.6e}\n",
        b.diffusivity_min, b.curvature_max, b.interval_radius, b.offset
    ));
    if b.prefactor == 0.0 {
        out.push_str("note: zero data level makes the bound vacuous (C = 0)\n");
    }
    if b.params.tau() > 1.0 - 1e-9 || b.params.m() - outcome.m_floor < 1e-9 {
        out.push_str(
            "note: the rate supremum is not attained (open constraints); this is the best \
             interior point probed, and the prefactor C grows as the boundary is approached\n",
        );
    }
    out.push_str(&format!(
        "search: grid best {:.8e}, {} improvements recorded\n",
        outcome.search.grid_best_rate,
        outcome.search.trace.len()
    ));
    out
}

/// CSV trace of the search improvements: `stage,tau,lambda,m,gamma`.
pub fn write_trace_csv(outcome: &OptimizeOutcome, path: &Path) -> io::Result<()> {
    let mut out = fs::File::create(path)?;
    writeln!(out, "stage,tau,lambda,m,gamma")?;
    for step in &outcome.search.trace {
        let stage = match step.stage {
            SearchStage::Grid => "grid",
            SearchStage::Refine => "refine",
        };
        writeln!(
            out,
            "{stage},{:.16e},{:.16e},{:.16e},{:.16e}",
            step.tau, step.lambda, step.m, step.decay_rate
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    #[test]
    fn heat_pipeline_runs_and_passes() {
        let text = "\
name = mini_heat
flux.kind = heat
form = density_dirichlet
cells = 64
initial.family = sine
initial.amplitude = 1.0
solver.t_final = 0.2
solver.output_every = 0.02
";
        let scenario = parse_scenario(text).unwrap();
        let outcome = run_scenario(&scenario).unwrap();
        assert!(
            outcome.report.passed(),
            "\n{}",
            outcome.report.render_text()
        );
        let fit = outcome.fit.expect("fit should succeed");
        assert!(
            fit.rate > 8.0 && fit.rate < 11.0,
            "gamma_emp = {}",
            fit.rate
        );
        assert!(outcome.bound.decay_rate > 0.6 && outcome.bound.decay_rate < 0.65);
    }

    #[test]
    fn primitive_pipeline_with_extension() {
        let text = "\
name = mini_pm
flux.kind = perona_malik
flux.extend = auto
form = primitive_neumann
cells = 64
initial.family = cosine
initial.amplitude = 0.1591549430918953
initial.offset = 1.0
solver.t_final = 0.5
solver.output_every = 0.05
solver.dt_max = 2e-3
";
        let scenario = parse_scenario(text).unwrap();
        let outcome = run_scenario(&scenario).unwrap();
        assert!(
            outcome.report.passed(),
            "\n{}",
            outcome.report.render_text()
        );
        assert!(matches!(outcome.solver_flux, FluxModel::Extended(_)));
        assert!(outcome.gradient.is_some());
        // The bound was computed for the discrete slope level.
        let b0 = outcome.scenario.data_level();
        assert!((outcome.bound.params.rho0_norm() - b0).abs() < 1e-15);
        assert!(b0 < 0.5 && b0 > 0.49);
    }

    #[test]
    fn outputs_are_written() {
        let text = "\
name = files
flux.kind = heat
form = density_dirichlet
cells = 16
initial.family = sine
initial.amplitude = 0.5
solver.t_final = 0.05
solver.output_every = 0.005
";
        let scenario = parse_scenario(text).unwrap();
        let outcome = run_scenario(&scenario).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let written = write_outputs(&outcome, dir.path()).unwrap();
        assert_eq!(written.len(), 5);
        for path in &written {
            assert!(path.exists());
            assert!(fs::metadata(path).unwrap().len() > 0);
        }
        let report = fs::read_to_string(dir.path().join("report.txt")).unwrap();
        assert!(report.contains("gamma_emp"));
    }

    #[test]
    fn optimizer_command_reports_floor() {
        let flux = FluxModel::PeronaMalik;
        let outcome = run_optimize(&flux, 0.5, 1.0, None).unwrap();
        assert!((outcome.m_floor - 2.0).abs() < 1e-12);
        let rendered = render_optimize(&outcome);
        assert!(rendered.contains("m floor 2"));

        let vacuous = run_optimize(&FluxModel::Heat, 0.0, 1.0, None).unwrap();
        assert!(render_optimize(&vacuous).contains("vacuous"));
    }
}
