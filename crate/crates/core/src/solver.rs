//! Finite-difference time integration for the density Dirichlet problem
//! `ρ_t = (σ(ρ))_xx`, `ρ(0,t) = ρ(L,t) = 0`, and the primitive Neumann
//! problem `u_t = (σ(u_x))_x`, `u_x = 0` on the boundary.
//!
//! Space is a uniform node grid. The density form discretizes `(σ(ρ))_xx`
//! as the second difference of `σ(ρ)` — a monotone scheme for increasing σ,
//! which is what transfers the maximum principle to the discrete solution.
//! The primitive form is a node-centered finite-volume scheme with face
//! fluxes `σ((u_{i+1} − u_i)/h)`, zero boundary fluxes, and half-width
//! boundary cells, so the trapezoid-rule mass is conserved to roundoff.
//!
//! Time stepping is implicit Euler (default) or Crank–Nicolson, each step
//! solved by damped Newton with a tridiagonal Jacobian and the Thomas
//! algorithm. The time step halves when Newton fails and grows by 1.2× after
//! five clean steps, clamped to `[dt_min, dt_max]`.

use crate::flux::FluxModel;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver input: {0}")]
    InvalidData(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("Newton iteration failed to converge at t = {t:.6e} with dt = {dt:.3e}")]
    NewtonDiverged { t: f64, dt: f64 },
    #[error(
        "state left the parabolic range at t = {t:.6e}: value {value:.6e} vs limit {limit:.6e}"
    )]
    NonParabolicState { t: f64, value: f64, limit: f64 },
    #[error("operation expects a {expected} trajectory, found {found}")]
    WrongForm {
        expected: &'static str,
        found: &'static str,
    },
}

/// Uniform node grid on `[0, L]` with `n_cells + 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    length: f64,
    n_cells: usize,
}

impl Grid {
    pub fn new(length: f64, n_cells: usize) -> Result<Self, SolverError> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(SolverError::InvalidData(format!(
                "domain length must be positive, got {length}"
            )));
        }
        if n_cells < 4 {
            return Err(SolverError::InvalidData(format!(
                "grid needs at least 4 cells, got {n_cells}"
            )));
        }
        Ok(Grid { length, n_cells })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    /// `x_i`, with `x_0 = 0` and `x_n = L` exact.
    pub fn node(&self, i: usize) -> f64 {
        self.length * i as f64 / self.n_cells as f64
    }

    /// Face center `x_{i+1/2}`.
    pub fn face(&self, i: usize) -> f64 {
        self.length * (i as f64 + 0.5) / self.n_cells as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ImplicitEuler,
    CrankNicolson,
}

impl Scheme {
    fn implicit_weight(self) -> f64 {
        match self {
            Scheme::ImplicitEuler => 1.0,
            Scheme::CrankNicolson => 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::ImplicitEuler => "implicit_euler",
            Scheme::CrankNicolson => "crank_nicolson",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt_initial: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Residual sup-norm at which a Newton solve is accepted.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub scheme: Scheme,
    pub t_final: f64,
    pub output_every: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt_initial: 1e-4,
            dt_min: 1e-10,
            dt_max: 1e-2,
            newton_tol: 1e-10,
            newton_max_iter: 12,
            scheme: Scheme::ImplicitEuler,
            t_final: 1.0,
            output_every: 0.02,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_initial && self.dt_initial <= self.dt_max)
        {
            return Err(SolverError::InvalidConfig(format!(
                "need 0 < dt_min <= dt_initial <= dt_max, got ({}, {}, {})",
                self.dt_min, self.dt_initial, self.dt_max
            )));
        }
        if self.newton_tol <= 0.0 || self.newton_tol.is_nan() {
            return Err(SolverError::InvalidConfig(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            )));
        }
        if self.newton_max_iter == 0 {
            return Err(SolverError::InvalidConfig(
                "newton_max_iter must be at least 1".into(),
            ));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(SolverError::InvalidConfig(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if self.output_every <= 0.0 || self.output_every.is_nan() {
            return Err(SolverError::InvalidConfig(format!(
                "output_every must be positive, got {}",
                self.output_every
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryForm {
    /// Node values of the density with zero Dirichlet boundary.
    DensityDirichlet,
    /// Node values of the primitive with zero Neumann boundary.
    PrimitiveNeumann,
    /// Face-centered gradients reduced from a primitive trajectory. The
    /// boundary faces carry the Neumann value 0 and are not stored.
    FaceGradient,
}

impl TrajectoryForm {
    pub fn name(self) -> &'static str {
        match self {
            TrajectoryForm::DensityDirichlet => "density_dirichlet",
            TrajectoryForm::PrimitiveNeumann => "primitive_neumann",
            TrajectoryForm::FaceGradient => "face_gradient",
        }
    }
}

/// Per-run integration statistics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverStats {
    pub steps: usize,
    pub newton_iterations: Vec<u32>,
    pub residual_norms: Vec<f64>,
    pub dt_history: Vec<f64>,
    pub scheme: Option<Scheme>,
    pub newton_tol: Option<f64>,
}

/// Space-time samples of a numerical solution at the output instants.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    pub form: TrajectoryForm,
    /// Output instants, increasing, `times[0] = 0`.
    pub times: Vec<f64>,
    /// One value vector per instant.
    pub states: Vec<Vec<f64>>,
    pub stats: SolverStats,
}

impl Trajectory {
    /// Wraps externally built samples; used by fixtures and reductions.
    pub fn from_states(
        grid: Grid,
        form: TrajectoryForm,
        times: Vec<f64>,
        states: Vec<Vec<f64>>,
    ) -> Result<Self, SolverError> {
        if times.is_empty() || times.len() != states.len() {
            return Err(SolverError::InvalidData(
                "times and states must be non-empty and of equal length".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SolverError::InvalidData(
                "output instants must increase".into(),
            ));
        }
        let expected = match form {
            TrajectoryForm::FaceGradient => grid.n_cells(),
            _ => grid.n_nodes(),
        };
        if states.iter().any(|s| s.len() != expected) {
            return Err(SolverError::InvalidData(format!(
                "each state must hold {expected} values for form {}",
                form.name()
            )));
        }
        Ok(Trajectory {
            grid,
            form,
            times,
            states,
            stats: SolverStats::default(),
        })
    }

    /// Sample coordinates: nodes, or face centers for gradient trajectories.
    pub fn positions(&self) -> Vec<f64> {
        match self.form {
            TrajectoryForm::FaceGradient => (0..self.grid.n_cells())
                .map(|i| self.grid.face(i))
                .collect(),
            _ => (0..self.grid.n_nodes())
                .map(|i| self.grid.node(i))
                .collect(),
        }
    }

    /// `(t_k, max_i |v_i(t_k)|)` per output instant.
    pub fn sup_norm_history(&self) -> Vec<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| (t, s.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))))
            .collect()
    }

    /// CSV rows `t,x,value` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,x,value")?;
        let xs = self.positions();
        for (t, state) in self.times.iter().zip(&self.states) {
            for (x, v) in xs.iter().zip(state) {
                writeln!(out, "{t:.16e},{x:.16e},{v:.16e}")?;
            }
        }
        Ok(())
    }
}

/// `e^{−(kπ/L)² t} sin(kπx/L)`: the Dirichlet heat mode, the solver's
/// convergence oracle.
pub fn exact_heat_mode(k: u32, length: f64, x: f64, t: f64) -> f64 {
    assert!(k >= 1 && length > 0.0 && (0.0..=length).contains(&x) && t >= 0.0);
    let omega = k as f64 * std::f64::consts::PI / length;
    (-omega * omega * t).exp() * (omega * x).sin()
}

/// Face-centered differences `(u_{i+1} − u_i)/h` of a primitive trajectory.
/// The boundary faces hold the Neumann value 0 by construction and are
/// reported through the [`TrajectoryForm::FaceGradient`] convention rather
/// than stored.
pub fn discrete_gradient(traj: &Trajectory) -> Result<Trajectory, SolverError> {
    if traj.form != TrajectoryForm::PrimitiveNeumann {
        return Err(SolverError::WrongForm {
            expected: "primitive_neumann",
            found: traj.form.name(),
        });
    }
    let h = traj.grid.spacing();
    let states = traj
        .states
        .iter()
        .map(|u| u.windows(2).map(|w| (w[1] - w[0]) / h).collect())
        .collect();
    Ok(Trajectory {
        grid: traj.grid,
        form: TrajectoryForm::FaceGradient,
        times: traj.times.clone(),
        states,
        stats: traj.stats.clone(),
    })
}

/// Solves `J x = rhs` for a tridiagonal `J`; `diag` and `rhs` are consumed as
/// scratch and the solution lands in `rhs`.
fn thomas_solve(lower: &[f64], diag: &mut [f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    debug_assert!(lower.len() == n - 1 && upper.len() == n - 1 && rhs.len() == n);
    for i in 1..n {
        let w = lower[i - 1] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()))
}

/// Fraction of the parabolic radius that clamped iterates are pulled back to.
const CLAMP_FRACTION: f64 = 0.999;
const MAX_DAMPINGS: usize = 40;

/// Output instants `0, Δ, 2Δ, …` closed with `t_final`.
fn output_instants(cfg: &SolverConfig) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut k = 1u64;
    loop {
        let t = k as f64 * cfg.output_every;
        if t >= cfg.t_final * (1.0 - 1e-12) {
            break;
        }
        out.push(t);
        k += 1;
    }
    out.push(cfg.t_final);
    out
}

/// Parabolic radius the run must respect; `+∞` means unconstrained.
fn guard_radius(flux: &FluxModel) -> f64 {
    match flux {
        FluxModel::Extended(_) => f64::INFINITY,
        _ => flux.parabolicity().map_or(f64::INFINITY, |p| p.radius()),
    }
}

enum StepFailure {
    Newton,
    NonParabolic { value: f64, limit: f64 },
}

/// Shared march driver: repeatedly advances the state to each output instant
/// with adaptive `dt`, recording solver statistics.
fn march<S>(
    mut state: Vec<f64>,
    grid: Grid,
    form: TrajectoryForm,
    cfg: &SolverConfig,
    mut step: S,
) -> Result<Trajectory, SolverError>
where
    S: FnMut(&[f64], f64) -> Result<(Vec<f64>, u32, f64), StepFailure>,
{
    let instants = output_instants(cfg);
    let mut times = Vec::with_capacity(instants.len());
    let mut states = Vec::with_capacity(instants.len());
    times.push(0.0);
    states.push(state.clone());

    let mut stats = SolverStats {
        scheme: Some(cfg.scheme),
        newton_tol: Some(cfg.newton_tol),
        ..SolverStats::default()
    };
    let mut t = 0.0f64;
    let mut dt = cfg.dt_initial;
    let mut clean_streak = 0usize;

    for &target in instants.iter().skip(1) {
        while target - t > 1e-13 * target.max(1.0) {
            let dt_step = dt.min(target - t);
            match step(&state, dt_step) {
                Ok((next, iters, residual)) => {
                    state = next;
                    t += dt_step;
                    stats.steps += 1;
                    stats.newton_iterations.push(iters);
                    stats.residual_norms.push(residual);
                    stats.dt_history.push(dt_step);
                    clean_streak += 1;
                    if clean_streak >= 5 {
                        dt = (dt * 1.2).min(cfg.dt_max);
                        clean_streak = 0;
                    }
                }
                Err(StepFailure::NonParabolic { value, limit }) => {
                    return Err(SolverError::NonParabolicState { t, value, limit });
                }
                Err(StepFailure::Newton) => {
                    clean_streak = 0;
                    dt *= 0.5;
                    if dt < cfg.dt_min {
                        return Err(SolverError::NewtonDiverged { t, dt });
                    }
                }
            }
        }
        t = target;
        times.push(target);
        states.push(state.clone());
    }

    Ok(Trajectory {
        grid,
        form,
        times,
        states,
        stats,
    })
}

/// Integrates the Dirichlet density problem from the node samples `rho0`.
///
/// `rho0` must vanish at both end nodes and stay strictly inside the
/// parabolic range of the flux.
pub fn solve_dirichlet(
    flux: &FluxModel,
    rho0: &[f64],
    grid: Grid,
    cfg: &SolverConfig,
) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    if rho0.len() != grid.n_nodes() {
        return Err(SolverError::InvalidData(format!(
            "initial datum has {} samples, grid has {} nodes",
            rho0.len(),
            grid.n_nodes()
        )));
    }
    if rho0.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::InvalidData(
            "initial datum must be finite".into(),
        ));
    }
    if rho0[0] != 0.0 || rho0[grid.n_cells()] != 0.0 {
        return Err(SolverError::InvalidData(
            "Dirichlet initial datum must vanish at both end nodes".into(),
        ));
    }
    let limit = guard_radius(flux);
    let amplitude = sup_norm(rho0);
    if amplitude >= limit {
        return Err(SolverError::InvalidData(format!(
            "initial datum magnitude {amplitude:.6e} must be strictly below the parabolic \
             threshold {limit:.6}"
        )));
    }

    let n = grid.n_cells();
    let n_int = n - 1;
    let h = grid.spacing();
    let sigma_bc = flux.sigma(0.0);
    let theta_s = cfg.scheme.implicit_weight();

    // σ second difference at interior nodes; `values` includes boundaries.
    let lap_sigma = |values: &[f64], out: &mut [f64]| {
        for i in 0..n_int {
            out[i] =
                flux.sigma(values[i + 2]) - 2.0 * flux.sigma(values[i + 1]) + flux.sigma(values[i]);
        }
    };
    // Same, but for an interior-only vector with implicit zero boundaries.
    let lap_sigma_interior = |v: &[f64], out: &mut [f64]| {
        for i in 0..n_int {
            let left = if i == 0 {
                sigma_bc
            } else {
                flux.sigma(v[i - 1])
            };
            let right = if i == n_int - 1 {
                sigma_bc
            } else {
                flux.sigma(v[i + 1])
            };
            out[i] = right - 2.0 * flux.sigma(v[i]) + left;
        }
    };

    let mut lap_old = vec![0.0; n_int];
    let mut lap_new = vec![0.0; n_int];
    let mut residual = vec![0.0; n_int];
    let mut diag = vec![0.0; n_int];
    let mut lower = vec![0.0; n_int - 1];
    let mut upper = vec![0.0; n_int - 1];
    let mut delta = vec![0.0; n_int];
    let mut candidate = vec![0.0; n_int];

    let step = |prev: &[f64], dt: f64| -> Result<(Vec<f64>, u32, f64), StepFailure> {
        let r = dt / (h * h);
        lap_sigma(prev, &mut lap_old);
        let mut v: Vec<f64> = prev[1..n].to_vec();
        let mut clamp_used = false;

        let eval_residual =
            |v: &[f64], lap_new: &mut [f64], residual: &mut [f64], lap_old: &[f64]| -> f64 {
                lap_sigma_interior(v, lap_new);
                for i in 0..n_int {
                    residual[i] = v[i]
                        - prev[i + 1]
                        - r * (theta_s * lap_new[i] + (1.0 - theta_s) * lap_old[i]);
                }
                sup_norm(residual)
            };

        let mut res = eval_residual(&v, &mut lap_new, &mut residual, &lap_old);
        let mut iters = 0u32;
        while res > cfg.newton_tol {
            if iters as usize >= cfg.newton_max_iter {
                return Err(StepFailure::Newton);
            }
            iters += 1;
            // J δ = −F with J_ii = 1 + 2rθσ'(v_i), J_{i,i±1} = −rθσ'(v_{i±1}).
            for i in 0..n_int {
                diag[i] = 1.0 + 2.0 * r * theta_s * flux.sigma_prime(v[i]);
                delta[i] = -residual[i];
            }
            for i in 0..n_int - 1 {
                upper[i] = -r * theta_s * flux.sigma_prime(v[i + 1]);
                lower[i] = -r * theta_s * flux.sigma_prime(v[i]);
            }
            thomas_solve(&lower, &mut diag, &upper, &mut delta);
            if delta.iter().any(|d| !d.is_finite()) {
                return Err(StepFailure::Newton);
            }

            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..MAX_DAMPINGS {
                for i in 0..n_int {
                    candidate[i] = v[i] + alpha * delta[i];
                }
                let res_c = eval_residual(&candidate, &mut lap_new, &mut residual, &lap_old);
                if res_c.is_finite() && (res_c < res || res_c <= cfg.newton_tol) {
                    res = res_c;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                return Err(StepFailure::Newton);
            }
            v.copy_from_slice(&candidate);

            // Transient overshoot past the parabolic range is pulled back
            // once per step; a second excursion aborts the run.
            if limit.is_finite() {
                let worst = sup_norm(&v);
                if worst >= limit {
                    if clamp_used {
                        return Err(StepFailure::NonParabolic {
                            value: worst,
                            limit,
                        });
                    }
                    clamp_used = true;
                    let cap = CLAMP_FRACTION * limit;
                    for x in v.iter_mut() {
                        *x = x.clamp(-cap, cap);
                    }
                    res = eval_residual(&v, &mut lap_new, &mut residual, &lap_old);
                }
            }
        }

        let mut full = Vec::with_capacity(n + 1);
        full.push(0.0);
        full.extend_from_slice(&v);
        full.push(0.0);
        Ok((full, iters, res))
    };

    march(
        rho0.to_vec(),
        grid,
        TrajectoryForm::DensityDirichlet,
        cfg,
        step,
    )
}

/// Integrates the primitive Neumann problem from the node samples `u0`.
///
/// The face gradients of `u0` must be strictly inside the parabolic range.
/// Boundary faces carry zero flux; the trapezoid-rule mass is preserved to
/// roundoff by applying the converged face fluxes in conservative form.
pub fn solve_neumann_primitive(
    flux: &FluxModel,
    u0: &[f64],
    grid: Grid,
    cfg: &SolverConfig,
) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    if u0.len() != grid.n_nodes() {
        return Err(SolverError::InvalidData(format!(
            "initial datum has {} samples, grid has {} nodes",
            u0.len(),
            grid.n_nodes()
        )));
    }
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::InvalidData(
            "initial datum must be finite".into(),
        ));
    }
    let n = grid.n_cells();
    let h = grid.spacing();
    let limit = guard_radius(flux);
    let max_grad = u0
        .windows(2)
        .fold(0.0f64, |acc, w| acc.max(((w[1] - w[0]) / h).abs()));
    if max_grad >= limit {
        return Err(SolverError::InvalidData(format!(
            "initial face gradient {max_grad:.6e} must be strictly below the parabolic \
             threshold {limit:.6}"
        )));
    }

    let theta_s = cfg.scheme.implicit_weight();
    // Node cell widths: half cells at the boundary, the trapezoid weights.
    let weight = |i: usize| if i == 0 || i == n { 0.5 * h } else { h };

    // Face fluxes σ((u_{i+1} − u_i)/h), i = 0..n−1.
    let face_fluxes = |u: &[f64], out: &mut [f64]| {
        for i in 0..n {
            out[i] = flux.sigma((u[i + 1] - u[i]) / h);
        }
    };
    // Flux divergence per node with zero boundary faces.
    let flux_div = |faces: &[f64], i: usize| -> f64 {
        let right = if i == n { 0.0 } else { faces[i] };
        let left = if i == 0 { 0.0 } else { faces[i - 1] };
        right - left
    };

    let n_nodes = n + 1;
    let mut faces_old = vec![0.0; n];
    let mut faces_new = vec![0.0; n];
    let mut residual = vec![0.0; n_nodes];
    let mut diag = vec![0.0; n_nodes];
    let mut lower = vec![0.0; n_nodes - 1];
    let mut upper = vec![0.0; n_nodes - 1];
    let mut delta = vec![0.0; n_nodes];
    let mut candidate = vec![0.0; n_nodes];

    let step = |prev: &[f64], dt: f64| -> Result<(Vec<f64>, u32, f64), StepFailure> {
        face_fluxes(prev, &mut faces_old);
        let mut v: Vec<f64> = prev.to_vec();

        let eval_residual =
            |v: &[f64], faces_new: &mut [f64], residual: &mut [f64], faces_old: &[f64]| -> f64 {
                face_fluxes(v, faces_new);
                for i in 0..n_nodes {
                    let div =
                        theta_s * flux_div(faces_new, i) + (1.0 - theta_s) * flux_div(faces_old, i);
                    residual[i] = v[i] - prev[i] - dt / weight(i) * div;
                }
                sup_norm(residual)
            };

        let mut res = eval_residual(&v, &mut faces_new, &mut residual, &faces_old);
        let mut iters = 0u32;
        while res > cfg.newton_tol {
            if iters as usize >= cfg.newton_max_iter {
                return Err(StepFailure::Newton);
            }
            iters += 1;
            for i in 0..n_nodes {
                let right = if i == n {
                    0.0
                } else {
                    flux.sigma_prime((v[i + 1] - v[i]) / h)
                };
                let left = if i == 0 {
                    0.0
                } else {
                    flux.sigma_prime((v[i] - v[i - 1]) / h)
                };
                let c = dt * theta_s / (weight(i) * h);
                diag[i] = 1.0 + c * (right + left);
                if i < n {
                    upper[i] = -c * right;
                }
                if i > 0 {
                    lower[i - 1] = -dt * theta_s / (weight(i) * h) * left;
                }
                delta[i] = -residual[i];
            }
            thomas_solve(&lower, &mut diag, &upper, &mut delta);
            if delta.iter().any(|d| !d.is_finite()) {
                return Err(StepFailure::Newton);
            }

            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..MAX_DAMPINGS {
                for i in 0..n_nodes {
                    candidate[i] = v[i] + alpha * delta[i];
                }
                let res_c = eval_residual(&candidate, &mut faces_new, &mut residual, &faces_old);
                if res_c.is_finite() && (res_c < res || res_c <= cfg.newton_tol) {
                    res = res_c;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                return Err(StepFailure::Newton);
            }
            v.copy_from_slice(&candidate);

            if limit.is_finite() {
                let worst = v
                    .windows(2)
                    .fold(0.0f64, |acc, w| acc.max(((w[1] - w[0]) / h).abs()));
                if worst >= limit {
                    return Err(StepFailure::NonParabolic {
                        value: worst,
                        limit,
                    });
                }
            }
        }

        // Apply the converged face fluxes in conservative form: the flux
        // differences telescope, so the trapezoid mass moves only by
        // roundoff regardless of the Newton tolerance.
        face_fluxes(&v, &mut faces_new);
        let mut next = Vec::with_capacity(n_nodes);
        for (i, &prev_i) in prev.iter().enumerate() {
            let div = theta_s * flux_div(&faces_new, i) + (1.0 - theta_s) * flux_div(&faces_old, i);
            next.push(prev_i + dt / weight(i) * div);
        }
        Ok((next, iters, res))
    };

    march(
        u0.to_vec(),
        grid,
        TrajectoryForm::PrimitiveNeumann,
        cfg,
        step,
    )
}
