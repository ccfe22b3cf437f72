//! Numerical laboratory for explicit exponential decay-rate bounds of the
//! one-dimensional quasilinear diffusion problem `ρ_t = (σ(ρ))_xx` with
//! absorbing boundary, and for its gradient-form Neumann counterpart
//! `u_t = (σ(u_x))_x`.
//!
//! The crate splits into four pieces:
//!
//! - [`flux`]: flux functions `σ` with analytic derivatives, interval extrema
//!   of `σ'` and `|σ''|`, parabolicity thresholds, and globally parabolic
//!   extensions of fluxes that lose parabolicity at large values.
//! - [`bound`]: the explicit decay bound `‖ρ(·,t)‖∞ ≤ C e^{−γt}`, the
//!   comparison barrier behind it, closed forms for the model problems, and a
//!   derivative-free optimizer for the bound's free parameters.
//! - [`solver`]: implicit finite-difference integration of both problem
//!   forms, producing space-time trajectories.
//! - [`verify`]: checks connecting trajectories to the theory (maximum
//!   principle, barrier domination, supersolution residual sign, mass
//!   conservation, envelope monotonicity, decay-rate fits).

pub mod bound;
pub mod flux;
pub mod solver;
pub mod verify;

pub use bound::{
    compute_rate_bound, heat_rate, mstar_for_threshold, optimize_rate, optimize_rate_traced,
    pm_mstar, rate_from_extrema, strong_aggregation_mstar, Barrier, BoundError, BoundParams,
    OptimizedRate, RateBound, SearchStage, SearchStep,
};
pub use flux::{midpoint_match_radius, FluxError, FluxModel, Parabolicity};
pub use solver::{
    discrete_gradient, exact_heat_mode, solve_dirichlet, solve_neumann_primitive, Grid, Scheme,
    SolverConfig, SolverError, SolverStats, Trajectory, TrajectoryForm,
};
pub use verify::{
    check_barrier_domination, check_bound_domination, check_conservation, check_gradient_envelope,
    check_maximum_principle, check_monotone_envelopes, check_supersolution, fit_decay_rate,
    CheckRecord, DecayFit, VerificationReport, VerifyError,
};
