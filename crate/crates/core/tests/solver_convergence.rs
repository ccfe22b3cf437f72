//! Solver verification against the exact heat mode, plus the structural
//! properties every accepted run must carry: discrete maximum principle,
//! monotone envelopes, conservation, gradient envelopes.

use rate_lab_core::{
    check_conservation, check_gradient_envelope, check_maximum_principle, check_monotone_envelopes,
    discrete_gradient, exact_heat_mode, fit_decay_rate, midpoint_match_radius, solve_dirichlet,
    solve_neumann_primitive, FluxModel, Grid, Scheme, SolverConfig,
};

const PI: f64 = std::f64::consts::PI;

fn sine_datum(grid: &Grid, amplitude: f64) -> Vec<f64> {
    let n = grid.n_cells();
    let mut v: Vec<f64> = (0..=n)
        .map(|i| amplitude * (PI * grid.node(i) / grid.length()).sin())
        .collect();
    v[0] = 0.0;
    v[n] = 0.0;
    v
}

fn cosine_datum(grid: &Grid, amplitude: f64, offset: f64) -> Vec<f64> {
    (0..=grid.n_cells())
        .map(|i| offset + amplitude * (PI * grid.node(i) / grid.length()).cos())
        .collect()
}

#[test]
fn heat_solver_converges_at_second_order() {
    let mut errors = Vec::new();
    for n in [50usize, 100, 200] {
        let grid = Grid::new(1.0, n).unwrap();
        let h = grid.spacing();
        let dt = 0.25 * h * h;
        let cfg = SolverConfig {
            dt_initial: dt,
            dt_min: dt,
            dt_max: dt,
            t_final: 0.1,
            output_every: 0.1,
            ..Default::default()
        };
        let traj = solve_dirichlet(&FluxModel::Heat, &sine_datum(&grid, 1.0), grid, &cfg).unwrap();
        let t = *traj.times.last().unwrap();
        let state = traj.states.last().unwrap();
        let err = (0..=n)
            .map(|i| (state[i] - exact_heat_mode(1, 1.0, grid.node(i), t)).abs())
            .fold(0.0f64, f64::max);
        errors.push(err);
    }
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "errors {errors:?}, order {order}");
    }
}

#[test]
fn crank_nicolson_heat_tracks_exact_mode_through_half_time() {
    let grid = Grid::new(1.0, 200).unwrap();
    let cfg = SolverConfig {
        dt_initial: 5e-4,
        dt_min: 1e-8,
        dt_max: 5e-4,
        scheme: Scheme::CrankNicolson,
        t_final: 0.5,
        output_every: 0.01,
        ..Default::default()
    };
    let traj = solve_dirichlet(&FluxModel::Heat, &sine_datum(&grid, 1.0), grid, &cfg).unwrap();
    for (t, sup) in traj.sup_norm_history() {
        let exact = (-PI * PI * t).exp();
        assert!(
            (sup - exact).abs() / exact <= 1e-3,
            "t = {t}: sup {sup} vs exact {exact}"
        );
    }
    let fit = fit_decay_rate(&traj.sup_norm_history(), (0.05, 0.45)).unwrap();
    assert!(
        (fit.rate - PI * PI).abs() / (PI * PI) <= 0.01,
        "fitted rate {} vs pi^2",
        fit.rate
    );
    assert!(fit.r_squared > 0.9999);
}

#[test]
fn density_runs_keep_structure_across_fluxes() {
    let grid = Grid::new(1.0, 100).unwrap();
    let cfg = SolverConfig {
        t_final: 0.5,
        output_every: 0.05,
        ..Default::default()
    };
    let as_strong = FluxModel::anguige_schmeiser(1.0).unwrap();
    let extended = {
        let radius = 0.3 * 20.0 / 19.0;
        as_strong
            .extend(midpoint_match_radius(&as_strong, radius).unwrap(), 0.2)
            .unwrap()
    };
    let cases: Vec<(FluxModel, f64)> = vec![
        (FluxModel::Heat, 1.0),
        (FluxModel::anguige_schmeiser(0.5).unwrap(), 0.5),
        (as_strong, 0.3),
        (extended, 0.3),
        (FluxModel::turchin(0.4, 1.0, 0.5).unwrap(), 0.5),
    ];
    for (flux, amplitude) in cases {
        let traj = solve_dirichlet(&flux, &sine_datum(&grid, amplitude), grid, &cfg).unwrap();
        let mp = check_maximum_principle(&traj, 1e-8);
        assert!(
            mp.passed,
            "{}: max principle margin {:e}",
            flux.kind_name(),
            mp.margin
        );
        let env = check_monotone_envelopes(&traj, 1e-8);
        assert!(
            env.passed,
            "{}: envelope margin {:e}",
            flux.kind_name(),
            env.margin
        );
    }
}

#[test]
fn primitive_runs_keep_structure() {
    let grid = Grid::new(1.0, 100).unwrap();
    let cfg = SolverConfig {
        t_final: 5.0,
        output_every: 0.25,
        dt_max: 5e-3,
        ..Default::default()
    };
    let cases: Vec<(FluxModel, Vec<f64>)> = vec![
        (FluxModel::PeronaMalik, cosine_datum(&grid, 0.5 / PI, 1.0)),
        (FluxModel::Heat, cosine_datum(&grid, 1.0, 2.0)),
    ];
    for (flux, u0) in cases {
        let traj = solve_neumann_primitive(&flux, &u0, grid, &cfg).unwrap();
        let steps = traj.stats.steps as f64;
        let cons = check_conservation(&traj, steps * 1e-10).unwrap();
        assert!(cons.passed, "{}: drift {:e}", flux.kind_name(), cons.margin);
        assert!(
            cons.margin <= 1e-8,
            "{}: drift above 1e-8",
            flux.kind_name()
        );
        let grad_env = check_gradient_envelope(&traj, 1e-8).unwrap();
        assert!(
            grad_env.passed,
            "{}: gradient envelope {:e}",
            flux.kind_name(),
            grad_env.margin
        );
        let mp = check_maximum_principle(&traj, 1e-8);
        assert!(
            mp.passed,
            "{}: primitive max principle {:e}",
            flux.kind_name(),
            mp.margin
        );
        let env = check_monotone_envelopes(&traj, 1e-8);
        assert!(
            env.passed,
            "{}: primitive envelopes {:e}",
            flux.kind_name(),
            env.margin
        );
    }
}

#[test]
fn image_flux_gradient_sup_decays() {
    let grid = Grid::new(1.0, 100).unwrap();
    let cfg = SolverConfig {
        t_final: 1.0,
        output_every: 0.1,
        dt_max: 2e-3,
        ..Default::default()
    };
    let u0 = cosine_datum(&grid, 0.5 / PI, 0.0);
    let traj = solve_neumann_primitive(&FluxModel::PeronaMalik, &u0, grid, &cfg).unwrap();
    let grad = discrete_gradient(&traj).unwrap();
    let hist = grad.sup_norm_history();
    assert!(
        hist.last().unwrap().1 < hist[0].1,
        "gradient sup did not decay: {hist:?}"
    );
    assert!(
        (hist[0].1 - 0.5).abs() < 1e-4,
        "initial slope level {}",
        hist[0].1
    );
}
