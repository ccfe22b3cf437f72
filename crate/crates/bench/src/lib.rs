//! Shared fixtures for the benchmark targets.

use rate_lab_core::{Grid, Scheme, SolverConfig};

pub fn sine_datum(grid: &Grid, amplitude: f64) -> Vec<f64> {
    let n = grid.n_cells();
    let mut v: Vec<f64> = (0..=n)
        .map(|i| amplitude * (std::f64::consts::PI * grid.node(i) / grid.length()).sin())
        .collect();
    v[0] = 0.0;
    v[n] = 0.0;
    v
}

pub fn cosine_datum(grid: &Grid, amplitude: f64, offset: f64) -> Vec<f64> {
    (0..=grid.n_cells())
        .map(|i| offset + amplitude * (std::f64::consts::PI * grid.node(i)).cos())
        .collect()
}

/// Short fixed-step run, heavy enough to exercise the Newton loop.
pub fn short_run_config(scheme: Scheme) -> SolverConfig {
    SolverConfig {
        dt_initial: 1e-4,
        dt_min: 1e-8,
        dt_max: 1e-4,
        scheme,
        t_final: 0.01,
        output_every: 0.01,
        ..Default::default()
    }
}
