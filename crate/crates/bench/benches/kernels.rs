use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rate_lab_bench::{cosine_datum, short_run_config, sine_datum};
use rate_lab_core::{
    optimize_rate, solve_dirichlet, solve_neumann_primitive, FluxModel, Grid, Scheme,
};

fn flux_evaluation(c: &mut Criterion) {
    let models = [
        ("heat", FluxModel::Heat),
        (
            "anguige_schmeiser",
            FluxModel::anguige_schmeiser(0.9).unwrap(),
        ),
        ("perona_malik", FluxModel::PeronaMalik),
        (
            "extended_pm",
            FluxModel::PeronaMalik.extend(0.7, 0.3).unwrap(),
        ),
    ];
    let points: Vec<f64> = (0..4096).map(|i| -8.0 + 16.0 * i as f64 / 4095.0).collect();
    let mut group = c.benchmark_group("flux_eval_4096");
    for (name, model) in models {
        group.bench_function(name, |b| {
            b.iter(|| {
                let mut acc = 0.0;
                for &s in &points {
                    acc += model.sigma(black_box(s)) + model.sigma_prime(black_box(s));
                }
                acc
            })
        });
    }
    group.finish();
}

fn interval_extrema(c: &mut Criterion) {
    let ext = FluxModel::PeronaMalik.extend(0.7, 0.3).unwrap();
    c.bench_function("extrema_extended_pm", |b| {
        b.iter(|| ext.min_slope_on_interval(black_box(1.5)))
    });
}

fn rate_search(c: &mut Criterion) {
    c.bench_function("optimize_rate_heat", |b| {
        b.iter(|| optimize_rate(&FluxModel::Heat, black_box(1.0), 1.0, 1.0).unwrap())
    });
}

fn solver_steps(c: &mut Criterion) {
    let grid = Grid::new(1.0, 200).unwrap();
    let cfg = short_run_config(Scheme::ImplicitEuler);
    let rho0 = sine_datum(&grid, 0.3);
    let as_flux = FluxModel::anguige_schmeiser(0.5).unwrap();
    c.bench_function("dirichlet_100_steps_n200", |b| {
        b.iter(|| solve_dirichlet(&as_flux, black_box(&rho0), grid, &cfg).unwrap())
    });

    let u0 = cosine_datum(&grid, 0.1, 1.0);
    c.bench_function("neumann_100_steps_n200", |b| {
        b.iter(|| {
            solve_neumann_primitive(&FluxModel::PeronaMalik, black_box(&u0), grid, &cfg).unwrap()
        })
    });
}

criterion_group!(
    benches,
    flux_evaluation,
    interval_extrema,
    rate_search,
    solver_steps
);
criterion_main!(benches);
