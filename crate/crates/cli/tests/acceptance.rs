//! Acceptance suite: the eight gate criteria, one test each, each printing a
//! single pass line with the measured quantities.
//!
//! Scenario runs are shared between criteria through a process-local cache so
//! the suite stays fast.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rate_lab_cli::{parse_scenario, run_optimize, run_scenario, RunOutcome, ScenarioError};
use rate_lab_core::flux::extrema::{max_abs_on_interval, min_on_interval};
use rate_lab_core::{
    check_supersolution, heat_rate, pm_mstar, strong_aggregation_mstar, Barrier, FluxModel,
};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

const PI: f64 = std::f64::consts::PI;

struct CachedRun {
    outcome: Arc<RunOutcome>,
    elapsed: Duration,
}

fn scenario_run(name: &str) -> (Arc<RunOutcome>, Duration) {
    static CACHE: OnceLock<Mutex<HashMap<String, CachedRun>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(hit) = guard.get(name) {
        return (hit.outcome.clone(), hit.elapsed);
    }
    let path = format!("{}/scenarios/{name}.scn", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    let scenario = parse_scenario(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    let start = Instant::now();
    let outcome = run_scenario(&scenario).unwrap_or_else(|e| panic!("{name}: {e}"));
    let elapsed = start.elapsed();
    let outcome = Arc::new(outcome);
    guard.insert(
        name.to_string(),
        CachedRun {
            outcome: outcome.clone(),
            elapsed,
        },
    );
    (outcome, elapsed)
}

fn check(outcome: &RunOutcome, name: &str) -> rate_lab_core::CheckRecord {
    outcome
        .report
        .checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| {
            panic!(
                "report lacks check `{name}`:\n{}",
                outcome.report.render_text()
            )
        })
        .clone()
}

#[test]
fn acceptance_1_heat_rate_supremum() {
    let start = Instant::now();
    let result = run_optimize(&FluxModel::Heat, 1.0, 1.0, None).unwrap();
    let elapsed = start.elapsed();
    let gamma = result.search.bound.decay_rate;
    assert!(
        (0.64..0.65).contains(&gamma),
        "optimized heat rate {gamma} outside [0.64, 0.65)"
    );
    assert!(
        elapsed < Duration::from_secs(5),
        "optimize took {elapsed:?}"
    );

    // Constraints relaxed to tau = 1, m = 1 + 1e-9: the closed form peaks
    // inside (0.64, 0.65) over lambda.
    let m = 1.0 + 1e-9;
    let (_, neg_peak) = min_on_interval(|l| -heat_rate(l, m, 1.0), 0.05, 20.0);
    let peak = -neg_peak;
    assert!(
        peak > 0.64 && peak < 0.65,
        "relaxed closed-form peak {peak} outside (0.64, 0.65)"
    );
    println!(
        "acceptance 1 (heat rate supremum): PASS — gamma* = {gamma:.6}, relaxed peak = {peak:.6}, \
         {elapsed:?}"
    );
}

#[test]
fn acceptance_2_heat_solver_accuracy() {
    let (outcome, elapsed) = scenario_run("heat_sine");
    let mut worst_rel = 0.0f64;
    for (t, sup) in outcome.trajectory.sup_norm_history() {
        let exact = (-PI * PI * t).exp();
        let rel = (sup - exact).abs() / exact;
        worst_rel = worst_rel.max(rel);
        assert!(rel <= 1e-3, "t = {t}: relative error {rel:e}");
    }
    let fit = outcome.fit.expect("heat_sine decay fit");
    let rate_err = (fit.rate - PI * PI).abs() / (PI * PI);
    assert!(
        rate_err <= 0.01,
        "fitted rate {} is {rate_err:e} off pi^2",
        fit.rate
    );
    assert!(elapsed < Duration::from_secs(30), "run took {elapsed:?}");
    println!(
        "acceptance 2 (heat solver accuracy): PASS — worst sup-norm error {worst_rel:.2e}, \
         gamma_emp = {:.4} vs pi^2 = {:.4}, {elapsed:?}",
        fit.rate,
        PI * PI
    );
}

#[test]
fn acceptance_3_bound_domination_all_regimes() {
    let mut margins = Vec::new();
    for name in ["heat_sine", "as_weak", "as_strong", "pm_smooth"] {
        let (outcome, _) = scenario_run(name);
        let record = check(&outcome, "bound_domination");
        assert!(
            record.passed,
            "{name}: measured sup-norm exceeded the bound by {:e}",
            -record.margin
        );
        margins.push(format!("{name} margin {:.3e}", record.margin));
    }
    println!(
        "acceptance 3 (bound domination, all regimes): PASS — {}",
        margins.join(", ")
    );
}

#[test]
fn acceptance_4_closed_form_oracle_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let mut worst = 0.0f64;

    // Aggregation flux: both branches of the slope minimum around R = 2/3.
    for i in 0..100 {
        let a: f64 = rng.gen_range(0.0..=1.0);
        let radius: f64 = match i % 4 {
            0 => rng.gen_range(0.6..0.7333), // straddle the branch split
            _ => rng.gen_range(0.05..2.0),
        };
        let flux = FluxModel::anguige_schmeiser(a).unwrap();
        let theta_closed = if radius < 2.0 / 3.0 {
            3.0 * a * (radius - 2.0 / 3.0).powi(2) + 1.0 - 4.0 * a / 3.0
        } else {
            1.0 - 4.0 * a / 3.0
        };
        let tilde_closed = 2.0 * a * (3.0 * radius + 2.0);
        let (_, theta) = min_on_interval(|s| flux.sigma_prime(s), -radius, radius);
        let (_, tilde) = max_abs_on_interval(|s| flux.sigma_double_prime(s), -radius, radius);
        worst = worst
            .max((theta - theta_closed).abs())
            .max((tilde - tilde_closed).abs());
        assert!((theta - theta_closed).abs() <= 1e-10, "a={a}, R={radius}");
        assert!((tilde - tilde_closed).abs() <= 1e-10, "a={a}, R={radius}");
    }

    // Image flux: curvature branch split at sqrt(2) - 1.
    let breakpoint = 2.0f64.sqrt() - 1.0;
    for i in 0..100 {
        let radius: f64 = match i % 4 {
            0 => rng.gen_range(breakpoint - 0.05..breakpoint + 0.05),
            _ => rng.gen_range(0.02..0.999),
        };
        let flux = FluxModel::PeronaMalik;
        let theta_closed = (1.0 - radius * radius) / (radius * radius + 1.0).powi(2);
        let tilde_closed = if radius < breakpoint {
            2.0 * radius * (3.0 - radius * radius) / (1.0 + radius * radius).powi(3)
        } else {
            0.75 + std::f64::consts::FRAC_1_SQRT_2
        };
        let (_, theta) = min_on_interval(|s| flux.sigma_prime(s), -radius, radius);
        let (_, tilde) = max_abs_on_interval(|s| flux.sigma_double_prime(s), -radius, radius);
        worst = worst
            .max((theta - theta_closed).abs())
            .max((tilde - tilde_closed).abs());
        assert!((theta - theta_closed).abs() <= 1e-10, "R={radius}");
        assert!((tilde - tilde_closed).abs() <= 1e-10, "R={radius}");
    }
    println!(
        "acceptance 4 (closed-form oracle agreement): PASS — 200 draws, worst deviation {worst:.2e}"
    );
}

#[test]
fn acceptance_5_thresholds_and_mstar() {
    let mstar = strong_aggregation_mstar(1.0, 0.2).unwrap();
    assert!((mstar - 2.5).abs() <= 1e-12, "m* = {mstar}");
    let threshold = FluxModel::anguige_schmeiser(1.0)
        .unwrap()
        .parabolicity()
        .unwrap()
        .radius();
    assert!(
        (threshold - 1.0 / 3.0).abs() <= 1e-12,
        "threshold = {threshold}"
    );
    let pm = pm_mstar(0.5).unwrap();
    assert_eq!(pm, 2.0, "pm m* = {pm}");
    println!(
        "acceptance 5 (thresholds and m*): PASS — m*(1, 0.2) = {mstar}, threshold(1) = \
         {threshold:.15}, pm m*(0.5) = {pm}"
    );
}

#[test]
fn acceptance_6_structural_properties() {
    let all = [
        "heat_sine",
        "heat_neumann_gradient",
        "as_weak",
        "as_strong",
        "pm_smooth",
    ];
    let mut lines = Vec::new();
    for name in all {
        let (outcome, _) = scenario_run(name);
        let mp = check(&outcome, "maximum_principle");
        assert!(
            mp.passed && mp.tolerance == 1e-8,
            "{name}: max principle {:e}",
            mp.margin
        );
        let env = check(&outcome, "monotone_envelopes");
        assert!(
            env.passed && env.tolerance == 1e-8,
            "{name}: envelopes {:e}",
            env.margin
        );
        lines.push(format!("{name} mp {:.1e}", mp.margin));
    }
    let (pm, _) = scenario_run("pm_smooth");
    assert!(pm.scenario.solver.t_final == 5.0);
    let cons = check(&pm, "mass_conservation");
    assert!(
        cons.passed && cons.tolerance == 1e-8,
        "conservation drift {:e}",
        cons.margin
    );
    let grad = check(&pm, "gradient_envelope");
    assert!(
        grad.passed && grad.tolerance == 1e-8,
        "gradient envelope {:e}",
        grad.margin
    );
    let (hn, _) = scenario_run("heat_neumann_gradient");
    assert!(check(&hn, "mass_conservation").passed);
    assert!(check(&hn, "gradient_envelope").passed);
    println!(
        "acceptance 6 (structural properties): PASS — {}; pm conservation drift {:.1e}, \
         gradient envelope {:.1e}",
        lines.join(", "),
        cons.margin,
        grad.margin
    );
}

#[test]
fn acceptance_7_supersolution_residuals() {
    // Every bound produced in criteria 1-3, checked on a 101x101 lattice;
    // inflating the rate tenfold must expose a positive residual.
    let mut cases: Vec<(String, Barrier, FluxModel)> = Vec::new();
    let opt = run_optimize(&FluxModel::Heat, 1.0, 1.0, None).unwrap();
    cases.push((
        "optimize_heat".into(),
        Barrier::from_rate_bound(&opt.search.bound),
        FluxModel::Heat,
    ));
    for name in ["heat_sine", "as_weak", "as_strong", "pm_smooth"] {
        let (outcome, _) = scenario_run(name);
        cases.push((
            name.to_string(),
            outcome.barrier,
            outcome.solver_flux.clone(),
        ));
    }
    let mut worst = f64::NEG_INFINITY;
    for (name, barrier, flux) in &cases {
        let record = check_supersolution(barrier, flux, 101);
        assert!(
            record.passed,
            "{name}: residual {:e} at {:?}",
            record.margin, record.worst
        );
        worst = worst.max(record.margin);

        let bound = barrier.rate_bound();
        let inflated =
            Barrier::with_overrides(bound, bound.params.rho0_norm(), 10.0 * bound.decay_rate);
        let violated = check_supersolution(&inflated, flux, 101);
        assert!(
            !violated.passed,
            "{name}: inflated rate left no positive residual"
        );
    }
    println!(
        "acceptance 7 (supersolution residuals): PASS — {} bounds, worst residual {worst:.3e}, \
         sign flips under 10x inflation",
        cases.len()
    );
}

#[test]
fn acceptance_8_ill_posed_rejection() {
    // Image model with slope level 1.2: rejected citing the threshold 1.
    let steep_pm = format!(
        "name = steep\nflux.kind = perona_malik\nform = primitive_neumann\n\
         initial.family = cosine\ninitial.amplitude = {}\n",
        1.2 / PI
    );
    let err = parse_scenario(&steep_pm).unwrap_err();
    assert!(matches!(err, ScenarioError::Validation { .. }), "{err}");
    let msg = err.to_string();
    assert!(
        msg.contains("threshold 1"),
        "message lacks threshold: {msg}"
    );

    // Strong aggregation above (2a - sqrt(a(4a-3)))/(3a) = 1/3 at a = 1.
    let big_as = "name = big\nflux.kind = anguige_schmeiser\nflux.a = 1.0\n\
                  form = density_dirichlet\ninitial.family = sine\ninitial.amplitude = 0.4\n";
    let err = parse_scenario(big_as).unwrap_err();
    assert!(matches!(err, ScenarioError::Validation { .. }), "{err}");
    let msg2 = err.to_string();
    assert!(msg2.contains("0.333333"), "message lacks threshold: {msg2}");
    println!(
        "acceptance 8 (ill-posed rejection): PASS — rejected at validation: [{msg}] / [{msg2}]"
    );
}
