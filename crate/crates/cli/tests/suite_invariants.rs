//! Invariants over the whole bundled scenario suite: the proven decay rate
//! never exceeds the measured one, and every scenario finishes well inside
//! its time budget.

use rate_lab_cli::{parse_scenario, run_scenario};
use std::time::{Duration, Instant};

const BUNDLED: [&str; 5] = [
    "heat_sine",
    "heat_neumann_gradient",
    "as_weak",
    "as_strong",
    "pm_smooth",
];

#[test]
fn bound_rate_stays_below_measured_rate() {
    for name in BUNDLED {
        let path = format!("{}/scenarios/{name}.scn", env!("CARGO_MANIFEST_DIR"));
        let scenario = parse_scenario(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let start = Instant::now();
        let outcome = run_scenario(&scenario).unwrap();
        let elapsed = start.elapsed();
        assert!(
            elapsed < Duration::from_secs(60),
            "{name} took {elapsed:?}, budget is 60 s"
        );
        assert!(
            outcome.report.passed(),
            "{name}:\n{}",
            outcome.report.render_text()
        );
        let fit = outcome
            .fit
            .unwrap_or_else(|| panic!("{name}: no decay fit"));
        assert!(
            fit.rate >= 0.99 * outcome.bound.decay_rate,
            "{name}: gamma_emp {} below bound gamma {}",
            fit.rate,
            outcome.bound.decay_rate
        );
    }
}
