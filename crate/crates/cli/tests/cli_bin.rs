//! End-to-end checks of the `rate-lab` binary: exit codes, output files,
//! and the messages the validation layer prints.

use std::path::Path;
use std::process::Command;

fn rate_lab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rate-lab"))
}

const MINI_HEAT: &str = "\
name = mini_heat
flux.kind = heat
form = density_dirichlet
cells = 32
initial.family = sine
initial.amplitude = 1.0
solver.t_final = 0.1
solver.output_every = 0.01
";

#[test]
fn optimize_prints_heat_rate_in_range() {
    let out = rate_lab()
        .args(["optimize", "--flux", "heat", "--rho0-norm", "1", "--L", "1"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let gamma: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("best rate: gamma = "))
        .and_then(|rest| rest.split(',').next())
        .and_then(|field| field.trim().parse().ok())
        .unwrap_or_else(|| panic!("no rate in output:\n{stdout}"));
    assert!((0.64..0.65).contains(&gamma), "gamma = {gamma}");
}

#[test]
fn run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("mini_heat.scn");
    std::fs::write(&scn, MINI_HEAT).unwrap();
    let out_dir = dir.path().join("results");
    let out = rate_lab()
        .args([
            "run",
            scn.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    for file in [
        "trajectory.csv",
        "sup_norm.csv",
        "bound_curve.csv",
        "report.txt",
        "report.csv",
    ] {
        assert!(out_dir.join(file).exists(), "missing {file}");
    }
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("maximum_principle"));
    assert!(stdout.contains("pass"));
}

#[test]
fn failing_check_yields_exit_one() {
    // A negative conservation tolerance cannot be met by any run.
    let text = "\
name = doomed
flux.kind = heat
form = primitive_neumann
cells = 32
initial.family = cosine
initial.amplitude = 0.5
initial.offset = 2.0
solver.t_final = 0.1
solver.output_every = 0.01
verify.tol.conservation = -1.0
";
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("doomed.scn");
    std::fs::write(&scn, text).unwrap();
    let out = rate_lab()
        .args([
            "run",
            scn.to_str().unwrap(),
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(1),
        "stdout: {}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn validation_rejection_yields_exit_two_with_threshold() {
    let text = "\
name = too_steep
flux.kind = anguige_schmeiser
flux.a = 1.0
form = density_dirichlet
cells = 32
initial.family = sine
initial.amplitude = 0.5
";
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("too_steep.scn");
    std::fs::write(&scn, text).unwrap();
    let out = rate_lab()
        .args(["run", scn.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("0.333333"), "stderr: {stderr}");
}

#[test]
fn batch_runs_scenarios_concurrently() {
    let dir = tempfile::tempdir().unwrap();
    let scn_dir = dir.path().join("scns");
    std::fs::create_dir(&scn_dir).unwrap();
    std::fs::write(scn_dir.join("a.scn"), MINI_HEAT.replace("mini_heat", "a")).unwrap();
    std::fs::write(scn_dir.join("b.scn"), MINI_HEAT.replace("mini_heat", "b")).unwrap();
    let out_root = dir.path().join("batch");
    let out = rate_lab()
        .env("RATE_LAB_THREADS", "2")
        .args([
            "batch",
            scn_dir.to_str().unwrap(),
            "--out",
            out_root.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in ["a", "b"] {
        assert!(
            Path::new(&out_root).join(name).join("report.txt").exists(),
            "missing batch output for {name}"
        );
    }
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.matches(": pass").count(), 2, "stdout: {stdout}");
}

#[test]
fn batch_propagates_failures() {
    let dir = tempfile::tempdir().unwrap();
    let scn_dir = dir.path().join("scns");
    std::fs::create_dir(&scn_dir).unwrap();
    std::fs::write(
        scn_dir.join("good.scn"),
        MINI_HEAT.replace("mini_heat", "good"),
    )
    .unwrap();
    std::fs::write(scn_dir.join("bad.scn"), "name = broken\n").unwrap();
    let out = rate_lab()
        .args([
            "batch",
            scn_dir.to_str().unwrap(),
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("ERROR"), "stdout: {stdout}");
}
