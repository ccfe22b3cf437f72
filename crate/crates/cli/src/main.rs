use clap::{Args, Parser, Subcommand};
use rate_lab_cli::{
    parse_scenario, render_optimize, run_optimize, run_scenario, write_outputs, write_trace_csv,
    PipelineError, RunOutcome,
};
use rate_lab_core::FluxModel;
use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

/// Decay-rate laboratory for one-dimensional quasilinear diffusion.
#[derive(Parser)]
#[command(name = "rate-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file: bound, simulation, verification, CSV output.
    Run {
        /// Scenario file (.scn).
        scenario: PathBuf,
        /// Output directory (default: out/<scenario name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximize the decay rate over (tau, lambda, m) for a flux.
    Optimize(OptimizeArgs),
    /// Run every .scn file in a directory; scenarios run concurrently.
    Batch {
        /// Directory holding scenario files.
        dir: PathBuf,
        /// Output root (default: batch-out); one subdirectory per scenario.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct OptimizeArgs {
    /// Flux kind: heat, turchin, anguige_schmeiser, perona_malik.
    #[arg(long)]
    flux: String,
    /// Adhesion constant (anguige_schmeiser).
    #[arg(long)]
    a: Option<f64>,
    /// Maximum gregariousness (turchin).
    #[arg(long)]
    k0: Option<f64>,
    /// Critical density (turchin).
    #[arg(long)]
    omega: Option<f64>,
    /// Motility (turchin).
    #[arg(long)]
    mu: Option<f64>,
    /// Data level the bound applies to.
    #[arg(long = "rho0-norm")]
    rho0_norm: f64,
    /// Domain length.
    #[arg(long = "L")]
    length: f64,
    /// m floor: `auto` derives the smallest admissible value, or a number.
    #[arg(long = "m-floor", default_value = "auto")]
    m_floor: String,
    /// Write the search trace as CSV.
    #[arg(long = "trace-csv")]
    trace_csv: Option<PathBuf>,
}

fn flux_from_args(args: &OptimizeArgs) -> Result<FluxModel, String> {
    match args.flux.as_str() {
        "heat" => Ok(FluxModel::Heat),
        "perona_malik" => Ok(FluxModel::PeronaMalik),
        "anguige_schmeiser" => {
            let a = args.a.ok_or("anguige_schmeiser needs --a")?;
            FluxModel::anguige_schmeiser(a).map_err(|e| e.to_string())
        }
        "turchin" => {
            let k0 = args.k0.ok_or("turchin needs --k0")?;
            let omega = args.omega.ok_or("turchin needs --omega")?;
            let mu = args.mu.ok_or("turchin needs --mu")?;
            FluxModel::turchin(k0, omega, mu).map_err(|e| e.to_string())
        }
        other => Err(format!("unknown flux kind `{other}`")),
    }
}

fn print_run_summary(outcome: &RunOutcome) {
    print!("{}", outcome.report.render_text());
    if let Some(fit) = &outcome.fit {
        println!(
            "measured decay: gamma_emp = {:.6e} (r^2 = {:.6}) vs bound gamma = {:.6e}",
            fit.rate, fit.r_squared, outcome.bound.decay_rate
        );
    }
}

fn cmd_run(scenario_path: &Path, out: Option<PathBuf>) -> Result<bool, String> {
    let text = std::fs::read_to_string(scenario_path)
        .map_err(|e| format!("cannot read {}: {e}", scenario_path.display()))?;
    let scenario = parse_scenario(&text).map_err(|e| e.to_string())?;
    let out_dir = out.unwrap_or_else(|| PathBuf::from("out").join(&scenario.name));
    let outcome = run_scenario(&scenario).map_err(|e| e.to_string())?;
    let written = write_outputs(&outcome, &out_dir).map_err(|e| e.to_string())?;
    print_run_summary(&outcome);
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(outcome.report.passed())
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<(), String> {
    let flux = flux_from_args(args)?;
    let m_floor = match args.m_floor.as_str() {
        "auto" => None,
        raw => Some(
            raw.parse::<f64>()
                .map_err(|_| format!("bad --m-floor value `{raw}`"))?,
        ),
    };
    let outcome =
        run_optimize(&flux, args.rho0_norm, args.length, m_floor).map_err(|e| e.to_string())?;
    print!("{}", render_optimize(&outcome));
    if let Some(path) = &args.trace_csv {
        write_trace_csv(&outcome, path).map_err(|e| e.to_string())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

enum BatchResult {
    Passed,
    ChecksFailed,
    Error(String),
}

fn batch_threads() -> usize {
    std::env::var("RATE_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn run_one_batch_entry(path: &Path, out_root: &Path) -> BatchResult {
    let run = || -> Result<RunOutcome, PipelineError> {
        let text = std::fs::read_to_string(path)?;
        let scenario = parse_scenario(&text)?;
        let outcome = run_scenario(&scenario)?;
        write_outputs(&outcome, &out_root.join(&scenario.name))?;
        Ok(outcome)
    };
    match run() {
        Ok(outcome) if outcome.report.passed() => BatchResult::Passed,
        Ok(_) => BatchResult::ChecksFailed,
        Err(e) => BatchResult::Error(e.to_string()),
    }
}

fn cmd_batch(dir: &Path, out: Option<PathBuf>) -> Result<bool, String> {
    let out_root = out.unwrap_or_else(|| PathBuf::from("batch-out"));
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| format!("cannot read {}: {e}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "scn"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(format!("no .scn files in {}", dir.display()));
    }

    let queue: Mutex<VecDeque<PathBuf>> = Mutex::new(paths.iter().cloned().collect());
    let results: Mutex<Vec<(PathBuf, BatchResult)>> = Mutex::new(Vec::new());
    let workers = batch_threads().min(paths.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let next = queue.lock().unwrap().pop_front();
                let Some(path) = next else { break };
                let result = run_one_batch_entry(&path, &out_root);
                results.lock().unwrap().push((path, result));
            });
        }
    });

    let mut results = results.into_inner().unwrap();
    results.sort_by(|a, b| a.0.cmp(&b.0));
    let mut all_passed = true;
    for (path, result) in &results {
        let status = match result {
            BatchResult::Passed => "pass".to_string(),
            BatchResult::ChecksFailed => {
                all_passed = false;
                "FAIL".to_string()
            }
            BatchResult::Error(e) => {
                all_passed = false;
                format!("ERROR: {e}")
            }
        };
        println!("{}: {status}", path.display());
    }
    println!("outputs under {}", out_root.display());
    Ok(all_passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verdict = match &cli.command {
        Command::Run { scenario, out } => cmd_run(scenario, out.clone()),
        Command::Optimize(args) => cmd_optimize(args).map(|()| true),
        Command::Batch { dir, out } => cmd_batch(dir, out.clone()),
    };
    match verdict {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
