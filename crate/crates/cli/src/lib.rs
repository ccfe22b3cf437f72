//! Library side of the `rate-lab` command line tool: scenario parsing and
//! the run/optimize pipelines. The binary in `main.rs` is a thin wrapper.

pub mod pipeline;
pub mod scenario;

pub use pipeline::{
    auto_m_floor, render_optimize, run_optimize, run_scenario, write_outputs, write_trace_csv,
    OptimizeOutcome, PipelineError, RunOutcome,
};
pub use scenario::{
    parse_scenario, BoundSpec, ExtensionSpec, FluxSpec, InitialDatum, MFloor, ProblemForm,
    Scenario, ScenarioError, VerifySpec,
};
