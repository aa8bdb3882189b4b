//! Scenario files, closed-loop episodes and benchmark reports.

pub mod episode;
pub mod generator;
pub mod report;
pub mod scenario;

pub use episode::{
    evaluate_trace, run_episode, step_seed, EgoSnapshot, EpisodeError, EpisodeOutcome,
    EpisodeResult, EpisodeSetup, Evaluator, Trace, TraceStep,
};
pub use generator::{brake_or_crash, generate_scenario, generate_suite};
pub use report::{
    aggregate, aggregate_timing, bar_chart, emit_report, emit_timing, BenchmarkReport, ReportError,
    ReportRow, TimingRow,
};
pub use scenario::{load_scenario, AgentSpec, Scenario, ScenarioError};
