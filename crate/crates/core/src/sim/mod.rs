//! Scenario configuration, the closed-loop driver, traces and metrics.

mod compare;
mod config;
mod metrics;
mod runner;
mod trace;

pub use compare::{compare_runs, ComparisonReport, PairRatio};
pub use config::{
    load_scenario, ConfigError, ControllerKind, ControllerSpec, DisturbanceSpec, ScenarioConfig,
};
pub use metrics::{compute_metrics, MetricsSpec, RunMetrics};
pub use runner::{canonical_scenarios, run_canonical, run_simulation, RunOutcome, SimError};
pub use trace::{RunTrace, TraceHeader, TraceRow, TRACE_COLUMNS};
