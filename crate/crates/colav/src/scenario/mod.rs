//! Scenario configuration, the closed-loop runner, and file outputs.

mod config;
mod output;
mod runner;

pub use config::{
    bundled_scenario, bundled_scenario_names, load_scenario, DeciderKind, ScenarioConfig,
    ScenarioError, TargetInitial, TargetMotion, BUNDLED_SCENARIOS,
};
pub use output::{emit_outputs, RunMeta};
pub use runner::{
    build_decider, run, run_with_decider, DecisionRecord, StepRecord, SummaryMetrics,
    TrajectoryLog, COLLISION_RANGE_M,
};
