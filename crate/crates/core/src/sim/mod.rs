//! Deterministic closed-loop scenarios.
//!
//! A [`Scenario`] couples a synthetic human (keypoints plus a saturated
//! hand impedance), the fixture controller and the whole-body IK layer
//! into a fixed-timestep loop, logging one [`trace::TraceRecord`] per tick.

mod human;
mod runner;
mod scenario;
mod trace;

pub use human::{synthesize_keypoints, KeypointOutcome, SyntheticHuman};
pub use runner::run_scenario;
pub use scenario::{
    load_scenario, load_scenario_str, HumanForceModel, RandomWrenchConfig, Scenario,
};
pub use trace::{
    compute_metrics, emit_plot_data, read_trace, write_trace, MetricsSummary, TraceLog,
    TraceRecord, TRACE_SCHEMA,
};

/// Simulation and configuration errors.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {field}: {msg}")]
    Invalid { field: String, msg: String },
    #[error("trace error: {0}")]
    Trace(String),
    #[error("empty trace")]
    EmptyTrace,
    #[error("unknown plot quantity {0:?} (see `emit_plot_data` docs)")]
    UnknownQuantity(String),
    #[error("numeric divergence at t = {t_s} s; last good trace retained")]
    Diverged { t_s: f64, trace: Box<TraceLog> },
    #[error(transparent)]
    Kinematics(#[from] crate::kinematics::KinematicsError),
    #[error(transparent)]
    Fixture(#[from] crate::fixture::FixtureError),
}
