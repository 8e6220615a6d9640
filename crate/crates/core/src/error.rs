use std::path::PathBuf;

use thiserror::Error;

use crate::ingest::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("event log is empty; alpha is undefined for zero decisions")]
    EmptyLog,

    #[error("events are not sorted by timestamp (index {index} precedes its predecessor)")]
    UnsortedEvents { index: usize },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("{name} = {value} is outside [0, 1]")]
    DomainError { name: &'static str, value: f64 },

    #[error("task count must be at least 1")]
    ZeroTasks,

    #[error("per-task cost is zero; cost shares are undefined")]
    DegenerateCost,

    #[error("invalid thresholds: hisoai threshold {hisoai_threshold} must not exceed ideal floor {ideal_floor}, both in [0, 1]")]
    InvalidThresholds {
        hisoai_threshold: f64,
        ideal_floor: f64,
    },

    #[error("invalid cost model: {0}")]
    InvalidCostModel(String),

    #[error("invalid gate config: {0}")]
    InvalidConfig(String),

    #[error("offline evaluation needs an explicit confidence threshold (theta)")]
    MissingTheta,

    #[error("event {task_id:?} lacks {field}, which this evaluation needs")]
    IncompleteEvent {
        task_id: String,
        field: &'static str,
    },

    #[error("illegal transition: {outcome} outcome while gate is in {phase}")]
    IllegalTransition { phase: String, outcome: String },

    #[error("inconsistent verdict: {0}")]
    InconsistentVerdict(String),

    #[error("history timestamp {timestamp} does not follow {previous}")]
    NonMonotonicHistory { previous: u64, timestamp: u64 },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("corrupt segment {segment}: {detail}")]
    CorruptSegment { segment: String, detail: String },

    #[error("corrupt manifest {path}: {detail}")]
    CorruptManifest { path: PathBuf, detail: String },

    #[error("unknown scenario {name:?}; available: {}", available.join(", "))]
    UnknownScenario {
        name: String,
        available: Vec<&'static str>,
    },

    #[error("invalid workload spec: {0}")]
    InvalidSpec(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable snake-case identifier used in machine-readable diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyLog => "empty_log",
            Error::UnsortedEvents { .. } => "unsorted_events",
            Error::InvalidWindow(_) => "invalid_window",
            Error::DomainError { .. } => "domain_error",
            Error::ZeroTasks => "zero_tasks",
            Error::DegenerateCost => "degenerate_cost",
            Error::InvalidThresholds { .. } => "invalid_thresholds",
            Error::InvalidCostModel(_) => "invalid_cost_model",
            Error::InvalidConfig(_) => "invalid_config",
            Error::MissingTheta => "missing_theta",
            Error::IncompleteEvent { .. } => "incomplete_event",
            Error::IllegalTransition { .. } => "illegal_transition",
            Error::InconsistentVerdict(_) => "inconsistent_verdict",
            Error::NonMonotonicHistory { .. } => "non_monotonic_history",
            Error::Parse(e) => e.kind.code(),
            Error::CorruptSegment { .. } => "corrupt_segment",
            Error::CorruptManifest { .. } => "corrupt_manifest",
            Error::UnknownScenario { .. } => "unknown_scenario",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::Io(_) => "io_error",
        }
    }
}
