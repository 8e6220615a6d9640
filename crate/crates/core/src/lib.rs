//! Auditing toolkit for hybrid human/AI decision systems.
//!
//! Measures the autonomy coefficient (share of decisions taken by the AI
//! alone) from decision logs, evaluates the operating-cost model, classifies
//! the operating regime, and runs the three-phase deployment gate (offline,
//! shadow, steady-state monitoring). A seeded workload simulator provides
//! ground truth for verification.
//!
//! Metric and gate types are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common choices.

pub mod error;
pub mod event;
pub mod gate;
pub mod ingest;
pub mod labor;
pub mod metrics;
pub mod report;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use event::{Decider, DecisionEvent, EventPhase, LaborRole};
pub use gate::{
    gate_advance, offline_evaluate, shadow_evaluate, steady_state_check, GatePhase, Outcome,
    PairedDecision, PhaseOutcome,
};
pub use ingest::{parse_event_line, serialize_event, EventFilter, EventStore};
pub use labor::labor_report;
pub use metrics::{
    classify_regime, compute_alpha, compute_alpha_windowed, human_cost_share, total_cost, Regime,
    Span, WindowSpec,
};
pub use report::Format;
pub use scalar::Scalar;
pub use sim::{builtin_scenario, WorkloadSpec};

pub type AlphaEstimate = metrics::AlphaEstimate<f64>;
pub type AlphaEstimate32 = metrics::AlphaEstimate<f32>;
pub type CostModel = metrics::CostModel<f64>;
pub type CostModel32 = metrics::CostModel<f32>;
pub type CostBreakdown = metrics::CostBreakdown<f64>;
pub type RegimeClassification = metrics::RegimeClassification<f64>;
pub type RegimeThresholds = metrics::RegimeThresholds<f64>;
pub type WindowAlpha = metrics::WindowAlpha<f64>;
pub type GateConfig = gate::GateConfig<f64>;
pub type GateConfig32 = gate::GateConfig<f32>;
pub type GateState = gate::GateState<f64>;
pub type GateVerdict = gate::GateVerdict<f64>;
pub type HistoryEntry = gate::HistoryEntry<f64>;
pub type ReengineeringTrigger = gate::ReengineeringTrigger<f64>;
pub type ScoredPrediction = gate::ScoredPrediction<f64>;
pub type LaborAllocation = labor::LaborAllocation<f64>;
pub type ReportDocument = report::ReportDocument<f64>;
