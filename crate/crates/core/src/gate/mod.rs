//! The deployment gate: offline and shadow autonomy checks, steady-state
//! monitoring, and the phase machine that ties them together.

mod config;
mod evaluate;
mod history;
mod state;

pub use config::GateConfig;
pub use evaluate::{
    normalize_decision, offline_evaluate, offline_predictions, shadow_evaluate, shadow_pairs,
    steady_state_check, DecisionEquality, EvalPhase, GateVerdict, NormalizedExact, Outcome,
    PairedDecision, ReengineeringTrigger, ScoredPrediction,
};
pub use history::GateHistoryLog;
pub use state::{gate_advance, GatePhase, GateState, HistoryEntry, PhaseOutcome};
