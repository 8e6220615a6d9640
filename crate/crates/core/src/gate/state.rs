use std::fmt;

use serde::{Deserialize, Serialize};

use super::{EvalPhase, GateVerdict, Outcome, ReengineeringTrigger};
use crate::error::{Error, Result};
use crate::metrics::AlphaEstimate;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GatePhase {
    OfflineEval,
    ShadowEval,
    Deployed,
    Reengineering,
}

impl fmt::Display for GatePhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GatePhase::OfflineEval => "offline_eval",
            GatePhase::ShadowEval => "shadow_eval",
            GatePhase::Deployed => "deployed",
            GatePhase::Reengineering => "reengineering",
        })
    }
}

/// Input to one gate transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseOutcome<F = f64> {
    Offline {
        verdict: GateVerdict<F>,
    },
    Shadow {
        verdict: GateVerdict<F>,
    },
    /// A steady-state monitoring pass over the operational series.
    Monitor {
        latest: Option<AlphaEstimate<F>>,
        trigger: Option<ReengineeringTrigger<F>>,
    },
    /// Re-engineering finished; start over with offline evaluation.
    Resume,
}

impl<F> PhaseOutcome<F> {
    fn name(&self) -> &'static str {
        match self {
            PhaseOutcome::Offline { .. } => "offline",
            PhaseOutcome::Shadow { .. } => "shadow",
            PhaseOutcome::Monitor { .. } => "monitor",
            PhaseOutcome::Resume => "resume",
        }
    }

    pub fn measured_alpha(&self) -> Option<&AlphaEstimate<F>> {
        match self {
            PhaseOutcome::Offline { verdict } | PhaseOutcome::Shadow { verdict } => {
                Some(&verdict.measured_alpha)
            }
            PhaseOutcome::Monitor { latest, .. } => latest.as_ref(),
            PhaseOutcome::Resume => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry<F = f64> {
    pub timestamp: u64,
    pub from: GatePhase,
    pub to: GatePhase,
    pub outcome: PhaseOutcome<F>,
}

/// Gate lifecycle: current phase plus the full, append-only transition log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateState<F = f64> {
    pub phase: GatePhase,
    pub history: Vec<HistoryEntry<F>>,
    pub reengineering_cycles: u64,
}

impl<F: Scalar> Default for GateState<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Scalar> GateState<F> {
    pub fn new() -> Self {
        Self {
            phase: GatePhase::OfflineEval,
            history: Vec::new(),
            reengineering_cycles: 0,
        }
    }

    pub fn last_timestamp(&self) -> Option<u64> {
        self.history.last().map(|h| h.timestamp)
    }

    pub fn advance(self, outcome: PhaseOutcome<F>, timestamp: u64) -> Result<Self> {
        gate_advance(self, outcome, timestamp)
    }

    /// Rebuilds a state by re-applying every recorded outcome from the
    /// initial state, checking each recorded transition along the way.
    pub fn replay(history: &[HistoryEntry<F>]) -> Result<Self> {
        let mut state = Self::new();
        for entry in history {
            if entry.from != state.phase {
                return Err(Error::IllegalTransition {
                    phase: state.phase.to_string(),
                    outcome: format!("recorded transition from {}", entry.from),
                });
            }
            state = gate_advance(state, entry.outcome.clone(), entry.timestamp)?;
            if state.phase != entry.to {
                return Err(Error::InconsistentVerdict(format!(
                    "history says {} -> {}, replay reached {}",
                    entry.from, entry.to, state.phase
                )));
            }
        }
        Ok(state)
    }
}

fn check_verdict<F: Scalar>(verdict: &GateVerdict<F>, expected: EvalPhase) -> Result<()> {
    if verdict.phase != expected {
        return Err(Error::InconsistentVerdict(format!(
            "verdict from {:?} evaluation submitted as {:?}",
            verdict.phase, expected
        )));
    }
    if !verdict.is_consistent() {
        return Err(Error::InconsistentVerdict(format!(
            "{} with alpha {} against target {}",
            verdict.outcome, verdict.measured_alpha.alpha, verdict.alpha_target
        )));
    }
    Ok(())
}

/// Applies one outcome to the gate.
///
/// Legal moves: offline pass to shadow, shadow pass to deployed, a flag from
/// either evaluation to re-engineering, a monitoring pass keeps a deployment
/// unless it carries a trigger, and resume leaves re-engineering for a fresh
/// offline evaluation. Every accepted call appends exactly one history entry;
/// timestamps must strictly increase.
pub fn gate_advance<F: Scalar>(
    mut state: GateState<F>,
    outcome: PhaseOutcome<F>,
    timestamp: u64,
) -> Result<GateState<F>> {
    if let Some(prev) = state.last_timestamp() {
        if timestamp <= prev {
            return Err(Error::NonMonotonicHistory {
                previous: prev,
                timestamp,
            });
        }
    }
    let from = state.phase;
    let illegal = || Error::IllegalTransition {
        phase: from.to_string(),
        outcome: outcome.name().to_string(),
    };
    let (to, reengineer) = match (&outcome, from) {
        (PhaseOutcome::Offline { verdict }, GatePhase::OfflineEval) => {
            check_verdict(verdict, EvalPhase::Offline)?;
            match verdict.outcome {
                Outcome::Pass => (GatePhase::ShadowEval, false),
                Outcome::HisoaiFlag => (GatePhase::Reengineering, true),
            }
        }
        (PhaseOutcome::Shadow { verdict }, GatePhase::ShadowEval) => {
            check_verdict(verdict, EvalPhase::Shadow)?;
            match verdict.outcome {
                Outcome::Pass => (GatePhase::Deployed, false),
                Outcome::HisoaiFlag => (GatePhase::Reengineering, true),
            }
        }
        (PhaseOutcome::Monitor { trigger, .. }, GatePhase::Deployed) => match trigger {
            None => (GatePhase::Deployed, false),
            Some(t) if t.is_consistent() => (GatePhase::Reengineering, true),
            Some(_) => {
                return Err(Error::InconsistentVerdict(
                    "trigger windows are not all below target".into(),
                ))
            }
        },
        (PhaseOutcome::Resume, GatePhase::Reengineering) => (GatePhase::OfflineEval, false),
        _ => return Err(illegal()),
    };
    if reengineer {
        state.reengineering_cycles += 1;
    }
    state.phase = to;
    state.history.push(HistoryEntry {
        timestamp,
        from,
        to,
        outcome,
    });
    Ok(state)
}
