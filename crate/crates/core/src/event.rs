//! Decision events: one adjudicated task and who produced the accepted decision.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Which path produced the accepted decision for a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decider {
    /// AI output taken without synchronous human involvement. Asynchronous
    /// review afterwards does not change this.
    AiAlone,
    AiWithSyncHuman,
    HumanOnly,
}

/// Human-involvement role attached to an event by upstream logging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaborRole {
    /// Re-performing the core AI function.
    Substitution,
    EthicalOversight,
    BoundaryPush,
    StrategicTuning,
}

/// Lifecycle phase an event was logged in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventPhase {
    Offline,
    Shadow,
    Operational,
}

macro_rules! tokens {
    ($ty:ident { $($variant:ident => $token:literal),+ $(,)? }) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$variant),+];

            pub fn as_token(self) -> &'static str {
                match self {
                    $($ty::$variant => $token),+
                }
            }

            pub fn from_token(token: &str) -> Option<Self> {
                match token {
                    $($token => Some($ty::$variant),)+
                    _ => None,
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_token())
            }
        }
    };
}

tokens!(Decider {
    AiAlone => "ai_alone",
    AiWithSyncHuman => "ai_with_sync_human",
    HumanOnly => "human_only",
});

tokens!(LaborRole {
    Substitution => "substitution",
    EthicalOversight => "ethical_oversight",
    BoundaryPush => "boundary_push",
    StrategicTuning => "strategic_tuning",
});

tokens!(EventPhase {
    Offline => "offline",
    Shadow => "shadow",
    Operational => "operational",
});

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionEvent {
    pub task_id: String,
    /// Milliseconds since the Unix epoch, UTC.
    pub timestamp: u64,
    pub decider: Decider,
    pub ai_confidence: Option<f64>,
    pub ai_decision: Option<String>,
    pub human_decision: Option<String>,
    pub reviewed_async: bool,
    pub human_role: Option<LaborRole>,
    pub phase: EventPhase,
    /// Keys this version does not interpret; kept so records round-trip.
    pub extra: BTreeMap<String, serde_json::Value>,
}

/// A violated [`DecisionEvent`] invariant: the offending key and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantViolation {
    pub key: &'static str,
    pub detail: String,
}

impl DecisionEvent {
    fn bare(task_id: impl Into<String>, timestamp: u64, decider: Decider) -> Self {
        Self {
            task_id: task_id.into(),
            timestamp,
            decider,
            ai_confidence: None,
            ai_decision: None,
            human_decision: None,
            reviewed_async: false,
            human_role: None,
            phase: EventPhase::Operational,
            extra: BTreeMap::new(),
        }
    }

    pub fn ai_alone(
        task_id: impl Into<String>,
        timestamp: u64,
        ai_decision: impl Into<String>,
    ) -> Self {
        Self {
            ai_decision: Some(ai_decision.into()),
            ..Self::bare(task_id, timestamp, Decider::AiAlone)
        }
    }

    pub fn ai_with_sync_human(
        task_id: impl Into<String>,
        timestamp: u64,
        ai_decision: impl Into<String>,
        human_decision: impl Into<String>,
    ) -> Self {
        Self {
            ai_decision: Some(ai_decision.into()),
            human_decision: Some(human_decision.into()),
            ..Self::bare(task_id, timestamp, Decider::AiWithSyncHuman)
        }
    }

    pub fn human_only(
        task_id: impl Into<String>,
        timestamp: u64,
        human_decision: impl Into<String>,
    ) -> Self {
        Self {
            human_decision: Some(human_decision.into()),
            ..Self::bare(task_id, timestamp, Decider::HumanOnly)
        }
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.ai_confidence = Some(confidence);
        self
    }

    pub fn with_role(mut self, role: LaborRole) -> Self {
        self.human_role = Some(role);
        self
    }

    pub fn in_phase(mut self, phase: EventPhase) -> Self {
        self.phase = phase;
        self
    }

    pub fn reviewed(mut self) -> Self {
        self.reviewed_async = true;
        self
    }

    pub fn is_ai_alone(&self) -> bool {
        self.decider == Decider::AiAlone
    }

    /// A human took part, synchronously or through asynchronous review.
    pub fn is_human_involved(&self) -> bool {
        self.decider != Decider::AiAlone || self.reviewed_async
    }

    pub fn validate(&self) -> Result<(), InvariantViolation> {
        if self.task_id.is_empty() {
            return Err(InvariantViolation {
                key: "task_id",
                detail: "must not be empty".into(),
            });
        }
        if let Some(c) = self.ai_confidence {
            if !(c.is_finite() && (0.0..=1.0).contains(&c)) {
                return Err(InvariantViolation {
                    key: "ai_confidence",
                    detail: format!("{c} is outside [0, 1]"),
                });
            }
        }
        match self.decider {
            Decider::AiAlone if self.ai_decision.is_none() => Err(InvariantViolation {
                key: "ai_decision",
                detail: "required when decider is ai_alone".into(),
            }),
            Decider::AiWithSyncHuman | Decider::HumanOnly if self.human_decision.is_none() => {
                Err(InvariantViolation {
                    key: "human_decision",
                    detail: format!("required when decider is {}", self.decider),
                })
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_round_trip() {
        for d in Decider::ALL {
            assert_eq!(Decider::from_token(d.as_token()), Some(*d));
        }
        for r in LaborRole::ALL {
            assert_eq!(LaborRole::from_token(r.as_token()), Some(*r));
        }
        for p in EventPhase::ALL {
            assert_eq!(EventPhase::from_token(p.as_token()), Some(*p));
        }
        assert_eq!(Decider::from_token("AiAlone"), None);
    }

    #[test]
    fn invariants() {
        assert!(DecisionEvent::ai_alone("t", 1, "yes").validate().is_ok());
        let mut e = DecisionEvent::ai_alone("t", 1, "yes");
        e.ai_decision = None;
        assert_eq!(e.validate().unwrap_err().key, "ai_decision");
        let mut e = DecisionEvent::human_only("t", 1, "no");
        e.human_decision = None;
        assert_eq!(e.validate().unwrap_err().key, "human_decision");
        let e = DecisionEvent::ai_alone("t", 1, "yes").with_confidence(1.5);
        assert_eq!(e.validate().unwrap_err().key, "ai_confidence");
    }

    #[test]
    fn async_review_counts_as_human_involvement_but_not_as_decider() {
        let e = DecisionEvent::ai_alone("t", 1, "yes").reviewed();
        assert!(e.is_ai_alone());
        assert!(e.is_human_involved());
    }
}
