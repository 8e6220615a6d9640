use std::fmt;

use serde::{Deserialize, Serialize};

use super::GateConfig;
use crate::error::{Error, Result};
use crate::event::{DecisionEvent, EventPhase};
use crate::metrics::{AlphaEstimate, WindowAlpha};
use crate::scalar::{is_fraction, Scalar};

/// One offline test-set prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPrediction<F = f64> {
    pub task_id: String,
    pub ai_confidence: F,
    pub ai_decision: String,
}

impl<F: Scalar> ScoredPrediction<F> {
    pub fn new(
        task_id: impl Into<String>,
        ai_confidence: F,
        ai_decision: impl Into<String>,
    ) -> Result<Self> {
        if !is_fraction(ai_confidence) {
            return Err(Error::DomainError {
                name: "ai_confidence",
                value: ai_confidence.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            task_id: task_id.into(),
            ai_confidence,
            ai_decision: ai_decision.into(),
        })
    }
}

impl<F: Scalar> ScoredPrediction<F> {
    /// Reads a prediction from an event carrying a confidence and an AI
    /// decision.
    pub fn from_event(e: &DecisionEvent) -> Result<Self> {
        let confidence = e
            .ai_confidence
            .ok_or_else(|| incomplete(e, "ai_confidence"))?;
        let decision = e
            .ai_decision
            .clone()
            .ok_or_else(|| incomplete(e, "ai_decision"))?;
        Self::new(e.task_id.clone(), F::lit(confidence), decision)
    }
}

fn incomplete(e: &DecisionEvent, field: &'static str) -> Error {
    Error::IncompleteEvent {
        task_id: e.task_id.clone(),
        field,
    }
}

/// Predictions from the offline-phase events of a log.
pub fn offline_predictions<F: Scalar>(
    events: &[DecisionEvent],
) -> Result<Vec<ScoredPrediction<F>>> {
    events
        .iter()
        .filter(|e| e.phase == EventPhase::Offline)
        .map(ScoredPrediction::from_event)
        .collect()
}

/// Pairs from the shadow-phase events of a log, compared with `eq`.
pub fn shadow_pairs<E: DecisionEquality + ?Sized>(
    events: &[DecisionEvent],
    eq: &E,
) -> Result<Vec<PairedDecision>> {
    events
        .iter()
        .filter(|e| e.phase == EventPhase::Shadow)
        .map(|e| {
            let ai = e
                .ai_decision
                .as_deref()
                .ok_or_else(|| incomplete(e, "ai_decision"))?;
            let human = e
                .human_decision
                .as_deref()
                .ok_or_else(|| incomplete(e, "human_decision"))?;
            Ok(PairedDecision::compare_with(
                e.task_id.clone(),
                ai,
                human,
                eq,
            ))
        })
        .collect()
}

/// Decides whether an AI and a human decision agree.
pub trait DecisionEquality {
    fn same(&self, ai: &str, human: &str) -> bool;
}

/// Exact equality after trimming and collapsing internal whitespace.
#[derive(Debug, Clone, Copy, Default)]
pub struct NormalizedExact;

pub fn normalize_decision(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl DecisionEquality for NormalizedExact {
    fn same(&self, ai: &str, human: &str) -> bool {
        ai.split_whitespace().eq(human.split_whitespace())
    }
}

impl<T: Fn(&str, &str) -> bool> DecisionEquality for T {
    fn same(&self, ai: &str, human: &str) -> bool {
        self(ai, human)
    }
}

/// A shadow-mode task with the AI decision and a blind human decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedDecision {
    pub task_id: String,
    pub ai_decision: String,
    pub human_decision: String,
    pub agree: bool,
}

impl PairedDecision {
    pub fn new(
        task_id: impl Into<String>,
        ai_decision: impl Into<String>,
        human_decision: impl Into<String>,
    ) -> Self {
        Self::compare_with(task_id, ai_decision, human_decision, &NormalizedExact)
    }

    pub fn compare_with<E: DecisionEquality + ?Sized>(
        task_id: impl Into<String>,
        ai_decision: impl Into<String>,
        human_decision: impl Into<String>,
        eq: &E,
    ) -> Self {
        let ai_decision = ai_decision.into();
        let human_decision = human_decision.into();
        Self {
            task_id: task_id.into(),
            agree: eq.same(&ai_decision, &human_decision),
            ai_decision,
            human_decision,
        }
    }

    /// Disagreement marks the task as human-required.
    pub fn human_required(&self) -> bool {
        !self.agree
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    HisoaiFlag,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::HisoaiFlag => "hisoai_flag",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPhase {
    Offline,
    Shadow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateVerdict<F = f64> {
    pub phase: EvalPhase,
    pub outcome: Outcome,
    pub measured_alpha: AlphaEstimate<F>,
    pub alpha_target: F,
    pub reason: String,
}

impl<F: Scalar> GateVerdict<F> {
    /// Flags only when the measured autonomy is strictly below target.
    pub fn judge(phase: EvalPhase, measured_alpha: AlphaEstimate<F>, alpha_target: F) -> Self {
        let alpha = measured_alpha.alpha;
        let (outcome, reason) = if alpha < alpha_target {
            let why = match phase {
                EvalPhase::Offline => "offline autonomy too low to ship as AI-first; must be marketed as a human-powered service",
                EvalPhase::Shadow => "live agreement too low; unstable in a live setting",
            };
            (
                Outcome::HisoaiFlag,
                format!("HISOAI flag: alpha {alpha:.4} < target {alpha_target:.4}; {why}"),
            )
        } else {
            (
                Outcome::Pass,
                format!("pass: alpha {alpha:.4} >= target {alpha_target:.4}"),
            )
        };
        Self {
            phase,
            outcome,
            measured_alpha,
            alpha_target,
            reason,
        }
    }

    /// True when `outcome` is the one the measured autonomy implies.
    pub fn is_consistent(&self) -> bool {
        let expected = if self.measured_alpha.alpha < self.alpha_target {
            Outcome::HisoaiFlag
        } else {
            Outcome::Pass
        };
        self.outcome == expected && is_fraction(self.alpha_target)
    }
}

/// Offline autonomy: the share of predictions with confidence strictly above
/// `theta`.
pub fn offline_evaluate<F: Scalar>(
    predictions: &[ScoredPrediction<F>],
    config: &GateConfig<F>,
) -> Result<(AlphaEstimate<F>, GateVerdict<F>)> {
    let theta = config.theta.ok_or(Error::MissingTheta)?;
    config.validate()?;
    let confident = predictions
        .iter()
        .filter(|p| p.ai_confidence > theta)
        .count() as u64;
    let estimate = AlphaEstimate::from_counts(confident, predictions.len() as u64)?;
    Ok((
        estimate,
        GateVerdict::judge(EvalPhase::Offline, estimate, config.alpha_target),
    ))
}

/// Shadow autonomy: one minus the share of human-required (disagreeing) pairs.
pub fn shadow_evaluate<F: Scalar>(
    pairs: &[PairedDecision],
    config: &GateConfig<F>,
) -> Result<(AlphaEstimate<F>, GateVerdict<F>)> {
    config.validate()?;
    if let Some(m) = config.shadow_cycles {
        if m != pairs.len() as u64 {
            tracing::warn!(
                expected = m,
                received = pairs.len(),
                "shadow pair count differs from shadow_cycles"
            );
        }
    }
    let human_required = pairs.iter().filter(|p| p.human_required()).count() as u64;
    let total = pairs.len() as u64;
    let estimate = AlphaEstimate::from_counts(total - human_required, total)?;
    Ok((
        estimate,
        GateVerdict::judge(EvalPhase::Shadow, estimate, config.alpha_target),
    ))
}

/// A run of consecutive below-target windows long enough to demand
/// re-engineering. Indices refer to the checked series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReengineeringTrigger<F = f64> {
    pub first_window: usize,
    pub last_window: usize,
    pub first_window_start: u64,
    pub last_window_start: u64,
    pub alphas: Vec<F>,
    pub alpha_target: F,
    pub consecutive_breaches: u32,
}

impl<F: Scalar> ReengineeringTrigger<F> {
    pub fn is_consistent(&self) -> bool {
        self.alphas.len() >= self.consecutive_breaches.max(1) as usize
            && self.alphas.len() == self.last_window + 1 - self.first_window
            && self.alphas.iter().all(|a| *a < self.alpha_target)
    }
}

/// Returns the most recent run of at least `consecutive_breaches` windows
/// whose autonomy is below target, covering the whole run.
pub fn steady_state_check<F: Scalar>(
    windowed: &[WindowAlpha<F>],
    config: &GateConfig<F>,
) -> Option<ReengineeringTrigger<F>> {
    let need = config.consecutive_breaches.max(1) as usize;
    let mut found = None;
    let mut run_start = None;
    for (i, w) in windowed.iter().enumerate() {
        if w.estimate.alpha < config.alpha_target {
            let start = *run_start.get_or_insert(i);
            if i + 1 - start >= need {
                found = Some((start, i));
            }
        } else {
            run_start = None;
        }
    }
    let (first, last) = found?;
    Some(ReengineeringTrigger {
        first_window: first,
        last_window: last,
        first_window_start: windowed[first].window_start,
        last_window_start: windowed[last].window_start,
        alphas: windowed[first..=last]
            .iter()
            .map(|w| w.estimate.alpha)
            .collect(),
        alpha_target: config.alpha_target,
        consecutive_breaches: config.consecutive_breaches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn preds(confidences: &[f64]) -> Vec<ScoredPrediction> {
        confidences
            .iter()
            .enumerate()
            .map(|(i, &c)| ScoredPrediction::new(format!("t{i}"), c, "y").unwrap())
            .collect()
    }

    fn pairs(agree: usize, disagree: usize) -> Vec<PairedDecision> {
        (0..agree)
            .map(|i| PairedDecision::new(format!("a{i}"), "yes", "yes"))
            .chain((0..disagree).map(|i| PairedDecision::new(format!("d{i}"), "yes", "no")))
            .collect()
    }

    fn series(alphas: &[f64]) -> Vec<WindowAlpha> {
        alphas
            .iter()
            .enumerate()
            .map(|(i, &a)| WindowAlpha {
                window_start: i as u64 * 100,
                estimate: AlphaEstimate::from_counts((a * 100.0).round() as u64, 100).unwrap(),
            })
            .collect()
    }

    #[test]
    fn offline_first_iteration_is_flagged() {
        let mut c = vec![0.95; 45];
        c.extend(vec![0.6; 55]);
        let cfg = GateConfig::new(0.8).with_theta(0.8);
        let (est, verdict) = offline_evaluate(&preds(&c), &cfg).unwrap();
        assert_eq!(est.alpha, 0.45);
        assert_eq!(verdict.outcome, Outcome::HisoaiFlag);
        assert!(verdict
            .reason
            .contains("must be marketed as a human-powered service"));
    }

    #[test]
    fn offline_uniform_certainty_passes() {
        let cfg = GateConfig::new(0.8).with_theta(0.5);
        let (est, verdict) = offline_evaluate(&preds(&[1.0; 10]), &cfg).unwrap();
        assert_eq!(est.alpha, 1.0);
        assert_eq!(verdict.outcome, Outcome::Pass);
    }

    #[test]
    fn offline_threshold_is_strict_and_ties_pass() {
        let cfg = GateConfig::new(0.5).with_theta(0.8);
        let (est, verdict) = offline_evaluate(&preds(&[0.9, 0.9, 0.7, 0.3]), &cfg).unwrap();
        assert_eq!(est.alpha, 0.5);
        assert_eq!(verdict.outcome, Outcome::Pass);
        let (est, _) = offline_evaluate(&preds(&[0.8, 0.8, 0.81]), &cfg).unwrap();
        assert_eq!(est.ai_alone_count, 1);
    }

    #[test]
    fn offline_requires_theta_and_input() {
        assert!(matches!(
            offline_evaluate(&preds(&[0.9]), &GateConfig::new(0.8)),
            Err(Error::MissingTheta)
        ));
        assert!(matches!(
            offline_evaluate::<f64>(&[], &GateConfig::new(0.8).with_theta(0.5)),
            Err(Error::EmptyLog)
        ));
        assert!(ScoredPrediction::new("x", 1.01, "y").is_err());
    }

    #[test]
    fn shadow_examples() {
        let cfg = GateConfig::new(0.8);
        let (est, v) = shadow_evaluate(&pairs(85, 15), &cfg).unwrap();
        assert_eq!((est.alpha, v.outcome), (0.85, Outcome::Pass));
        let (est, v) = shadow_evaluate(&pairs(10, 0), &cfg).unwrap();
        assert_eq!((est.alpha, v.outcome), (1.0, Outcome::Pass));
        let (est, v) = shadow_evaluate(&pairs(7, 3), &cfg).unwrap();
        assert_eq!((est.alpha, v.outcome), (0.7, Outcome::HisoaiFlag));
        assert!(v.reason.contains("unstable in a live setting"));
        assert!(matches!(
            shadow_evaluate::<f64>(&[], &cfg),
            Err(Error::EmptyLog)
        ));
        // Cycle-count mismatch only warns.
        assert!(shadow_evaluate(&pairs(7, 3), &cfg.with_shadow_cycles(50)).is_ok());
    }

    #[test]
    fn equality_normalizes_whitespace_and_is_pluggable() {
        assert!(PairedDecision::new("t", "  approve   loan ", "approve loan").agree);
        assert!(!PairedDecision::new("t", "Approve", "approve").agree);
        let ci = |a: &str, b: &str| a.eq_ignore_ascii_case(b);
        assert!(PairedDecision::compare_with("t", "Approve", "approve", &ci).agree);
        let numeric = |a: &str, b: &str| match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(y)) => (x - y).abs() <= 0.01,
            _ => false,
        };
        assert!(PairedDecision::compare_with("t", "1.000", "1.005", &numeric).agree);
        assert_eq!(normalize_decision(" a \t b "), "a b");
    }

    #[test]
    fn steady_state_examples() {
        let cfg = GateConfig::new(0.8);
        assert_eq!(steady_state_check(&series(&[0.9, 0.85, 0.9]), &cfg), None);
        let t = steady_state_check(&series(&[0.9, 0.7, 0.7, 0.7]), &cfg).unwrap();
        assert_eq!((t.first_window, t.last_window), (1, 3));
        assert_eq!((t.first_window_start, t.last_window_start), (100, 300));
        assert_eq!(t.alphas, vec![0.7, 0.7, 0.7]);
        assert!(t.is_consistent());
        let two = cfg.with_monitor(cfg.monitor_window, None, 2);
        assert_eq!(
            steady_state_check(&series(&[0.7, 0.9, 0.7, 0.9]), &two),
            None
        );
        assert_eq!(steady_state_check::<f64>(&[], &cfg), None);
        // At target is not a breach.
        assert_eq!(steady_state_check(&series(&[0.8, 0.8, 0.8]), &cfg), None);
    }

    #[test]
    fn latest_run_is_reported_in_full() {
        let cfg = GateConfig::new(0.8);
        let t =
            steady_state_check(&series(&[0.1, 0.1, 0.1, 0.9, 0.5, 0.5, 0.5, 0.5]), &cfg).unwrap();
        assert_eq!((t.first_window, t.last_window), (4, 7));
    }

    proptest! {
        #[test]
        fn offline_matches_recount(conf in proptest::collection::vec(0.0f64..=1.0, 1..400), theta in 0.0f64..=1.0, target in 0.0f64..=1.0) {
            let cfg = GateConfig::new(target).with_theta(theta);
            let (est, v) = offline_evaluate(&preds(&conf), &cfg).unwrap();
            let brute = conf.iter().filter(|c| **c > theta).count() as u64;
            prop_assert_eq!(est.ai_alone_count, brute);
            prop_assert_eq!(v.outcome == Outcome::Pass, est.alpha >= target);
            prop_assert!(v.is_consistent());
        }

        #[test]
        fn trigger_iff_brute_force_run(alphas in proptest::collection::vec(0u8..=10, 0..30), k in 1u32..5) {
            let values: Vec<f64> = alphas.iter().map(|a| *a as f64 / 10.0).collect();
            let cfg = GateConfig::new(0.5).with_monitor(crate::metrics::Span::Events(10), None, k);
            let got = steady_state_check(&series(&values), &cfg);
            let brute = values.windows(k as usize).any(|w| w.iter().all(|a| *a < 0.5));
            prop_assert_eq!(got.is_some(), brute);
            if let Some(t) = got { prop_assert!(t.is_consistent()); }
        }
    }
}
