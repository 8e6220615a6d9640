use std::ops::Range;

use super::rng::{CounterRng, Stream};
use super::spec::WorkloadSpec;
use crate::error::Result;
use crate::event::{Decider, DecisionEvent, EventPhase};
use crate::gate::{PairedDecision, ScoredPrediction};

const LABELS: [&str; 4] = ["approve", "reject", "escalate", "hold"];

// Lanes: independent draws per task index.
const AUTONOMOUS: u32 = 0;
const CONFIDENCE: u32 = 1;
const SYNC: u32 = 2;
const REVIEW: u32 = 3;
const ROLE: u32 = 4;
const LABEL: u32 = 5;
const OTHER_LABEL: u32 = 6;
const DISAGREE: u32 = 7;

fn label(rng: &CounterRng, stream: Stream, i: u64) -> usize {
    (rng.bits(stream, i, LABEL) % LABELS.len() as u64) as usize
}

/// A label guaranteed to differ from `ai`.
fn other_label(rng: &CounterRng, stream: Stream, i: u64, ai: usize) -> usize {
    (ai + 1 + (rng.bits(stream, i, OTHER_LABEL) % (LABELS.len() as u64 - 1)) as usize)
        % LABELS.len()
}

/// Operational decision events for task indices `range` of the stream.
/// Concatenating disjoint ranges gives the same events as one call over
/// their union.
pub fn simulate_operational_range(
    spec: &WorkloadSpec,
    range: Range<u64>,
) -> Result<Vec<DecisionEvent>> {
    spec.validate()?;
    let rng = CounterRng::new(spec.seed);
    let s = Stream::Operational;
    let auto_conf = spec.confidence_given_autonomous.sampler();
    let dep_conf = spec.confidence_given_dependent.sampler();
    let n = spec.n_tasks as f64;
    let end = range.end.min(spec.n_tasks);
    let mut out = Vec::with_capacity(end.saturating_sub(range.start) as usize);
    for i in range.start..end {
        let p = spec.autonomy_at(i as f64 / n);
        let autonomous = rng.uniform(s, i, AUTONOMOUS) < p;
        let u_conf = rng.uniform(s, i, CONFIDENCE);
        let ai = label(&rng, s, i);
        let task_id = format!("op-{i:08}");
        let ts = spec.timestamp_of(i);
        let mut event = if autonomous {
            let mut e = DecisionEvent::ai_alone(task_id, ts, LABELS[ai])
                .with_confidence(auto_conf.sample(u_conf));
            e.reviewed_async = rng.uniform(s, i, REVIEW) < spec.cost_model.gamma;
            e
        } else {
            let conf = dep_conf.sample(u_conf);
            if rng.uniform(s, i, SYNC) < 0.5 {
                let human = other_label(&rng, s, i, ai);
                DecisionEvent::ai_with_sync_human(task_id, ts, LABELS[ai], LABELS[human])
                    .with_confidence(conf)
            } else {
                DecisionEvent::human_only(task_id, ts, LABELS[ai])
            }
        };
        event.phase = EventPhase::Operational;
        if let Some(mix) = &spec.role_mix {
            if event.is_human_involved() {
                event.human_role = Some(mix.pick(rng.uniform(s, i, ROLE)));
            }
        }
        debug_assert!(event.decider != Decider::AiAlone || autonomous);
        out.push(event);
    }
    Ok(out)
}

/// `n_tasks` operational events; each is AI-alone with the (possibly
/// drifting) ground-truth autonomy. Timestamps strictly increase.
pub fn simulate_operational(spec: &WorkloadSpec) -> Result<Vec<DecisionEvent>> {
    simulate_operational_range(spec, 0..spec.n_tasks)
}

/// Offline test-set predictions: confidences come from the autonomous or the
/// dependent distribution according to each task's ground truth.
pub fn simulate_offline(spec: &WorkloadSpec) -> Result<Vec<ScoredPrediction<f64>>> {
    spec.validate()?;
    let rng = CounterRng::new(spec.seed);
    let s = Stream::Offline;
    let auto_conf = spec.confidence_given_autonomous.sampler();
    let dep_conf = spec.confidence_given_dependent.sampler();
    Ok((0..spec.n_tasks)
        .map(|i| {
            let autonomous = rng.uniform(s, i, AUTONOMOUS) < spec.ground_truth_autonomy;
            let u = rng.uniform(s, i, CONFIDENCE);
            let confidence = if autonomous {
                auto_conf.sample(u)
            } else {
                dep_conf.sample(u)
            };
            ScoredPrediction {
                task_id: format!("off-{i:08}"),
                ai_confidence: confidence,
                ai_decision: LABELS[label(&rng, s, i)].to_string(),
            }
        })
        .collect())
}

/// Shadow-mode pairs; each disagrees independently with `disagreement_rate`.
pub fn simulate_shadow(spec: &WorkloadSpec) -> Result<Vec<PairedDecision>> {
    spec.validate()?;
    let rng = CounterRng::new(spec.seed);
    let s = Stream::Shadow;
    Ok((0..spec.n_tasks)
        .map(|i| {
            let ai = label(&rng, s, i);
            let human = if rng.uniform(s, i, DISAGREE) < spec.disagreement_rate {
                other_label(&rng, s, i, ai)
            } else {
                ai
            };
            PairedDecision::new(format!("sh-{i:08}"), LABELS[ai], LABELS[human])
        })
        .collect())
}

/// Offline predictions as offline-phase event records.
pub fn simulate_offline_events(spec: &WorkloadSpec) -> Result<Vec<DecisionEvent>> {
    Ok(simulate_offline(spec)?
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            DecisionEvent::ai_alone(p.task_id, spec.timestamp_of(i as u64), p.ai_decision)
                .with_confidence(p.ai_confidence)
                .in_phase(EventPhase::Offline)
        })
        .collect())
}

/// Shadow pairs as shadow-phase event records. The live decision is the
/// human's, so each record is `human_only` with the AI's decision alongside.
pub fn simulate_shadow_events(spec: &WorkloadSpec) -> Result<Vec<DecisionEvent>> {
    Ok(simulate_shadow(spec)?
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut e =
                DecisionEvent::human_only(p.task_id, spec.timestamp_of(i as u64), p.human_decision)
                    .in_phase(EventPhase::Shadow);
            e.ai_decision = Some(p.ai_decision);
            e
        })
        .collect())
}
