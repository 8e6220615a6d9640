use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::DecisionEvent;
use crate::scalar::Scalar;

/// Point estimate of the autonomy coefficient with its counts and a 95%
/// Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEstimate<F = f64> {
    pub alpha: F,
    pub ai_alone_count: u64,
    pub total_count: u64,
    pub ci_low: F,
    pub ci_high: F,
}

impl<F: Scalar> AlphaEstimate<F> {
    /// Builds an estimate from raw counts. `total` must be positive and at
    /// least `ai_alone`.
    pub fn from_counts(ai_alone: u64, total: u64) -> Result<Self> {
        if total == 0 {
            return Err(Error::EmptyLog);
        }
        if ai_alone > total {
            return Err(Error::DomainError {
                name: "ai_alone_count / total_count",
                value: ai_alone as f64 / total as f64,
            });
        }
        let alpha = F::from_count(ai_alone) / F::from_count(total);
        let (ci_low, ci_high) = wilson_interval(ai_alone, total, F::z95());
        Ok(Self {
            alpha,
            ai_alone_count: ai_alone,
            total_count: total,
            ci_low: ci_low.min(alpha),
            ci_high: ci_high.max(alpha),
        })
    }

    pub fn human_involved_count(&self) -> u64 {
        self.total_count - self.ai_alone_count
    }

    /// The same counts re-expressed in another scalar type.
    pub fn cast<G: Scalar>(&self) -> AlphaEstimate<G> {
        AlphaEstimate::from_counts(self.ai_alone_count, self.total_count)
            .expect("counts were already validated")
    }
}

/// Wilson score interval for `successes` out of `trials` at normal quantile
/// `z`, clamped to `[0, 1]`. Returns `(0, 1)` for zero trials.
pub fn wilson_interval<F: Scalar>(successes: u64, trials: u64, z: F) -> (F, F) {
    if trials == 0 {
        return (F::zero(), F::one());
    }
    let n = F::from_count(trials);
    let p = F::from_count(successes) / n;
    let z2 = z * z;
    let two = F::lit(2.0);
    let four = F::lit(4.0);
    let denom = F::one() + z2 / n;
    let center = (p + z2 / (two * n)) / denom;
    let half = z / denom * (p * (F::one() - p) / n + z2 / (four * n * n)).sqrt();
    let low = if successes == 0 {
        F::zero()
    } else {
        (center - half).max(F::zero())
    };
    let high = if successes == trials {
        F::one()
    } else {
        (center + half).min(F::one())
    };
    (low, high)
}

/// Fraction of decisions taken by the AI alone.
///
/// Events flagged `reviewed_async` still count as AI-alone; any synchronous
/// human participation excludes the event from the numerator.
pub fn compute_alpha<F: Scalar>(events: &[DecisionEvent]) -> Result<AlphaEstimate<F>> {
    let ai_alone = events.iter().filter(|e| e.is_ai_alone()).count() as u64;
    AlphaEstimate::from_counts(ai_alone, events.len() as u64)
}
