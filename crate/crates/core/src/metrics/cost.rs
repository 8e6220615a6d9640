use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::Decider;
use crate::scalar::{is_fraction, Scalar};

/// Per-decision cost parameters in abstract, non-negative units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel<F = f64> {
    /// AI cost per decision.
    pub tau_a: F,
    /// Synchronous human cost per decision.
    pub tau_h: F,
    /// Fraction of AI-alone decisions that are reviewed asynchronously.
    pub gamma: F,
    /// Cost of one asynchronous review.
    pub tau_review_a: F,
}

impl<F: Scalar> CostModel<F> {
    pub fn new(tau_a: F, tau_h: F, gamma: F, tau_review_a: F) -> Result<Self> {
        let model = Self {
            tau_a,
            tau_h,
            gamma,
            tau_review_a,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tau_a", self.tau_a),
            ("tau_h", self.tau_h),
            ("tau_review_a", self.tau_review_a),
        ] {
            if !(v.is_finite() && v >= F::zero()) {
                return Err(Error::InvalidCostModel(format!(
                    "{name} = {v} must be finite and >= 0"
                )));
            }
        }
        if !is_fraction(self.gamma) {
            return Err(Error::InvalidCostModel(format!(
                "gamma = {} is outside [0, 1]",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Expected cost of one AI-alone decision, review included.
    pub fn ai_path_cost(&self) -> F {
        self.tau_a + self.gamma * self.tau_review_a
    }

    /// Cost of one decision with synchronous human involvement.
    pub fn human_path_cost(&self) -> F {
        self.tau_a + self.tau_h
    }

    pub fn event_cost(&self, decider: Decider) -> F {
        match decider {
            Decider::AiAlone => self.ai_path_cost(),
            Decider::AiWithSyncHuman | Decider::HumanOnly => self.human_path_cost(),
        }
    }

    /// Expected cost of a single task at autonomy `alpha`.
    pub fn per_task_cost(&self, alpha: F) -> Result<F> {
        check_alpha(alpha)?;
        Ok(alpha * self.ai_path_cost() + (F::one() - alpha) * self.human_path_cost())
    }
}

fn check_alpha<F: Scalar>(alpha: F) -> Result<()> {
    if is_fraction(alpha) {
        Ok(())
    } else {
        Err(Error::DomainError {
            name: "alpha",
            value: alpha.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Total operating cost of `n` tasks:
/// `n * [alpha * (tau_a + gamma * tau_review_a) + (1 - alpha) * (tau_a + tau_h)]`.
pub fn total_cost<F: Scalar>(model: &CostModel<F>, alpha: F, n: u64) -> Result<F> {
    if n == 0 {
        return Err(Error::ZeroTasks);
    }
    Ok(F::from_count(n) * model.per_task_cost(alpha)?)
}

/// Fraction of the per-task cost spent on synchronous human labour.
pub fn human_cost_share<F: Scalar>(model: &CostModel<F>, alpha: F) -> Result<F> {
    let per_task = model.per_task_cost(alpha)?;
    if per_task <= F::zero() {
        return Err(Error::DegenerateCost);
    }
    Ok((F::one() - alpha) * model.tau_h / per_task)
}

/// Itemised cost of `n` tasks at a given autonomy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown<F = f64> {
    pub n: u64,
    pub alpha: F,
    pub ai_compute: F,
    pub async_review: F,
    pub human_labor: F,
    pub total: F,
    pub human_share: Option<F>,
}

impl<F: Scalar> CostBreakdown<F> {
    pub fn compute(model: &CostModel<F>, alpha: F, n: u64) -> Result<Self> {
        let total = total_cost(model, alpha, n)?;
        let nf = F::from_count(n);
        let human_share = match human_cost_share(model, alpha) {
            Ok(s) => Some(s),
            Err(Error::DegenerateCost) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            n,
            alpha,
            ai_compute: nf * model.tau_a,
            async_review: nf * alpha * model.gamma * model.tau_review_a,
            human_labor: nf * (F::one() - alpha) * model.tau_h,
            total,
            human_share,
        })
    }
}
