//! Allocation of tagged human effort across roles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::event::{DecisionEvent, LaborRole};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaborAllocation<F = f64> {
    /// Share of tagged events per role; empty when nothing is tagged.
    pub shares: BTreeMap<LaborRole, F>,
    pub counts: BTreeMap<LaborRole, u64>,
    pub tagged_events: u64,
    /// Human-involved events that carry no role tag. Never guessed.
    pub untagged_human_involved: u64,
    /// Tagged share of all tagged or human-involved events.
    pub coverage: F,
    pub note: Option<String>,
}

impl<F: Scalar> LaborAllocation<F> {
    pub fn share(&self, role: LaborRole) -> F {
        self.shares.get(&role).copied().unwrap_or_else(F::zero)
    }
}

/// Role shares over events that carry a role tag.
pub fn labor_report<F: Scalar>(events: &[DecisionEvent]) -> LaborAllocation<F> {
    let mut counts: BTreeMap<LaborRole, u64> = LaborRole::ALL.iter().map(|r| (*r, 0)).collect();
    let mut untagged = 0u64;
    for e in events {
        match e.human_role {
            Some(role) => *counts.get_mut(&role).expect("all roles present") += 1,
            None if e.is_human_involved() => untagged += 1,
            None => {}
        }
    }
    let tagged: u64 = counts.values().sum();
    if tagged == 0 {
        return LaborAllocation {
            shares: BTreeMap::new(),
            counts,
            tagged_events: 0,
            untagged_human_involved: untagged,
            coverage: F::zero(),
            note: Some("no role-tagged events; allocation is empty (coverage 0)".into()),
        };
    }
    let total = F::from_count(tagged);
    let shares = counts
        .iter()
        .map(|(r, c)| (*r, F::from_count(*c) / total))
        .collect();
    LaborAllocation {
        shares,
        counts,
        tagged_events: tagged,
        untagged_human_involved: untagged,
        coverage: total / F::from_count(tagged + untagged),
        note: None,
    }
}
