//! Named fixtures reconstructing the reported case-study figures. Only the
//! summary numbers are known; every other parameter here is a documented
//! choice, not data.

use super::spec::{ConfidenceDist, RoleMix, WorkloadSpec};
use crate::error::{Error, Result};
use crate::metrics::CostModel;

pub const SCENARIOS: [&str; 3] = ["legacy-hisoai", "afhe-iteration-1", "afhe-final"];

const N_TASKS: u64 = 10_000;
const SEED: u64 = 42;

/// Returns the spec for a named scenario.
///
/// * `legacy-hisoai`: ground-truth autonomy 0.38. Costs `tau_a = 1`,
///   `tau_h = 30`, `gamma = 0` put about 95% of spend on human labour;
///   93% of tagged human work is substitution.
/// * `afhe-iteration-1`: first gated attempt, autonomy 0.45 both offline
///   (confidence above 0.8) and in shadow mode.
/// * `afhe-final`: autonomy 0.85, shadow disagreement 0.15, no substitution
///   work left.
///
/// Both AFHE scenarios use `tau_a = 1`, `tau_h = 30`, `gamma = 0.1`,
/// `tau_review_a = 2`. All use 10,000 tasks and seed 42.
pub fn builtin_scenario(name: &str) -> Result<WorkloadSpec> {
    let confident = ConfidenceDist {
        mean: 0.93,
        spread: 0.03,
    };
    let unsure = ConfidenceDist {
        mean: 0.5,
        spread: 0.1,
    };
    let afhe_costs = CostModel {
        tau_a: 1.0,
        tau_h: 30.0,
        gamma: 0.1,
        tau_review_a: 2.0,
    };
    let base = |autonomy: f64| WorkloadSpec {
        name: Some(name.to_string()),
        ground_truth_autonomy: autonomy,
        confidence_given_autonomous: confident,
        confidence_given_dependent: unsure,
        disagreement_rate: 1.0 - autonomy,
        cost_model: afhe_costs,
        n_tasks: N_TASKS,
        seed: SEED,
        ..WorkloadSpec::new(autonomy, N_TASKS, SEED)
    };
    let spec = match name {
        "legacy-hisoai" => WorkloadSpec {
            confidence_given_autonomous: ConfidenceDist {
                mean: 0.88,
                spread: 0.06,
            },
            confidence_given_dependent: ConfidenceDist {
                mean: 0.45,
                spread: 0.15,
            },
            cost_model: CostModel {
                tau_a: 1.0,
                tau_h: 30.0,
                gamma: 0.0,
                tau_review_a: 2.0,
            },
            role_mix: Some(RoleMix {
                substitution: 0.93,
                ethical_oversight: 0.01,
                boundary_push: 0.04,
                strategic_tuning: 0.02,
            }),
            ..base(0.38)
        },
        "afhe-iteration-1" => WorkloadSpec {
            role_mix: Some(RoleMix {
                substitution: 0.5,
                ethical_oversight: 0.1,
                boundary_push: 0.3,
                strategic_tuning: 0.1,
            }),
            ..base(0.45)
        },
        "afhe-final" => WorkloadSpec {
            role_mix: Some(RoleMix {
                substitution: 0.0,
                ethical_oversight: 0.2,
                boundary_push: 0.5,
                strategic_tuning: 0.3,
            }),
            ..base(0.85)
        },
        _ => {
            return Err(Error::UnknownScenario {
                name: name.to_string(),
                available: SCENARIOS.to_vec(),
            })
        }
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::human_cost_share;

    #[test]
    fn fixture_parameters() {
        assert_eq!(
            builtin_scenario("legacy-hisoai")
                .unwrap()
                .ground_truth_autonomy,
            0.38
        );
        assert_eq!(
            builtin_scenario("afhe-iteration-1")
                .unwrap()
                .ground_truth_autonomy,
            0.45
        );
        let last = builtin_scenario("afhe-final").unwrap();
        assert_eq!(last.ground_truth_autonomy, 0.85);
        assert!((last.disagreement_rate - 0.15).abs() < 1e-12);
    }

    #[test]
    fn legacy_costs_are_human_dominated() {
        let spec = builtin_scenario("legacy-hisoai").unwrap();
        assert!(human_cost_share(&spec.cost_model, 0.38).unwrap() > 0.9);
    }

    #[test]
    fn unknown_scenario_lists_names() {
        match builtin_scenario("nope") {
            Err(e @ Error::UnknownScenario { .. }) => {
                assert!(e.to_string().contains("afhe-final"));
                assert_eq!(e.code(), "unknown_scenario");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
