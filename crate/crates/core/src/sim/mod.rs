//! Seeded synthetic workloads with known ground truth, used as the oracle
//! for the estimators and the gate.

mod generate;
mod rng;
mod scenarios;
mod spec;

pub use generate::{
    simulate_offline, simulate_offline_events, simulate_operational, simulate_operational_range,
    simulate_shadow, simulate_shadow_events,
};
pub use rng::{mix64, CounterRng, Stream};
pub use scenarios::{builtin_scenario, SCENARIOS};
pub use spec::{ConfidenceDist, DriftPoint, RoleMix, WorkloadSpec};
