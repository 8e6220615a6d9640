//! Autonomy coefficient, operating-cost model and regime classification.
//!
//! Everything here is a pure function over immutable inputs.

mod alpha;
mod cost;
mod regime;
mod window;

pub use alpha::{compute_alpha, wilson_interval, AlphaEstimate};
pub use cost::{human_cost_share, total_cost, CostBreakdown, CostModel};
pub use regime::{classify_regime, Regime, RegimeClassification, RegimeThresholds};
pub use window::{compute_alpha_windowed, Span, WindowAlpha, WindowSpec};
