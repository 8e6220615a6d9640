use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{RegimeThresholds, Span, WindowSpec};
use crate::scalar::{is_fraction, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateConfig<F = f64> {
    /// Minimum autonomy every phase must demonstrate.
    pub alpha_target: F,
    /// Offline confidence threshold. Deliberately has no default.
    pub theta: Option<F>,
    /// Expected number of shadow pairs; a mismatch is logged, not fatal.
    pub shadow_cycles: Option<u64>,
    pub hisoai_threshold: F,
    pub ideal_floor: F,
    pub monitor_window: Span,
    /// Defaults to `monitor_window` (tumbling windows).
    pub monitor_stride: Option<Span>,
    /// Consecutive below-target windows that trigger re-engineering.
    pub consecutive_breaches: u32,
}

impl<F: Scalar> GateConfig<F> {
    pub fn new(alpha_target: F) -> Self {
        let thresholds = RegimeThresholds::<F>::default();
        Self {
            alpha_target,
            theta: None,
            shadow_cycles: None,
            hisoai_threshold: thresholds.hisoai_threshold,
            ideal_floor: thresholds.ideal_floor,
            monitor_window: Span::Events(1_000),
            monitor_stride: None,
            consecutive_breaches: 3,
        }
    }

    pub fn with_theta(mut self, theta: F) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn with_shadow_cycles(mut self, m: u64) -> Self {
        self.shadow_cycles = Some(m);
        self
    }

    pub fn with_monitor(
        mut self,
        window: Span,
        stride: Option<Span>,
        consecutive_breaches: u32,
    ) -> Self {
        self.monitor_window = window;
        self.monitor_stride = stride;
        self.consecutive_breaches = consecutive_breaches;
        self
    }

    pub fn window_spec(&self) -> WindowSpec {
        WindowSpec {
            window: self.monitor_window,
            stride: self.monitor_stride.unwrap_or(self.monitor_window),
        }
    }

    pub fn thresholds(&self) -> RegimeThresholds<F> {
        RegimeThresholds {
            hisoai_threshold: self.hisoai_threshold,
            ideal_floor: self.ideal_floor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !is_fraction(self.alpha_target) {
            return bad(format!(
                "alpha_target = {} is outside [0, 1]",
                self.alpha_target
            ));
        }
        if let Some(theta) = self.theta {
            if !is_fraction(theta) {
                return bad(format!("theta = {theta} is outside [0, 1]"));
            }
        }
        if self.shadow_cycles == Some(0) {
            return bad("shadow_cycles must be at least 1".into());
        }
        if self.consecutive_breaches == 0 {
            return bad("consecutive_breaches must be at least 1".into());
        }
        self.thresholds().validate()?;
        self.window_spec().validate()
    }
}
