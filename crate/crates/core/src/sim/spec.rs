use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::event::LaborRole;
use crate::metrics::CostModel;

/// Normal distribution with the given mean and standard deviation,
/// truncated to `[0, 1]`. A zero spread is a point mass at `mean`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceDist {
    pub mean: f64,
    pub spread: f64,
}

impl ConfidenceDist {
    pub fn point(mean: f64) -> Self {
        Self { mean, spread: 0.0 }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.mean.is_finite() && (0.0..=1.0).contains(&self.mean)) {
            return Err(Error::InvalidSpec(format!(
                "{name}.mean = {} is outside [0, 1]",
                self.mean
            )));
        }
        if !(self.spread.is_finite() && self.spread >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "{name}.spread = {} must be >= 0",
                self.spread
            )));
        }
        Ok(())
    }

    pub(crate) fn sampler(&self) -> ConfidenceSampler {
        if self.spread == 0.0 {
            return ConfidenceSampler::Point(self.mean);
        }
        let std = Normal::standard();
        let lo = std.cdf((0.0 - self.mean) / self.spread);
        let hi = std.cdf((1.0 - self.mean) / self.spread);
        ConfidenceSampler::Truncated {
            mean: self.mean,
            spread: self.spread,
            lo,
            width: hi - lo,
            std,
        }
    }
}

pub(crate) enum ConfidenceSampler {
    Point(f64),
    Truncated {
        mean: f64,
        spread: f64,
        lo: f64,
        width: f64,
        std: Normal,
    },
}

impl ConfidenceSampler {
    /// Inverse-CDF draw from a uniform `u` in `[0, 1)`.
    pub(crate) fn sample(&self, u: f64) -> f64 {
        match self {
            ConfidenceSampler::Point(m) => *m,
            ConfidenceSampler::Truncated {
                mean,
                spread,
                lo,
                width,
                std,
            } => {
                let p = (lo + u * width).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
                (mean + spread * std.inverse_cdf(p)).clamp(0.0, 1.0)
            }
        }
    }
}

/// Ground-truth autonomy reached at `at`, a fraction of the stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftPoint {
    pub at: f64,
    pub autonomy: f64,
}

/// Relative weights of the roles tagged on human-involved events.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RoleMix {
    #[serde(default)]
    pub substitution: f64,
    #[serde(default)]
    pub ethical_oversight: f64,
    #[serde(default)]
    pub boundary_push: f64,
    #[serde(default)]
    pub strategic_tuning: f64,
}

impl RoleMix {
    fn weights(&self) -> [(LaborRole, f64); 4] {
        [
            (LaborRole::Substitution, self.substitution),
            (LaborRole::EthicalOversight, self.ethical_oversight),
            (LaborRole::BoundaryPush, self.boundary_push),
            (LaborRole::StrategicTuning, self.strategic_tuning),
        ]
    }

    /// Picks a role for uniform `u`; zero-weight roles are never chosen.
    pub(crate) fn pick(&self, u: f64) -> LaborRole {
        let weights = self.weights();
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        let mut acc = 0.0;
        let mut chosen = None;
        for (role, w) in weights {
            if w <= 0.0 {
                continue;
            }
            chosen = Some(role);
            acc += w / total;
            if u < acc {
                return role;
            }
        }
        chosen.expect("validated: at least one positive weight")
    }

    fn validate(&self) -> Result<()> {
        let weights = self.weights();
        if weights.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidSpec(
                "role_mix weights must be finite and >= 0".into(),
            ));
        }
        if weights.iter().all(|(_, w)| *w == 0.0) {
            return Err(Error::InvalidSpec(
                "role_mix needs a positive weight".into(),
            ));
        }
        Ok(())
    }
}

fn default_start() -> u64 {
    1_700_000_000_000
}

fn default_interval() -> u64 {
    1_000
}

/// Parameters of a synthetic workload. Generation is a pure function of
/// this value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    #[serde(default)]
    pub name: Option<String>,
    /// Probability that a task is handled by the AI alone.
    pub ground_truth_autonomy: f64,
    pub confidence_given_autonomous: ConfidenceDist,
    pub confidence_given_dependent: ConfidenceDist,
    /// Probability that shadow-mode AI and human decisions differ.
    pub disagreement_rate: f64,
    pub cost_model: CostModel<f64>,
    pub n_tasks: u64,
    pub seed: u64,
    /// Piecewise-linear autonomy schedule; replaces `ground_truth_autonomy`
    /// when non-empty. Held constant outside the breakpoints.
    #[serde(default)]
    pub drift: Vec<DriftPoint>,
    #[serde(default)]
    pub role_mix: Option<RoleMix>,
    #[serde(default = "default_start")]
    pub start_timestamp: u64,
    #[serde(default = "default_interval")]
    pub interval_ms: u64,
}

impl WorkloadSpec {
    pub fn new(ground_truth_autonomy: f64, n_tasks: u64, seed: u64) -> Self {
        Self {
            name: None,
            ground_truth_autonomy,
            confidence_given_autonomous: ConfidenceDist::point(1.0),
            confidence_given_dependent: ConfidenceDist::point(0.0),
            disagreement_rate: 1.0 - ground_truth_autonomy,
            cost_model: CostModel {
                tau_a: 1.0,
                tau_h: 1.0,
                gamma: 0.0,
                tau_review_a: 0.0,
            },
            n_tasks,
            seed,
            drift: Vec::new(),
            role_mix: None,
            start_timestamp: default_start(),
            interval_ms: default_interval(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fraction = |name: &str, v: f64| {
            if v.is_finite() && (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!(
                    "{name} = {v} is outside [0, 1]"
                )))
            }
        };
        fraction("ground_truth_autonomy", self.ground_truth_autonomy)?;
        fraction("disagreement_rate", self.disagreement_rate)?;
        self.confidence_given_autonomous
            .validate("confidence_given_autonomous")?;
        self.confidence_given_dependent
            .validate("confidence_given_dependent")?;
        self.cost_model
            .validate()
            .map_err(|e| Error::InvalidSpec(e.to_string()))?;
        if self.n_tasks == 0 {
            return Err(Error::InvalidSpec("n_tasks must be at least 1".into()));
        }
        if self.interval_ms == 0 {
            return Err(Error::InvalidSpec("interval_ms must be at least 1".into()));
        }
        let last = self.n_tasks - 1;
        if self
            .interval_ms
            .checked_mul(last)
            .and_then(|span| span.checked_add(self.start_timestamp))
            .is_none()
        {
            return Err(Error::InvalidSpec("timestamps overflow".into()));
        }
        for (i, p) in self.drift.iter().enumerate() {
            fraction("drift.at", p.at)?;
            fraction("drift.autonomy", p.autonomy)?;
            if i > 0 && p.at < self.drift[i - 1].at {
                return Err(Error::InvalidSpec(
                    "drift breakpoints must be time-ordered".into(),
                ));
            }
        }
        if let Some(mix) = &self.role_mix {
            mix.validate()?;
        }
        Ok(())
    }

    /// Ground-truth autonomy at stream fraction `t`.
    pub fn autonomy_at(&self, t: f64) -> f64 {
        let (Some(first), Some(last)) = (self.drift.first(), self.drift.last()) else {
            return self.ground_truth_autonomy;
        };
        if t <= first.at {
            return first.autonomy;
        }
        if t >= last.at {
            return last.autonomy;
        }
        let k = self.drift.partition_point(|p| p.at <= t);
        let (a, b) = (self.drift[k - 1], self.drift[k]);
        if b.at == a.at {
            return b.autonomy;
        }
        a.autonomy + (b.autonomy - a.autonomy) * (t - a.at) / (b.at - a.at)
    }

    pub fn timestamp_of(&self, index: u64) -> u64 {
        self.start_timestamp + index * self.interval_ms
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Reads a spec from a `.json` file, or TOML otherwise.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            let spec: Self =
                serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
            spec.validate()?;
            Ok(spec)
        } else {
            Self::from_toml_str(&text)
        }
    }
}
