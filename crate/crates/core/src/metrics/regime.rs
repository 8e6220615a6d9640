use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{is_fraction, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Human labour substitutes for the claimed AI function.
    Hisoai,
    /// Between the two thresholds, boundaries included.
    Transitional,
    /// High steady-state autonomy with humans in strategic roles.
    IdealHitl,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Hisoai => "hisoai",
            Regime::Transitional => "transitional",
            Regime::IdealHitl => "ideal_hitl",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds<F = f64> {
    pub hisoai_threshold: F,
    pub ideal_floor: F,
}

impl<F: Scalar> Default for RegimeThresholds<F> {
    fn default() -> Self {
        Self {
            hisoai_threshold: F::lit(0.5),
            ideal_floor: F::lit(0.8),
        }
    }
}

impl<F: Scalar> RegimeThresholds<F> {
    pub fn validate(&self) -> Result<()> {
        if is_fraction(self.hisoai_threshold)
            && is_fraction(self.ideal_floor)
            && self.hisoai_threshold <= self.ideal_floor
        {
            Ok(())
        } else {
            Err(Error::InvalidThresholds {
                hisoai_threshold: self.hisoai_threshold.to_f64().unwrap_or(f64::NAN),
                ideal_floor: self.ideal_floor.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    pub fn classify(&self, alpha: F) -> Result<RegimeClassification<F>> {
        classify_regime(alpha, self.hisoai_threshold, self.ideal_floor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeClassification<F = f64> {
    pub regime: Regime,
    pub alpha: F,
    pub hisoai_threshold: F,
    pub ideal_floor: F,
}

/// Classifies `alpha` with strict inequalities on both sides: exactly
/// `hisoai_threshold` or exactly `ideal_floor` is [`Regime::Transitional`].
pub fn classify_regime<F: Scalar>(
    alpha: F,
    hisoai_threshold: F,
    ideal_floor: F,
) -> Result<RegimeClassification<F>> {
    RegimeThresholds {
        hisoai_threshold,
        ideal_floor,
    }
    .validate()?;
    if !is_fraction(alpha) {
        return Err(Error::DomainError {
            name: "alpha",
            value: alpha.to_f64().unwrap_or(f64::NAN),
        });
    }
    let regime = if alpha < hisoai_threshold {
        Regime::Hisoai
    } else if alpha > ideal_floor {
        Regime::IdealHitl
    } else {
        Regime::Transitional
    };
    Ok(RegimeClassification {
        regime,
        alpha,
        hisoai_threshold,
        ideal_floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn defaults(alpha: f64) -> Regime {
        RegimeThresholds::default().classify(alpha).unwrap().regime
    }

    #[test]
    fn reported_values() {
        assert_eq!(defaults(0.38), Regime::Hisoai);
        assert_eq!(defaults(0.45), Regime::Hisoai);
        assert_eq!(defaults(0.85), Regime::IdealHitl);
    }

    #[test]
    fn boundaries_are_transitional() {
        assert_eq!(defaults(0.5), Regime::Transitional);
        assert_eq!(defaults(0.8), Regime::Transitional);
        assert_eq!(defaults(0.0), Regime::Hisoai);
        assert_eq!(defaults(1.0), Regime::IdealHitl);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            classify_regime(0.5, 0.9, 0.8),
            Err(Error::InvalidThresholds { .. })
        ));
        assert!(matches!(
            classify_regime(1.1, 0.5, 0.8),
            Err(Error::DomainError { .. })
        ));
        assert!(classify_regime(0.5f32, 0.5, 0.5).is_ok());
    }

    proptest! {
        #[test]
        fn exhaustive_and_exclusive(alpha in 0.0f64..=1.0, t in 0.0f64..=1.0, f in 0.0f64..=1.0) {
            let (t, f) = if t <= f { (t, f) } else { (f, t) };
            let c = classify_regime(alpha, t, f).unwrap();
            let flags = [alpha < t, alpha > f, t <= alpha && alpha <= f];
            prop_assert_eq!(flags.iter().filter(|x| **x).count(), 1);
            let expected = if flags[0] { Regime::Hisoai } else if flags[1] { Regime::IdealHitl } else { Regime::Transitional };
            prop_assert_eq!(c.regime, expected);
        }
    }
}
