//! Report documents with a machine-readable (canonical JSON line) and an
//! aligned plain-text rendering, both produced from the same values.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::event::{DecisionEvent, LaborRole};
use crate::ingest::canonical_line;
use crate::labor::{labor_report, LaborAllocation};
use crate::metrics::{
    compute_alpha, AlphaEstimate, CostBreakdown, CostModel, RegimeClassification, RegimeThresholds,
    WindowAlpha,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Machine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument<F = f64> {
    pub alpha: AlphaEstimate<F>,
    pub regime: RegimeClassification<F>,
    pub cost: Option<CostBreakdown<F>>,
    pub labor: Option<LaborAllocation<F>>,
}

impl<F: Scalar> ReportDocument<F> {
    /// Full audit of an event log.
    pub fn build(
        events: &[DecisionEvent],
        thresholds: &RegimeThresholds<F>,
        cost_model: Option<&CostModel<F>>,
        with_labor: bool,
    ) -> Result<Self> {
        let alpha = compute_alpha::<F>(events)?;
        let regime = thresholds.classify(alpha.alpha)?;
        let cost = cost_model
            .map(|m| CostBreakdown::compute(m, alpha.alpha, alpha.total_count))
            .transpose()?;
        Ok(Self {
            alpha,
            regime,
            cost,
            labor: with_labor.then(|| labor_report(events)),
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Machine => canonical_line(self),
            Format::Text => self.render_text(),
        }
    }

    pub fn render_text(&self) -> String {
        let mut out = alpha_text(&self.alpha);
        let r = &self.regime;
        let _ = writeln!(
            out,
            "{:<22}{} (hisoai below {:.2}, ideal above {:.2})",
            "regime", r.regime, r.hisoai_threshold, r.ideal_floor
        );
        if let Some(c) = &self.cost {
            out.push_str(&cost_text(c));
        }
        if let Some(l) = &self.labor {
            out.push_str(&labor_text(l));
        }
        out
    }
}

pub fn alpha_text<F: Scalar>(a: &AlphaEstimate<F>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<22}{:.4}", "alpha", a.alpha);
    let _ = writeln!(
        out,
        "{:<22}[{:.4}, {:.4}]",
        "95% wilson interval", a.ci_low, a.ci_high
    );
    let _ = writeln!(
        out,
        "{:<22}{} / {}",
        "ai-alone decisions", a.ai_alone_count, a.total_count
    );
    out
}

pub fn cost_text<F: Scalar>(c: &CostBreakdown<F>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<22}{:.4}", "total cost", c.total);
    let _ = writeln!(out, "{:<22}{:.4}", "  ai compute", c.ai_compute);
    let _ = writeln!(out, "{:<22}{:.4}", "  async review", c.async_review);
    let _ = writeln!(out, "{:<22}{:.4}", "  human labor", c.human_labor);
    match c.human_share {
        Some(s) => {
            let _ = writeln!(out, "{:<22}{:.4}", "human cost share", s);
        }
        None => {
            let _ = writeln!(out, "{:<22}undefined (zero cost)", "human cost share");
        }
    }
    out
}

pub fn labor_text<F: Scalar>(l: &LaborAllocation<F>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<22}{:>8}  {:>8}", "labor role", "share", "events");
    for role in LaborRole::ALL {
        let count = l.counts.get(role).copied().unwrap_or(0);
        match l.shares.get(role) {
            Some(s) => {
                let _ = writeln!(out, "  {:<20}{:>8.4}  {:>8}", role.as_token(), s, count);
            }
            None => {
                let _ = writeln!(out, "  {:<20}{:>8}  {:>8}", role.as_token(), "-", count);
            }
        }
    }
    let _ = writeln!(
        out,
        "  {:<20}{:>8}  {:>8}",
        "untagged (human)", "", l.untagged_human_involved
    );
    let _ = writeln!(out, "{:<22}{:.4}", "tag coverage", l.coverage);
    if let Some(note) = &l.note {
        let _ = writeln!(out, "note: {note}");
    }
    out
}

pub fn series_text<F: Scalar>(series: &[WindowAlpha<F>]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>15}  {:>8}  {:>17}  {:>8}",
        "window_start", "alpha", "95% interval", "events"
    );
    for w in series {
        let e = &w.estimate;
        let _ = writeln!(
            out,
            "{:>15}  {:>8.4}  [{:.4}, {:.4}]  {:>8}",
            w.window_start, e.alpha, e.ci_low, e.ci_high, e.total_count
        );
    }
    out
}

/// Machine rendering of a windowed series, shared by the CLI and the
/// monitoring service.
pub fn series_machine<F: Scalar>(series: &[WindowAlpha<F>]) -> String {
    canonical_line(&serde_json::json!({ "windows": series }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renderings_share_values() {
        let mut events: Vec<DecisionEvent> = (0..38)
            .map(|i| DecisionEvent::ai_alone(format!("a{i}"), i, "y"))
            .collect();
        events.extend((0..62).map(|i| {
            DecisionEvent::human_only(format!("h{i}"), 100 + i, "n")
                .with_role(LaborRole::Substitution)
        }));
        let model = CostModel::new(1.0, 30.0, 0.0, 2.0).unwrap();
        let doc = ReportDocument::build(&events, &RegimeThresholds::default(), Some(&model), true)
            .unwrap();
        let machine = doc.render(Format::Machine);
        let parsed: ReportDocument = serde_json::from_str(&machine).unwrap();
        assert_eq!(parsed, doc);
        let text = doc.render(Format::Text);
        assert!(text.contains("0.3800"));
        assert!(text.contains("hisoai"));
        assert!(text.contains("substitution"));
        assert!(!machine.contains('\n'));
    }
}
