use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AlphaEstimate;
use crate::error::{Error, Result};
use crate::event::DecisionEvent;
use crate::scalar::Scalar;

/// Window or stride length, as an event count or a time span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Span {
    Events(u64),
    Millis(u64),
}

impl Span {
    fn len(self) -> u64 {
        match self {
            Span::Events(n) | Span::Millis(n) => n,
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Span::Events(n) => write!(f, "{n}"),
            Span::Millis(ms) => write!(f, "{ms}ms"),
        }
    }
}

/// Accepts `500` or `500ev` (events) and `250ms`, `30s`, `5m`, `2h` (time).
impl FromStr for Span {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
        let (digits, unit) = s.split_at(split);
        let n: u64 = digits
            .parse()
            .map_err(|_| Error::InvalidWindow(format!("cannot parse {s:?} as a span")))?;
        let scaled = |factor: u64| {
            n.checked_mul(factor)
                .map(Span::Millis)
                .ok_or_else(|| Error::InvalidWindow(format!("{s:?} overflows")))
        };
        match unit {
            "" | "ev" | "events" => Ok(Span::Events(n)),
            "ms" => Ok(Span::Millis(n)),
            "s" => scaled(1_000),
            "m" => scaled(60_000),
            "h" => scaled(3_600_000),
            _ => Err(Error::InvalidWindow(format!("unknown span unit {unit:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub window: Span,
    pub stride: Span,
}

impl WindowSpec {
    /// Non-overlapping windows of `window`.
    pub fn tumbling(window: Span) -> Self {
        Self {
            window,
            stride: window,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window.len() == 0 || self.stride.len() == 0 {
            return Err(Error::InvalidWindow(
                "window and stride must be positive".into(),
            ));
        }
        if std::mem::discriminant(&self.window) != std::mem::discriminant(&self.stride) {
            return Err(Error::InvalidWindow(format!(
                "window {} and stride {} must both be event counts or both durations",
                self.window, self.stride
            )));
        }
        Ok(())
    }
}

/// One window of a rolling autonomy series. `window_start` is the window's
/// lower time bound, or the first event's timestamp for count windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowAlpha<F = f64> {
    pub window_start: u64,
    pub estimate: AlphaEstimate<F>,
}

fn window_estimate<F: Scalar>(window_start: u64, events: &[DecisionEvent]) -> WindowAlpha<F> {
    let ai = events.iter().filter(|e| e.is_ai_alone()).count() as u64;
    WindowAlpha {
        window_start,
        estimate: AlphaEstimate::from_counts(ai, events.len() as u64).expect("window is non-empty"),
    }
}

/// Rolling autonomy over timestamp-sorted events.
///
/// Windows advance by `stride` from the first event; empty windows are
/// skipped, and generation stops with the first window that reaches past the
/// last event, so a window covering the whole log yields exactly one entry.
pub fn compute_alpha_windowed<F: Scalar>(
    events: &[DecisionEvent],
    spec: WindowSpec,
) -> Result<Vec<WindowAlpha<F>>> {
    spec.validate()?;
    if let Some(i) = (1..events.len()).find(|&i| events[i].timestamp < events[i - 1].timestamp) {
        return Err(Error::UnsortedEvents { index: i });
    }
    if events.is_empty() {
        return Ok(Vec::new());
    }

    let mut out = Vec::new();
    match (spec.window, spec.stride) {
        (Span::Events(window), Span::Events(stride)) => {
            let n = events.len();
            let window = usize::try_from(window).unwrap_or(usize::MAX);
            let stride = usize::try_from(stride).unwrap_or(usize::MAX);
            let mut start = 0usize;
            loop {
                let end = start.saturating_add(window).min(n);
                let slice = &events[start..end];
                out.push(window_estimate(slice[0].timestamp, slice));
                if end >= n {
                    break;
                }
                start = match start.checked_add(stride) {
                    Some(s) if s < n => s,
                    _ => break,
                };
            }
        }
        (Span::Millis(window), Span::Millis(stride)) => {
            let first = events[0].timestamp;
            let last = events[events.len() - 1].timestamp;
            let mut start = first;
            loop {
                let end = start.saturating_add(window);
                let lo = events.partition_point(|e| e.timestamp < start);
                let hi = events.partition_point(|e| e.timestamp < end);
                if hi > lo {
                    out.push(window_estimate(start, &events[lo..hi]));
                }
                if end > last {
                    break;
                }
                start = match start.checked_add(stride) {
                    Some(s) if s <= last => s,
                    _ => break,
                };
            }
        }
        _ => unreachable!("validated above"),
    }
    Ok(out)
}
