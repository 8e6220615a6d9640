use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use afhe_core::gate::{GateHistoryLog, GatePhase};
use afhe_core::ingest::{parse_event_lines, DEFAULT_DEDUP_HORIZON};
use afhe_core::{
    compute_alpha_windowed, steady_state_check, DecisionEvent, Error, EventFilter, EventStore,
    GateConfig, GateState, PhaseOutcome, Result, WindowAlpha,
};
use serde::{Deserialize, Serialize};

const SYNTAX_ERROR: &str = "syntax_error";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    /// Target, window (`monitor_window` / `monitor_stride`) and breach count.
    pub gate: GateConfig,
    pub store: PathBuf,
    /// Gate history from the offline and shadow phases. Without it the
    /// service still computes alerts, but the gate never reports `deployed`.
    pub gate_history: Option<PathBuf>,
    pub dedup_horizon: usize,
}

impl ServiceConfig {
    pub fn new(store: impl Into<PathBuf>, gate: GateConfig) -> Self {
        Self {
            listen: SocketAddr::from(([127, 0, 0, 1], 8080)),
            gate,
            store: store.into(),
            gate_history: None,
            dedup_horizon: DEFAULT_DEDUP_HORIZON,
        }
    }
}

/// An active re-engineering alert.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertRecord {
    /// Timestamp of the newest event when the trigger was evaluated.
    pub trigger_time: u64,
    pub first_window: usize,
    pub last_window: usize,
    pub first_window_start: u64,
    pub last_window_start: u64,
    pub alphas: Vec<f64>,
    pub config: GateConfig,
}

/// Gate state and alert taken from the same evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSnapshot {
    pub state: GateState,
    pub alert: Option<AlertRecord>,
    pub total_events: u64,
}

#[derive(Debug)]
struct Evaluation {
    series: Vec<WindowAlpha>,
    gate: GateSnapshot,
}

#[derive(Debug)]
struct Writer {
    store: EventStore,
    /// Persisted events in read order.
    events: Vec<DecisionEvent>,
    state: GateState,
    history: Option<GateHistoryLog>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineRejection {
    pub line: usize,
    pub error: String,
    pub key: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOutcome {
    pub accepted: u64,
    pub duplicate: bool,
    pub rejected: Vec<LineRejection>,
    pub total_events: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum IngestRejection {
    /// Nothing in the body is a parseable record.
    #[error("no parseable records in body")]
    Body { rejected: Vec<LineRejection> },
    #[error(transparent)]
    Storage(Error),
}

pub struct Monitor {
    config: ServiceConfig,
    writer: Mutex<Writer>,
    current: RwLock<Arc<Evaluation>>,
}

impl std::fmt::Debug for Monitor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Monitor")
            .field("store", &self.config.store)
            .finish_non_exhaustive()
    }
}

impl Monitor {
    /// Opens the store (as its single writer), reloads persisted events and
    /// gate history, and evaluates once.
    pub fn open(config: ServiceConfig) -> Result<Self> {
        config.gate.validate()?;
        let store = EventStore::open(&config.store)?.with_dedup_horizon(config.dedup_horizon);
        let events = EventStore::read_events(&config.store, &EventFilter::default())?;
        let history = config.gate_history.as_ref().map(GateHistoryLog::new);
        let state = match &history {
            Some(h) => h.load()?,
            None => GateState::new(),
        };
        let mut writer = Writer {
            store,
            events,
            state,
            history,
        };
        let evaluation = evaluate(&config.gate, &mut writer)?;
        Ok(Self {
            config,
            writer: Mutex::new(writer),
            current: RwLock::new(Arc::new(evaluation)),
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    /// Parses a line-delimited batch, durably appends its valid records and
    /// only then publishes the new evaluation.
    pub fn ingest(
        &self,
        body: &str,
        idempotency_key: Option<&str>,
    ) -> std::result::Result<IngestOutcome, IngestRejection> {
        let mut writer = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(k) = idempotency_key {
            if writer.store.has_batch_key(k) {
                return Ok(IngestOutcome {
                    accepted: 0,
                    duplicate: true,
                    rejected: Vec::new(),
                    total_events: writer.events.len() as u64,
                });
            }
        }

        let mut valid = Vec::new();
        let mut rejected = Vec::new();
        for parsed in parse_event_lines(body) {
            match parsed {
                Ok(e) => valid.push(e),
                Err(e) => rejected.push(LineRejection {
                    line: e.line,
                    error: e.kind.code().to_string(),
                    key: e.kind.key().map(str::to_string),
                    message: e.to_string(),
                }),
            }
        }
        if valid.is_empty() && rejected.iter().all(|r| r.error == SYNTAX_ERROR) {
            return Err(IngestRejection::Body { rejected });
        }

        let receipt = writer
            .store
            .append_batch(&valid, idempotency_key)
            .map_err(IngestRejection::Storage)?;
        writer.events.extend(valid);
        writer.events.sort_by_key(|e| e.timestamp);
        let evaluation =
            evaluate(&self.config.gate, &mut writer).map_err(IngestRejection::Storage)?;
        *self.current.write().unwrap_or_else(|p| p.into_inner()) = Arc::new(evaluation);
        Ok(IngestOutcome {
            accepted: receipt.appended,
            duplicate: receipt.duplicate,
            rejected,
            total_events: receipt.total_events,
        })
    }

    fn current(&self) -> Arc<Evaluation> {
        self.current
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .clone()
    }

    /// The most recent `windows` entries of the rolling series (all when
    /// `None`).
    pub fn alpha_series(&self, windows: Option<usize>) -> Vec<WindowAlpha> {
        let eval = self.current();
        let k = windows.unwrap_or(eval.series.len()).min(eval.series.len());
        eval.series[eval.series.len() - k..].to_vec()
    }

    pub fn gate_snapshot(&self) -> GateSnapshot {
        self.current().gate.clone()
    }
}

fn evaluate(gate: &GateConfig, writer: &mut Writer) -> Result<Evaluation> {
    let series = compute_alpha_windowed::<f64>(&writer.events, gate.window_spec())?;
    let trigger = steady_state_check(&series, gate);
    let trigger_time = writer.events.last().map_or(0, |e| e.timestamp);
    let alert = trigger.as_ref().map(|t| AlertRecord {
        trigger_time,
        first_window: t.first_window,
        last_window: t.last_window,
        first_window_start: t.first_window_start,
        last_window_start: t.last_window_start,
        alphas: t.alphas.clone(),
        config: *gate,
    });

    if writer.state.phase == GatePhase::Deployed && trigger.is_some() {
        let ts = writer
            .state
            .last_timestamp()
            .map_or(trigger_time, |prev| trigger_time.max(prev + 1));
        let outcome = PhaseOutcome::Monitor {
            latest: series.last().map(|w| w.estimate),
            trigger,
        };
        let next = writer.state.clone().advance(outcome, ts)?;
        if let Some(log) = &writer.history {
            log.append(next.history.last().expect("entry appended"))?;
        }
        writer.state = next;
    }

    Ok(Evaluation {
        series,
        gate: GateSnapshot {
            state: writer.state.clone(),
            alert,
            total_events: writer.events.len() as u64,
        },
    })
}
