use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use afhe_core::gate::{
    offline_predictions, shadow_pairs, GateHistoryLog, NormalizedExact, ReengineeringTrigger,
};
use afhe_core::ingest::{canonical_line, parse_event_log, write_event_log};
use afhe_core::labor::LaborAllocation;
use afhe_core::metrics::{AlphaEstimate, CostBreakdown, RegimeThresholds};
use afhe_core::report::{
    alpha_text, cost_text, labor_text, series_machine, series_text, ReportDocument,
};
use afhe_core::sim::{simulate_offline_events, simulate_operational, simulate_shadow_events};
use afhe_core::{
    builtin_scenario, compute_alpha, compute_alpha_windowed, labor_report, offline_evaluate,
    shadow_evaluate, steady_state_check, CostModel, DecisionEvent, EventFilter, EventStore, Format,
    GateConfig, GateState, GateVerdict, Outcome, PhaseOutcome, WindowSpec, WorkloadSpec,
};
use afhe_monitor::{Monitor, ServiceConfig};
use serde::Serialize;

use crate::args::*;
use crate::{CliError, EXIT_FLAGGED, EXIT_OK};

type CliResult<T> = Result<T, CliError>;

pub(crate) fn dispatch(cli: Cli, stdin: &mut dyn Read, out: &mut dyn Write) -> CliResult<i32> {
    let format = match cli.format {
        FormatArg::Text => Format::Text,
        FormatArg::Machine => Format::Machine,
    };
    let ctx = Ctx { format, stdin, out };
    match cli.command {
        Command::Ingest(a) => ingest(ctx, a),
        Command::Alpha(a) => alpha(ctx, a),
        Command::Cost(a) => cost(ctx, a),
        Command::Regime(a) => regime(ctx, a),
        Command::Gate(g) => gate(ctx, g),
        Command::Simulate(a) => simulate(ctx, a),
        Command::Report(a) => report(ctx, a),
        Command::Labor(a) => labor(ctx, a),
        Command::Serve(a) => serve(a),
    }
}

struct Ctx<'a> {
    format: Format,
    stdin: &'a mut dyn Read,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    /// Writes the machine rendering of `value`, or `text` otherwise.
    fn emit<T: Serialize>(&mut self, value: &T, text: impl FnOnce() -> String) -> CliResult<()> {
        match self.format {
            Format::Machine => writeln!(self.out, "{}", canonical_line(value))?,
            Format::Text => write!(self.out, "{}", text())?,
        }
        Ok(())
    }

    fn read_text(&mut self, file: Option<&Path>) -> CliResult<String> {
        match file {
            Some(p) if p != Path::new("-") => Ok(std::fs::read_to_string(p)?),
            _ => {
                let mut s = String::new();
                self.stdin.read_to_string(&mut s)?;
                Ok(s)
            }
        }
    }

    /// Events in timestamp order (ties keep input order), matching what a
    /// store read returns.
    fn events(&mut self, src: &SourceArgs, kind: SimKind) -> CliResult<Vec<DecisionEvent>> {
        if src.workload.is_set() {
            let spec = workload(&src.workload)?;
            return Ok(match kind {
                SimKind::Operational => simulate_operational(&spec)?,
                SimKind::Offline => simulate_offline_events(&spec)?,
                SimKind::Shadow => simulate_shadow_events(&spec)?,
            });
        }
        if src.file.is_none() {
            if let Some(store) = &src.store {
                return Ok(EventStore::read_events(store, &EventFilter::default())?);
            }
        }
        let text = self.read_text(src.file.as_deref())?;
        let mut events = parse_event_log(&text)?;
        events.sort_by_key(|e| e.timestamp);
        Ok(events)
    }
}

fn workload(w: &WorkloadArgs) -> CliResult<WorkloadSpec> {
    let mut spec = match (&w.scenario, &w.config) {
        (Some(name), _) => builtin_scenario(name)?,
        (None, Some(path)) => WorkloadSpec::from_path(path)?,
        (None, None) => {
            return Err(CliError::Usage(
                "a workload needs --scenario or --config".into(),
            ))
        }
    };
    if let Some(seed) = w.seed {
        spec.seed = seed;
    }
    if let Some(n) = w.n_tasks {
        spec.n_tasks = n;
    }
    spec.validate()?;
    Ok(spec)
}

fn thresholds(t: &ThresholdArgs) -> CliResult<RegimeThresholds> {
    let t = RegimeThresholds {
        hisoai_threshold: t.hisoai_threshold,
        ideal_floor: t.ideal_floor,
    };
    t.validate()?;
    Ok(t)
}

/// Explicit flags override the scenario's cost parameters.
fn cost_model(flags: &CostModelArgs, w: &WorkloadArgs) -> CliResult<Option<CostModel>> {
    let base = if w.is_set() {
        Some(workload(w)?.cost_model)
    } else {
        None
    };
    let model = match base {
        Some(m) => CostModel {
            tau_a: flags.tau_a.unwrap_or(m.tau_a),
            tau_h: flags.tau_h.unwrap_or(m.tau_h),
            gamma: flags.gamma.unwrap_or(m.gamma),
            tau_review_a: flags.tau_review.unwrap_or(m.tau_review_a),
        },
        None if !flags.is_set() => return Ok(None),
        None => match (flags.tau_a, flags.tau_h) {
            (Some(tau_a), Some(tau_h)) => CostModel {
                tau_a,
                tau_h,
                gamma: flags.gamma.unwrap_or(0.0),
                tau_review_a: flags.tau_review.unwrap_or(0.0),
            },
            _ => {
                return Err(CliError::Usage(
                    "cost model needs --tau-a and --tau-h, or --scenario".into(),
                ))
            }
        },
    };
    model.validate()?;
    Ok(Some(model))
}

fn ingest(mut ctx: Ctx, a: IngestArgs) -> CliResult<i32> {
    let store_dir = a
        .store
        .ok_or_else(|| CliError::Usage("ingest needs --store or AFHE_STORE".into()))?;
    let text = ctx.read_text(a.file.as_deref())?;
    let events = parse_event_log(&text)?;
    let mut store = EventStore::open(&store_dir)?;
    let receipt = store.append_batch(&events, a.idempotency_key.as_deref())?;
    ctx.emit(&receipt, || {
        if receipt.duplicate {
            format!(
                "duplicate batch; nothing appended ({} events stored)\n",
                receipt.total_events
            )
        } else {
            format!(
                "appended {} events ({} stored, manifest version {})\n",
                receipt.appended, receipt.total_events, receipt.manifest_version
            )
        }
    })?;
    Ok(EXIT_OK)
}

fn alpha(mut ctx: Ctx, a: AlphaArgs) -> CliResult<i32> {
    let events = ctx.events(&a.source, SimKind::Operational)?;
    match a.window {
        None => {
            let est = compute_alpha::<f64>(&events)?;
            ctx.emit(&est, || alpha_text(&est))?;
        }
        Some(window) => {
            let spec = WindowSpec {
                window,
                stride: a.stride.unwrap_or(window),
            };
            let series = compute_alpha_windowed::<f64>(&events, spec)?;
            match ctx.format {
                Format::Machine => writeln!(ctx.out, "{}", series_machine(&series))?,
                Format::Text => write!(ctx.out, "{}", series_text(&series))?,
            }
        }
    }
    Ok(EXIT_OK)
}

fn cost(mut ctx: Ctx, a: CostArgs) -> CliResult<i32> {
    let model = cost_model(&a.model, &a.source.workload)?.ok_or_else(|| {
        CliError::Usage("cost model needs --tau-a and --tau-h, or --scenario".into())
    })?;
    let (alpha, n) = match a.alpha {
        Some(alpha) => (alpha, a.n.unwrap_or(1)),
        None => {
            let events = ctx.events(&a.source, SimKind::Operational)?;
            let est = compute_alpha::<f64>(&events)?;
            (est.alpha, a.n.unwrap_or(est.total_count))
        }
    };
    let breakdown = CostBreakdown::compute(&model, alpha, n)?;
    ctx.emit(&breakdown, || {
        format!(
            "{:<22}{:.4}\n{:<22}{}\n{}",
            "alpha",
            alpha,
            "tasks",
            n,
            cost_text(&breakdown)
        )
    })?;
    Ok(EXIT_OK)
}

fn regime(mut ctx: Ctx, a: RegimeArgs) -> CliResult<i32> {
    let t = thresholds(&a.thresholds)?;
    let alpha = match a.alpha {
        Some(v) => v,
        None => compute_alpha::<f64>(&ctx.events(&a.source, SimKind::Operational)?)?.alpha,
    };
    let class = t.classify(alpha)?;
    ctx.emit(&class, || {
        format!(
            "{:<22}{}\n{:<22}{:.4} (hisoai below {:.2}, ideal above {:.2})\n",
            "regime", class.regime, "alpha", class.alpha, class.hisoai_threshold, class.ideal_floor
        )
    })?;
    Ok(EXIT_OK)
}

fn labor(mut ctx: Ctx, a: LaborArgs) -> CliResult<i32> {
    let events = ctx.events(&a.source, SimKind::Operational)?;
    let alloc: LaborAllocation = labor_report(&events);
    ctx.emit(&alloc, || labor_text(&alloc))?;
    Ok(EXIT_OK)
}

fn report(mut ctx: Ctx, a: ReportArgs) -> CliResult<i32> {
    let t = thresholds(&a.thresholds)?;
    let model = cost_model(&a.model, &a.source.workload)?;
    let events = ctx.events(&a.source, SimKind::Operational)?;
    let doc: ReportDocument = ReportDocument::build(&events, &t, model.as_ref(), !a.no_labor)?;
    write!(ctx.out, "{}", doc.render(ctx.format))?;
    if ctx.format == Format::Machine {
        writeln!(ctx.out)?;
    }
    Ok(EXIT_OK)
}

fn simulate(ctx: Ctx, a: SimulateArgs) -> CliResult<i32> {
    let spec = workload(&a.workload)?;
    let events = match a.kind {
        SimKind::Operational => simulate_operational(&spec)?,
        SimKind::Offline => simulate_offline_events(&spec)?,
        SimKind::Shadow => simulate_shadow_events(&spec)?,
    };
    write_event_log(ctx.out, &events)?;
    Ok(EXIT_OK)
}

fn gate_config(g: &GateArgs) -> CliResult<GateConfig> {
    let mut config = GateConfig::new(g.target).with_monitor(g.window, g.stride, g.breaches);
    config.theta = g.theta;
    config.shadow_cycles = g.shadow_cycles;
    let t = thresholds(&g.thresholds)?;
    config.hisoai_threshold = t.hisoai_threshold;
    config.ideal_floor = t.ideal_floor;
    config.validate()?;
    Ok(config)
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

/// Applies `outcome` to the persisted gate, if a history file was given.
fn record(h: &GateHistoryArgs, outcome: PhaseOutcome) -> CliResult<Option<GateState>> {
    let Some(path) = &h.history else {
        return Ok(None);
    };
    let log = GateHistoryLog::new(path);
    let state: GateState = log.load()?;
    let at = h.at.unwrap_or_else(|| {
        state
            .last_timestamp()
            .map_or(now_ms(), |prev| now_ms().max(prev + 1))
    });
    Ok(Some(log.advance(outcome, at)?))
}

#[derive(Serialize)]
struct GateReport<'a> {
    verdict: &'a GateVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<&'a GateState>,
}

#[derive(Serialize)]
struct MonitorReport<'a> {
    windows: usize,
    latest: Option<&'a AlphaEstimate>,
    trigger: Option<&'a ReengineeringTrigger>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<&'a GateState>,
}

fn state_text(state: Option<&GateState>) -> String {
    state.map_or(String::new(), |s| {
        format!(
            "{:<22}{}\n{:<22}{}\n",
            "gate phase", s.phase, "reengineering cycles", s.reengineering_cycles
        )
    })
}

fn gate(mut ctx: Ctx, cmd: GateCommand) -> CliResult<i32> {
    match cmd {
        GateCommand::Offline(a) => {
            let config = gate_config(&a.gate)?;
            let events = ctx.events(&a.source, SimKind::Offline)?;
            let preds = offline_predictions::<f64>(&events)?;
            let (_, verdict) = offline_evaluate(&preds, &config)?;
            let state = record(
                &a.history,
                PhaseOutcome::Offline {
                    verdict: verdict.clone(),
                },
            )?;
            emit_verdict(&mut ctx, &verdict, state.as_ref())
        }
        GateCommand::Shadow(a) => {
            let config = gate_config(&a.gate)?;
            let events = ctx.events(&a.source, SimKind::Shadow)?;
            let pairs = shadow_pairs(&events, &NormalizedExact)?;
            let (_, verdict) = shadow_evaluate(&pairs, &config)?;
            let state = record(
                &a.history,
                PhaseOutcome::Shadow {
                    verdict: verdict.clone(),
                },
            )?;
            emit_verdict(&mut ctx, &verdict, state.as_ref())
        }
        GateCommand::Monitor(a) => {
            let config = gate_config(&a.gate)?;
            let events = ctx.events(&a.source, SimKind::Operational)?;
            let series = compute_alpha_windowed::<f64>(&events, config.window_spec())?;
            let trigger = steady_state_check(&series, &config);
            let latest = series.last().map(|w| w.estimate);
            let state = record(
                &a.history,
                PhaseOutcome::Monitor {
                    latest,
                    trigger: trigger.clone(),
                },
            )?;
            let report = MonitorReport {
                windows: series.len(),
                latest: latest.as_ref(),
                trigger: trigger.as_ref(),
                state: state.as_ref(),
            };
            ctx.emit(&report, || {
                let mut s = format!("{:<22}{}\n", "windows", series.len());
                if let Some(l) = &latest {
                    s += &format!("{:<22}{:.4}\n", "latest alpha", l.alpha);
                }
                match &trigger {
                    Some(t) => {
                        s += &format!(
                            "{:<22}windows {}..={} below target {:.2}: {}\n",
                            "re-engineering",
                            t.first_window,
                            t.last_window,
                            t.alpha_target,
                            t.alphas
                                .iter()
                                .map(|a| format!("{a:.4}"))
                                .collect::<Vec<_>>()
                                .join(", ")
                        )
                    }
                    None => s += &format!("{:<22}none\n", "re-engineering"),
                }
                s + &state_text(state.as_ref())
            })?;
            Ok(if trigger.is_some() {
                EXIT_FLAGGED
            } else {
                EXIT_OK
            })
        }
        GateCommand::Resume(h) => {
            if h.history.is_none() {
                return Err(CliError::Usage("gate resume needs --history".into()));
            }
            let state = record(&h, PhaseOutcome::Resume)?.expect("history given");
            ctx.emit(&state, || state_text(Some(&state)))?;
            Ok(EXIT_OK)
        }
        GateCommand::Status(h) => {
            let path = h
                .history
                .ok_or_else(|| CliError::Usage("gate status needs --history".into()))?;
            let state: GateState = GateHistoryLog::new(path).load()?;
            ctx.emit(&state, || {
                let mut s = state_text(Some(&state));
                for e in &state.history {
                    let alpha = e
                        .outcome
                        .measured_alpha()
                        .map_or("-".to_string(), |a| format!("{:.4}", a.alpha));
                    s += &format!(
                        "  {:>15}  {:<14} -> {:<14} alpha {}\n",
                        e.timestamp, e.from, e.to, alpha
                    );
                }
                s
            })?;
            Ok(EXIT_OK)
        }
    }
}

fn emit_verdict(ctx: &mut Ctx, verdict: &GateVerdict, state: Option<&GateState>) -> CliResult<i32> {
    let report = GateReport { verdict, state };
    ctx.emit(&report, || {
        let mut s = alpha_text(&verdict.measured_alpha);
        s += &format!("{:<22}{:.4}\n", "target", verdict.alpha_target);
        s += &format!(
            "{:<22}{}\n",
            "verdict",
            match verdict.outcome {
                Outcome::Pass => "PASS",
                Outcome::HisoaiFlag => "HISOAI FLAG",
            }
        );
        s += &format!("{:<22}{}\n", "reason", verdict.reason);
        s + &state_text(state)
    })?;
    Ok(match verdict.outcome {
        Outcome::Pass => EXIT_OK,
        Outcome::HisoaiFlag => EXIT_FLAGGED,
    })
}

fn serve(a: ServeArgs) -> CliResult<i32> {
    let store: PathBuf = a
        .store
        .ok_or_else(|| CliError::Usage("serve needs --store or AFHE_STORE".into()))?;
    let mut config = ServiceConfig::new(store, gate_config(&a.gate)?);
    config.listen = a.listen;
    config.gate_history = a.history;
    config.dedup_horizon = a.dedup_horizon;
    let monitor = Arc::new(Monitor::open(config)?);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(afhe_monitor::serve(monitor))?;
    Ok(EXIT_OK)
}
