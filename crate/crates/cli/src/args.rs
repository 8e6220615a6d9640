use std::net::SocketAddr;
use std::path::PathBuf;

use afhe_core::Span;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "afhe",
    version,
    about = "Autonomy audit and deployment gate for AI decision pipelines"
)]
pub struct Cli {
    /// Output rendering.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Machine,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Append an event log to the store.
    Ingest(IngestArgs),
    /// Autonomy coefficient, optionally per window.
    Alpha(AlphaArgs),
    /// Operating cost breakdown.
    Cost(CostArgs),
    /// HISOAI / transitional / ideal classification.
    Regime(RegimeArgs),
    /// Deployment gate phases.
    #[command(subcommand)]
    Gate(GateCommand),
    /// Generate a synthetic workload as event records.
    Simulate(SimulateArgs),
    /// Full audit: autonomy, regime, cost and labor allocation.
    Report(ReportArgs),
    /// Share of human work per labor role.
    Labor(LaborArgs),
    /// Run the monitoring service.
    Serve(ServeArgs),
}

/// Where events come from. A scenario or spec file wins, then FILE ("-" is
/// stdin), then the store, then stdin.
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Event log (line-delimited records); "-" reads stdin.
    pub file: Option<PathBuf>,

    /// Event store directory.
    #[arg(long, env = "AFHE_STORE")]
    pub store: Option<PathBuf>,

    #[command(flatten)]
    pub workload: WorkloadArgs,
}

#[derive(Debug, Clone, Args)]
pub struct WorkloadArgs {
    /// Built-in scenario to simulate instead of reading a log.
    #[arg(long, conflicts_with = "config")]
    pub scenario: Option<String>,

    /// Workload spec file (TOML, or JSON by extension) to simulate.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Override the workload seed.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Override the number of simulated tasks.
    #[arg(long = "n-tasks")]
    pub n_tasks: Option<u64>,
}

impl WorkloadArgs {
    pub fn is_set(&self) -> bool {
        self.scenario.is_some() || self.config.is_some()
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Event log to append; "-" or absent reads stdin.
    pub file: Option<PathBuf>,

    #[arg(long, env = "AFHE_STORE")]
    pub store: Option<PathBuf>,

    /// Append at most once per key.
    #[arg(long)]
    pub idempotency_key: Option<String>,
}

#[derive(Debug, Args)]
pub struct AlphaArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Window length: an event count ("500") or a duration ("30s", "5m").
    #[arg(long)]
    pub window: Option<Span>,

    /// Window stride; defaults to the window length.
    #[arg(long, requires = "window")]
    pub stride: Option<Span>,
}

#[derive(Debug, Clone, Args)]
pub struct CostModelArgs {
    #[arg(long)]
    pub tau_a: Option<f64>,
    #[arg(long)]
    pub tau_h: Option<f64>,
    /// Fraction of AI-alone decisions reviewed asynchronously.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Cost of one asynchronous review.
    #[arg(long)]
    pub tau_review: Option<f64>,
}

impl CostModelArgs {
    pub fn is_set(&self) -> bool {
        self.tau_a.is_some()
            || self.tau_h.is_some()
            || self.gamma.is_some()
            || self.tau_review.is_some()
    }
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    #[command(flatten)]
    pub model: CostModelArgs,

    /// Evaluate at this autonomy instead of measuring it.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Task count; defaults to the number of events, or 1 with --alpha.
    #[arg(long)]
    pub n: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = 0.5)]
    pub hisoai_threshold: f64,
    #[arg(long, default_value_t = 0.8)]
    pub ideal_floor: f64,
}

#[derive(Debug, Args)]
pub struct RegimeArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Classify this value instead of measuring it.
    #[arg(long)]
    pub alpha: Option<f64>,

    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Subcommand)]
pub enum GateCommand {
    /// Offline check: share of offline-phase predictions above theta.
    Offline(GateEvalArgs),
    /// Shadow check: agreement of shadow-phase AI and blind human decisions.
    Shadow(GateEvalArgs),
    /// Steady-state check over operational events.
    Monitor(GateEvalArgs),
    /// Leave re-engineering and start a new offline evaluation.
    Resume(GateHistoryArgs),
    /// Print the gate state recorded in a history file.
    Status(GateHistoryArgs),
}

#[derive(Debug, Args)]
pub struct GateEvalArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    #[command(flatten)]
    pub gate: GateArgs,

    #[command(flatten)]
    pub history: GateHistoryArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GateArgs {
    /// Autonomy the system must reach.
    #[arg(long)]
    pub target: f64,

    /// Offline confidence threshold (required for `gate offline`).
    #[arg(long)]
    pub theta: Option<f64>,

    /// Expected number of shadow pairs.
    #[arg(long)]
    pub shadow_cycles: Option<u64>,

    /// Monitoring window: an event count or a duration.
    #[arg(long, default_value = "1000")]
    pub window: Span,

    #[arg(long)]
    pub stride: Option<Span>,

    /// Consecutive below-target windows that trigger re-engineering.
    #[arg(long, default_value_t = 3)]
    pub breaches: u32,

    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GateHistoryArgs {
    /// Gate history file; outcomes are applied to the recorded state.
    #[arg(long)]
    pub history: Option<PathBuf>,

    /// Transition timestamp in epoch milliseconds (default: now).
    #[arg(long)]
    pub at: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    Operational,
    Offline,
    Shadow,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub workload: WorkloadArgs,

    #[arg(long, value_enum, default_value_t = SimKind::Operational)]
    pub kind: SimKind,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    #[command(flatten)]
    pub model: CostModelArgs,

    #[command(flatten)]
    pub thresholds: ThresholdArgs,

    /// Leave out the labor allocation.
    #[arg(long)]
    pub no_labor: bool,
}

#[derive(Debug, Args)]
pub struct LaborArgs {
    #[command(flatten)]
    pub source: SourceArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "AFHE_STORE")]
    pub store: Option<PathBuf>,

    #[arg(long, default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,

    #[command(flatten)]
    pub gate: GateArgs,

    /// Gate history written by earlier `gate` runs.
    #[arg(long)]
    pub history: Option<PathBuf>,

    /// Number of idempotency keys remembered.
    #[arg(long, default_value_t = 10_000)]
    pub dedup_horizon: usize,
}
