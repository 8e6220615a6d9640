//! Steady-state monitoring service.
//!
//! Accepts decision events over HTTP, persists them through the event store
//! before acknowledging, and serves the rolling autonomy series and gate
//! state. Window semantics, breach counting and transitions all come from
//! `afhe-core`; this crate owns transport and persistence only.
//!
//! Routes: `POST /v1/events`, `GET /v1/alpha?windows=k`, `GET /v1/gate`,
//! `GET /v1/healthz`.

mod monitor;
mod routes;

pub use monitor::{
    AlertRecord, GateSnapshot, IngestOutcome, IngestRejection, LineRejection, Monitor,
    ServiceConfig,
};
pub use routes::{router, serve, IDEMPOTENCY_HEADER};
