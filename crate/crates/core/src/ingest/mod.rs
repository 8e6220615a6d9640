//! Line-delimited decision-event records and the append-only event store.

mod record;
mod store;

pub use record::{
    canonical_line, parse_event_line, parse_event_lines, parse_event_log, serialize_event,
    write_event_log, ParseError, ParseErrorKind,
};
pub use store::{
    CrashPoint, EventFilter, EventStore, Manifest, Receipt, SegmentInfo, DEFAULT_DEDUP_HORIZON,
    DEFAULT_SEGMENT_CAPACITY, MANIFEST_FILE, MANIFEST_FORMAT_VERSION,
};
