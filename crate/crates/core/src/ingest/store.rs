//! Append-only, segmented event store.
//!
//! Layout: a directory holding `manifest.json` plus `segment-NNNNNN.jsonl`
//! files. The manifest records, per segment, how many records and bytes are
//! committed; readers never look past those bytes, so an append becomes
//! visible only when the new manifest is renamed into place. A writer
//! truncates any uncommitted tail left by a crash before appending again.

use std::collections::VecDeque;
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::record::{parse_event_line, serialize_event};
use crate::error::{Error, Result};
use crate::event::{Decider, DecisionEvent, EventPhase};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_SEGMENT_CAPACITY: u64 = 100_000;
pub const DEFAULT_DEDUP_HORIZON: usize = 10_000;
const LOCK_FILE: &str = "writer.lock";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentInfo {
    pub file: String,
    pub count: u64,
    pub bytes: u64,
    pub min_timestamp: Option<u64>,
    pub max_timestamp: Option<u64>,
    pub sealed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub version: u64,
    pub segments: Vec<SegmentInfo>,
    /// Most recent idempotency keys, oldest first.
    #[serde(default)]
    pub batch_keys: VecDeque<String>,
}

impl Manifest {
    fn empty() -> Self {
        Self {
            format_version: MANIFEST_FORMAT_VERSION,
            version: 0,
            segments: Vec::new(),
            batch_keys: VecDeque::new(),
        }
    }

    pub fn total_events(&self) -> u64 {
        self.segments.iter().map(|s| s.count).sum()
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Self::empty()),
            Err(e) => return Err(e.into()),
        };
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::CorruptManifest {
                path: path.clone(),
                detail: e.to_string(),
            })?;
        if manifest.format_version != MANIFEST_FORMAT_VERSION {
            return Err(Error::CorruptManifest {
                path,
                detail: format!("unsupported format_version {}", manifest.format_version),
            });
        }
        Ok(manifest)
    }
}

/// Outcome of an append.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receipt {
    pub appended: u64,
    pub manifest_version: u64,
    pub total_events: u64,
    /// The batch key had already been committed; nothing was written.
    pub duplicate: bool,
}

/// Conjunction of optional predicates. The time range is half-open.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventFilter {
    pub phase: Option<EventPhase>,
    pub from: Option<u64>,
    pub until: Option<u64>,
    pub decider: Option<Decider>,
}

impl EventFilter {
    pub fn matches(&self, e: &DecisionEvent) -> bool {
        self.phase.is_none_or(|p| e.phase == p)
            && self.decider.is_none_or(|d| e.decider == d)
            && self.from.is_none_or(|t| e.timestamp >= t)
            && self.until.is_none_or(|t| e.timestamp < t)
    }
}

/// Where an injected crash interrupts an append.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrashPoint {
    /// Segment bytes written and synced, manifest not yet written.
    AfterSegmentWrite,
    /// New manifest written to its temporary file but not renamed.
    BeforeManifestRename,
}

/// Single-writer handle on a store directory. Readers use
/// [`EventStore::read_events`] and need no handle.
#[derive(Debug)]
pub struct EventStore {
    dir: PathBuf,
    manifest: Manifest,
    segment_capacity: u64,
    dedup_horizon: usize,
    _lock: File,
}

impl EventStore {
    /// Opens (creating if needed) a store for writing. Fails if another
    /// writer holds the directory.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(dir.join(LOCK_FILE))?;
        lock.try_lock().map_err(|e| match e {
            fs::TryLockError::WouldBlock => Error::Io(std::io::Error::new(
                std::io::ErrorKind::WouldBlock,
                format!("store {} already has a writer", dir.display()),
            )),
            fs::TryLockError::Error(e) => Error::Io(e),
        })?;
        let manifest = Manifest::load(&dir)?;
        Ok(Self {
            dir,
            manifest,
            segment_capacity: DEFAULT_SEGMENT_CAPACITY,
            dedup_horizon: DEFAULT_DEDUP_HORIZON,
            _lock: lock,
        })
    }

    pub fn with_segment_capacity(mut self, capacity: u64) -> Self {
        self.segment_capacity = capacity.max(1);
        self
    }

    pub fn with_dedup_horizon(mut self, horizon: usize) -> Self {
        self.dedup_horizon = horizon.max(1);
        self
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn has_batch_key(&self, key: &str) -> bool {
        self.manifest.batch_keys.iter().any(|k| k == key)
    }

    pub fn append_events(&mut self, events: &[DecisionEvent]) -> Result<Receipt> {
        self.append_inner(events, None, None)
    }

    /// Appends a batch at most once per `key`: a key already committed within
    /// the dedup horizon returns a duplicate receipt and writes nothing. The
    /// key is committed in the same manifest swap as the events.
    pub fn append_batch(&mut self, events: &[DecisionEvent], key: Option<&str>) -> Result<Receipt> {
        self.append_inner(events, key, None)
    }

    #[doc(hidden)]
    pub fn append_with_crash(
        &mut self,
        events: &[DecisionEvent],
        crash: CrashPoint,
    ) -> Result<Receipt> {
        self.append_inner(events, None, Some(crash))
    }

    /// Seals the open segment so the next append starts a new one.
    pub fn seal(&mut self) -> Result<u64> {
        let mut next = self.manifest.clone();
        match next.segments.last_mut() {
            Some(seg) if !seg.sealed && seg.count > 0 => seg.sealed = true,
            _ => return Ok(self.manifest.version),
        }
        next.version += 1;
        self.commit(next, None)?;
        Ok(self.manifest.version)
    }

    fn receipt(&self, appended: u64, duplicate: bool) -> Receipt {
        Receipt {
            appended,
            manifest_version: self.manifest.version,
            total_events: self.manifest.total_events(),
            duplicate,
        }
    }

    fn append_inner(
        &mut self,
        events: &[DecisionEvent],
        key: Option<&str>,
        crash: Option<CrashPoint>,
    ) -> Result<Receipt> {
        if let Some(k) = key {
            if self.has_batch_key(k) {
                return Ok(self.receipt(0, true));
            }
        }
        if events.is_empty() {
            return Ok(self.receipt(0, false));
        }
        for (i, e) in events.iter().enumerate() {
            e.validate().map_err(|v| {
                Error::InvalidSpec(format!(
                    "event {i} ({}): {}: {}",
                    e.task_id, v.key, v.detail
                ))
            })?;
        }

        let mut next = self.manifest.clone();
        let mut remaining = events;
        while !remaining.is_empty() {
            let needs_new = next
                .segments
                .last()
                .is_none_or(|s| s.sealed || s.count >= self.segment_capacity);
            if needs_new {
                if let Some(last) = next.segments.last_mut() {
                    last.sealed = true;
                }
                let file = format!("segment-{:06}.jsonl", next.segments.len() + 1);
                next.segments.push(SegmentInfo {
                    file,
                    count: 0,
                    bytes: 0,
                    min_timestamp: None,
                    max_timestamp: None,
                    sealed: false,
                });
            }
            let seg = next.segments.last_mut().expect("segment present");
            let room = usize::try_from(self.segment_capacity - seg.count).unwrap_or(usize::MAX);
            let (chunk, rest) = remaining.split_at(room.min(remaining.len()));
            write_chunk(&self.dir, seg, chunk)?;
            remaining = rest;
        }

        if crash == Some(CrashPoint::AfterSegmentWrite) {
            return Err(injected());
        }
        next.version += 1;
        if let Some(k) = key {
            next.batch_keys.push_back(k.to_string());
            while next.batch_keys.len() > self.dedup_horizon {
                next.batch_keys.pop_front();
            }
        }
        self.commit(next, crash)?;
        Ok(self.receipt(events.len() as u64, false))
    }

    fn commit(&mut self, next: Manifest, crash: Option<CrashPoint>) -> Result<()> {
        let tmp = self.dir.join(format!("{MANIFEST_FILE}.tmp"));
        {
            let mut f = File::create(&tmp)?;
            f.write_all(
                serde_json::to_string_pretty(&next)
                    .expect("manifest serializes")
                    .as_bytes(),
            )?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        if crash == Some(CrashPoint::BeforeManifestRename) {
            return Err(injected());
        }
        fs::rename(&tmp, self.dir.join(MANIFEST_FILE))?;
        if let Ok(d) = File::open(&self.dir) {
            let _ = d.sync_all();
        }
        self.manifest = next;
        Ok(())
    }

    /// Reads committed events matching `filter`, in timestamp order (ties
    /// keep append order).
    pub fn read_events(dir: impl AsRef<Path>, filter: &EventFilter) -> Result<Vec<DecisionEvent>> {
        let dir = dir.as_ref();
        let manifest = Manifest::load(dir)?;
        let mut out = Vec::new();
        for seg in &manifest.segments {
            read_segment(dir, seg, filter, &mut out)?;
        }
        out.sort_by_key(|e| e.timestamp);
        Ok(out)
    }
}

fn injected() -> Error {
    Error::Io(std::io::Error::other("injected crash"))
}

/// Writes `chunk` after the committed bytes of `seg`, discarding any
/// uncommitted tail, and updates `seg` in place.
fn write_chunk(dir: &Path, seg: &mut SegmentInfo, chunk: &[DecisionEvent]) -> Result<()> {
    let mut buf = String::new();
    for e in chunk {
        buf.push_str(&serialize_event(e));
        buf.push('\n');
    }
    let mut f = OpenOptions::new()
        .create(true)
        .truncate(false)
        .write(true)
        .open(dir.join(&seg.file))?;
    f.set_len(seg.bytes)?;
    use std::io::Seek;
    f.seek(std::io::SeekFrom::Start(seg.bytes))?;
    f.write_all(buf.as_bytes())?;
    f.sync_data()?;

    seg.count += chunk.len() as u64;
    seg.bytes += buf.len() as u64;
    for e in chunk {
        seg.min_timestamp = Some(
            seg.min_timestamp
                .map_or(e.timestamp, |m| m.min(e.timestamp)),
        );
        seg.max_timestamp = Some(
            seg.max_timestamp
                .map_or(e.timestamp, |m| m.max(e.timestamp)),
        );
    }
    Ok(())
}

fn read_segment(
    dir: &Path,
    seg: &SegmentInfo,
    filter: &EventFilter,
    out: &mut Vec<DecisionEvent>,
) -> Result<()> {
    let corrupt = |detail: String| Error::CorruptSegment {
        segment: seg.file.clone(),
        detail,
    };
    if let (Some(from), Some(max)) = (filter.from, seg.max_timestamp) {
        if max < from {
            return Ok(());
        }
    }
    if let (Some(until), Some(min)) = (filter.until, seg.min_timestamp) {
        if min >= until {
            return Ok(());
        }
    }
    let mut bytes = Vec::with_capacity(seg.bytes as usize);
    File::open(dir.join(&seg.file))
        .map_err(|e| corrupt(e.to_string()))?
        .take(seg.bytes)
        .read_to_end(&mut bytes)
        .map_err(|e| corrupt(e.to_string()))?;
    if bytes.len() as u64 != seg.bytes {
        return Err(corrupt(format!(
            "expected {} committed bytes, found {}",
            seg.bytes,
            bytes.len()
        )));
    }
    let text = String::from_utf8(bytes).map_err(|e| corrupt(e.to_string()))?;
    let mut count = 0u64;
    for (i, line) in text.lines().enumerate() {
        let e = parse_event_line(line, i + 1).map_err(|e| corrupt(e.to_string()))?;
        count += 1;
        if filter.matches(&e) {
            out.push(e);
        }
    }
    if count != seg.count {
        return Err(corrupt(format!(
            "manifest lists {} records, found {count}",
            seg.count
        )));
    }
    Ok(())
}
