use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{gate_advance, GateState, HistoryEntry, PhaseOutcome};
use crate::error::Result;
use crate::ingest::{canonical_line, ParseError, ParseErrorKind};
use crate::scalar::Scalar;

/// Append-only gate history file: one canonical JSON record per transition.
#[derive(Debug, Clone)]
pub struct GateHistoryLog {
    path: PathBuf,
}

impl GateHistoryLog {
    pub fn new(path: impl AsRef<Path>) -> Self {
        Self {
            path: path.as_ref().to_path_buf(),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// All recorded entries; a missing file is an empty history.
    pub fn entries<F: Scalar>(&self) -> Result<Vec<HistoryEntry<F>>> {
        let text = match fs::read_to_string(&self.path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry = serde_json::from_str(line).map_err(|e| ParseError {
                line: i + 1,
                kind: ParseErrorKind::SyntaxError(e.to_string()),
            })?;
            out.push(entry);
        }
        Ok(out)
    }

    pub fn load<F: Scalar>(&self) -> Result<GateState<F>> {
        GateState::replay(&self.entries()?)
    }

    /// Advances the persisted state and appends the new entry. Nothing is
    /// written if the transition is rejected.
    pub fn advance<F: Scalar>(
        &self,
        outcome: PhaseOutcome<F>,
        timestamp: u64,
    ) -> Result<GateState<F>> {
        let state = gate_advance(self.load()?, outcome, timestamp)?;
        self.append(state.history.last().expect("advance appends an entry"))?;
        Ok(state)
    }

    pub fn append<F: Scalar>(&self, entry: &HistoryEntry<F>) -> Result<()> {
        if let Some(parent) = self.path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        let mut line = canonical_line(entry);
        line.push('\n');
        f.write_all(line.as_bytes())?;
        f.sync_data()?;
        Ok(())
    }
}
