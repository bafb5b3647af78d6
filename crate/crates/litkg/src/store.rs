//! Knowledge base persistence as an append-only journal.
//!
//! Every successful mutation appends one JSON line to `journal.jsonl` in the
//! data directory. Entries embed the bundle and table contents they applied,
//! so replay does not depend on the original files still existing.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use litkg_core::ingest::{
    apply_update, ingest_files, link_ctd, parse_ctd_table, CtdSummary, IngestError, IngestSummary, UpdateManifest,
    UpdateSummary,
};
use litkg_core::{Execution, KnowledgeBase};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const JOURNAL_FILE: &str = "journal.jsonl";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("journal line {line}: {message}")]
    Journal { line: usize, message: String },
    #[error("cannot access `{path}`: {message}")]
    Io { path: String, message: String },
}

impl StoreError {
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::Ingest(e) => e.code(),
            StoreError::Journal { .. } => "SchemaError",
            StoreError::Io { .. } => "IoError",
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        StoreError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredFile {
    pub path: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum JournalEntry {
    Ingest { bundles: Vec<StoredFile> },
    Ctd { table: String },
    Update { manifest: UpdateManifest, bundles: Vec<StoredFile> },
}

/// Reads every file up front. Unreadable files are left out; applying the
/// entry then fails for them exactly as it did the first time.
fn snapshot_files<'a>(paths: impl IntoIterator<Item = &'a String>) -> Vec<StoredFile> {
    paths
        .into_iter()
        .filter_map(|p| {
            std::fs::read_to_string(p).ok().map(|content| StoredFile {
                path: p.clone(),
                content,
            })
        })
        .collect()
}

fn loader(files: &[StoredFile]) -> impl Fn(&str) -> std::io::Result<Vec<u8>> + Sync + '_ {
    let by_path: BTreeMap<&str, &str> = files.iter().map(|f| (f.path.as_str(), f.content.as_str())).collect();
    move |p: &str| {
        by_path
            .get(p)
            .map(|c| c.as_bytes().to_vec())
            .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome {
    Ingest(Vec<(String, IngestSummary)>),
    Ctd(CtdSummary),
    Update(UpdateSummary),
}

fn apply(kb: &mut KnowledgeBase, entry: &JournalEntry, exec: Execution) -> Result<Outcome> {
    Ok(match entry {
        JournalEntry::Ingest { bundles } => {
            let paths: Vec<String> = bundles.iter().map(|b| b.path.clone()).collect();
            Outcome::Ingest(ingest_files(kb, &paths, &loader(bundles), exec)?)
        }
        JournalEntry::Ctd { table } => Outcome::Ctd(link_ctd(kb, &parse_ctd_table(table)?)?),
        JournalEntry::Update { manifest, bundles } => Outcome::Update(apply_update(kb, manifest, &loader(bundles), exec)?),
    })
}

/// The current knowledge base plus, optionally, the directory its journal
/// lives in. Without a directory nothing is persisted.
#[derive(Debug, Clone, Default)]
pub struct Store {
    dir: Option<PathBuf>,
    kb: Arc<KnowledgeBase>,
    exec: Execution,
}

impl Store {
    /// Replays the journal in `dir`, creating the directory if needed.
    pub fn open(dir: Option<&Path>, exec: Execution) -> Result<Self> {
        let mut kb = KnowledgeBase::default();
        if let Some(dir) = dir {
            std::fs::create_dir_all(dir).map_err(|e| StoreError::io(dir, e))?;
            let path = dir.join(JOURNAL_FILE);
            if path.exists() {
                let file = File::open(&path).map_err(|e| StoreError::io(&path, e))?;
                for (i, line) in BufReader::new(file).lines().enumerate() {
                    let line = line.map_err(|e| StoreError::io(&path, e))?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let bad = |message: String| StoreError::Journal { line: i + 1, message };
                    let entry: JournalEntry = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
                    apply(&mut kb, &entry, exec).map_err(|e| bad(format!("replay failed: {e}")))?;
                }
            }
        }
        Ok(Self {
            dir: dir.map(Path::to_path_buf),
            kb: Arc::new(kb),
            exec,
        })
    }

    pub fn in_memory(kb: KnowledgeBase) -> Self {
        Self {
            kb: Arc::new(kb),
            ..Default::default()
        }
    }

    pub fn kb(&self) -> &Arc<KnowledgeBase> {
        &self.kb
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Applies `entry` to a copy of the knowledge base; on success the
    /// entry is journaled and the copy becomes current.
    pub fn commit(&mut self, entry: JournalEntry) -> Result<Outcome> {
        let mut next = (*self.kb).clone();
        let outcome = apply(&mut next, &entry, self.exec)?;
        if let Some(dir) = &self.dir {
            let path = dir.join(JOURNAL_FILE);
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&path)
                .map_err(|e| StoreError::io(&path, e))?;
            let line = serde_json::to_string(&entry).expect("journal entries serialize");
            writeln!(f, "{line}").map_err(|e| StoreError::io(&path, e))?;
        }
        self.kb = Arc::new(next);
        Ok(outcome)
    }

    /// Ingests bundle files; all or nothing.
    pub fn ingest(&mut self, paths: &[String]) -> Result<Vec<(String, IngestSummary)>> {
        for p in paths {
            if let Err(e) = std::fs::metadata(p) {
                return Err(StoreError::io(Path::new(p), e));
            }
        }
        match self.commit(JournalEntry::Ingest {
            bundles: snapshot_files(paths),
        })? {
            Outcome::Ingest(s) => Ok(s),
            _ => unreachable!("ingest entry yields an ingest outcome"),
        }
    }

    pub fn link_ctd(&mut self, table_path: &Path) -> Result<CtdSummary> {
        let table = std::fs::read_to_string(table_path).map_err(|e| StoreError::io(table_path, e))?;
        match self.commit(JournalEntry::Ctd { table })? {
            Outcome::Ctd(s) => Ok(s),
            _ => unreachable!("ctd entry yields a ctd outcome"),
        }
    }

    pub fn update(&mut self, manifest: UpdateManifest) -> Result<UpdateSummary> {
        let bundles = snapshot_files(manifest.added.iter().chain(&manifest.updated));
        match self.commit(JournalEntry::Update { manifest, bundles })? {
            Outcome::Update(s) => Ok(s),
            _ => unreachable!("update entry yields an update outcome"),
        }
    }
}
