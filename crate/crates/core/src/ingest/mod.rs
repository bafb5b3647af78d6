//! Bundle parsing, identifier canonicalization, curated-table linking and
//! incremental update manifests.

mod apply;
mod bundle;
mod ctd;

use thiserror::Error;

use crate::graph::{is_well_formed_id, CoarseType, GraphError};

pub use apply::{
    apply_update, ingest_bundle, ingest_files, IngestSummary, UpdateFailure, UpdateManifest,
    UpdateSummary,
};
pub use bundle::{
    parse_document_bundle, DocumentBundle, EntityStub, EventStub, MentionStub, RelationStub,
    SentenceStub,
};
pub use ctd::{link_ctd, parse_ctd_table, CtdRow, CtdSummary};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("schema error at {location}: {message}")]
    SchemaError { location: String, message: String },
    #[error("span out of range at {location}: {message}")]
    SpanOutOfRange { location: String, message: String },
    #[error("sentence index {found} where {expected} was expected")]
    NonDenseSentenceIndex { expected: u32, found: u32 },
    #[error("empty identifier")]
    EmptyIdentifier,
    #[error("paper `{0}` is already ingested with different content; route it through `updated`")]
    DuplicatePaper(String),
    #[error("malformed curated-table row at line {line}: {message}")]
    MalformedRow { line: usize, message: String },
    #[error("paper ids appear in more than one manifest list: {}", .0.join(", "))]
    OverlappingLists(Vec<String>),
    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl IngestError {
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::SchemaError { .. } => "SchemaError",
            IngestError::SpanOutOfRange { .. } => "SpanOutOfRange",
            IngestError::NonDenseSentenceIndex { .. } => "NonDenseSentenceIndex",
            IngestError::EmptyIdentifier => "EmptyIdentifier",
            IngestError::DuplicatePaper(_) => "DuplicatePaper",
            IngestError::MalformedRow { .. } => "MalformedRow",
            IngestError::OverlappingLists(_) => "OverlappingLists",
            IngestError::Io { .. } => "IoError",
            IngestError::Graph(e) => e.code(),
        }
    }

    pub(crate) fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        IngestError::SchemaError {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;

/// Maps a raw identifier to the namespaced form.
///
/// Already-namespaced ids pass through. MeSH uids (`C` or `D` followed by
/// 6-9 digits) get `MESH:`; bare integers get `GENE:` for genes and `TAX:`
/// for organisms. Anything else becomes `LOCAL:` + a slug: lower-cased,
/// punctuation removed, whitespace runs replaced by `-`.
pub fn canonicalize_id(raw: &str, coarse_type: CoarseType) -> Result<String> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(IngestError::EmptyIdentifier);
    }
    if is_well_formed_id(raw) {
        return Ok(raw.to_owned());
    }
    if is_mesh_uid(raw) {
        return Ok(format!("MESH:{raw}"));
    }
    if raw.bytes().all(|b| b.is_ascii_digit()) {
        match coarse_type {
            CoarseType::Gene => return Ok(format!("GENE:{raw}")),
            CoarseType::Organism => return Ok(format!("TAX:{raw}")),
            _ => {}
        }
    }
    let slug = slugify(raw);
    if slug.is_empty() {
        return Err(IngestError::EmptyIdentifier);
    }
    Ok(format!("LOCAL:{slug}"))
}

fn is_mesh_uid(s: &str) -> bool {
    let mut chars = s.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    let digits = chars.as_str();
    matches!(first, 'C' | 'D')
        && (6..=9).contains(&digits.len())
        && digits.bytes().all(|b| b.is_ascii_digit())
}

fn slugify(s: &str) -> String {
    let cleaned: String = s
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect();
    cleaned.split_whitespace().collect::<Vec<_>>().join("-")
}
