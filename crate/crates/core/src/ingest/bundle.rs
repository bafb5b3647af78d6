use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{canonicalize_id, IngestError, Result};
use crate::corpus::Section;
use crate::graph::{Action, CoarseType, EntityRecord, RelationCategory, CTD_SOURCE};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentenceStub {
    pub idx: u32,
    pub section: Section,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityStub {
    pub id: String,
    pub name: String,
    pub coarse_type: CoarseType,
    #[serde(default)]
    pub fine_types: BTreeSet<String>,
    #[serde(default)]
    pub aliases: BTreeSet<String>,
}

impl EntityStub {
    pub fn to_record(&self) -> EntityRecord {
        let mut e = EntityRecord::new(self.id.clone(), self.name.clone(), self.coarse_type);
        e.fine_types = self.fine_types.clone();
        e.aliases.extend(self.aliases.iter().cloned());
        e
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MentionStub {
    pub sentence_idx: u32,
    pub char_span: (u32, u32),
    pub entity: EntityStub,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationStub {
    pub src: String,
    pub dst: String,
    pub category: RelationCategory,
    pub subtype: String,
    pub action: Action,
    pub sentence_idx: u32,
    #[serde(default)]
    pub char_span: Option<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventStub {
    pub event_type: String,
    pub trigger: String,
    pub roles: BTreeMap<String, String>,
    pub sentence_idx: u32,
    #[serde(default)]
    pub char_span: Option<(u32, u32)>,
}

/// One paper: metadata, sentences and pre-annotated assertions.
///
/// After [`parse_document_bundle`] every entity id is namespaced and every
/// relation or event endpoint names an entity mentioned in the bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentBundle {
    pub paper_id: String,
    pub title: String,
    pub authors: Vec<String>,
    pub affiliations: Vec<String>,
    pub acknowledgements: String,
    pub pub_date: String,
    pub peer_reviewed: bool,
    pub sentences: Vec<SentenceStub>,
    pub mentions: Vec<MentionStub>,
    pub relations: Vec<RelationStub>,
    pub events: Vec<EventStub>,
    /// SHA-256 of the raw bytes the bundle was parsed from.
    #[serde(skip)]
    pub content_hash: String,
}

/// Parses and validates one JSON bundle.
pub fn parse_document_bundle(bytes: &[u8]) -> Result<DocumentBundle> {
    let mut bundle: DocumentBundle = serde_json::from_slice(bytes).map_err(|e| {
        IngestError::schema(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    bundle.content_hash = hex::encode(Sha256::digest(bytes));
    validate(&mut bundle)?;
    Ok(bundle)
}

fn validate(b: &mut DocumentBundle) -> Result<()> {
    if b.paper_id.trim().is_empty() {
        return Err(IngestError::schema("paper_id", "must not be empty"));
    }
    if b.paper_id == CTD_SOURCE {
        return Err(IngestError::schema(
            "paper_id",
            format!("`{CTD_SOURCE}` is reserved for curated-table provenance"),
        ));
    }
    NaiveDate::parse_from_str(&b.pub_date, "%Y-%m-%d")
        .map_err(|e| IngestError::schema("pub_date", format!("`{}`: {e}", b.pub_date)))?;

    for (pos, s) in b.sentences.iter().enumerate() {
        if s.idx != pos as u32 {
            return Err(IngestError::NonDenseSentenceIndex {
                expected: pos as u32,
                found: s.idx,
            });
        }
    }
    let lengths: Vec<u32> = b
        .sentences
        .iter()
        .map(|s| s.text.chars().count() as u32)
        .collect();
    let check = |location: String, idx: u32, span: Option<(u32, u32)>| -> Result<()> {
        let Some(&len) = lengths.get(idx as usize) else {
            return Err(IngestError::SpanOutOfRange {
                location,
                message: format!("sentence {idx} does not exist ({} sentences)", lengths.len()),
            });
        };
        if let Some((start, end)) = span {
            if start >= end || end > len {
                return Err(IngestError::SpanOutOfRange {
                    location,
                    message: format!("span ({start}, {end}) outside sentence of length {len}"),
                });
            }
        }
        Ok(())
    };

    // raw id -> canonical id, and canonical id -> coarse type
    let mut resolved: HashMap<String, String> = HashMap::new();
    let mut types: HashMap<String, CoarseType> = HashMap::new();
    for (i, m) in b.mentions.iter_mut().enumerate() {
        let loc = format!("mentions[{i}]");
        check(loc.clone(), m.sentence_idx, Some(m.char_span))?;
        let e = &mut m.entity;
        if e.name.trim().is_empty() {
            return Err(IngestError::schema(format!("{loc}.entity.name"), "must not be empty"));
        }
        if e.fine_types.iter().chain(&e.aliases).any(|t| t.trim().is_empty()) {
            return Err(IngestError::schema(
                format!("{loc}.entity"),
                "fine_types and aliases must not contain empty strings",
            ));
        }
        let canonical = canonicalize_id(&e.id, e.coarse_type)?;
        if let Some(prev) = types.insert(canonical.clone(), e.coarse_type) {
            if prev != e.coarse_type {
                return Err(IngestError::schema(
                    format!("{loc}.entity.coarse_type"),
                    format!("`{canonical}` typed both {prev} and {}", e.coarse_type),
                ));
            }
        }
        resolved.insert(e.id.trim().to_owned(), canonical.clone());
        resolved.insert(canonical.clone(), canonical.clone());
        e.id = canonical;
    }

    let resolve = |loc: String, raw: &str| -> Result<String> {
        resolved.get(raw.trim()).cloned().ok_or_else(|| {
            IngestError::schema(loc, format!("`{raw}` is not an entity mentioned in this bundle"))
        })
    };
    for (i, r) in b.relations.iter_mut().enumerate() {
        let loc = format!("relations[{i}]");
        check(loc.clone(), r.sentence_idx, r.char_span)?;
        r.src = resolve(format!("{loc}.src"), &r.src)?;
        r.dst = resolve(format!("{loc}.dst"), &r.dst)?;
        if r.subtype.trim().is_empty() {
            return Err(IngestError::schema(format!("{loc}.subtype"), "must not be empty"));
        }
    }
    for (i, ev) in b.events.iter_mut().enumerate() {
        let loc = format!("events[{i}]");
        check(loc.clone(), ev.sentence_idx, ev.char_span)?;
        if ev.roles.is_empty() {
            return Err(IngestError::schema(format!("{loc}.roles"), "needs at least one role"));
        }
        for (role, id) in ev.roles.iter_mut() {
            *id = resolve(format!("{loc}.roles.{role}"), id)?;
        }
    }
    Ok(())
}
