use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{parse_document_bundle, DocumentBundle, IngestError, Result};
use crate::corpus::{MentionRecord, PaperMeta, PaperRecord, SentenceRecord};
use crate::exec::{self, Execution};
use crate::graph::{
    AssertionEdge, EdgeKey, EntityRecord, EventAssertion, EventKey, ProvenanceRef, RelationCategory,
};
use crate::kb::{KnowledgeBase, RemovalSummary};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub entities_new: usize,
    pub edges_new: usize,
    pub edges_merged: usize,
    pub events_new: usize,
    pub sentences: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpdateManifest {
    #[serde(default)]
    pub added: Vec<String>,
    #[serde(default)]
    pub removed: Vec<String>,
    #[serde(default)]
    pub updated: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateFailure {
    /// Bundle path or paper id the failure belongs to.
    pub target: String,
    pub code: String,
    pub message: String,
}

impl UpdateFailure {
    fn new(target: impl Into<String>, err: &IngestError) -> Self {
        Self {
            target: target.into(),
            code: err.code().to_owned(),
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateSummary {
    pub removed: BTreeMap<String, RemovalSummary>,
    pub updated: Vec<String>,
    pub added: Vec<String>,
    pub failed: Vec<UpdateFailure>,
}

/// Applies one validated bundle.
///
/// Re-ingesting identical bytes is a no-op; the same paper id with other
/// content fails with `DuplicatePaper`. Validation happens before any
/// mutation, so a failing bundle leaves the knowledge base untouched.
pub fn ingest_bundle(kb: &mut KnowledgeBase, bundle: &DocumentBundle) -> Result<IngestSummary> {
    if let Some(existing) = kb.corpus.paper(&bundle.paper_id) {
        if existing.content_hash == bundle.content_hash {
            return Ok(IngestSummary::default());
        }
        return Err(IngestError::DuplicatePaper(bundle.paper_id.clone()));
    }
    let paper = bundle.paper_id.as_str();

    // Entity contributions, merged per id in first-mention order.
    let mut entities: BTreeMap<String, EntityRecord> = BTreeMap::new();
    for m in &bundle.mentions {
        let rec = m.entity.to_record();
        match entities.get_mut(&rec.id) {
            Some(e) => {
                e.fine_types.extend(rec.fine_types);
                e.aliases.extend(rec.aliases);
            }
            None => {
                entities.insert(rec.id.clone(), rec);
            }
        }
    }

    let mut edges: BTreeMap<EdgeKey, BTreeSet<ProvenanceRef>> = BTreeMap::new();
    for r in &bundle.relations {
        let key = EdgeKey::new(r.src.clone(), r.dst.clone(), r.category, r.subtype.clone(), r.action);
        edges.entry(key).or_default().insert(ProvenanceRef {
            paper_id: paper.to_owned(),
            sentence_idx: r.sentence_idx,
            char_span: r.char_span,
        });
    }
    let mut events: BTreeMap<EventKey, BTreeSet<ProvenanceRef>> = BTreeMap::new();
    for ev in &bundle.events {
        let key = EventKey {
            event_type: ev.event_type.clone(),
            trigger: ev.trigger.clone(),
            roles: ev.roles.clone(),
        };
        events.entry(key).or_default().insert(ProvenanceRef {
            paper_id: paper.to_owned(),
            sentence_idx: ev.sentence_idx,
            char_span: ev.char_span,
        });
    }

    for e in entities.values() {
        kb.graph.check_entity(e)?;
    }
    let registry = kb.registry().clone();
    for key in edges.keys() {
        let known = if key.category == RelationCategory::Event {
            registry.has_event(&key.subtype)
        } else {
            registry.has_relation(&key.subtype)
        };
        if !known {
            return Err(crate::graph::GraphError::UnknownSubtype(key.subtype.clone()).into());
        }
    }
    for key in events.keys() {
        if !registry.has_event(&key.event_type) {
            return Err(crate::graph::GraphError::UnknownEventType(key.event_type.clone()).into());
        }
    }

    let mut summary = IngestSummary {
        sentences: bundle.sentences.len(),
        ..Default::default()
    };
    for e in entities.values() {
        if kb.graph.contribute_entity(paper, e)? {
            summary.entities_new += 1;
        }
    }
    for (key, prov) in edges {
        let before = kb.graph.provenance(&key).map(BTreeSet::len);
        kb.graph.add_assertion(AssertionEdge::new(key.clone(), prov))?;
        match before {
            None => summary.edges_new += 1,
            Some(n) if kb.graph.provenance(&key).map_or(0, BTreeSet::len) > n => {
                summary.edges_merged += 1
            }
            Some(_) => {}
        }
    }
    for (key, provenance) in events {
        let (_, merge) = kb.graph.add_event(EventAssertion {
            event_type: key.event_type,
            trigger: key.trigger,
            roles: key.roles,
            provenance,
        })?;
        if merge == crate::graph::Merge::New {
            summary.events_new += 1;
        }
    }
    kb.corpus.insert(paper_record(bundle));
    Ok(summary)
}

fn paper_record(b: &DocumentBundle) -> PaperRecord {
    let mut per_sentence: Vec<Vec<MentionRecord>> = vec![Vec::new(); b.sentences.len()];
    for m in &b.mentions {
        per_sentence[m.sentence_idx as usize].push(MentionRecord {
            char_span: m.char_span,
            entity_id: m.entity.id.clone(),
            coarse_type: m.entity.coarse_type,
            fine_types: m.entity.fine_types.clone(),
        });
    }
    let sentences = b
        .sentences
        .iter()
        .zip(per_sentence)
        .map(|(s, mentions)| SentenceRecord {
            paper_id: b.paper_id.clone(),
            sentence_idx: s.idx,
            section: s.section,
            text: s.text.clone(),
            mentions: resolve_overlaps(mentions),
        })
        .collect();
    PaperRecord {
        meta: PaperMeta {
            paper_id: b.paper_id.clone(),
            title: b.title.clone(),
            authors: b.authors.clone(),
            affiliations: b.affiliations.clone(),
            acknowledgements: b.acknowledgements.clone(),
            pub_date: b.pub_date.clone(),
            peer_reviewed: b.peer_reviewed,
        },
        content_hash: b.content_hash.clone(),
        sentences,
    }
}

/// Keeps the longest mentions first and drops anything overlapping a kept
/// one. The result is ordered by span start.
pub(crate) fn resolve_overlaps(mut mentions: Vec<MentionRecord>) -> Vec<MentionRecord> {
    mentions.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then(a.char_span.0.cmp(&b.char_span.0))
            .then_with(|| a.entity_id.cmp(&b.entity_id))
    });
    let mut kept: Vec<MentionRecord> = Vec::with_capacity(mentions.len());
    for m in mentions {
        if !kept.iter().any(|k| k.overlaps(&m)) {
            kept.push(m);
        }
    }
    kept.sort_by(|a, b| a.char_span.cmp(&b.char_span).then_with(|| a.entity_id.cmp(&b.entity_id)));
    kept
}

fn load_and_parse<L>(paths: &[String], loader: &L, exec: Execution) -> Vec<Result<DocumentBundle>>
where
    L: Fn(&str) -> std::io::Result<Vec<u8>> + Sync,
{
    exec::map(exec, paths, |path| {
        let bytes = loader(path).map_err(|e| IngestError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?;
        parse_document_bundle(&bytes)
    })
}

/// Parses bundle files (in parallel when enabled) and ingests them in the
/// given order. Stops at the first error.
pub fn ingest_files<L>(
    kb: &mut KnowledgeBase,
    paths: &[String],
    loader: &L,
    exec: Execution,
) -> Result<Vec<(String, IngestSummary)>>
where
    L: Fn(&str) -> std::io::Result<Vec<u8>> + Sync,
{
    let parsed = load_and_parse(paths, loader, exec);
    let mut out = Vec::with_capacity(paths.len());
    for (path, bundle) in paths.iter().zip(parsed) {
        let bundle = bundle?;
        let summary = ingest_bundle(kb, &bundle)?;
        out.push((path.clone(), summary));
    }
    Ok(out)
}

/// Applies removals, then updates (remove old + ingest new, per paper,
/// rolled back on failure), then additions.
///
/// Only overlapping lists abort the whole manifest; every other failure is
/// recorded against its paper and the rest of the manifest proceeds.
pub fn apply_update<L>(
    kb: &mut KnowledgeBase,
    manifest: &UpdateManifest,
    loader: &L,
    exec: Execution,
) -> Result<UpdateSummary>
where
    L: Fn(&str) -> std::io::Result<Vec<u8>> + Sync,
{
    let added = load_and_parse(&manifest.added, loader, exec);
    let updated = load_and_parse(&manifest.updated, loader, exec);

    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for id in &manifest.removed {
        *seen.entry(id.as_str()).or_default() += 1;
    }
    for b in added.iter().chain(&updated).flatten() {
        *seen.entry(b.paper_id.as_str()).or_default() += 1;
    }
    let overlapping: Vec<String> = seen
        .into_iter()
        .filter(|(_, n)| *n > 1)
        .map(|(id, _)| id.to_owned())
        .collect();
    if !overlapping.is_empty() {
        return Err(IngestError::OverlappingLists(overlapping));
    }

    let mut summary = UpdateSummary::default();
    for id in &manifest.removed {
        summary.removed.insert(id.clone(), kb.remove_paper(id));
    }
    for (path, bundle) in manifest.updated.iter().zip(updated) {
        let bundle = match bundle {
            Ok(b) => b,
            Err(e) => {
                summary.failed.push(UpdateFailure::new(path, &e));
                continue;
            }
        };
        let checkpoint = kb.clone();
        kb.remove_paper(&bundle.paper_id);
        match ingest_bundle(kb, &bundle) {
            Ok(_) => summary.updated.push(bundle.paper_id),
            Err(e) => {
                *kb = checkpoint;
                summary.failed.push(UpdateFailure::new(path, &e));
            }
        }
    }
    for (path, bundle) in manifest.added.iter().zip(added) {
        match bundle.and_then(|b| ingest_bundle(kb, &b).map(|_| b.paper_id)) {
            Ok(id) => summary.added.push(id),
            Err(e) => summary.failed.push(UpdateFailure::new(path, &e)),
        }
    }
    Ok(summary)
}
