use serde::{Deserialize, Serialize};

use super::{IngestError, Result};
use crate::graph::{
    is_well_formed_id, Action, AssertionEdge, EdgeKey, ProvenanceRef, RelationCategory, CTD_SOURCE,
};
use crate::kb::KnowledgeBase;

/// One row of a curated gene-chemical-disease table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtdRow {
    pub line: usize,
    pub subject_id: String,
    pub object_id: String,
    pub category: RelationCategory,
    pub subtype: String,
    pub action: Action,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtdSummary {
    pub added: usize,
    pub skipped: usize,
}

/// Parses a tab-separated table with columns
/// `subject_id object_id category subtype action`. `#` lines are comments.
pub fn parse_ctd_table(text: &str) -> Result<Vec<CtdRow>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        let malformed = |message: String| IngestError::MalformedRow { line, message };
        let cols: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
        if cols.len() != 5 {
            return Err(malformed(format!("expected 5 tab-separated columns, found {}", cols.len())));
        }
        for id in &cols[..2] {
            if !is_well_formed_id(id) {
                return Err(malformed(format!("`{id}` is not a namespaced id")));
            }
        }
        let category = RelationCategory::parse(cols[2])
            .ok_or_else(|| malformed(format!("unknown category `{}`", cols[2])))?;
        let action = Action::parse(cols[4])
            .ok_or_else(|| malformed(format!("unknown action `{}`", cols[4])))?;
        if cols[3].is_empty() {
            return Err(malformed("empty subtype".into()));
        }
        rows.push(CtdRow {
            line,
            subject_id: cols[0].to_owned(),
            object_id: cols[1].to_owned(),
            category,
            subtype: cols[3].to_owned(),
            action,
        });
    }
    Ok(rows)
}

/// Adds an edge for every row whose endpoints are both live entities.
///
/// Rows never create entities. Each added edge carries the synthetic
/// provenance `(CTD, 0)`, so curated knowledge counts as one source.
pub fn link_ctd(kb: &mut KnowledgeBase, rows: &[CtdRow]) -> Result<CtdSummary> {
    let registry = kb.registry().clone();
    for row in rows {
        let known = if row.category == RelationCategory::Event {
            registry.has_event(&row.subtype)
        } else {
            registry.has_relation(&row.subtype)
        };
        if !known {
            return Err(IngestError::MalformedRow {
                line: row.line,
                message: format!("subtype `{}` is not in the registry", row.subtype),
            });
        }
    }
    let mut summary = CtdSummary::default();
    for row in rows {
        if !(kb.graph.is_live(&row.subject_id) && kb.graph.is_live(&row.object_id)) {
            summary.skipped += 1;
            continue;
        }
        let key = EdgeKey::new(
            row.subject_id.clone(),
            row.object_id.clone(),
            row.category,
            row.subtype.clone(),
            row.action,
        );
        kb.graph
            .add_assertion(AssertionEdge::new(key, [ProvenanceRef::new(CTD_SOURCE, 0)]))?;
        summary.added += 1;
    }
    Ok(summary)
}
