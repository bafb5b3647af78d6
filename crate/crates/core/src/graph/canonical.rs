//! Canonical line-delimited dump.
//!
//! One JSON object per line: a header, then live entities sorted by id,
//! edges sorted by key, events sorted by key. Provenance is emitted in
//! `(paper_id, sentence_idx)` order. Two graphs with the same logical content
//! produce byte-identical dumps.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{AssertionEdge, EdgeKey, EntityRecord, EventAssertion, Graph, GraphError, Result};
use crate::registry::Registry;

pub const CANONICAL_FORMAT: &str = "litkg-graph";
const CANONICAL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeKey>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CanonicalRecord {
    Header { format: String, version: u32 },
    Entity(EntityRecord),
    Edge(AssertionEdge),
    Event(EventAssertion),
    Path(PathRecord),
}

impl CanonicalRecord {
    pub fn header() -> Self {
        CanonicalRecord::Header {
            format: CANONICAL_FORMAT.to_owned(),
            version: CANONICAL_VERSION,
        }
    }

    pub fn to_line(&self) -> String {
        // Serialization of these plain data types cannot fail.
        serde_json::to_string(self).expect("canonical record serializes")
    }
}

impl Graph {
    /// Header, entities, edges and events in canonical order.
    pub fn canonical_records(&self) -> Vec<CanonicalRecord> {
        let mut out = vec![CanonicalRecord::header()];
        out.extend(self.entities().map(CanonicalRecord::Entity));
        out.extend(self.edges().map(|(k, prov)| {
            CanonicalRecord::Edge(AssertionEdge::new(k.clone(), prov.iter().cloned()))
        }));
        out.extend(self.events().map(|(k, prov)| {
            CanonicalRecord::Event(EventAssertion {
                event_type: k.event_type.clone(),
                trigger: k.trigger.clone(),
                roles: k.roles.clone(),
                provenance: prov.clone(),
            })
        }));
        out
    }

    pub fn to_canonical_string(&self) -> String {
        let mut s = String::new();
        for rec in self.canonical_records() {
            s.push_str(&rec.to_line());
            s.push('\n');
        }
        s
    }

    /// Rebuilds a graph from a canonical dump. Entities become direct
    /// upserts; `path` records are returned alongside.
    pub fn from_canonical(text: &str, registry: Arc<Registry>) -> Result<(Graph, Vec<PathRecord>)> {
        let mut graph = Graph::new(registry);
        let mut paths = Vec::new();
        let mut deferred_edges = Vec::new();
        let mut deferred_events = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let rec: CanonicalRecord =
                serde_json::from_str(line).map_err(|e| GraphError::Canonical {
                    line: line_no,
                    message: e.to_string(),
                })?;
            match rec {
                CanonicalRecord::Header { format, .. } if format != CANONICAL_FORMAT => {
                    return Err(GraphError::Canonical {
                        line: line_no,
                        message: format!("unexpected format `{format}`"),
                    })
                }
                CanonicalRecord::Header { .. } => {}
                CanonicalRecord::Entity(e) => {
                    graph.upsert_entity(e)?;
                }
                CanonicalRecord::Edge(e) => deferred_edges.push(e),
                CanonicalRecord::Event(e) => deferred_events.push(e),
                CanonicalRecord::Path(p) => paths.push(p),
            }
        }
        for e in deferred_edges {
            graph.add_assertion(e)?;
        }
        for e in deferred_events {
            graph.add_event(e)?;
        }
        Ok((graph, paths))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Action, CoarseType, ProvenanceRef, RelationCategory};

    fn two_node_graph() -> Graph {
        let mut g = Graph::default();
        g.upsert_entity(EntityRecord::new("MESH:D008784", "Losartan", CoarseType::Chemical))
            .unwrap();
        g.upsert_entity(EntityRecord::new("GENE:7157", "tumor protein p53", CoarseType::Gene))
            .unwrap();
        g.add_assertion(AssertionEdge::new(
            EdgeKey::new(
                "MESH:D008784",
                "GENE:7157",
                RelationCategory::GeneChemical,
                "decreases^expression",
                Action::Decrease,
            ),
            [ProvenanceRef::new("p2", 9), ProvenanceRef::new("p1", 4).with_span(0, 8)],
        ))
        .unwrap();
        g
    }

    #[test]
    fn empty_graph_is_header_only() {
        let dump = Graph::default().to_canonical_string();
        assert_eq!(dump, "{\"kind\":\"header\",\"format\":\"litkg-graph\",\"version\":1}\n");
    }

    #[test]
    fn field_order_is_fixed() {
        let dump = two_node_graph().to_canonical_string();
        let lines: Vec<_> = dump.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(
            lines[1],
            r#"{"kind":"entity","id":"GENE:7157","name":"tumor protein p53","coarse_type":"Gene","fine_types":[],"aliases":["tumor protein p53"]}"#
        );
        assert_eq!(
            lines[3],
            r#"{"kind":"edge","src":"MESH:D008784","dst":"GENE:7157","category":"GeneChemical","subtype":"decreases^expression","action":"Decrease","provenance":[{"paper_id":"p1","sentence_idx":4,"char_span":[0,8]},{"paper_id":"p2","sentence_idx":9,"char_span":null}]}"#
        );
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let dump = two_node_graph().to_canonical_string();
        let (back, paths) = Graph::from_canonical(&dump, Arc::new(Registry::default())).unwrap();
        assert!(paths.is_empty());
        assert_eq!(back.to_canonical_string(), dump);
    }

    #[test]
    fn bad_line_reports_line_number() {
        let text = "{\"kind\":\"header\",\"format\":\"litkg-graph\",\"version\":1}\n{oops\n";
        let err = Graph::from_canonical(text, Arc::new(Registry::default())).unwrap_err();
        assert!(matches!(err, GraphError::Canonical { line: 2, .. }));
    }
}
