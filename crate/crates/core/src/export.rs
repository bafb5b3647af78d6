//! Graph and subgraph export: the canonical line format and Graphviz DOT.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    AssertionEdge, CanonicalRecord, CoarseType, EdgeKey, Graph, PathRecord,
};
use crate::pathrank::{score_to_f64, ScoredSubgraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown export format `{0}` (expected canonical or dot)")]
pub struct UnknownFormat(pub String);

impl UnknownFormat {
    pub fn code(&self) -> &'static str {
        "UnknownFormat"
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    #[default]
    Canonical,
    Dot,
}

impl FromStr for ExportFormat {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, UnknownFormat> {
        match s.trim().to_ascii_lowercase().as_str() {
            "canonical" | "jsonl" => Ok(ExportFormat::Canonical),
            "dot" | "graphviz" | "graph-description" => Ok(ExportFormat::Dot),
            _ => Err(UnknownFormat(s.to_owned())),
        }
    }
}

pub fn node_color(t: CoarseType) -> &'static str {
    match t {
        CoarseType::Chemical => "red",
        CoarseType::Gene => "grey",
        CoarseType::Disease => "blue",
        CoarseType::Organism => "green",
    }
}

pub fn export_graph(graph: &Graph, format: ExportFormat) -> String {
    match format {
        ExportFormat::Canonical => graph.to_canonical_string(),
        ExportFormat::Dot => {
            let max = graph.edges().map(|(k, _)| graph.support(k).unwrap_or(0)).max().unwrap_or(1);
            let edges: Vec<(EdgeKey, f64)> = graph
                .edges()
                .map(|(k, _)| (k.clone(), graph.support(k).unwrap_or(0) as f64 / max.max(1) as f64))
                .collect();
            let nodes: Vec<String> = graph.entities().map(|e| e.id).collect();
            dot(graph, &nodes, &edges)
        }
    }
}

/// Canonical dump of `graph` followed by one line per path.
pub fn canonical_with_paths(graph: &Graph, paths: &[PathRecord]) -> String {
    let mut s = graph.to_canonical_string();
    for p in paths {
        s.push_str(&CanonicalRecord::Path(p.clone()).to_line());
        s.push('\n');
    }
    s
}

/// The subgraph's nodes and edges as a standalone graph.
pub fn restrict(graph: &Graph, sg: &ScoredSubgraph) -> Graph {
    let mut out = Graph::new(graph.registry().clone());
    for id in &sg.nodes {
        if let Some(e) = graph.entity(id) {
            out.upsert_entity(e).expect("entity copied from a valid graph");
        }
    }
    for key in sg.edge_salience.keys() {
        if let Some(prov) = graph.provenance(key) {
            out.add_assertion(AssertionEdge::new(key.clone(), prov.iter().cloned()))
                .expect("edge copied from a valid graph");
        }
    }
    out
}

/// Exports a connection subgraph. The canonical form appends the ranked
/// paths; DOT pen width follows edge salience.
pub fn export_subgraph(graph: &Graph, sg: &ScoredSubgraph, format: ExportFormat) -> String {
    match format {
        ExportFormat::Canonical => {
            let paths: Vec<PathRecord> = sg
                .paths
                .iter()
                .map(|p| PathRecord {
                    nodes: p.nodes.clone(),
                    edges: p.edges.clone(),
                    score: score_to_f64(&p.score),
                })
                .collect();
            canonical_with_paths(&restrict(graph, sg), &paths)
        }
        ExportFormat::Dot => {
            let max = sg.edge_salience.values().map(score_to_f64).fold(0.0, f64::max);
            let edges: Vec<(EdgeKey, f64)> = sg
                .edge_salience
                .iter()
                .map(|(k, s)| (k.clone(), if max > 0.0 { score_to_f64(s) / max } else { 0.0 }))
                .collect();
            let nodes: Vec<String> = sg.nodes.iter().cloned().collect();
            dot(graph, &nodes, &edges)
        }
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// `weight` in [0, 1] maps to pen widths 1..5.
fn dot(graph: &Graph, nodes: &[String], edges: &[(EdgeKey, f64)]) -> String {
    let mut s = String::from("digraph litkg {\n  node [style=filled, fontcolor=white];\n");
    for id in nodes {
        let Some(e) = graph.entity(id) else { continue };
        let _ = writeln!(
            s,
            "  {} [label={}, fillcolor={}];",
            quote(id),
            quote(&e.name),
            node_color(e.coarse_type)
        );
    }
    for (k, w) in edges {
        let _ = writeln!(
            s,
            "  {} -> {} [label={}, penwidth={:.2}];",
            quote(&k.src),
            quote(&k.dst),
            quote(&format!("{} {}", k.subtype, k.action.symbol())),
            1.0 + 4.0 * w
        );
    }
    s.push_str("}\n");
    s
}
