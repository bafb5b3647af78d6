//! The graph and corpus held together as one consistent unit.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::graph::{CoarseType, Graph, RelationCategory, CTD_SOURCE};
use crate::registry::Registry;

/// Graph plus corpus. Cloning yields an independent snapshot; mutations to
/// one clone are never visible through another.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    pub graph: Graph,
    pub corpus: Corpus,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalSummary {
    pub edges_deleted: usize,
    pub edges_weakened: usize,
    pub entities_orphaned: Vec<String>,
    pub events_deleted: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkCounts {
    pub chemical_gene: usize,
    pub chemical_disease: usize,
    pub gene_disease: usize,
    pub other: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub diseases: usize,
    pub chemicals: usize,
    pub genes: usize,
    pub organisms: usize,
    pub links: LinkCounts,
    pub events: usize,
    pub papers: usize,
}

impl KnowledgeBase {
    pub fn new(registry: Arc<Registry>) -> Self {
        Self {
            graph: Graph::new(registry),
            corpus: Corpus::new(),
        }
    }

    pub fn registry(&self) -> &Arc<Registry> {
        self.graph.registry()
    }

    /// Drops a paper's provenance, entity contributions and sentences.
    /// Unknown papers produce an all-zero summary.
    pub fn remove_paper(&mut self, paper_id: &str) -> RemovalSummary {
        let withdrawal = self.graph.withdraw_paper(paper_id);
        self.corpus.remove(paper_id);
        let entities_orphaned = withdrawal
            .orphaned
            .into_iter()
            .filter(|id| !self.corpus.mentions_entity(id))
            .collect();
        RemovalSummary {
            edges_deleted: withdrawal.edges_deleted,
            edges_weakened: withdrawal.edges_weakened,
            entities_orphaned,
            events_deleted: withdrawal.events_deleted,
        }
    }

    /// Exact recount over live storage.
    pub fn stats(&self) -> GraphStats {
        let mut s = GraphStats::default();
        for e in self.graph.entities() {
            match e.coarse_type {
                CoarseType::Disease => s.diseases += 1,
                CoarseType::Chemical => s.chemicals += 1,
                CoarseType::Gene => s.genes += 1,
                CoarseType::Organism => s.organisms += 1,
            }
        }
        for (key, _) in self.graph.edges() {
            match key.category {
                RelationCategory::GeneChemical => s.links.chemical_gene += 1,
                RelationCategory::ChemicalDisease => s.links.chemical_disease += 1,
                RelationCategory::GeneDisease => s.links.gene_disease += 1,
                _ => s.links.other += 1,
            }
        }
        s.events = self.graph.event_count();
        s.papers = self.corpus.paper_count();
        s
    }

    /// Papers that contribute provenance anywhere in the graph, excluding
    /// the curated-database source.
    pub fn supporting_papers(&self) -> BTreeSet<String> {
        self.graph
            .edges()
            .flat_map(|(_, p)| p.iter())
            .chain(self.graph.events().flat_map(|(_, p)| p.iter()))
            .filter(|r| r.paper_id != CTD_SOURCE)
            .map(|r| r.paper_id.clone())
            .collect()
    }

    /// Canonical graph dump followed by the corpus dump.
    pub fn to_canonical_string(&self) -> String {
        let mut s = self.graph.to_canonical_string();
        s.push_str(&self.corpus.to_canonical_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stats_are_zero() {
        assert_eq!(KnowledgeBase::default().stats(), GraphStats::default());
    }

    #[test]
    fn removing_unknown_paper_is_noop() {
        let mut kb = KnowledgeBase::default();
        assert_eq!(kb.remove_paper("missing"), RemovalSummary::default());
    }
}
