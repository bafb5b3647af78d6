//! Literature knowledge-graph engine.
//!
//! Pre-annotated paper bundles are ingested into a typed multigraph whose
//! every assertion remembers which papers (and sentences) support it. On top
//! of that store the crate answers entity-connection questions with
//! support-ranked path search, retrieves evidence sentences, aligns figure
//! panels with their subcaptions, and assembles drug-repurposing reports.
//!
//! The mutable state lives in [`KnowledgeBase`]; everything that reads it
//! takes a shared reference, so a cloned knowledge base is a consistent
//! snapshot that can be handed to any number of reader threads.

pub mod corpus;
pub mod evidence;
pub mod exec;
pub mod export;
pub mod facets;
pub mod figure;
pub mod graph;
pub mod ingest;
pub mod kb;
pub mod pathrank;
pub mod registry;
pub mod report;

pub use corpus::{Corpus, MentionRecord, PaperMeta, PaperRecord, Section, SentenceRecord};
pub use exec::Execution;
pub use graph::{
    Action, AssertionEdge, CoarseType, EdgeKey, EntityRecord, EventAssertion, EventKey, Graph,
    GraphError, ProvenanceRef, RelationCategory,
};
pub use kb::{GraphStats, KnowledgeBase, RemovalSummary};
pub use registry::Registry;
