//! Sentence store for ingested papers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{CoarseType, ProvenanceRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Section {
    Title,
    Abstract,
    Body,
    Caption,
    Acknowledgements,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionRecord {
    pub char_span: (u32, u32),
    pub entity_id: String,
    pub coarse_type: CoarseType,
    pub fine_types: BTreeSet<String>,
}

impl MentionRecord {
    pub fn len(&self) -> u32 {
        self.char_span.1 - self.char_span.0
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn overlaps(&self, other: &MentionRecord) -> bool {
        self.char_span.0 < other.char_span.1 && other.char_span.0 < self.char_span.1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub paper_id: String,
    pub sentence_idx: u32,
    pub section: Section,
    pub text: String,
    pub mentions: Vec<MentionRecord>,
}

impl SentenceRecord {
    pub fn id(&self) -> SentenceId {
        SentenceId::new(self.paper_id.clone(), self.sentence_idx)
    }

    pub fn provenance(&self) -> ProvenanceRef {
        ProvenanceRef::new(self.paper_id.clone(), self.sentence_idx)
    }

    pub fn mentions_entity(&self, id: &str) -> bool {
        self.mentions.iter().any(|m| m.entity_id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SentenceId {
    pub paper_id: String,
    pub sentence_idx: u32,
}

impl SentenceId {
    pub fn new(paper_id: impl Into<String>, sentence_idx: u32) -> Self {
        Self {
            paper_id: paper_id.into(),
            sentence_idx,
        }
    }
}

impl fmt::Display for SentenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.paper_id, self.sentence_idx)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperMeta {
    pub paper_id: String,
    pub title: String,
    pub authors: Vec<String>,
    pub affiliations: Vec<String>,
    pub acknowledgements: String,
    pub pub_date: String,
    pub peer_reviewed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub meta: PaperMeta,
    /// SHA-256 of the raw bundle bytes, hex encoded.
    pub content_hash: String,
    pub sentences: Vec<SentenceRecord>,
}

impl PaperRecord {
    pub fn paper_id(&self) -> &str {
        &self.meta.paper_id
    }

    pub fn mentions_entity(&self, id: &str) -> bool {
        self.sentences.iter().any(|s| s.mentions_entity(id))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    papers: BTreeMap<String, PaperRecord>,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, paper: PaperRecord) -> Option<PaperRecord> {
        self.papers.insert(paper.meta.paper_id.clone(), paper)
    }

    pub fn remove(&mut self, paper_id: &str) -> Option<PaperRecord> {
        self.papers.remove(paper_id)
    }

    pub fn paper(&self, paper_id: &str) -> Option<&PaperRecord> {
        self.papers.get(paper_id)
    }

    pub fn contains(&self, paper_id: &str) -> bool {
        self.papers.contains_key(paper_id)
    }

    /// Papers in id order.
    pub fn papers(&self) -> impl Iterator<Item = &PaperRecord> + '_ {
        self.papers.values()
    }

    pub fn paper_ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.papers.keys().map(String::as_str)
    }

    pub fn paper_count(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn sentence(&self, paper_id: &str, sentence_idx: u32) -> Option<&SentenceRecord> {
        self.papers
            .get(paper_id)?
            .sentences
            .get(sentence_idx as usize)
    }

    pub fn resolves(&self, r: &ProvenanceRef) -> bool {
        self.sentence(&r.paper_id, r.sentence_idx).is_some()
    }

    /// Every sentence, ordered by `(paper_id, sentence_idx)`.
    pub fn sentences(&self) -> impl Iterator<Item = &SentenceRecord> + '_ {
        self.papers.values().flat_map(|p| p.sentences.iter())
    }

    pub fn sentence_count(&self) -> usize {
        self.papers.values().map(|p| p.sentences.len()).sum()
    }

    pub fn mentions_entity(&self, id: &str) -> bool {
        self.papers.values().any(|p| p.mentions_entity(id))
    }

    /// Papers with at least one mention of `entity_id`, in id order.
    pub fn papers_mentioning<'a>(&'a self, entity_id: &'a str) -> impl Iterator<Item = &'a PaperRecord> + 'a {
        self.papers.values().filter(move |p| p.mentions_entity(entity_id))
    }

    /// Fine types seen on any mention.
    pub fn fine_types(&self) -> BTreeSet<String> {
        self.sentences()
            .flat_map(|s| s.mentions.iter())
            .flat_map(|m| m.fine_types.iter().cloned())
            .collect()
    }

    /// One JSON line per paper, in id order.
    pub fn to_canonical_string(&self) -> String {
        let mut s = String::new();
        for p in self.papers.values() {
            s.push_str(&serde_json::to_string(p).expect("paper record serializes"));
            s.push('\n');
        }
        s
    }
}
