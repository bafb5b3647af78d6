//! Evidence sentence retrieval.
//!
//! Free-text queries are ranked against sentence context vectors (a
//! sentence blended with its neighbours) from a pluggable
//! [`EmbeddingProvider`]. Typed pattern queries such as
//! `CHEMICAL decreases GENE` are answered by [`meta`].

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, SentenceId, SentenceRecord};
use crate::exec::{self, Execution};

pub mod meta;
mod provider;

pub use meta::{
    match_meta_query, match_meta_query_with, match_sentence, parse_meta_query, sentence_words, MetaMatch, MetaQuery,
    MetaToken, PlaceholderType, TypeVocabulary,
};
pub use provider::{sidecar_key, tokens, EmbeddingProvider, HashingProvider, SidecarProvider, DEFAULT_DIM};

pub const CONTEXT_WEIGHTS: [f64; 3] = [0.25, 0.5, 0.25];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvidenceError {
    #[error("query is empty")]
    EmptyQuery,
    #[error("unknown sentence `{0}`")]
    UnknownSentence(String),
    #[error("top_n must be at least 1")]
    InvalidTopN,
    #[error("unknown placeholder `{0}`")]
    UnknownPlaceholder(String),
    #[error("no vector for text with key {0}")]
    MissingVector(String),
    #[error("sidecar line {line}: {message}")]
    Sidecar { line: usize, message: String },
    #[error("provider returned {found} components, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

impl EvidenceError {
    pub fn code(&self) -> &'static str {
        match self {
            EvidenceError::EmptyQuery => "EmptyQuery",
            EvidenceError::UnknownSentence(_) => "UnknownSentence",
            EvidenceError::InvalidTopN => "InvalidQuery",
            EvidenceError::UnknownPlaceholder(_) => "UnknownPlaceholder",
            EvidenceError::MissingVector(_) | EvidenceError::DimensionMismatch { .. } => "ProviderError",
            EvidenceError::Sidecar { .. } => "SchemaError",
        }
    }
}

pub type Result<T, E = EvidenceError> = std::result::Result<T, E>;

/// A unit-norm embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    /// Scales `values` to unit length. The zero vector becomes the first
    /// basis vector.
    pub fn normalized(mut values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "embedding dimension must be positive");
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            values.iter_mut().for_each(|v| *v = 0.0);
            values[0] = 1.0;
        } else {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &EmbeddingVector) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }

    /// Cosine of two unit vectors, clamped to `[-1, 1]`.
    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        self.dot(other).clamp(-1.0, 1.0)
    }
}

fn embed_checked(provider: &dyn EmbeddingProvider, text: &str) -> Result<EmbeddingVector> {
    let v = provider.embed(text)?;
    if v.dim() != provider.dim() {
        return Err(EvidenceError::DimensionMismatch {
            expected: provider.dim(),
            found: v.dim(),
        });
    }
    Ok(v)
}

/// Weighted blend of neighbour vectors, re-normalized. `None` entries are
/// missing neighbours and their weight is redistributed.
fn blend(parts: [Option<&EmbeddingVector>; 3]) -> EmbeddingVector {
    let total: f64 = parts
        .iter()
        .zip(CONTEXT_WEIGHTS)
        .filter_map(|(p, w)| p.map(|_| w))
        .sum();
    let dim = parts.iter().flatten().next().map_or(1, |v| v.dim());
    let mut out = vec![0.0; dim];
    for (p, w) in parts.iter().zip(CONTEXT_WEIGHTS) {
        if let Some(v) = p {
            for (o, x) in out.iter_mut().zip(v.values()) {
                *o += w / total * x;
            }
        }
    }
    EmbeddingVector::normalized(out)
}

/// Context vector of one sentence: `0.25·prev + 0.5·cur + 0.25·next`,
/// normalized.
pub fn embed_context(
    provider: &dyn EmbeddingProvider,
    corpus: &Corpus,
    paper_id: &str,
    sentence_idx: u32,
) -> Result<EmbeddingVector> {
    let cur = corpus
        .sentence(paper_id, sentence_idx)
        .ok_or_else(|| EvidenceError::UnknownSentence(SentenceId::new(paper_id, sentence_idx).to_string()))?;
    let prev = sentence_idx
        .checked_sub(1)
        .and_then(|i| corpus.sentence(paper_id, i))
        .map(|s| embed_checked(provider, &s.text))
        .transpose()?;
    let next = corpus
        .sentence(paper_id, sentence_idx + 1)
        .map(|s| embed_checked(provider, &s.text))
        .transpose()?;
    let cur = embed_checked(provider, &cur.text)?;
    Ok(blend([prev.as_ref(), Some(&cur), next.as_ref()]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceHit {
    pub sentence: SentenceRecord,
    pub similarity: f64,
}

/// Precomputed context vectors for a whole corpus snapshot.
#[derive(Debug, Clone)]
pub struct ContextIndex {
    provider: String,
    vectors: BTreeMap<SentenceId, EmbeddingVector>,
}

impl ContextIndex {
    /// Embeds every sentence once, then blends neighbours. Both passes run
    /// in parallel when `exec` allows.
    pub fn build(provider: &dyn EmbeddingProvider, corpus: &Corpus, exec: Execution) -> Result<Self> {
        let papers: Vec<_> = corpus.papers().collect();
        let per_paper = exec::map(exec, &papers, |p| {
            let own = p
                .sentences
                .iter()
                .map(|s| embed_checked(provider, &s.text))
                .collect::<Result<Vec<_>>>()?;
            Ok((0..own.len())
                .map(|i| {
                    let prev = i.checked_sub(1).map(|j| &own[j]);
                    let next = own.get(i + 1);
                    (SentenceId::new(p.paper_id(), i as u32), blend([prev, Some(&own[i]), next]))
                })
                .collect::<Vec<_>>())
        });
        let mut vectors = BTreeMap::new();
        for entries in per_paper {
            vectors.extend(entries?);
        }
        Ok(Self {
            provider: provider.name().to_owned(),
            vectors,
        })
    }

    pub fn provider_name(&self) -> &str {
        &self.provider
    }

    pub fn get(&self, id: &SentenceId) -> Option<&EmbeddingVector> {
        self.vectors.get(id)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// As [`rank_evidence`], reading context vectors from the index.
    pub fn rank(
        &self,
        provider: &dyn EmbeddingProvider,
        corpus: &Corpus,
        query: &str,
        candidates: Option<&BTreeSet<SentenceId>>,
        top_n: usize,
    ) -> Result<Vec<EvidenceHit>> {
        let q = query_vector(provider, query, top_n)?;
        let ids = candidate_ids(corpus, candidates)?;
        let scored = ids
            .into_iter()
            .map(|id| {
                let v = self
                    .vectors
                    .get(&id)
                    .ok_or_else(|| EvidenceError::UnknownSentence(id.to_string()))?;
                Ok((id, q.cosine(v)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(finish(corpus, scored, top_n))
    }
}

fn query_vector(provider: &dyn EmbeddingProvider, query: &str, top_n: usize) -> Result<EmbeddingVector> {
    if query.trim().is_empty() {
        return Err(EvidenceError::EmptyQuery);
    }
    if top_n == 0 {
        return Err(EvidenceError::InvalidTopN);
    }
    embed_checked(provider, query)
}

fn candidate_ids(corpus: &Corpus, candidates: Option<&BTreeSet<SentenceId>>) -> Result<Vec<SentenceId>> {
    match candidates {
        None => Ok(corpus.sentences().map(SentenceRecord::id).collect()),
        Some(set) => set
            .iter()
            .map(|id| {
                if corpus.sentence(&id.paper_id, id.sentence_idx).is_some() {
                    Ok(id.clone())
                } else {
                    Err(EvidenceError::UnknownSentence(id.to_string()))
                }
            })
            .collect(),
    }
}

/// Similarity descending, then `(paper_id, sentence_idx)` ascending.
fn finish(corpus: &Corpus, mut scored: Vec<(SentenceId, f64)>, top_n: usize) -> Vec<EvidenceHit> {
    scored.sort_by(|(a, sa), (b, sb)| sb.total_cmp(sa).then_with(|| a.cmp(b)));
    scored.truncate(top_n);
    scored
        .into_iter()
        .map(|(id, similarity)| EvidenceHit {
            sentence: corpus
                .sentence(&id.paper_id, id.sentence_idx)
                .expect("candidate ids were checked")
                .clone(),
            similarity,
        })
        .collect()
}

/// Ranks candidate sentences (default: the whole corpus) by cosine between
/// their context vector and the query vector.
pub fn rank_evidence(
    provider: &dyn EmbeddingProvider,
    corpus: &Corpus,
    query: &str,
    candidates: Option<&BTreeSet<SentenceId>>,
    top_n: usize,
    exec: Execution,
) -> Result<Vec<EvidenceHit>> {
    let q = query_vector(provider, query, top_n)?;
    let ids = candidate_ids(corpus, candidates)?;
    let scored = exec::map(exec, &ids, |id| {
        embed_context(provider, corpus, &id.paper_id, id.sentence_idx).map(|v| (id.clone(), q.cosine(&v)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(finish(corpus, scored, top_n))
}
