//! Typed pattern queries over corpus sentences.
//!
//! A pattern mixes literal words with type placeholders:
//! `CHEMICAL decreases GENE` matches any sentence holding a chemical
//! mention, a gene mention and the word "decreases".

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{EvidenceError, Result};
use crate::corpus::{Corpus, MentionRecord, SentenceRecord};
use crate::exec::{self, Execution};
use crate::graph::CoarseType;

/// Unknown all-caps tokens shorter than this are read as literals
/// (abbreviations like `ACE` or `RNA`).
const MIN_PLACEHOLDER_LEN: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "name")]
pub enum PlaceholderType {
    Coarse(CoarseType),
    Fine(String),
}

impl PlaceholderType {
    fn accepts(&self, m: &MentionRecord) -> bool {
        match self {
            PlaceholderType::Coarse(t) => m.coarse_type == *t,
            PlaceholderType::Fine(name) => m.fine_types.iter().any(|f| f.eq_ignore_ascii_case(name)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaToken {
    Literal(String),
    Placeholder(PlaceholderType),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaQuery {
    pub tokens: Vec<MetaToken>,
}

impl fmt::Display for MetaQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .tokens
            .iter()
            .map(|t| match t {
                MetaToken::Literal(s) => s.clone(),
                MetaToken::Placeholder(PlaceholderType::Coarse(c)) => c.as_str().to_uppercase(),
                MetaToken::Placeholder(PlaceholderType::Fine(n)) => placeholder_spelling(n),
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

fn placeholder_spelling(fine: &str) -> String {
    fine.trim().to_uppercase().replace([' ', '-'], "_")
}

/// Placeholder names a query may use.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeVocabulary {
    names: BTreeMap<String, PlaceholderType>,
}

impl TypeVocabulary {
    /// Coarse types plus the given fine types.
    pub fn new<I, S>(fine_types: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut names = BTreeMap::new();
        for fine in fine_types {
            let fine = fine.as_ref();
            if !fine.trim().is_empty() {
                names.insert(placeholder_spelling(fine), PlaceholderType::Fine(fine.to_owned()));
            }
        }
        for t in CoarseType::ALL {
            names.insert(t.as_str().to_uppercase(), PlaceholderType::Coarse(t));
        }
        names.insert("PROTEIN".into(), PlaceholderType::Coarse(CoarseType::Gene));
        Self { names }
    }

    pub fn from_corpus(corpus: &Corpus) -> Self {
        Self::new(corpus.fine_types())
    }

    pub fn lookup(&self, token: &str) -> Option<&PlaceholderType> {
        self.names.get(token)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.names.keys().map(String::as_str)
    }
}

fn is_all_caps(token: &str) -> bool {
    token.chars().any(|c| c.is_ascii_uppercase()) && token.chars().all(|c| c.is_ascii_uppercase() || c == '_')
}

fn trim_word(w: &str) -> &str {
    w.trim_matches(|c: char| !c.is_alphanumeric())
}

pub fn parse_meta_query(text: &str, vocab: &TypeVocabulary) -> Result<MetaQuery> {
    let mut tokens = Vec::new();
    for raw in text.split_whitespace() {
        if is_all_caps(raw) {
            if let Some(p) = vocab.lookup(raw) {
                tokens.push(MetaToken::Placeholder(p.clone()));
                continue;
            }
            if raw.chars().count() >= MIN_PLACEHOLDER_LEN {
                return Err(EvidenceError::UnknownPlaceholder(raw.to_owned()));
            }
        }
        let word = trim_word(raw);
        if !word.is_empty() {
            tokens.push(MetaToken::Literal(word.to_lowercase()));
        }
    }
    if tokens.is_empty() {
        return Err(EvidenceError::EmptyQuery);
    }
    Ok(MetaQuery { tokens })
}

/// Whitespace words of a sentence with edge punctuation trimmed, lower-cased,
/// with their char spans.
pub fn sentence_words(text: &str) -> Vec<(String, (u32, u32))> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let chars: Vec<char> = text.chars().collect();
    let mut push = |s: usize, e: usize| {
        let word: String = chars[s..e].iter().collect();
        let lead = word.chars().take_while(|c| !c.is_alphanumeric()).count();
        let trimmed = trim_word(&word);
        if !trimmed.is_empty() {
            let len = trimmed.chars().count();
            let a = (s + lead) as u32;
            out.push((trimmed.to_lowercase(), (a, a + len as u32)));
        }
    };
    for (i, c) in chars.iter().enumerate() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                push(s, i);
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        push(s, chars.len());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaMatch {
    pub sentence: SentenceRecord,
    /// Number of query tokens satisfied; every match satisfies all of them.
    pub matched: usize,
    /// Smallest char extent covering one choice of matched items.
    pub extent: u32,
    /// Char span chosen for each query token, in query order.
    pub spans: Vec<(u32, u32)>,
}

enum Slot {
    Mentions(Vec<(usize, (u32, u32))>),
    Words(Vec<(u32, u32)>),
}

impl Slot {
    fn len(&self) -> usize {
        match self {
            Slot::Mentions(v) => v.len(),
            Slot::Words(v) => v.len(),
        }
    }
}

struct Search<'a> {
    slots: Vec<&'a Slot>,
    used: Vec<bool>,
    chosen: Vec<(u32, u32)>,
    best: Option<(u32, Vec<(u32, u32)>)>,
}

impl Search<'_> {
    fn run(&mut self, depth: usize, lo: u32, hi: u32) {
        if let Some((b, _)) = &self.best {
            if depth > 0 && hi - lo >= *b {
                return;
            }
        }
        if depth == self.slots.len() {
            self.best = Some((hi - lo, self.chosen.clone()));
            return;
        }
        let extend = |span: (u32, u32)| {
            if depth == 0 {
                span
            } else {
                (lo.min(span.0), hi.max(span.1))
            }
        };
        match self.slots[depth] {
            Slot::Mentions(cands) => {
                for &(idx, span) in cands {
                    if self.used[idx] {
                        continue;
                    }
                    self.used[idx] = true;
                    self.chosen.push(span);
                    let (a, b) = extend(span);
                    self.run(depth + 1, a, b);
                    self.chosen.pop();
                    self.used[idx] = false;
                }
            }
            Slot::Words(cands) => {
                for &span in cands {
                    self.chosen.push(span);
                    let (a, b) = extend(span);
                    self.run(depth + 1, a, b);
                    self.chosen.pop();
                }
            }
        }
    }
}

/// Tests one sentence. Placeholders need pairwise distinct mentions;
/// literals may share a word.
pub fn match_sentence(s: &SentenceRecord, mq: &MetaQuery) -> Option<MetaMatch> {
    let words = sentence_words(&s.text);
    let slots: Vec<Slot> = mq
        .tokens
        .iter()
        .map(|t| match t {
            MetaToken::Placeholder(p) => Slot::Mentions(
                s.mentions
                    .iter()
                    .enumerate()
                    .filter(|(_, m)| p.accepts(m))
                    .map(|(i, m)| (i, m.char_span))
                    .collect(),
            ),
            MetaToken::Literal(lit) => {
                Slot::Words(words.iter().filter(|(w, _)| w == lit).map(|(_, sp)| *sp).collect())
            }
        })
        .collect();
    if slots.iter().any(|s| s.len() == 0) {
        return None;
    }
    // Most constrained slot first; `order[k]` is the query position searched
    // at depth k.
    let mut order: Vec<usize> = (0..slots.len()).collect();
    order.sort_by_key(|&i| (slots[i].len(), i));
    let mut search = Search {
        slots: order.iter().map(|&i| &slots[i]).collect(),
        used: vec![false; s.mentions.len()],
        chosen: Vec::with_capacity(slots.len()),
        best: None,
    };
    search.run(0, 0, 0);
    let (extent, found) = search.best?;
    let mut spans = vec![(0, 0); slots.len()];
    for (k, &i) in order.iter().enumerate() {
        spans[i] = found[k];
    }
    Some(MetaMatch {
        sentence: s.clone(),
        matched: mq.tokens.len(),
        extent,
        spans,
    })
}

/// More matched tokens first, then tighter extent, then
/// `(paper_id, sentence_idx)`.
pub fn meta_order(a: &MetaMatch, b: &MetaMatch) -> std::cmp::Ordering {
    b.matched
        .cmp(&a.matched)
        .then(a.extent.cmp(&b.extent))
        .then_with(|| a.sentence.paper_id.cmp(&b.sentence.paper_id))
        .then(a.sentence.sentence_idx.cmp(&b.sentence.sentence_idx))
}

pub fn match_meta_query(corpus: &Corpus, mq: &MetaQuery, top_n: usize) -> Vec<MetaMatch> {
    match_meta_query_with(corpus, mq, top_n, Execution::default())
}

pub fn match_meta_query_with(corpus: &Corpus, mq: &MetaQuery, top_n: usize, exec: Execution) -> Vec<MetaMatch> {
    let papers: Vec<_> = corpus.papers().collect();
    let mut hits: Vec<MetaMatch> = exec::map(exec, &papers, |p| {
        p.sentences
            .iter()
            .filter_map(|s| match_sentence(s, mq))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    hits.sort_by(meta_order);
    hits.truncate(top_n);
    hits
}
