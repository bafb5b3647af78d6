//! Eleven-question drug-repurposing reports.
//!
//! Each question is answered from one source: graph edges filtered by
//! subtype, connection subgraphs, meta-query templates, paper metadata, or
//! figure grounding. Every claim carries pointers to the sentences behind
//! it, and an unanswerable question still appears with a `NotFound` item.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Section, SentenceId};
use crate::evidence::meta::{match_meta_query_with, meta_order, parse_meta_query, MetaQuery, MetaToken, TypeVocabulary};
use crate::exec::Execution;
use crate::figure::Grounding;
use crate::graph::{EdgeKey, EntityRecord, Graph, ProvenanceRef, RelationCategory, CTD_SOURCE};
use crate::kb::KnowledgeBase;
use crate::pathrank::{connection_subgraphs, PathError, PathQuery, ScoringMode, SubgraphView};

mod render;
mod templates;

pub use render::{parse_structured, render_markdown, render_structured, ReportFormat};
pub use templates::{QuestionTemplate, ReportTemplates, DEFAULT_TEMPLATES, DRUG_SLOT};

pub const QUESTION_COUNT: u8 = 11;

pub const QUESTIONS: [&str; QUESTION_COUNT as usize] = [
    "Current indication: what is the drug class? What is it currently approved to treat?",
    "Molecular structure (symbols desired, but a pointer to a reference is also useful)",
    "Mechanism of action i.e., inhibits viral entry, replication, etc. (w/ a pointer to data)",
    "Was the drug identified by manual or computation screen?",
    "Who is studying the drug? (Source/lab name)",
    "In vitro Data available (cell line used, assays run, viral strain used, cytopathic effects, toxicity, LD50, dosage response curve, etc.)",
    "Animal Data Available (what animal model, LD50, dosage response curve, etc.)",
    "Clinical trials on going (what phase, facility, target population, dosing, intervention etc.)",
    "Funding source",
    "Has the drug shown evidence of systemic toxicity?",
    "List of relevant sources to pull data from.",
];

pub const FUNDING_LEXICON: [&str; 5] = ["grant", "funded", "funding", "supported by", "award"];

pub const DEFAULT_REPORT_TOP_K: usize = 10;
pub const DEFAULT_EVIDENCE_PER_ANSWER: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReportError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("invalid report request: {0}")]
    InvalidRequest(String),
    #[error("templates line {line}: {message}")]
    Template { line: usize, message: String },
}

impl ReportError {
    pub fn code(&self) -> &'static str {
        match self {
            ReportError::UnknownEntity(_) => "UnknownEntity",
            ReportError::InvalidRequest(_) => "InvalidQuery",
            ReportError::Template { .. } => "SchemaError",
        }
    }
}

pub type Result<T, E = ReportError> = std::result::Result<T, E>;

fn default_hops() -> usize {
    crate::pathrank::DEFAULT_MAX_HOPS
}

fn default_top_k() -> usize {
    DEFAULT_REPORT_TOP_K
}

fn default_evidence() -> usize {
    DEFAULT_EVIDENCE_PER_ANSWER
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRequest {
    pub drug: String,
    pub targets: BTreeSet<String>,
    #[serde(default = "default_hops")]
    pub max_hops: usize,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default)]
    pub mode: ScoringMode,
    #[serde(default = "default_evidence")]
    pub evidence_per_answer: usize,
}

impl ReportRequest {
    pub fn new<I, S>(drug: impl Into<String>, targets: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            drug: drug.into(),
            targets: targets.into_iter().map(Into::into).collect(),
            max_hops: default_hops(),
            top_k: default_top_k(),
            mode: ScoringMode::default(),
            evidence_per_answer: default_evidence(),
        }
    }

    fn validate(&self, graph: &Graph) -> Result<()> {
        if !graph.contains_entity(&self.drug) {
            return Err(ReportError::UnknownEntity(self.drug.clone()));
        }
        if self.targets.is_empty() {
            return Err(ReportError::InvalidRequest("targets must not be empty".into()));
        }
        if let Some(t) = self.targets.iter().find(|t| !graph.contains_entity(t)) {
            return Err(ReportError::UnknownEntity(t.clone()));
        }
        if self.evidence_per_answer == 0 || self.top_k == 0 {
            return Err(ReportError::InvalidRequest(
                "top_k and evidence_per_answer must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ItemKind {
    KgFact,
    EvidenceSentence,
    MetadataFact,
    SubgraphRef,
    NotFound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerItem {
    pub text: String,
    pub kind: ItemKind,
    pub evidence: Vec<ProvenanceRef>,
    /// The query a `NotFound` item failed on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<String>,
}

impl AnswerItem {
    fn new(kind: ItemKind, text: impl Into<String>, evidence: Vec<ProvenanceRef>) -> Self {
        Self {
            text: text.into(),
            kind,
            evidence,
            query: None,
        }
    }

    fn not_found(query: impl Into<String>) -> Self {
        Self {
            text: "Not found".into(),
            kind: ItemKind::NotFound,
            evidence: vec![],
            query: Some(query.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionAnswer {
    pub number: u8,
    pub question: String,
    pub items: Vec<AnswerItem>,
    /// Union of the items' evidence, sorted.
    pub evidence: Vec<ProvenanceRef>,
}

impl QuestionAnswer {
    fn new(number: u8, items: Vec<AnswerItem>) -> Self {
        let evidence: BTreeSet<ProvenanceRef> = items.iter().flat_map(|i| i.evidence.iter().cloned()).collect();
        Self {
            number,
            question: QUESTIONS[number as usize - 1].to_owned(),
            items,
            evidence: evidence.into_iter().collect(),
        }
    }

    fn or_not_found(number: u8, items: Vec<AnswerItem>, query: impl Into<String>) -> Self {
        if items.is_empty() {
            Self::new(number, vec![AnswerItem::not_found(query)])
        } else {
            Self::new(number, items)
        }
    }

    pub fn is_not_found(&self) -> bool {
        self.items.iter().all(|i| i.kind == ItemKind::NotFound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSubgraph {
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgraph: Option<SubgraphView>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrugReport {
    pub request: ReportRequest,
    pub drug_name: String,
    pub generated_at: String,
    pub answers: Vec<QuestionAnswer>,
    pub subgraphs: Vec<TargetSubgraph>,
}

impl DrugReport {
    pub fn answer(&self, number: u8) -> Option<&QuestionAnswer> {
        self.answers.iter().find(|a| a.number == number)
    }

    /// Every pointer in the report, including subgraph evidence.
    pub fn all_refs(&self) -> BTreeSet<ProvenanceRef> {
        let mut refs: BTreeSet<ProvenanceRef> = self
            .answers
            .iter()
            .flat_map(|a| a.items.iter().flat_map(|i| i.evidence.iter().cloned()))
            .collect();
        for s in self.subgraphs.iter().filter_map(|s| s.subgraph.as_ref()) {
            refs.extend(s.edges.iter().flat_map(|e| e.evidence.iter().cloned()));
        }
        refs
    }

    /// Pointers that name neither a corpus sentence nor the curated source.
    pub fn unresolved_refs(&self, corpus: &Corpus) -> Vec<ProvenanceRef> {
        self.all_refs()
            .into_iter()
            .filter(|r| r.paper_id != CTD_SOURCE && !corpus.resolves(r))
            .collect()
    }
}

/// Everything besides the knowledge base that a report depends on.
#[derive(Debug, Clone)]
pub struct ReportEnv<'a> {
    pub templates: &'a ReportTemplates,
    pub groundings: &'a [Grounding],
    /// Stamped into the report verbatim so output stays reproducible.
    pub generated_at: String,
    pub exec: Execution,
}

impl<'a> ReportEnv<'a> {
    pub fn new(templates: &'a ReportTemplates, generated_at: impl Into<String>) -> Self {
        Self {
            templates,
            groundings: &[],
            generated_at: generated_at.into(),
            exec: Execution::default(),
        }
    }

    pub fn with_groundings(mut self, g: &'a [Grounding]) -> Self {
        self.groundings = g;
        self
    }
}

struct Ctx<'a> {
    kb: &'a KnowledgeBase,
    req: &'a ReportRequest,
    env: &'a ReportEnv<'a>,
    drug: EntityRecord,
}

impl Ctx<'_> {
    fn name(&self, id: &str) -> String {
        self.kb.graph.entity(id).map_or_else(|| id.to_owned(), |e| e.name)
    }

    fn refs(&self, key: &EdgeKey) -> Vec<ProvenanceRef> {
        self.kb
            .graph
            .provenance(key)
            .map(|p| p.iter().take(self.req.evidence_per_answer).cloned().collect())
            .unwrap_or_default()
    }

    /// ChemicalDisease edges at the drug whose subtype is listed, strongest
    /// support first.
    fn edge_facts(&self, subtypes: &[String]) -> Vec<AnswerItem> {
        let mut keys: Vec<(usize, &EdgeKey)> = self
            .kb
            .graph
            .incident(&self.drug.id)
            .filter(|k| k.category == RelationCategory::ChemicalDisease && subtypes.contains(&k.subtype))
            .map(|k| (self.kb.graph.support(k).unwrap_or(0), k))
            .collect();
        keys.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        keys.into_iter()
            .map(|(_, k)| {
                let text = format!(
                    "{} {} {} ({})",
                    self.name(&k.src),
                    k.action.symbol(),
                    self.name(&k.dst),
                    k.subtype
                );
                AnswerItem::new(ItemKind::KgFact, text, self.refs(k))
            })
            .collect()
    }

    fn papers_mentioning_drug(&self) -> Vec<(&str, ProvenanceRef)> {
        self.kb
            .corpus
            .papers_mentioning(&self.drug.id)
            .filter_map(|p| {
                let first = p.sentences.iter().find(|s| s.mentions_entity(&self.drug.id))?;
                Some((p.paper_id(), first.provenance()))
            })
            .collect()
    }

    fn q1(&self) -> QuestionAnswer {
        let mut items = Vec::new();
        if !self.drug.fine_types.is_empty() {
            let classes: Vec<&str> = self.drug.fine_types.iter().map(String::as_str).collect();
            items.push(AnswerItem::new(
                ItemKind::MetadataFact,
                format!("Class: {}", classes.join(", ")),
                vec![],
            ));
        }
        let subtypes = self.env.templates.subtypes(1);
        items.extend(self.edge_facts(subtypes));
        QuestionAnswer::or_not_found(1, items, format!("ChemicalDisease edges with subtype in {{{}}}", subtypes.join(",")))
    }

    fn q2(&self) -> QuestionAnswer {
        let mut items: Vec<AnswerItem> = self
            .env
            .groundings
            .iter()
            .filter(|g| g.entity_id == self.drug.id)
            .map(|g| {
                let panel = g.marker.map_or_else(String::new, |m| format!(" panel {m}"));
                AnswerItem::new(
                    ItemKind::MetadataFact,
                    format!("Figure {}{} labels `{}`", g.figure_id, panel, g.label),
                    vec![],
                )
            })
            .collect();
        for s in self.kb.corpus.sentences() {
            if s.section == Section::Caption && s.mentions_entity(&self.drug.id) {
                items.push(AnswerItem::new(ItemKind::EvidenceSentence, s.text.clone(), vec![s.provenance()]));
            }
        }
        QuestionAnswer::or_not_found(2, items, "figure groundings and captions mentioning the drug")
    }

    fn q3(&self, subgraphs: &[(String, std::result::Result<crate::pathrank::ScoredSubgraph, PathError>)]) -> QuestionAnswer {
        let mut items = Vec::new();
        let mut failed = Vec::new();
        for (target, res) in subgraphs {
            match res {
                Ok(sg) => {
                    for p in sg.paths.iter().take(self.req.evidence_per_answer) {
                        let names: Vec<String> = p.nodes.iter().map(|n| self.name(n)).collect();
                        let refs: BTreeSet<ProvenanceRef> = p
                            .edges
                            .iter()
                            .flat_map(|e| sg.evidence.get(e).into_iter().flatten().cloned())
                            .collect();
                        items.push(AnswerItem::new(
                            ItemKind::SubgraphRef,
                            format!(
                                "{} (score {:.3})",
                                names.join(" - "),
                                crate::pathrank::score_to_f64(&p.score)
                            ),
                            refs.into_iter().take(self.req.evidence_per_answer).collect(),
                        ));
                    }
                }
                Err(_) => failed.push(target.as_str()),
            }
        }
        QuestionAnswer::or_not_found(
            3,
            items,
            format!("paths from {} to {{{}}}", self.drug.id, failed.join(",")),
        )
    }

    /// `template` with DRUGNAME replaced by the words of `alias`.
    fn instantiate(&self, template: &str, alias: &str, vocab: &TypeVocabulary) -> std::result::Result<MetaQuery, String> {
        let mut tokens = Vec::new();
        for word in template.split_whitespace() {
            if word == DRUG_SLOT {
                tokens.extend(tokens_of(alias).into_iter().map(MetaToken::Literal));
            } else {
                let q = parse_meta_query(word, vocab).map_err(|e| e.to_string())?;
                tokens.extend(q.tokens);
            }
        }
        if tokens.is_empty() {
            return Err("empty query".into());
        }
        Ok(MetaQuery { tokens })
    }

    fn templated(&self, n: u8, vocab: &TypeVocabulary) -> QuestionAnswer {
        let templates = self.env.templates.queries(n);
        if templates.is_empty() {
            return QuestionAnswer::new(n, vec![AnswerItem::not_found("no templates configured")]);
        }
        let mut hits = Vec::new();
        let mut failures = Vec::new();
        for t in templates {
            let aliases: Vec<&str> = if t.contains(DRUG_SLOT) {
                self.drug.aliases.iter().map(String::as_str).collect()
            } else {
                vec![""]
            };
            for alias in aliases {
                match self.instantiate(t, alias, vocab) {
                    Ok(mq) => hits.extend(match_meta_query_with(
                        &self.kb.corpus,
                        &mq,
                        self.req.evidence_per_answer,
                        Execution::Sequential,
                    )),
                    Err(e) => failures.push(format!("{t}: {e}")),
                }
            }
        }
        hits.sort_by(meta_order);
        let mut seen = BTreeSet::new();
        let items: Vec<AnswerItem> = hits
            .into_iter()
            .filter(|h| seen.insert(h.sentence.id()))
            .take(self.req.evidence_per_answer)
            .map(|h| AnswerItem::new(ItemKind::EvidenceSentence, h.sentence.text.clone(), vec![h.sentence.provenance()]))
            .collect();
        let mut query = templates.join(" | ");
        if !failures.is_empty() {
            query = format!("{query} ({})", failures.join("; "));
        }
        QuestionAnswer::or_not_found(n, items, query)
    }

    fn q5(&self) -> QuestionAnswer {
        let mut by_affiliation: BTreeMap<&str, Vec<ProvenanceRef>> = BTreeMap::new();
        for (paper, r) in self.papers_mentioning_drug() {
            let meta = &self.kb.corpus.paper(paper).expect("listed paper exists").meta;
            for a in &meta.affiliations {
                let refs = by_affiliation.entry(a.trim()).or_default();
                if !refs.contains(&r) {
                    refs.push(r.clone());
                }
            }
        }
        let items = by_affiliation
            .into_iter()
            .filter(|(a, _)| !a.is_empty())
            .map(|(a, refs)| AnswerItem::new(ItemKind::MetadataFact, a, refs))
            .collect();
        QuestionAnswer::or_not_found(5, items, "affiliations of papers mentioning the drug")
    }

    fn q9(&self) -> QuestionAnswer {
        let funded = |t: &str| {
            let l = t.to_lowercase();
            FUNDING_LEXICON.iter().any(|w| l.contains(w))
        };
        let mut items = Vec::new();
        for (paper, r) in self.papers_mentioning_drug() {
            let rec = self.kb.corpus.paper(paper).expect("listed paper exists");
            let mut seen = BTreeSet::new();
            for s in rec.sentences.iter().filter(|s| s.section == Section::Acknowledgements) {
                if funded(&s.text) {
                    seen.insert(s.text.trim().to_owned());
                    items.push(AnswerItem::new(ItemKind::EvidenceSentence, s.text.clone(), vec![s.provenance()]));
                }
            }
            for frag in split_sentences(&rec.meta.acknowledgements) {
                if funded(frag) && !seen.contains(frag) {
                    items.push(AnswerItem::new(ItemKind::MetadataFact, frag, vec![r.clone()]));
                }
            }
        }
        QuestionAnswer::or_not_found(9, items, format!("acknowledgements matching {{{}}}", FUNDING_LEXICON.join(",")))
    }

    fn q10(&self) -> QuestionAnswer {
        let subtypes = self.env.templates.subtypes(10);
        QuestionAnswer::or_not_found(
            10,
            self.edge_facts(subtypes),
            format!("ChemicalDisease edges with subtype in {{{}}}", subtypes.join(",")),
        )
    }

    fn q11(&self, answered: &[QuestionAnswer]) -> QuestionAnswer {
        let refs = answered
            .iter()
            .flat_map(|a| a.items.iter().flat_map(|i| i.evidence.iter()));
        QuestionAnswer::or_not_found(11, sources(&self.kb.corpus, refs, self.req.evidence_per_answer), "papers cited by the answers above")
    }
}

fn tokens_of(alias: &str) -> Vec<String> {
    alias
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(i) = rest.find(". ") {
        out.push(rest[..=i].trim());
        rest = &rest[i + 2..];
    }
    out.push(rest.trim());
    out.retain(|s| !s.is_empty());
    out
}

/// Papers ordered by how many of `refs` point into them, then by id. The
/// curated source is not a paper and is skipped.
fn sources<'a>(corpus: &Corpus, refs: impl Iterator<Item = &'a ProvenanceRef>, per_item: usize) -> Vec<AnswerItem> {
    let mut by_paper: BTreeMap<&str, BTreeSet<&ProvenanceRef>> = BTreeMap::new();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in refs.filter(|r| r.paper_id != CTD_SOURCE) {
        *counts.entry(&r.paper_id).or_default() += 1;
        by_paper.entry(&r.paper_id).or_default().insert(r);
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked
        .into_iter()
        .map(|(paper, n)| {
            let title = corpus.paper(paper).map_or("", |p| p.meta.title.as_str());
            AnswerItem::new(
                ItemKind::MetadataFact,
                format!("{paper}: {title} ({n} {})", if n == 1 { "pointer" } else { "pointers" }),
                by_paper[paper].iter().take(per_item).map(|r| (*r).clone()).collect(),
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetadataQuestion {
    Affiliations,
    Sources,
}

/// Questions 5 and 11 on their own. `Sources` here counts provenance over
/// every edge and event involving the drug.
pub fn answer_metadata_question(kb: &KnowledgeBase, drug: &str, which: MetadataQuestion) -> Result<QuestionAnswer> {
    let drug = kb
        .graph
        .entity(drug)
        .ok_or_else(|| ReportError::UnknownEntity(drug.to_owned()))?;
    let templates = ReportTemplates::default();
    let env = ReportEnv::new(&templates, "");
    let req = ReportRequest::new(drug.id.clone(), [drug.id.clone()]);
    let ctx = Ctx { kb, req: &req, env: &env, drug };
    Ok(match which {
        MetadataQuestion::Affiliations => ctx.q5(),
        MetadataQuestion::Sources => {
            let g = &kb.graph;
            let refs: Vec<&ProvenanceRef> = g
                .incident(&ctx.drug.id)
                .filter_map(|k| g.provenance(k))
                .chain(g.events().filter(|(k, _)| k.involves(&ctx.drug.id)).map(|(_, p)| p))
                .flatten()
                .collect();
            QuestionAnswer::or_not_found(
                11,
                sources(&kb.corpus, refs.into_iter(), req.evidence_per_answer),
                "provenance of facts involving the drug",
            )
        }
    })
}

/// Answers all eleven questions for `req.drug` against one snapshot.
pub fn generate_report(kb: &KnowledgeBase, req: &ReportRequest, env: &ReportEnv<'_>) -> Result<DrugReport> {
    req.validate(&kb.graph)?;
    let drug = kb.graph.entity(&req.drug).expect("validated");
    let ctx = Ctx { kb, req, env, drug };
    let vocab = TypeVocabulary::from_corpus(&kb.corpus);

    let targets: Vec<&String> = req.targets.iter().filter(|t| **t != req.drug).collect();
    let queries: Vec<PathQuery> = targets
        .iter()
        .map(|t| {
            let mut q = PathQuery::new(req.drug.clone(), (*t).clone())
                .max_hops(req.max_hops)
                .top_k(req.top_k)
                .mode(req.mode);
            q.directed = false;
            q
        })
        .collect();
    let results: Vec<_> = targets
        .iter()
        .map(|t| (*t).clone())
        .zip(connection_subgraphs(&kb.graph, &queries, env.exec))
        .collect();

    let mut answers = vec![ctx.q1(), ctx.q2(), ctx.q3(&results), ctx.templated(4, &vocab), ctx.q5()];
    answers.push(ctx.templated(6, &vocab));
    answers.push(ctx.templated(7, &vocab));
    answers.push(ctx.templated(8, &vocab));
    answers.push(ctx.q9());
    answers.push(ctx.q10());
    let q11 = ctx.q11(&answers);
    answers.push(q11);

    let subgraphs = results
        .iter()
        .map(|(target, res)| match res {
            Ok(sg) => TargetSubgraph {
                target: target.clone(),
                subgraph: Some(sg.view(&kb.graph)),
                error: None,
            },
            Err(e) => TargetSubgraph {
                target: target.clone(),
                subgraph: None,
                error: Some(e.code().to_owned()),
            },
        })
        .collect();
    Ok(DrugReport {
        request: req.clone(),
        drug_name: ctx.drug.name.clone(),
        generated_at: env.generated_at.clone(),
        answers,
        subgraphs,
    })
}

/// Sentence ids cited anywhere in the report, CTD pointers excluded.
pub fn cited_sentences(report: &DrugReport) -> BTreeSet<SentenceId> {
    report
        .all_refs()
        .into_iter()
        .filter(|r| r.paper_id != CTD_SOURCE)
        .map(|r| SentenceId::new(r.paper_id, r.sentence_idx))
        .collect()
}
