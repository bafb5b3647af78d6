mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use litkg_core::corpus::{Corpus, PaperMeta, PaperRecord, Section, SentenceId, SentenceRecord};
use litkg_core::evidence::{
    rank_evidence, sidecar_key, ContextIndex, EmbeddingProvider, HashingProvider, SidecarProvider,
};
use litkg_core::Execution;
use proptest::prelude::*;

const EPS: f64 = 1e-9;

/// Independent feature hashing: FNV-1a over lower-cased alphanumeric runs.
fn naive_embed(text: &str, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    let lower = text.to_lowercase();
    for tok in lower.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
        let mut h: u64 = 14695981039346656037;
        for b in tok.bytes() {
            h = (h ^ b as u64).wrapping_mul(1099511628211);
        }
        let sign = if h & (1 << 63) != 0 { -1.0 } else { 1.0 };
        v[(h % dim as u64) as usize] += sign;
    }
    unit(v)
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        v[0] = 1.0;
    } else {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

fn naive_scores(corpus: &Corpus, query: &str, dim: usize) -> BTreeMap<SentenceId, f64> {
    let q = naive_embed(query, dim);
    let mut out = BTreeMap::new();
    for p in corpus.papers() {
        let own: Vec<Vec<f64>> = p.sentences.iter().map(|s| naive_embed(&s.text, dim)).collect();
        for i in 0..own.len() {
            let mut parts = vec![(0.5, &own[i])];
            if i > 0 {
                parts.push((0.25, &own[i - 1]));
            }
            if i + 1 < own.len() {
                parts.push((0.25, &own[i + 1]));
            }
            let total: f64 = parts.iter().map(|(w, _)| w).sum();
            let mut ctx = vec![0.0; dim];
            for (w, v) in parts {
                for (c, x) in ctx.iter_mut().zip(v) {
                    *c += w / total * x;
                }
            }
            let ctx = unit(ctx);
            let cos: f64 = ctx.iter().zip(&q).map(|(a, b)| a * b).sum();
            out.insert(SentenceId::new(p.paper_id(), i as u32), cos.clamp(-1.0, 1.0));
        }
    }
    out
}

fn check_against_oracle(corpus: &Corpus, query: &str, top_n: usize, dim: usize) -> Result<(), TestCaseError> {
    let provider = HashingProvider::new(dim);
    let hits = rank_evidence(&provider, corpus, query, None, top_n, Execution::Sequential).unwrap();
    let oracle = naive_scores(corpus, query, dim);
    prop_assert_eq!(hits.len(), top_n.min(oracle.len()));
    for h in &hits {
        let want = oracle[&h.sentence.id()];
        prop_assert!((h.similarity - want).abs() < EPS, "{} vs {}", h.similarity, want);
    }
    for w in hits.windows(2) {
        prop_assert!(w[0].similarity >= w[1].similarity);
        if w[0].similarity == w[1].similarity {
            prop_assert!(w[0].sentence.id() < w[1].sentence.id());
        }
    }
    // Nothing left out scores clearly higher than the last hit.
    let mut sorted: Vec<f64> = oracle.values().copied().collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    for (h, want) in hits.iter().zip(&sorted) {
        prop_assert!((h.similarity - want).abs() < EPS);
    }
    Ok(())
}

fn toy_corpus(papers: &[Vec<String>]) -> Corpus {
    let mut c = Corpus::new();
    for (pi, texts) in papers.iter().enumerate() {
        let id = format!("p{pi:02}");
        c.insert(PaperRecord {
            meta: PaperMeta {
                paper_id: id.clone(),
                title: String::new(),
                authors: vec![],
                affiliations: vec![],
                acknowledgements: String::new(),
                pub_date: "2020-01-01".into(),
                peer_reviewed: false,
            },
            content_hash: String::new(),
            sentences: texts
                .iter()
                .enumerate()
                .map(|(i, t)| SentenceRecord {
                    paper_id: id.clone(),
                    sentence_idx: i as u32,
                    section: Section::Body,
                    text: t.clone(),
                    mentions: vec![],
                })
                .collect(),
        });
    }
    c
}

fn sentence() -> impl Strategy<Value = String> {
    let word = prop::sample::select(vec!["losartan", "ACE2", "binds", "the", "receptor", "in", "mice", "TP53", "!", "viral"]);
    prop::collection::vec(word, 0..7).prop_map(|w| w.join(" "))
}

#[test]
fn fixture_corpus_matches_oracle() {
    let kb = fixture_kb();
    for q in ["losartan reduces p53 expression", "amodiaquine antiviral activity in hamsters", "funding"] {
        check_against_oracle(&kb.corpus, q, 15, 256).unwrap();
    }
}

#[test]
fn index_agrees_with_direct_ranking() {
    let kb = fixture_kb();
    let p = HashingProvider::default();
    let idx = ContextIndex::build(&p, &kb.corpus, Execution::Parallel).unwrap();
    assert_eq!(idx.len(), kb.corpus.sentence_count());
    let cands: BTreeSet<SentenceId> = kb.corpus.sentences().step_by(3).map(|s| s.id()).collect();
    for c in [None, Some(&cands)] {
        let a = idx.rank(&p, &kb.corpus, "ACE2 receptor binding", c, 10).unwrap();
        let b = rank_evidence(&p, &kb.corpus, "ACE2 receptor binding", c, 10, Execution::Sequential).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.sentence.id(), y.sentence.id());
            assert!((x.similarity - y.similarity).abs() < EPS);
        }
        if let Some(c) = c {
            assert!(a.iter().all(|h| c.contains(&h.sentence.id())));
        }
    }
}

#[test]
fn sidecar_with_hashing_vectors_ranks_the_same() {
    let kb = fixture_kb();
    let p = HashingProvider::default();
    let query = "losartan lowers blood pressure";
    let mut lines = String::from("# test sidecar\n");
    for text in kb.corpus.sentences().map(|s| s.text.as_str()).chain([query]) {
        let v = p.embed(text).unwrap();
        let vals: Vec<String> = v.values().iter().map(|x| format!("{x:e}")).collect();
        lines.push_str(&format!("{}\t{}\n", sidecar_key(text), vals.join(",")));
    }
    let side = SidecarProvider::parse("sidecar", &lines).unwrap();
    let a = rank_evidence(&side, &kb.corpus, query, None, 8, Execution::Sequential).unwrap();
    let b = rank_evidence(&p, &kb.corpus, query, None, 8, Execution::Sequential).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x.similarity - y.similarity).abs() < EPS);
    }
    let missing = rank_evidence(&side, &kb.corpus, "never embedded", None, 8, Execution::Sequential).unwrap_err();
    assert_eq!(missing.code(), "ProviderError");
}

#[test]
fn bad_requests_are_rejected() {
    let kb = fixture_kb();
    let p = HashingProvider::default();
    let e = |q: &str, n: usize, c: Option<&BTreeSet<SentenceId>>| {
        rank_evidence(&p, &kb.corpus, q, c, n, Execution::Sequential).unwrap_err().code()
    };
    assert_eq!(e("  ", 5, None), "EmptyQuery");
    assert_eq!(e("losartan", 0, None), "InvalidQuery");
    let bogus: BTreeSet<_> = [SentenceId::new("doc_losartan", 9999)].into();
    assert_eq!(e("losartan", 5, Some(&bogus)), "UnknownSentence");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn toy_corpora_match_oracle(
        papers in prop::collection::vec(prop::collection::vec(sentence(), 1..5), 1..4),
        query in sentence().prop_filter("non-empty", |s| !s.trim().is_empty()),
        top_n in 1usize..12,
        dim in prop::sample::select(vec![4usize, 16, 256]),
    ) {
        let c = toy_corpus(&papers);
        check_against_oracle(&c, &query, top_n, dim)?;
    }

    #[test]
    fn ranking_is_execution_independent(papers in prop::collection::vec(prop::collection::vec(sentence(), 1..5), 1..4), query in "[a-z]{1,8}") {
        let c = toy_corpus(&papers);
        let p = HashingProvider::new(16);
        let a = rank_evidence(&p, &c, &query, None, 5, Execution::Sequential).unwrap();
        let b = rank_evidence(&p, &c, &query, None, 5, Execution::Parallel).unwrap();
        prop_assert_eq!(a, b);
    }
}
