//! Brute-force path oracle: every ordered node sequence, every choice of
//! parallel edge per hop.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use itertools::Itertools;
use litkg_core::graph::{Action, AssertionEdge, CoarseType, EdgeKey, EntityRecord, Graph, ProvenanceRef, RelationCategory};
use litkg_core::pathrank::{connection_subgraph_with, enumerate_paths_with, PathError, PathQuery, ScoringMode};
use litkg_core::Execution;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Spec {
    nodes: usize,
    edges: Vec<(usize, usize, bool, u8)>,
}

fn id(i: usize) -> String {
    format!("LOCAL:n{i}")
}

fn build(spec: &Spec) -> Graph {
    let mut g = Graph::default();
    for i in 0..spec.nodes {
        g.upsert_entity(EntityRecord::new(id(i), format!("n{i}"), CoarseType::Gene)).unwrap();
    }
    for &(a, b, alt, papers) in &spec.edges {
        let subtype = if alt { "marker/mechanism" } else { "therapeutic" };
        let refs = (0..4).filter(|p| papers & (1 << p) != 0).map(|p| ProvenanceRef::new(format!("p{p}"), 0));
        g.add_assertion(AssertionEdge::new(
            EdgeKey::new(id(a), id(b), RelationCategory::GeneDisease, subtype, Action::Affect),
            refs,
        ))
        .unwrap();
    }
    g
}

fn spec() -> impl Strategy<Value = Spec> {
    (2usize..=6).prop_flat_map(|n| {
        let edge = (0..n, 0..n, any::<bool>(), 1u8..16).prop_filter("no loops", |(a, b, _, _)| a != b);
        proptest::collection::vec(edge, 0..14).prop_map(move |edges| Spec { nodes: n, edges })
    })
}

/// Exact score as a reduced (numerator, denominator) pair.
fn oracle_score(supports: &[u64], mode: ScoringMode) -> (u64, u64) {
    let sum: u64 = supports.iter().sum();
    match mode {
        ScoringMode::SumSupport => (sum, 1),
        ScoringMode::MinSupport => (*supports.iter().min().unwrap(), 1),
        ScoringMode::AvgSupport => (sum, supports.len() as u64),
    }
}

fn cmp_frac(a: (u64, u64), b: (u64, u64)) -> Ordering {
    (a.0 as u128 * b.1 as u128).cmp(&(b.0 as u128 * a.1 as u128))
}

struct OraclePath {
    nodes: Vec<String>,
    edges: Vec<EdgeKey>,
    score: (u64, u64),
}

fn oracle(g: &Graph, q: &PathQuery) -> Vec<OraclePath> {
    let all: Vec<String> = g.entity_ids().map(str::to_owned).collect();
    let inner: Vec<&String> = all.iter().filter(|n| **n != q.src && **n != q.dst).collect();
    let mut out = Vec::new();
    for k in 0..q.max_hops {
        for mid in inner.iter().permutations(k) {
            let mut seq = vec![q.src.clone()];
            seq.extend(mid.iter().map(|s| (**s).clone()));
            seq.push(q.dst.clone());
            let hops: Vec<Vec<EdgeKey>> = seq
                .windows(2)
                .map(|w| {
                    g.edges()
                        .map(|(k, _)| k)
                        .filter(|e| {
                            (e.src == w[0] && e.dst == w[1]) || (!q.directed && e.src == w[1] && e.dst == w[0])
                        })
                        .cloned()
                        .collect()
                })
                .collect();
            for choice in hops.iter().map(|h| h.iter()).multi_cartesian_product() {
                let edges: Vec<EdgeKey> = choice.into_iter().cloned().collect();
                let supports: Vec<u64> = edges.iter().map(|e| g.support(e).unwrap() as u64).collect();
                out.push(OraclePath {
                    nodes: seq.clone(),
                    score: oracle_score(&supports, q.mode),
                    edges,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        cmp_frac(b.score, a.score)
            .then(a.edges.len().cmp(&b.edges.len()))
            .then_with(|| a.nodes.cmp(&b.nodes))
            .then_with(|| a.edges.cmp(&b.edges))
    });
    out
}

fn mode() -> impl Strategy<Value = ScoringMode> {
    prop_oneof![
        Just(ScoringMode::SumSupport),
        Just(ScoringMode::AvgSupport),
        Just(ScoringMode::MinSupport)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ranking_matches_oracle(s in spec(), hops in 1usize..=4, top_k in 1usize..8, m in mode(), directed in any::<bool>()) {
        let g = build(&s);
        let q = PathQuery::new(id(0), id(1)).max_hops(hops).top_k(top_k).mode(m).directed(directed);
        let expected = oracle(&g, &q);
        match connection_subgraph_with(&g, &q, Execution::Sequential) {
            Err(PathError::NoPathFound { .. }) => prop_assert!(expected.is_empty()),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
            Ok(sg) => {
                let expected = &expected[..expected.len().min(top_k)];
                prop_assert_eq!(sg.paths.len(), expected.len());
                for (got, want) in sg.paths.iter().zip(expected) {
                    prop_assert_eq!(&got.nodes, &want.nodes);
                    prop_assert_eq!(&got.edges, &want.edges);
                    prop_assert_eq!((*got.score.numer(), *got.score.denom()), {
                        let g = num_integer_gcd(want.score.0, want.score.1);
                        (want.score.0 / g, want.score.1 / g)
                    });
                }
                // Salience: summed scores of the ranked paths through each edge.
                let mut sal: BTreeMap<EdgeKey, (u64, u64)> = BTreeMap::new();
                for p in expected {
                    for e in &p.edges {
                        let cur = sal.entry(e.clone()).or_insert((0, 1));
                        *cur = (cur.0 * p.score.1 + p.score.0 * cur.1, cur.1 * p.score.1);
                    }
                }
                prop_assert_eq!(sg.edge_salience.len(), sal.len());
                for (e, want) in sal {
                    let got = sg.edge_salience[&e];
                    prop_assert_eq!(cmp_frac((*got.numer(), *got.denom()), want), Ordering::Equal);
                }
            }
        }
    }

    #[test]
    fn parallel_matches_sequential(s in spec(), hops in 1usize..=4, m in mode()) {
        let g = build(&s);
        let q = PathQuery::new(id(0), id(1)).max_hops(hops).mode(m);
        let a = connection_subgraph_with(&g, &q, Execution::Sequential);
        let b = connection_subgraph_with(&g, &q, Execution::Parallel);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn raising_the_hop_limit_only_adds_paths(s in spec(), hops in 1usize..4) {
        let g = build(&s);
        let small = enumerate_paths_with(&g, &PathQuery::new(id(0), id(1)).max_hops(hops), Execution::Sequential).unwrap();
        let large = enumerate_paths_with(&g, &PathQuery::new(id(0), id(1)).max_hops(hops + 1), Execution::Sequential).unwrap();
        for p in &small.paths {
            prop_assert!(large.paths.iter().any(|l| l.nodes == p.nodes && l.edges == p.edges));
        }
    }

    #[test]
    fn paths_are_simple_and_bounded(s in spec(), hops in 1usize..=4, directed in any::<bool>()) {
        let g = build(&s);
        let q = PathQuery::new(id(0), id(1)).max_hops(hops).directed(directed);
        for p in enumerate_paths_with(&g, &q, Execution::Sequential).unwrap().paths {
            prop_assert!(p.len() <= hops && !p.is_empty());
            prop_assert_eq!(p.nodes.first().unwrap(), &id(0));
            prop_assert_eq!(p.nodes.last().unwrap(), &id(1));
            prop_assert_eq!(p.nodes.iter().collect::<std::collections::BTreeSet<_>>().len(), p.nodes.len());
            for (w, e) in p.nodes.windows(2).zip(&p.edges) {
                let forward = e.src == w[0] && e.dst == w[1];
                prop_assert!(forward || (!directed && e.src == w[1] && e.dst == w[0]));
            }
        }
    }

    #[test]
    fn budget_truncates_without_error(s in spec(), budget in 1usize..4) {
        let g = build(&s);
        let full = enumerate_paths_with(&g, &PathQuery::new(id(0), id(1)).max_hops(4), Execution::Sequential).unwrap();
        let mut q = PathQuery::new(id(0), id(1)).max_hops(4);
        q.budget = budget;
        let cut = enumerate_paths_with(&g, &q, Execution::Parallel).unwrap();
        prop_assert!(cut.paths.len() <= budget);
        prop_assert_eq!(cut.truncated, full.paths.len() > budget);
    }
}

fn num_integer_gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a.max(1) } else { num_integer_gcd(b, a % b) }
}

#[test]
fn same_endpoint_and_unknown_entity_are_rejected() {
    let g = build(&Spec { nodes: 2, edges: vec![(0, 1, false, 1)] });
    assert_eq!(
        enumerate_paths_with(&g, &PathQuery::new(id(0), id(0)), Execution::Sequential).unwrap_err().code(),
        "InvalidQuery"
    );
    assert_eq!(
        enumerate_paths_with(&g, &PathQuery::new(id(0), "LOCAL:zz"), Execution::Sequential).unwrap_err().code(),
        "UnknownEntity"
    );
    assert_eq!(
        enumerate_paths_with(&g, &PathQuery::new(id(0), id(1)).max_hops(5), Execution::Sequential).unwrap_err().code(),
        "InvalidQuery"
    );
}
