//! Support-ranked connection paths between two entities.
//!
//! Paths are simple (no repeated node), bounded by a hop limit, and scored
//! from the paper support of their edges. Each edge of the ranked paths gets
//! a salience equal to the summed scores of the ranked paths through it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{self, Execution};
use crate::graph::{distinct_papers, EdgeKey, Graph, ProvenanceRef, RelationCategory};

/// Exact path score. Averages are kept as fractions so sums of scores are
/// exact.
pub type Score = Ratio<u64>;

pub const DEFAULT_MAX_HOPS: usize = 3;
pub const DEFAULT_TOP_K: usize = 20;
pub const DEFAULT_BUDGET: usize = 100_000;
pub const MAX_HOPS_LIMIT: usize = 4;
const EVIDENCE_PER_EDGE: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("no path between `{src}` and `{dst}` within {max_hops} hops")]
    NoPathFound {
        src: String,
        dst: String,
        max_hops: usize,
    },
    #[error("invalid path query: {0}")]
    InvalidQuery(String),
}

impl PathError {
    pub fn code(&self) -> &'static str {
        match self {
            PathError::UnknownEntity(_) => "UnknownEntity",
            PathError::UnknownEdge(_) => "UnknownEdge",
            PathError::NoPathFound { .. } => "NoPathFound",
            PathError::InvalidQuery(_) => "InvalidQuery",
        }
    }
}

pub type Result<T, E = PathError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScoringMode {
    SumSupport,
    #[default]
    AvgSupport,
    MinSupport,
}

impl ScoringMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoringMode::SumSupport => "sum",
            ScoringMode::AvgSupport => "avg",
            ScoringMode::MinSupport => "min",
        }
    }
}

impl FromStr for ScoringMode {
    type Err = PathError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sum" | "sumsupport" => Ok(ScoringMode::SumSupport),
            "avg" | "avgsupport" | "average" => Ok(ScoringMode::AvgSupport),
            "min" | "minsupport" => Ok(ScoringMode::MinSupport),
            other => Err(PathError::InvalidQuery(format!("unknown scoring mode `{other}`"))),
        }
    }
}

impl fmt::Display for ScoringMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathQuery {
    pub src: String,
    pub dst: String,
    pub max_hops: usize,
    pub top_k: usize,
    pub mode: ScoringMode,
    pub directed: bool,
    pub min_edge_support: usize,
    pub categories: Option<BTreeSet<RelationCategory>>,
    /// Enumeration stops once this many candidate paths have been found.
    pub budget: usize,
}

impl PathQuery {
    pub fn new(src: impl Into<String>, dst: impl Into<String>) -> Self {
        Self {
            src: src.into(),
            dst: dst.into(),
            max_hops: DEFAULT_MAX_HOPS,
            top_k: DEFAULT_TOP_K,
            mode: ScoringMode::default(),
            directed: false,
            min_edge_support: 1,
            categories: None,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn max_hops(mut self, hops: usize) -> Self {
        self.max_hops = hops;
        self
    }

    pub fn top_k(mut self, k: usize) -> Self {
        self.top_k = k;
        self
    }

    pub fn mode(mut self, mode: ScoringMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn directed(mut self, directed: bool) -> Self {
        self.directed = directed;
        self
    }

    fn validate(&self, graph: &Graph) -> Result<()> {
        for id in [&self.src, &self.dst] {
            if !graph.contains_entity(id) {
                return Err(PathError::UnknownEntity(id.clone()));
            }
        }
        if self.src == self.dst {
            return Err(PathError::InvalidQuery("source and target are the same entity".into()));
        }
        if !(1..=MAX_HOPS_LIMIT).contains(&self.max_hops) {
            return Err(PathError::InvalidQuery(format!(
                "max_hops must be in 1..={MAX_HOPS_LIMIT}, got {}",
                self.max_hops
            )));
        }
        if self.top_k == 0 {
            return Err(PathError::InvalidQuery("top_k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Alternating node/edge sequence. `edges[i]` joins `nodes[i]` and
/// `nodes[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeKey>,
    pub score: Score,
}

impl Path {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.nodes.join(" - "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub paths: Vec<Path>,
    /// True when the candidate budget cut enumeration short.
    pub truncated: bool,
}

/// Every simple path of at most `max_hops` edges from `src` to `dst`.
pub fn enumerate_paths(graph: &Graph, q: &PathQuery) -> Result<Enumeration> {
    enumerate_paths_with(graph, q, Execution::default())
}

/// As [`enumerate_paths`]; first-hop branches are explored in parallel when
/// `exec` allows. Output order is the same either way.
pub fn enumerate_paths_with(graph: &Graph, q: &PathQuery, exec: Execution) -> Result<Enumeration> {
    q.validate(graph)?;
    let walker = Walker { graph, q };
    let first_hops = walker.steps(&q.src);
    let branches = exec::map(exec, &first_hops, |(edge, next)| {
        let mut nodes = vec![q.src.as_str(), *next];
        let mut edges = vec![*edge];
        let mut out = Vec::new();
        let mut truncated = false;
        walker.dfs(&mut nodes, &mut edges, &mut out, &mut truncated);
        (out, truncated)
    });
    let mut paths = Vec::new();
    let mut truncated = false;
    for (found, cut) in branches {
        truncated |= cut;
        paths.extend(found);
    }
    if paths.len() > q.budget {
        paths.truncate(q.budget);
        truncated = true;
    }
    Ok(Enumeration { paths, truncated })
}

struct Walker<'a> {
    graph: &'a Graph,
    q: &'a PathQuery,
}

impl<'a> Walker<'a> {
    fn steps(&self, node: &str) -> Vec<(&'a EdgeKey, &'a str)> {
        self.graph
            .incident(node)
            .filter(|k| self.passes(k))
            .filter_map(|k| {
                let next = if self.q.directed {
                    (k.src == node).then_some(k.dst.as_str())
                } else {
                    k.other(node)
                }?;
                (next != node).then_some((k, next))
            })
            .collect()
    }

    fn passes(&self, key: &EdgeKey) -> bool {
        if let Some(cats) = &self.q.categories {
            if !cats.contains(&key.category) {
                return false;
            }
        }
        self.q.min_edge_support <= 1
            || self
                .graph
                .provenance(key)
                .is_some_and(|p| distinct_papers(p) >= self.q.min_edge_support)
    }

    fn dfs(
        &self,
        nodes: &mut Vec<&'a str>,
        edges: &mut Vec<&'a EdgeKey>,
        out: &mut Vec<Path>,
        truncated: &mut bool,
    ) {
        if *truncated {
            return;
        }
        let here = *nodes.last().expect("path has a head");
        if here == self.q.dst {
            if out.len() >= self.q.budget {
                *truncated = true;
                return;
            }
            out.push(Path {
                nodes: nodes.iter().map(|s| (*s).to_owned()).collect(),
                edges: edges.iter().map(|k| (*k).clone()).collect(),
                score: Score::from_integer(0),
            });
            return;
        }
        if edges.len() >= self.q.max_hops {
            return;
        }
        for key in self.graph.incident(here) {
            if !self.passes(key) {
                continue;
            }
            let next = if self.q.directed {
                if key.src != here {
                    continue;
                }
                key.dst.as_str()
            } else {
                match key.other(here) {
                    Some(n) => n,
                    None => continue,
                }
            };
            if nodes.contains(&next) {
                continue;
            }
            nodes.push(next);
            edges.push(key);
            self.dfs(nodes, edges, out, truncated);
            nodes.pop();
            edges.pop();
        }
    }
}

/// Aggregates the support of a path's edges.
pub fn score_path(graph: &Graph, path: &Path, mode: ScoringMode) -> Result<Score> {
    let supports = path
        .edges
        .iter()
        .map(|k| {
            graph
                .support(k)
                .map(|s| s as u64)
                .map_err(|_| PathError::UnknownEdge(k.to_string()))
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(score_supports(&supports, mode))
}

/// Score of a support sequence. An empty sequence scores zero.
pub fn score_supports(supports: &[u64], mode: ScoringMode) -> Score {
    if supports.is_empty() {
        return Score::from_integer(0);
    }
    let sum: u64 = supports.iter().sum();
    match mode {
        ScoringMode::SumSupport => Score::from_integer(sum),
        ScoringMode::AvgSupport => Score::new(sum, supports.len() as u64),
        ScoringMode::MinSupport => Score::from_integer(*supports.iter().min().unwrap_or(&0)),
    }
}

/// Total ranking order: higher score, then fewer hops, then node-id
/// sequence, then edge-key sequence.
pub fn rank_order(a: &Path, b: &Path) -> std::cmp::Ordering {
    b.score
        .cmp(&a.score)
        .then(a.len().cmp(&b.len()))
        .then_with(|| a.nodes.cmp(&b.nodes))
        .then_with(|| a.edges.cmp(&b.edges))
}

pub fn rank_paths(mut paths: Vec<Path>, top_k: usize) -> Vec<Path> {
    paths.sort_by(rank_order);
    paths.truncate(top_k);
    paths
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoredSubgraph {
    pub src: String,
    pub dst: String,
    pub mode: ScoringMode,
    pub paths: Vec<Path>,
    pub edge_salience: BTreeMap<EdgeKey, Score>,
    pub nodes: BTreeSet<String>,
    /// Up to three references per edge, in `(paper_id, sentence_idx)` order.
    pub evidence: BTreeMap<EdgeKey, Vec<ProvenanceRef>>,
    pub truncated: bool,
}

/// Enumerates, scores and ranks paths, then derives edge salience and
/// per-edge evidence from the ranked paths.
pub fn connection_subgraph(graph: &Graph, q: &PathQuery) -> Result<ScoredSubgraph> {
    connection_subgraph_with(graph, q, Execution::default())
}

pub fn connection_subgraph_with(graph: &Graph, q: &PathQuery, exec: Execution) -> Result<ScoredSubgraph> {
    let Enumeration { paths, truncated } = enumerate_paths_with(graph, q, exec)?;
    if paths.is_empty() {
        return Err(PathError::NoPathFound {
            src: q.src.clone(),
            dst: q.dst.clone(),
            max_hops: q.max_hops,
        });
    }
    let scored = exec::map(exec, &paths, |p| score_path(graph, p, q.mode))
        .into_iter()
        .zip(paths)
        .map(|(score, mut p)| {
            p.score = score?;
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    let ranked = rank_paths(scored, q.top_k);

    let mut edge_salience: BTreeMap<EdgeKey, Score> = BTreeMap::new();
    let mut nodes = BTreeSet::new();
    for p in &ranked {
        nodes.extend(p.nodes.iter().cloned());
        for e in &p.edges {
            *edge_salience.entry(e.clone()).or_insert_with(|| Score::from_integer(0)) += p.score;
        }
    }
    let evidence = edge_salience
        .keys()
        .map(|k| {
            let refs = graph
                .provenance(k)
                .map(|p| p.iter().take(EVIDENCE_PER_EDGE).cloned().collect())
                .unwrap_or_default();
            (k.clone(), refs)
        })
        .collect();
    Ok(ScoredSubgraph {
        src: q.src.clone(),
        dst: q.dst.clone(),
        mode: q.mode,
        paths: ranked,
        edge_salience,
        nodes,
        evidence,
        truncated,
    })
}

/// Runs several connection queries, one per worker when parallel.
pub fn connection_subgraphs(
    graph: &Graph,
    queries: &[PathQuery],
    exec: Execution,
) -> Vec<Result<ScoredSubgraph>> {
    exec::map(exec, queries, |q| connection_subgraph_with(graph, q, Execution::Sequential))
}

pub fn score_to_f64(s: &Score) -> f64 {
    *s.numer() as f64 / *s.denom() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathView {
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeKey>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeView {
    pub edge: EdgeKey,
    pub support: usize,
    pub salience: f64,
    pub evidence: Vec<ProvenanceRef>,
}

/// Serializable form of a [`ScoredSubgraph`] with scores as floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphView {
    pub src: String,
    pub dst: String,
    pub mode: ScoringMode,
    pub truncated: bool,
    pub nodes: Vec<String>,
    pub paths: Vec<PathView>,
    pub edges: Vec<EdgeView>,
}

impl ScoredSubgraph {
    pub fn view(&self, graph: &Graph) -> SubgraphView {
        SubgraphView {
            src: self.src.clone(),
            dst: self.dst.clone(),
            mode: self.mode,
            truncated: self.truncated,
            nodes: self.nodes.iter().cloned().collect(),
            paths: self
                .paths
                .iter()
                .map(|p| PathView {
                    nodes: p.nodes.clone(),
                    edges: p.edges.clone(),
                    score: score_to_f64(&p.score),
                })
                .collect(),
            edges: self
                .edge_salience
                .iter()
                .map(|(k, s)| EdgeView {
                    edge: k.clone(),
                    support: graph.support(k).unwrap_or(0),
                    salience: score_to_f64(s),
                    evidence: self.evidence.get(k).cloned().unwrap_or_default(),
                })
                .collect(),
        }
    }
}
