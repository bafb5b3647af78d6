//! Facet counts and action heatmaps for linked views.
//!
//! Every edge and every event is one assertion. A [`ConstraintSet`] keeps
//! the assertions matching all of its constraints; facet counts and heatmap
//! cells are computed over what remains.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Action, CoarseType, Graph, ProvenanceRef, RelationCategory};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FacetError {
    #[error("unknown facet `{0}`")]
    UnknownFacet(String),
    #[error("constraint `{0}` is not of the form facet:value")]
    InvalidConstraint(String),
}

impl FacetError {
    pub fn code(&self) -> &'static str {
        match self {
            FacetError::UnknownFacet(_) => "UnknownFacet",
            FacetError::InvalidConstraint(_) => "InvalidConstraint",
        }
    }
}

pub type Result<T, E = FacetError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FacetKind {
    EntityName,
    CoarseType,
    FineType,
    RelationSubtype,
    EventType,
    Action,
    PaperId,
}

impl FacetKind {
    pub const ALL: [FacetKind; 7] = [
        FacetKind::EntityName,
        FacetKind::CoarseType,
        FacetKind::FineType,
        FacetKind::RelationSubtype,
        FacetKind::EventType,
        FacetKind::Action,
        FacetKind::PaperId,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FacetKind::EntityName => "EntityName",
            FacetKind::CoarseType => "CoarseType",
            FacetKind::FineType => "FineType",
            FacetKind::RelationSubtype => "RelationSubtype",
            FacetKind::EventType => "EventType",
            FacetKind::Action => "Action",
            FacetKind::PaperId => "PaperId",
        }
    }
}

impl fmt::Display for FacetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Accepts `EntityName`, `entity_name`, `entityname` and so on.
impl FromStr for FacetKind {
    type Err = FacetError;

    fn from_str(s: &str) -> Result<Self> {
        let folded: String = s
            .chars()
            .filter(|c| *c != '_' && *c != '-')
            .collect::<String>()
            .to_ascii_lowercase();
        FacetKind::ALL
            .into_iter()
            .find(|k| k.as_str().to_ascii_lowercase() == folded)
            .ok_or_else(|| FacetError::UnknownFacet(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub facet: FacetKind,
    pub value: String,
}

impl Constraint {
    pub fn new(facet: FacetKind, value: impl Into<String>) -> Self {
        Self {
            facet,
            value: value.into(),
        }
    }
}

/// `facet:value`, splitting at the first colon.
impl FromStr for Constraint {
    type Err = FacetError;

    fn from_str(s: &str) -> Result<Self> {
        let (facet, value) = s
            .split_once(':')
            .ok_or_else(|| FacetError::InvalidConstraint(s.to_owned()))?;
        if value.trim().is_empty() {
            return Err(FacetError::InvalidConstraint(s.to_owned()));
        }
        Ok(Constraint::new(facet.trim().parse()?, value.trim()))
    }
}

/// Conjunction of constraints; duplicates collapse.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet(BTreeSet<Constraint>);

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, c: Constraint) -> Self {
        self.0.insert(c);
        self
    }

    pub fn insert(&mut self, c: Constraint) -> bool {
        self.0.insert(c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Constraint> + '_ {
        self.0.iter()
    }

    /// Parses wire-form constraints (`facet:value` strings).
    pub fn parse_all<I, S>(items: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        items
            .into_iter()
            .map(|s| s.as_ref().parse())
            .collect::<Result<BTreeSet<_>>>()
            .map(ConstraintSet)
    }
}

impl FromIterator<Constraint> for ConstraintSet {
    fn from_iter<T: IntoIterator<Item = Constraint>>(iter: T) -> Self {
        ConstraintSet(iter.into_iter().collect())
    }
}

/// Facet values of one assertion.
#[derive(Debug, Default)]
struct Terms {
    values: BTreeMap<FacetKind, BTreeSet<String>>,
    /// Entity names plus aliases and ids, lower-cased, for constraint tests.
    entity_keys: BTreeSet<String>,
}

impl Terms {
    fn add(&mut self, kind: FacetKind, v: impl Into<String>) {
        self.values.entry(kind).or_default().insert(v.into());
    }

    fn add_entity(&mut self, graph: &Graph, id: &str) {
        let Some(e) = graph.entity(id) else { return };
        self.add(FacetKind::EntityName, e.name.clone());
        self.add(FacetKind::CoarseType, e.coarse_type.as_str());
        for f in &e.fine_types {
            self.add(FacetKind::FineType, f.clone());
        }
        self.entity_keys.insert(e.id.to_lowercase());
        self.entity_keys.extend(e.aliases.iter().map(|a| a.to_lowercase()));
    }

    fn add_papers<'a>(&mut self, prov: impl IntoIterator<Item = &'a ProvenanceRef>) {
        for r in prov {
            self.add(FacetKind::PaperId, r.paper_id.clone());
        }
    }

    fn satisfies(&self, c: &Constraint) -> bool {
        let v = c.value.to_lowercase();
        match c.facet {
            FacetKind::EntityName => self.entity_keys.contains(&v),
            FacetKind::Action => {
                let wanted = Action::parse(&c.value).map(Action::as_str);
                self.values
                    .get(&FacetKind::Action)
                    .is_some_and(|s| s.iter().any(|a| Some(a.as_str()) == wanted))
            }
            FacetKind::PaperId => self
                .values
                .get(&FacetKind::PaperId)
                .is_some_and(|s| s.contains(&c.value)),
            kind => self
                .values
                .get(&kind)
                .is_some_and(|s| s.iter().any(|t| t.to_lowercase() == v)),
        }
    }
}

fn assertions(graph: &Graph) -> Vec<Terms> {
    let mut out = Vec::with_capacity(graph.edge_count() + graph.event_count());
    for (key, prov) in graph.edges() {
        let mut t = Terms::default();
        t.add_entity(graph, &key.src);
        t.add_entity(graph, &key.dst);
        let kind = if key.category == RelationCategory::Event {
            FacetKind::EventType
        } else {
            FacetKind::RelationSubtype
        };
        t.add(kind, key.subtype.clone());
        t.add(FacetKind::Action, key.action.as_str());
        t.add_papers(prov);
        out.push(t);
    }
    for (key, prov) in graph.events() {
        let mut t = Terms::default();
        for id in key.roles.values() {
            t.add_entity(graph, id);
        }
        t.add(FacetKind::EventType, key.event_type.clone());
        t.add_papers(prov);
        out.push(t);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetEntry {
    pub term: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetCounts {
    pub kind: FacetKind,
    pub entries: Vec<FacetEntry>,
}

/// For each term of `kind`, the number of assertions carrying it among
/// those satisfying every constraint. Sorted by count descending, then
/// term.
pub fn facet_counts(
    graph: &Graph,
    constraints: &ConstraintSet,
    kind: FacetKind,
    limit: Option<usize>,
) -> FacetCounts {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for a in assertions(graph) {
        if !constraints.iter().all(|c| a.satisfies(c)) {
            continue;
        }
        for term in a.values.get(&kind).into_iter().flatten() {
            *counts.entry(term.clone()).or_default() += 1;
        }
    }
    let mut entries: Vec<FacetEntry> = counts
        .into_iter()
        .map(|(term, count)| FacetEntry { term, count })
        .collect();
    entries.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.term.cmp(&b.term)));
    if let Some(n) = limit {
        entries.truncate(n);
    }
    FacetCounts { kind, entries }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeatCell {
    pub row: String,
    pub col: String,
    pub action: Action,
    pub symbol: String,
    /// Distinct papers over all supporting assertions.
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeatmapMatrix {
    pub row_type: CoarseType,
    pub col_type: CoarseType,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub cells: Vec<HeatCell>,
}

fn parse_coarse(s: &str) -> Result<CoarseType> {
    CoarseType::parse(s).ok_or_else(|| FacetError::UnknownFacet(s.to_owned()))
}

/// Entity-name by entity-name matrix over direct edges between a
/// `row`-typed and a `col`-typed entity that satisfy the constraints.
///
/// A cell's action is the one with the most supporting papers; a tie for
/// first place yields `Affect`.
pub fn heatmap(graph: &Graph, constraints: &ConstraintSet, row: &str, col: &str) -> Result<HeatmapMatrix> {
    let row_type = parse_coarse(row)?;
    let col_type = parse_coarse(col)?;
    let mut cells: BTreeMap<(String, String), BTreeMap<Action, BTreeSet<String>>> = BTreeMap::new();
    let edges: Vec<_> = graph.edges().collect();
    for ((key, prov), terms) in edges.iter().zip(assertions(graph)) {
        if !constraints.iter().all(|c| terms.satisfies(c)) {
            continue;
        }
        let (Some(s), Some(d)) = (graph.entity(&key.src), graph.entity(&key.dst)) else {
            continue;
        };
        let (r, c) = if s.coarse_type == row_type && d.coarse_type == col_type {
            (s.name, d.name)
        } else if d.coarse_type == row_type && s.coarse_type == col_type {
            (d.name, s.name)
        } else {
            continue;
        };
        cells
            .entry((r, c))
            .or_default()
            .entry(key.action)
            .or_default()
            .extend(prov.iter().map(|p| p.paper_id.clone()));
    }
    let mut rows = BTreeSet::new();
    let mut cols = BTreeSet::new();
    let cells = cells
        .into_iter()
        .map(|((r, c), by_action)| {
            let support = by_action.values().flatten().collect::<BTreeSet<_>>().len();
            let top = by_action.values().map(BTreeSet::len).max().unwrap_or(0);
            let leaders: Vec<Action> = by_action
                .iter()
                .filter(|(_, p)| p.len() == top)
                .map(|(a, _)| *a)
                .collect();
            let action = if leaders.len() == 1 { leaders[0] } else { Action::Affect };
            rows.insert(r.clone());
            cols.insert(c.clone());
            HeatCell {
                row: r,
                col: c,
                action,
                symbol: action.symbol().to_owned(),
                support,
            }
        })
        .collect();
    Ok(HeatmapMatrix {
        row_type,
        col_type,
        rows: rows.into_iter().collect(),
        cols: cols.into_iter().collect(),
        cells,
    })
}
