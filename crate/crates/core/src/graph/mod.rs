//! Typed, provenance-tracked multigraph.
//!
//! Entities are keyed by namespaced id. Relation assertions are keyed by
//! `(src, dst, category, subtype, action)`; asserting the same key again only
//! merges provenance. Support of an assertion is the number of distinct
//! papers in its provenance.
//!
//! Entity attributes are remembered per contributing paper so that removing a
//! paper restores exactly the state the remaining papers would have produced.
//! Entities are never deleted: once nothing supports them they become
//! *orphans*, which stay resolvable by id but are left out of listings and
//! of the canonical dump.

mod canonical;
mod types;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::registry::Registry;

pub use canonical::{CanonicalRecord, PathRecord, CANONICAL_FORMAT};
pub use types::{
    distinct_papers, is_well_formed_id, Action, AssertionEdge, CoarseType, EdgeKey, EntityRecord,
    EventAssertion, EventKey, ProvenanceRef, RelationCategory, CTD_SOURCE,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed entity id `{0}`: expected MESH:, GENE:, TAX: or LOCAL: prefix")]
    MalformedId(String),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("relation subtype `{0}` is not in the registry")]
    UnknownSubtype(String),
    #[error("event type `{0}` is not in the registry")]
    UnknownEventType(String),
    #[error("assertion has empty provenance")]
    EmptyProvenance,
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("entity `{id}` is already typed {existing}, not {requested}")]
    TypeConflict {
        id: String,
        existing: CoarseType,
        requested: CoarseType,
    },
    #[error("invalid entity `{id}`: {reason}")]
    InvalidEntity { id: String, reason: String },
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("invalid provenance: {0}")]
    InvalidProvenance(String),
    #[error("canonical dump line {line}: {message}")]
    Canonical { line: usize, message: String },
}

impl GraphError {
    /// Stable error code used on the wire.
    pub fn code(&self) -> &'static str {
        match self {
            GraphError::MalformedId(_) => "MalformedId",
            GraphError::UnknownEntity(_) => "UnknownEntity",
            GraphError::UnknownSubtype(_) => "UnknownSubtype",
            GraphError::UnknownEventType(_) => "UnknownSubtype",
            GraphError::EmptyProvenance => "EmptyProvenance",
            GraphError::UnknownEdge(_) => "UnknownEdge",
            GraphError::TypeConflict { .. } => "TypeConflict",
            GraphError::InvalidEntity { .. } => "InvalidEntity",
            GraphError::InvalidEvent(_) => "InvalidEvent",
            GraphError::InvalidProvenance(_) => "InvalidProvenance",
            GraphError::Canonical { .. } => "SchemaError",
        }
    }
}

pub type Result<T, E = GraphError> = std::result::Result<T, E>;

/// What happened to an assertion when it was added.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Merge {
    /// A new key was stored.
    New,
    /// The key existed and gained at least one provenance reference.
    Merged,
    /// The key existed and every reference was already present.
    Unchanged,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NeighborFilter {
    pub category: Option<RelationCategory>,
    pub coarse_type: Option<CoarseType>,
    pub min_support: Option<usize>,
}

/// Result of stripping one paper's provenance out of the graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Withdrawal {
    pub edges_deleted: usize,
    pub edges_weakened: usize,
    pub events_deleted: usize,
    pub events_weakened: usize,
    /// Entities whose support changed and which are no longer live.
    pub orphaned: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Contribution {
    name: String,
    fine_types: BTreeSet<String>,
    aliases: BTreeSet<String>,
}

impl Contribution {
    fn from_record(e: &EntityRecord) -> Self {
        Self {
            name: e.name.clone(),
            fine_types: e.fine_types.clone(),
            aliases: e.aliases.clone(),
        }
    }

    fn absorb(&mut self, e: &EntityRecord) -> bool {
        let before = (self.fine_types.len(), self.aliases.len());
        self.fine_types.extend(e.fine_types.iter().cloned());
        self.aliases.extend(e.aliases.iter().cloned());
        before != (self.fine_types.len(), self.aliases.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct EntityState {
    coarse_type: CoarseType,
    /// Direct upserts, independent of any paper.
    base: Option<Contribution>,
    by_paper: BTreeMap<String, Contribution>,
}

impl EntityState {
    fn materialize(&self, id: &str) -> EntityRecord {
        let name = self
            .base
            .as_ref()
            .or_else(|| self.by_paper.values().next())
            .map(|c| c.name.clone())
            .unwrap_or_default();
        let mut record = EntityRecord::new(id, name, self.coarse_type);
        for c in self.base.iter().chain(self.by_paper.values()) {
            record.aliases.insert(c.name.clone());
            record.aliases.extend(c.aliases.iter().cloned());
            record.fine_types.extend(c.fine_types.iter().cloned());
        }
        record
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    registry: Arc<Registry>,
    entities: BTreeMap<String, EntityState>,
    edges: BTreeMap<EdgeKey, BTreeSet<ProvenanceRef>>,
    events: BTreeMap<EventKey, BTreeSet<ProvenanceRef>>,
    incident: BTreeMap<String, BTreeSet<EdgeKey>>,
    event_roles: BTreeMap<String, BTreeSet<EventKey>>,
}

impl Default for Graph {
    fn default() -> Self {
        Self::new(Arc::new(Registry::default()))
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.to_canonical_string() == other.to_canonical_string()
    }
}

impl Graph {
    pub fn new(registry: Arc<Registry>) -> Self {
        Self {
            registry,
            entities: BTreeMap::new(),
            edges: BTreeMap::new(),
            events: BTreeMap::new(),
            incident: BTreeMap::new(),
            event_roles: BTreeMap::new(),
        }
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    /// Stores `e` as a direct (paper-independent) entity.
    ///
    /// Re-upserting an id unions fine types and aliases; the first name wins.
    pub fn upsert_entity(&mut self, e: EntityRecord) -> Result<String> {
        validate_entity(&e)?;
        let state = self.state_for(&e)?;
        match &mut state.base {
            Some(base) => {
                base.absorb(&e);
            }
            None => state.base = Some(Contribution::from_record(&e)),
        }
        Ok(e.id)
    }

    /// Records that `paper_id` mentions `e`. Returns true when the entity was
    /// not live before.
    pub(crate) fn contribute_entity(&mut self, paper_id: &str, e: &EntityRecord) -> Result<bool> {
        validate_entity(e)?;
        let was_live = self.is_live(&e.id);
        let state = self.state_for(e)?;
        match state.by_paper.get_mut(paper_id) {
            Some(c) => {
                c.absorb(e);
            }
            None => {
                state
                    .by_paper
                    .insert(paper_id.to_owned(), Contribution::from_record(e));
            }
        }
        Ok(!was_live)
    }

    /// Fails with `TypeConflict` if `e` would retype an existing entity.
    pub fn check_entity(&self, e: &EntityRecord) -> Result<()> {
        validate_entity(e)?;
        match self.entities.get(&e.id) {
            Some(state) if state.coarse_type != e.coarse_type => Err(GraphError::TypeConflict {
                id: e.id.clone(),
                existing: state.coarse_type,
                requested: e.coarse_type,
            }),
            _ => Ok(()),
        }
    }

    fn state_for(&mut self, e: &EntityRecord) -> Result<&mut EntityState> {
        self.check_entity(e)?;
        Ok(self
            .entities
            .entry(e.id.clone())
            .or_insert_with(|| EntityState {
                coarse_type: e.coarse_type,
                base: None,
                by_paper: BTreeMap::new(),
            }))
    }

    /// Looks up an entity by id, including orphans.
    pub fn entity(&self, id: &str) -> Option<EntityRecord> {
        self.entities.get(id).map(|s| s.materialize(id))
    }

    pub fn coarse_type(&self, id: &str) -> Option<CoarseType> {
        self.entities.get(id).map(|s| s.coarse_type)
    }

    pub fn contains_entity(&self, id: &str) -> bool {
        self.entities.contains_key(id)
    }

    /// An entity is live while it is upserted directly, mentioned by some
    /// paper, or touched by an edge or event.
    pub fn is_live(&self, id: &str) -> bool {
        let Some(state) = self.entities.get(id) else {
            return false;
        };
        state.base.is_some()
            || !state.by_paper.is_empty()
            || self.incident.get(id).is_some_and(|s| !s.is_empty())
            || self.event_roles.get(id).is_some_and(|s| !s.is_empty())
    }

    /// Live entities in id order.
    pub fn entities(&self) -> impl Iterator<Item = EntityRecord> + '_ {
        self.entities
            .iter()
            .filter(|(id, _)| self.is_live(id))
            .map(|(id, s)| s.materialize(id))
    }

    pub fn entity_ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.entities
            .keys()
            .filter(|id| self.is_live(id))
            .map(String::as_str)
    }

    /// Entities kept only for id stability: nothing supports them any more.
    pub fn orphans(&self) -> Vec<String> {
        self.entities
            .keys()
            .filter(|id| !self.is_live(id))
            .cloned()
            .collect()
    }

    pub fn entity_count(&self) -> usize {
        self.entity_ids().count()
    }

    /// Stores an assertion, merging provenance into an existing key.
    pub fn add_assertion(&mut self, edge: AssertionEdge) -> Result<EdgeKey> {
        self.add_assertion_merge(edge).map(|(key, _)| key)
    }

    pub fn add_assertion_merge(&mut self, edge: AssertionEdge) -> Result<(EdgeKey, Merge)> {
        let key = edge.key();
        self.check_assertion(&key, &edge.provenance)?;
        let merge = match self.edges.get_mut(&key) {
            Some(prov) => {
                let before = prov.len();
                prov.extend(edge.provenance);
                if prov.len() > before {
                    Merge::Merged
                } else {
                    Merge::Unchanged
                }
            }
            None => {
                self.incident
                    .entry(key.src.clone())
                    .or_default()
                    .insert(key.clone());
                self.incident
                    .entry(key.dst.clone())
                    .or_default()
                    .insert(key.clone());
                self.edges.insert(key.clone(), edge.provenance);
                Merge::New
            }
        };
        Ok((key, merge))
    }

    /// Validates an assertion without storing it.
    pub fn check_assertion(&self, key: &EdgeKey, provenance: &BTreeSet<ProvenanceRef>) -> Result<()> {
        for id in [&key.src, &key.dst] {
            if !self.entities.contains_key(id) {
                return Err(GraphError::UnknownEntity(id.clone()));
            }
        }
        let known = if key.category == RelationCategory::Event {
            self.registry.has_event(&key.subtype)
        } else {
            self.registry.has_relation(&key.subtype)
        };
        if !known {
            return Err(GraphError::UnknownSubtype(key.subtype.clone()));
        }
        check_provenance(provenance)
    }

    /// Number of distinct papers supporting an edge.
    pub fn support(&self, key: &EdgeKey) -> Result<usize> {
        self.edges
            .get(key)
            .map(distinct_papers)
            .ok_or_else(|| GraphError::UnknownEdge(key.to_string()))
    }

    pub fn provenance(&self, key: &EdgeKey) -> Option<&BTreeSet<ProvenanceRef>> {
        self.edges.get(key)
    }

    pub fn edge(&self, key: &EdgeKey) -> Option<AssertionEdge> {
        self.edges
            .get(key)
            .map(|prov| AssertionEdge::new(key.clone(), prov.iter().cloned()))
    }

    pub fn contains_edge(&self, key: &EdgeKey) -> bool {
        self.edges.contains_key(key)
    }

    /// All edges in key order.
    pub fn edges(&self) -> impl Iterator<Item = (&EdgeKey, &BTreeSet<ProvenanceRef>)> + '_ {
        self.edges.iter()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges touching `id`, in key order.
    pub fn incident(&self, id: &str) -> impl Iterator<Item = &EdgeKey> + '_ {
        self.incident.get(id).into_iter().flatten()
    }

    /// Incident edges passing `filter`, sorted by descending support and then
    /// by edge key.
    pub fn neighbors(&self, id: &str, filter: &NeighborFilter) -> Result<Vec<(EdgeKey, String)>> {
        if !self.entities.contains_key(id) {
            return Err(GraphError::UnknownEntity(id.to_owned()));
        }
        let mut out: Vec<(usize, EdgeKey, String)> = self
            .incident(id)
            .filter_map(|key| {
                let support = distinct_papers(&self.edges[key]);
                let other = key.other(id)?;
                let keep = filter.category.is_none_or(|c| c == key.category)
                    && filter.min_support.is_none_or(|m| support >= m)
                    && filter
                        .coarse_type
                        .is_none_or(|t| self.coarse_type(other) == Some(t));
                keep.then(|| (support, key.clone(), other.to_owned()))
            })
            .collect();
        out.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        Ok(out.into_iter().map(|(_, k, o)| (k, o)).collect())
    }

    pub fn add_event(&mut self, event: EventAssertion) -> Result<(EventKey, Merge)> {
        let key = event.key();
        self.check_event(&key, &event.provenance)?;
        let merge = match self.events.get_mut(&key) {
            Some(prov) => {
                let before = prov.len();
                prov.extend(event.provenance);
                if prov.len() > before {
                    Merge::Merged
                } else {
                    Merge::Unchanged
                }
            }
            None => {
                for id in key.roles.values() {
                    self.event_roles
                        .entry(id.clone())
                        .or_default()
                        .insert(key.clone());
                }
                self.events.insert(key.clone(), event.provenance);
                Merge::New
            }
        };
        Ok((key, merge))
    }

    pub fn check_event(&self, key: &EventKey, provenance: &BTreeSet<ProvenanceRef>) -> Result<()> {
        if !self.registry.has_event(&key.event_type) {
            return Err(GraphError::UnknownEventType(key.event_type.clone()));
        }
        if key.roles.is_empty() {
            return Err(GraphError::InvalidEvent(format!(
                "`{}` event has no roles",
                key.event_type
            )));
        }
        for id in key.roles.values() {
            if !self.entities.contains_key(id) {
                return Err(GraphError::UnknownEntity(id.clone()));
            }
        }
        check_provenance(provenance)
    }

    pub fn events(&self) -> impl Iterator<Item = (&EventKey, &BTreeSet<ProvenanceRef>)> + '_ {
        self.events.iter()
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn events_involving(&self, id: &str) -> impl Iterator<Item = &EventKey> + '_ {
        self.event_roles.get(id).into_iter().flatten()
    }

    /// Removes every trace of `paper_id`: provenance references, entity
    /// contributions. Unknown papers are a no-op.
    pub fn withdraw_paper(&mut self, paper_id: &str) -> Withdrawal {
        let mut out = Withdrawal::default();
        let mut touched: BTreeSet<String> = BTreeSet::new();

        let mut dead_edges = Vec::new();
        for (key, prov) in self.edges.iter_mut() {
            let before = prov.len();
            prov.retain(|r| r.paper_id != paper_id);
            if prov.len() == before {
                continue;
            }
            if prov.is_empty() {
                dead_edges.push(key.clone());
            } else {
                out.edges_weakened += 1;
            }
        }
        for key in dead_edges {
            self.edges.remove(&key);
            for end in [&key.src, &key.dst] {
                if let Some(set) = self.incident.get_mut(end) {
                    set.remove(&key);
                    if set.is_empty() {
                        self.incident.remove(end);
                    }
                }
                touched.insert(end.clone());
            }
            out.edges_deleted += 1;
        }

        let mut dead_events = Vec::new();
        for (key, prov) in self.events.iter_mut() {
            let before = prov.len();
            prov.retain(|r| r.paper_id != paper_id);
            if prov.len() == before {
                continue;
            }
            if prov.is_empty() {
                dead_events.push(key.clone());
            } else {
                out.events_weakened += 1;
            }
        }
        for key in dead_events {
            self.events.remove(&key);
            for id in key.roles.values() {
                if let Some(set) = self.event_roles.get_mut(id) {
                    set.remove(&key);
                    if set.is_empty() {
                        self.event_roles.remove(id);
                    }
                }
                touched.insert(id.clone());
            }
            out.events_deleted += 1;
        }

        for (id, state) in self.entities.iter_mut() {
            if state.by_paper.remove(paper_id).is_some() {
                touched.insert(id.clone());
            }
        }
        out.orphaned = touched.into_iter().filter(|id| !self.is_live(id)).collect();
        out
    }
}

fn validate_entity(e: &EntityRecord) -> Result<()> {
    if !is_well_formed_id(&e.id) {
        return Err(GraphError::MalformedId(e.id.clone()));
    }
    let invalid = |reason: &str| GraphError::InvalidEntity {
        id: e.id.clone(),
        reason: reason.to_owned(),
    };
    if e.name.trim().is_empty() {
        return Err(invalid("empty name"));
    }
    if e.fine_types.iter().any(|t| t.trim().is_empty()) {
        return Err(invalid("empty fine type"));
    }
    if e.aliases.iter().any(|a| a.trim().is_empty()) {
        return Err(invalid("empty alias"));
    }
    Ok(())
}

fn check_provenance(provenance: &BTreeSet<ProvenanceRef>) -> Result<()> {
    if provenance.is_empty() {
        return Err(GraphError::EmptyProvenance);
    }
    for r in provenance {
        if r.paper_id.is_empty() {
            return Err(GraphError::InvalidProvenance("empty paper_id".into()));
        }
        if let Some((s, e)) = r.char_span {
            if s >= e {
                return Err(GraphError::InvalidProvenance(format!(
                    "span ({s}, {e}) at {r} is empty or reversed"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn losartan() -> EntityRecord {
        EntityRecord::new("MESH:D008784", "Losartan", CoarseType::Chemical)
    }

    fn p53() -> EntityRecord {
        EntityRecord::new("GENE:7157", "tumor protein p53", CoarseType::Gene)
    }

    fn edge(refs: &[(&str, u32)]) -> AssertionEdge {
        AssertionEdge::new(
            EdgeKey::new(
                "MESH:D008784",
                "GENE:7157",
                RelationCategory::GeneChemical,
                "decreases^expression",
                Action::Decrease,
            ),
            refs.iter().map(|(p, i)| ProvenanceRef::new(*p, *i)),
        )
    }

    fn graph() -> Graph {
        let mut g = Graph::default();
        g.upsert_entity(losartan()).unwrap();
        g.upsert_entity(p53()).unwrap();
        g
    }

    #[test]
    fn upsert_returns_id_and_is_idempotent() {
        let mut g = Graph::default();
        assert_eq!(g.upsert_entity(losartan()).unwrap(), "MESH:D008784");
        assert_eq!(g.upsert_entity(losartan()).unwrap(), "MESH:D008784");
        assert_eq!(g.entity_count(), 1);
    }

    #[test]
    fn upsert_unions_and_keeps_first_name() {
        let mut g = Graph::default();
        g.upsert_entity(losartan().with_fine_type("DRUG")).unwrap();
        g.upsert_entity(
            EntityRecord::new("MESH:D008784", "Cozaar", CoarseType::Chemical)
                .with_fine_type("ANTIHYPERTENSIVE"),
        )
        .unwrap();
        let e = g.entity("MESH:D008784").unwrap();
        assert_eq!(e.name, "Losartan");
        assert!(e.aliases.contains("Losartan") && e.aliases.contains("Cozaar"));
        assert_eq!(e.fine_types.len(), 2);
    }

    #[test]
    fn upsert_rejects_unscoped_id() {
        let mut g = Graph::default();
        let err = g
            .upsert_entity(EntityRecord::new("X123", "x", CoarseType::Gene))
            .unwrap_err();
        assert_eq!(err, GraphError::MalformedId("X123".into()));
    }

    #[test]
    fn upsert_rejects_retyping() {
        let mut g = graph();
        let err = g
            .upsert_entity(EntityRecord::new("GENE:7157", "p53", CoarseType::Disease))
            .unwrap_err();
        assert_eq!(err.code(), "TypeConflict");
    }

    #[test]
    fn duplicate_assertions_merge_provenance() {
        let mut g = graph();
        let k1 = g.add_assertion(edge(&[("p1", 4)])).unwrap();
        let k2 = g.add_assertion(edge(&[("p2", 9)])).unwrap();
        assert_eq!(k1, k2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.support(&k1).unwrap(), 2);
    }

    #[test]
    fn identical_provenance_is_set_semantics() {
        let mut g = graph();
        let key = g.add_assertion(edge(&[("p1", 4)])).unwrap();
        let (_, merge) = g.add_assertion_merge(edge(&[("p1", 4)])).unwrap();
        assert_eq!(merge, Merge::Unchanged);
        assert_eq!(g.support(&key).unwrap(), 1);
    }

    #[test]
    fn support_counts_distinct_papers() {
        let mut g = graph();
        let key = g
            .add_assertion(edge(&[("p1", 1), ("p1", 7), ("p2", 3)]))
            .unwrap();
        assert_eq!(g.support(&key).unwrap(), 2);
    }

    #[test]
    fn assertion_errors() {
        let mut g = graph();
        let mut bad = edge(&[("p1", 1)]);
        bad.subtype = "not-a-subtype".into();
        assert_eq!(
            g.add_assertion(bad).unwrap_err(),
            GraphError::UnknownSubtype("not-a-subtype".into())
        );
        let mut bad = edge(&[("p1", 1)]);
        bad.dst = "GENE:1".into();
        assert_eq!(g.add_assertion(bad).unwrap_err().code(), "UnknownEntity");
        assert_eq!(g.add_assertion(edge(&[])).unwrap_err(), GraphError::EmptyProvenance);
        let unknown = edge(&[]).key();
        assert_eq!(g.support(&unknown).unwrap_err().code(), "UnknownEdge");
    }

    #[test]
    fn neighbors_sorted_by_support_then_key() {
        let mut g = graph();
        g.upsert_entity(EntityRecord::new("MESH:D008175", "lung cancer", CoarseType::Disease))
            .unwrap();
        let iso = EntityRecord::new("GENE:1", "isolated", CoarseType::Gene);
        g.upsert_entity(iso).unwrap();
        assert!(g.neighbors("GENE:1", &NeighborFilter::default()).unwrap().is_empty());

        let strong = g
            .add_assertion(edge(&[("p1", 0), ("p2", 0), ("p3", 0)]))
            .unwrap();
        let k_a = g
            .add_assertion(AssertionEdge::new(
                EdgeKey::new(
                    "GENE:7157",
                    "MESH:D008175",
                    RelationCategory::GeneDisease,
                    "marker/mechanism",
                    Action::Affect,
                ),
                [ProvenanceRef::new("p1", 2)],
            ))
            .unwrap();
        let k_b = g
            .add_assertion(AssertionEdge::new(
                EdgeKey::new(
                    "GENE:7157",
                    "MESH:D008175",
                    RelationCategory::GeneDisease,
                    "inferred",
                    Action::Affect,
                ),
                [ProvenanceRef::new("p4", 2)],
            ))
            .unwrap();
        let all = g.neighbors("GENE:7157", &NeighborFilter::default()).unwrap();
        let keys: Vec<_> = all.iter().map(|(k, _)| k.clone()).collect();
        // Equal support falls back to key order: "inferred" < "marker/mechanism".
        assert_eq!(keys, vec![strong.clone(), k_b, k_a]);

        let filtered = g
            .neighbors(
                "GENE:7157",
                &NeighborFilter {
                    min_support: Some(2),
                    ..Default::default()
                },
            )
            .unwrap();
        assert_eq!(filtered, vec![(strong, "MESH:D008784".to_owned())]);
        assert_eq!(
            g.neighbors("GENE:404", &NeighborFilter::default()).unwrap_err().code(),
            "UnknownEntity"
        );
    }

    #[test]
    fn withdraw_weakens_and_deletes() {
        let mut g = Graph::default();
        g.contribute_entity("p1", &losartan()).unwrap();
        g.contribute_entity("p1", &p53()).unwrap();
        g.contribute_entity("p2", &losartan()).unwrap();
        g.contribute_entity("p2", &p53()).unwrap();
        let key = g.add_assertion(edge(&[("p1", 0), ("p2", 1)])).unwrap();
        let w = g.withdraw_paper("p1");
        assert_eq!((w.edges_deleted, w.edges_weakened), (0, 1));
        assert_eq!(g.support(&key).unwrap(), 1);
        let w = g.withdraw_paper("p2");
        assert_eq!((w.edges_deleted, w.edges_weakened), (1, 0));
        assert_eq!(
            w.orphaned.into_iter().collect::<Vec<_>>(),
            vec!["GENE:7157", "MESH:D008784"]
        );
        // Orphans stay resolvable but drop out of listings.
        assert!(g.entity("GENE:7157").is_some());
        assert_eq!(g.entity_count(), 0);
        assert_eq!(g.withdraw_paper("nope"), Withdrawal::default());
    }

    #[test]
    fn event_roles_must_resolve() {
        let mut g = graph();
        let ev = EventAssertion {
            event_type: "Phosphorylation".into(),
            trigger: "phosphorylates".into(),
            roles: BTreeMap::from([("Theme".into(), "GENE:999".into())]),
            provenance: [ProvenanceRef::new("p1", 0)].into_iter().collect(),
        };
        assert_eq!(g.add_event(ev.clone()).unwrap_err().code(), "UnknownEntity");
        let mut ok = ev.clone();
        ok.roles = BTreeMap::from([("Theme".into(), "GENE:7157".into())]);
        assert_eq!(g.add_event(ok).unwrap().1, Merge::New);
        let mut bad = ev;
        bad.event_type = "Dancing".into();
        assert_eq!(g.add_event(bad).unwrap_err().code(), "UnknownSubtype");
    }
}
