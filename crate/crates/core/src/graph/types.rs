use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Synthetic provenance source used for curated-database rows.
pub const CTD_SOURCE: &str = "CTD";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoarseType {
    Gene,
    Disease,
    Chemical,
    Organism,
}

impl CoarseType {
    pub const ALL: [CoarseType; 4] = [
        CoarseType::Gene,
        CoarseType::Disease,
        CoarseType::Chemical,
        CoarseType::Organism,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CoarseType::Gene => "Gene",
            CoarseType::Disease => "Disease",
            CoarseType::Chemical => "Chemical",
            CoarseType::Organism => "Organism",
        }
    }

    /// Case-insensitive parse; `Protein` is accepted as an alias of `Gene`.
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gene" | "protein" => Some(CoarseType::Gene),
            "disease" => Some(CoarseType::Disease),
            "chemical" => Some(CoarseType::Chemical),
            "organism" => Some(CoarseType::Organism),
            _ => None,
        }
    }
}

impl fmt::Display for CoarseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationCategory {
    GeneChemical,
    ChemicalDisease,
    GeneDisease,
    #[serde(rename = "ChemicalGO")]
    ChemicalGo,
    ChemicalPathway,
    Event,
}

impl RelationCategory {
    pub const ALL: [RelationCategory; 6] = [
        RelationCategory::GeneChemical,
        RelationCategory::ChemicalDisease,
        RelationCategory::GeneDisease,
        RelationCategory::ChemicalGo,
        RelationCategory::ChemicalPathway,
        RelationCategory::Event,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationCategory::GeneChemical => "GeneChemical",
            RelationCategory::ChemicalDisease => "ChemicalDisease",
            RelationCategory::GeneDisease => "GeneDisease",
            RelationCategory::ChemicalGo => "ChemicalGO",
            RelationCategory::ChemicalPathway => "ChemicalPathway",
            RelationCategory::Event => "Event",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s.trim())
    }
}

impl fmt::Display for RelationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Increase,
    Decrease,
    Affect,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Increase, Action::Decrease, Action::Affect];

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Increase => "Increase",
            Action::Decrease => "Decrease",
            Action::Affect => "Affect",
        }
    }

    /// Dashboard symbol: `++`, `--` or `→`.
    pub fn symbol(self) -> &'static str {
        match self {
            Action::Increase => "++",
            Action::Decrease => "--",
            Action::Affect => "→",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "Increase" | "increase" | "++" => Some(Action::Increase),
            "Decrease" | "decrease" | "--" => Some(Action::Decrease),
            "Affect" | "affect" | "→" | "->" => Some(Action::Affect),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Points at one sentence of one paper that supports an assertion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProvenanceRef {
    pub paper_id: String,
    pub sentence_idx: u32,
    pub char_span: Option<(u32, u32)>,
}

impl ProvenanceRef {
    pub fn new(paper_id: impl Into<String>, sentence_idx: u32) -> Self {
        Self {
            paper_id: paper_id.into(),
            sentence_idx,
            char_span: None,
        }
    }

    pub fn with_span(mut self, start: u32, end: u32) -> Self {
        self.char_span = Some((start, end));
        self
    }
}

impl fmt::Display for ProvenanceRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.paper_id, self.sentence_idx)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub id: String,
    pub name: String,
    pub coarse_type: CoarseType,
    #[serde(default)]
    pub fine_types: BTreeSet<String>,
    #[serde(default)]
    pub aliases: BTreeSet<String>,
}

impl EntityRecord {
    pub fn new(id: impl Into<String>, name: impl Into<String>, coarse_type: CoarseType) -> Self {
        let name = name.into();
        Self {
            id: id.into(),
            aliases: BTreeSet::from([name.clone()]),
            name,
            coarse_type,
            fine_types: BTreeSet::new(),
        }
    }

    pub fn with_fine_type(mut self, fine: impl Into<String>) -> Self {
        self.fine_types.insert(fine.into());
        self
    }

    pub fn with_alias(mut self, alias: impl Into<String>) -> Self {
        self.aliases.insert(alias.into());
        self
    }
}

/// Identity of an assertion edge. Two assertions with the same key are the
/// same edge and only contribute provenance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeKey {
    pub src: String,
    pub dst: String,
    pub category: RelationCategory,
    pub subtype: String,
    pub action: Action,
}

impl EdgeKey {
    pub fn new(
        src: impl Into<String>,
        dst: impl Into<String>,
        category: RelationCategory,
        subtype: impl Into<String>,
        action: Action,
    ) -> Self {
        Self {
            src: src.into(),
            dst: dst.into(),
            category,
            subtype: subtype.into(),
            action,
        }
    }

    /// The endpoint opposite `node`, if `node` is an endpoint.
    pub fn other(&self, node: &str) -> Option<&str> {
        if self.src == node {
            Some(&self.dst)
        } else if self.dst == node {
            Some(&self.src)
        } else {
            None
        }
    }

    pub fn touches(&self, node: &str) -> bool {
        self.src == node || self.dst == node
    }
}

// Lexicographic over the textual fields so the order matches the printed key.
impl Ord for EdgeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.src
            .cmp(&other.src)
            .then_with(|| self.dst.cmp(&other.dst))
            .then_with(|| self.category.as_str().cmp(other.category.as_str()))
            .then_with(|| self.subtype.cmp(&other.subtype))
            .then_with(|| self.action.as_str().cmp(other.action.as_str()))
    }
}

impl PartialOrd for EdgeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}|{}|{}|{}|{}",
            self.src, self.dst, self.category, self.subtype, self.action
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssertionEdge {
    pub src: String,
    pub dst: String,
    pub category: RelationCategory,
    pub subtype: String,
    pub action: Action,
    pub provenance: BTreeSet<ProvenanceRef>,
}

impl AssertionEdge {
    pub fn new(key: EdgeKey, provenance: impl IntoIterator<Item = ProvenanceRef>) -> Self {
        Self {
            src: key.src,
            dst: key.dst,
            category: key.category,
            subtype: key.subtype,
            action: key.action,
            provenance: provenance.into_iter().collect(),
        }
    }

    pub fn key(&self) -> EdgeKey {
        EdgeKey::new(
            self.src.clone(),
            self.dst.clone(),
            self.category,
            self.subtype.clone(),
            self.action,
        )
    }

    pub fn support(&self) -> usize {
        distinct_papers(&self.provenance)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventKey {
    pub event_type: String,
    pub trigger: String,
    pub roles: BTreeMap<String, String>,
}

impl EventKey {
    pub fn involves(&self, entity: &str) -> bool {
        self.roles.values().any(|id| id == entity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventAssertion {
    pub event_type: String,
    pub trigger: String,
    pub roles: BTreeMap<String, String>,
    pub provenance: BTreeSet<ProvenanceRef>,
}

impl EventAssertion {
    pub fn key(&self) -> EventKey {
        EventKey {
            event_type: self.event_type.clone(),
            trigger: self.trigger.clone(),
            roles: self.roles.clone(),
        }
    }

    pub fn support(&self) -> usize {
        distinct_papers(&self.provenance)
    }
}

/// Number of distinct paper ids in a provenance set.
pub fn distinct_papers(provenance: &BTreeSet<ProvenanceRef>) -> usize {
    // The set is ordered by paper_id first, so equal ids are adjacent.
    let mut count = 0;
    let mut last: Option<&str> = None;
    for r in provenance {
        if last != Some(r.paper_id.as_str()) {
            count += 1;
            last = Some(&r.paper_id);
        }
    }
    count
}

/// Checks the `MESH:` / `GENE:` / `TAX:` / `LOCAL:` namespacing scheme.
pub fn is_well_formed_id(id: &str) -> bool {
    let Some((scheme, rest)) = id.split_once(':') else {
        return false;
    };
    if rest.is_empty() || rest.chars().any(char::is_whitespace) {
        return false;
    }
    matches!(scheme, "MESH" | "GENE" | "TAX" | "LOCAL")
}
