//! Figure panel layout: subfigure markers, region merging and subcaption
//! alignment.
//!
//! Input is a pre-detected layout (image regions, OCR text boxes and the
//! caption). Text boxes that look like panel letters become markers, each
//! region joins its nearest marker, and every marker group becomes one
//! subfigure paired with its caption fragment.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FigureError {
    #[error("{location}: degenerate box ({x0}, {y0}, {x1}, {y1})")]
    InvalidBox {
        location: String,
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
    },
    #[error("text_boxes[{0}]: empty text")]
    EmptyText(usize),
    #[error("regions {0} and {1} overlap")]
    OverlappingRegions(usize, usize),
    #[error("layout is not valid JSON: {0}")]
    Schema(String),
}

impl FigureError {
    pub fn code(&self) -> &'static str {
        match self {
            FigureError::Schema(_) => "SchemaError",
            _ => "InvalidLayout",
        }
    }
}

pub type Result<T, E = FigureError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn is_valid(&self) -> bool {
        [self.x0, self.y0, self.x1, self.y1].iter().all(|v| v.is_finite()) && self.x0 < self.x1 && self.y0 < self.y1
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// Closed-box intersection; touching edges count.
    pub fn intersects(&self, o: &BBox) -> bool {
        self.x0 <= o.x1 && o.x0 <= self.x1 && self.y0 <= o.y1 && o.y0 <= self.y1
    }

    /// Intersection with positive area.
    pub fn overlaps(&self, o: &BBox) -> bool {
        self.x0 < o.x1 && o.x0 < self.x1 && self.y0 < o.y1 && o.y0 < self.y1
    }

    /// Euclidean gap between the closest edges; zero when the boxes meet.
    pub fn distance(&self, o: &BBox) -> f64 {
        let dx = (self.x0 - o.x1).max(o.x0 - self.x1).max(0.0);
        let dy = (self.y0 - o.y1).max(o.y0 - self.y1).max(0.0);
        dx.hypot(dy)
    }

    pub fn hull(&self, o: &BBox) -> BBox {
        BBox::new(self.x0.min(o.x0), self.y0.min(o.y0), self.x1.max(o.x1), self.y1.max(o.y1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TextKind {
    Marker,
    Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextBox {
    #[serde(flatten)]
    pub bbox: BBox,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<TextKind>,
}

impl TextBox {
    pub fn new(bbox: BBox, text: impl Into<String>) -> Self {
        Self {
            bbox,
            text: text.into(),
            kind: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub letter: char,
    pub text_box: TextBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubfigureRecord {
    pub marker: Option<char>,
    pub bbox: BBox,
    pub regions: Vec<BBox>,
    pub labels: Vec<TextBox>,
    pub subcaption: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layout {
    pub figure_id: String,
    pub width: f64,
    pub height: f64,
    pub regions: Vec<BBox>,
    pub text_boxes: Vec<TextBox>,
    pub caption: String,
}

impl Layout {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let layout: Layout = serde_json::from_slice(bytes).map_err(|e| FigureError::Schema(e.to_string()))?;
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |location: String, b: &BBox| FigureError::InvalidBox {
            location,
            x0: b.x0,
            y0: b.y0,
            x1: b.x1,
            y1: b.y1,
        };
        for (i, r) in self.regions.iter().enumerate() {
            if !r.is_valid() {
                return Err(bad(format!("regions[{i}]"), r));
            }
        }
        for (i, t) in self.text_boxes.iter().enumerate() {
            if !t.bbox.is_valid() {
                return Err(bad(format!("text_boxes[{i}]"), &t.bbox));
            }
            if t.text.trim().is_empty() {
                return Err(FigureError::EmptyText(i));
            }
        }
        for i in 0..self.regions.len() {
            for j in i + 1..self.regions.len() {
                if self.regions[i].overlaps(&self.regions[j]) {
                    return Err(FigureError::OverlappingRegions(i, j));
                }
            }
        }
        Ok(())
    }
}

/// Letter of a marker-shaped text: `X`, `(X)`, `X)` or `X.`.
pub fn marker_letter(text: &str) -> Option<char> {
    let t = text.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .or_else(|| t.strip_suffix(')'))
        .or_else(|| t.strip_suffix('.'))
        .unwrap_or(t);
    let mut chars = inner.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if c.is_ascii_alphabetic() => Some(c.to_ascii_uppercase()),
        _ => None,
    }
}

/// Splits text boxes into markers (sorted by letter) and labels (input
/// order). When a letter repeats, the smallest box keeps it.
pub fn detect_markers(text_boxes: &[TextBox]) -> (Vec<Marker>, Vec<TextBox>) {
    let mut best: BTreeMap<char, usize> = BTreeMap::new();
    for (i, t) in text_boxes.iter().enumerate() {
        if let Some(l) = marker_letter(&t.text) {
            match best.get(&l) {
                Some(&j) if text_boxes[j].bbox.area() <= t.bbox.area() => {}
                _ => {
                    best.insert(l, i);
                }
            }
        }
    }
    let marker_idx: BTreeSet<usize> = best.values().copied().collect();
    let markers = best
        .into_iter()
        .map(|(letter, i)| Marker {
            letter,
            text_box: TextBox {
                kind: Some(TextKind::Marker),
                ..text_boxes[i].clone()
            },
        })
        .collect();
    let labels = text_boxes
        .iter()
        .enumerate()
        .filter(|(i, _)| !marker_idx.contains(i))
        .map(|(_, t)| TextBox {
            kind: Some(TextKind::Label),
            ..t.clone()
        })
        .collect();
    (markers, labels)
}

/// Nearest marker for every region, ties to the smaller letter. Without
/// markers everything lands in the anonymous `None` group. Every marker
/// appears as a key, possibly with no regions.
pub fn assign_markers(markers: &[Marker], regions: &[BBox]) -> BTreeMap<Option<char>, Vec<usize>> {
    let mut out: BTreeMap<Option<char>, Vec<usize>> = BTreeMap::new();
    if markers.is_empty() {
        if !regions.is_empty() {
            out.insert(None, (0..regions.len()).collect());
        }
        return out;
    }
    for m in markers {
        out.entry(Some(m.letter)).or_default();
    }
    for (i, r) in regions.iter().enumerate() {
        let nearest = markers
            .iter()
            .map(|m| (m.text_box.bbox.distance(r), m.letter))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, l)| l);
        out.entry(nearest).or_default().push(i);
    }
    out
}

/// One record per non-empty group, bbox = hull of its regions. Labels are
/// attached to every record whose bbox they touch.
pub fn merge_regions(
    assignment: &BTreeMap<Option<char>, Vec<usize>>,
    regions: &[BBox],
    labels: &[TextBox],
) -> Vec<SubfigureRecord> {
    let mut records: Vec<SubfigureRecord> = assignment
        .iter()
        .filter(|(_, idx)| !idx.is_empty())
        .map(|(marker, idx)| {
            let members: Vec<BBox> = idx.iter().map(|&i| regions[i]).collect();
            let bbox = members[1..].iter().fold(members[0], |h, r| h.hull(r));
            SubfigureRecord {
                marker: *marker,
                bbox,
                labels: labels.iter().filter(|l| l.bbox.intersects(&bbox)).cloned().collect(),
                regions: members,
                subcaption: None,
            }
        })
        .collect();
    records.sort_by(|a, b| {
        a.marker
            .cmp(&b.marker)
            .then(a.bbox.y0.total_cmp(&b.bbox.y0))
            .then(a.bbox.x0.total_cmp(&b.bbox.x0))
    });
    records
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionPart {
    pub letter: char,
    /// The marker exactly as written, e.g. `(a)`.
    pub token: String,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionSplit {
    pub preamble: Option<String>,
    pub parts: Vec<CaptionPart>,
}

pub const PREAMBLE_KEY: &str = "*";

impl CaptionSplit {
    pub fn get(&self, letter: char) -> Option<&str> {
        self.parts.iter().find(|p| p.letter == letter).map(|p| p.text.as_str())
    }

    /// Letter (or `*` for the preamble) to fragment text.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m: BTreeMap<String, String> = self
            .parts
            .iter()
            .map(|p| (p.letter.to_string(), p.text.clone()))
            .collect();
        if let Some(p) = &self.preamble {
            m.insert(PREAMBLE_KEY.into(), p.clone());
        }
        m
    }

    /// Preamble, marker tokens and fragments joined by single spaces.
    pub fn reconstruct(&self) -> String {
        let mut pieces: Vec<&str> = Vec::new();
        if let Some(p) = &self.preamble {
            pieces.push(p);
        }
        for part in &self.parts {
            pieces.push(&part.token);
            if !part.text.is_empty() {
                pieces.push(&part.text);
            }
        }
        pieces.join(" ")
    }
}

fn at_fragment_start(chars: &[char], pos: usize) -> bool {
    match chars[..pos].iter().rposition(|c| !c.is_whitespace()) {
        None => true,
        Some(p) => p + 1 < pos && matches!(chars[p], '.' | ';'),
    }
}

/// Length in chars of a marker token for `expected` starting at `pos`.
fn marker_at(chars: &[char], pos: usize, expected: char) -> Option<usize> {
    if pos > 0 && !chars[pos - 1].is_whitespace() {
        return None;
    }
    let is = |i: usize, f: &dyn Fn(char) -> bool| chars.get(pos + i).is_some_and(|c| f(*c));
    let letter = |c: char| c.to_ascii_uppercase() == expected;
    let ends = |i: usize| chars.get(pos + i).is_none_or(|c| c.is_whitespace());
    if is(0, &|c| c == '(') && is(1, &letter) && is(2, &|c| c == ')') {
        return Some(3);
    }
    if is(0, &letter) && is(1, &|c| c == ')' || c == '.') && ends(2) && at_fragment_start(chars, pos) {
        return Some(2);
    }
    None
}

/// Splits a caption at panel markers `(X)`, `X)` or `X.`.
///
/// `(X)` may follow any whitespace; the bare forms only start a fragment
/// (caption start or after `. ` / `; `). Letters must run A, B, C, ... with
/// no gaps, which keeps phrases like "vitamin D." from being read as
/// markers.
pub fn split_caption(caption: &str) -> CaptionSplit {
    let chars: Vec<char> = caption.chars().collect();
    let mut cuts: Vec<(usize, usize, char)> = Vec::new();
    let mut expected = 'A';
    let mut pos = 0;
    while pos < chars.len() && expected <= 'Z' {
        if let Some(len) = marker_at(&chars, pos, expected) {
            cuts.push((pos, len, expected));
            expected = (expected as u8 + 1) as char;
            pos += len;
        } else {
            pos += 1;
        }
    }
    let slice = |a: usize, b: usize| chars[a..b].iter().collect::<String>().trim().to_owned();
    let first = cuts.first().map_or(chars.len(), |c| c.0);
    let pre = slice(0, first);
    let preamble = if cuts.is_empty() || !pre.is_empty() { Some(pre) } else { None };
    let parts = cuts
        .iter()
        .enumerate()
        .map(|(k, &(start, len, letter))| {
            let end = cuts.get(k + 1).map_or(chars.len(), |c| c.0);
            CaptionPart {
                letter,
                token: chars[start..start + len].iter().collect(),
                text: slice(start + len, end),
            }
        })
        .collect();
    CaptionSplit { preamble, parts }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Grounding {
    pub figure_id: String,
    pub marker: Option<char>,
    pub entity_id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub figure_id: String,
    pub subfigures: Vec<SubfigureRecord>,
    /// Caption fragments whose letter no subfigure carries.
    pub leftovers: BTreeMap<char, String>,
    pub grounding: Vec<Grounding>,
}

/// Alias text to the entity ids carrying it.
pub type AliasIndex = BTreeMap<String, BTreeSet<String>>;

pub fn alias_index(graph: &Graph) -> AliasIndex {
    let mut idx = AliasIndex::new();
    for e in graph.entities() {
        for a in &e.aliases {
            idx.entry(a.clone()).or_default().insert(e.id.clone());
        }
    }
    idx
}

/// Fills subcaptions by letter; subfigures without a fragment get the
/// preamble. Labels whose trimmed text equals an alias ground the entity
/// to the subfigure.
pub fn align(
    figure_id: &str,
    mut subfigures: Vec<SubfigureRecord>,
    split: &CaptionSplit,
    aliases: Option<&AliasIndex>,
) -> Alignment {
    let preamble = split.preamble.clone().unwrap_or_default();
    let mut used = BTreeSet::new();
    for s in &mut subfigures {
        let text = s.marker.and_then(|l| split.get(l));
        if let Some(l) = s.marker.filter(|_| text.is_some()) {
            used.insert(l);
        }
        s.subcaption = Some(text.map_or_else(|| preamble.clone(), str::to_owned));
    }
    let leftovers = split
        .parts
        .iter()
        .filter(|p| !used.contains(&p.letter))
        .map(|p| (p.letter, p.text.clone()))
        .collect();
    let mut grounding = BTreeSet::new();
    if let Some(idx) = aliases {
        for s in &subfigures {
            for l in &s.labels {
                if let Some(ids) = idx.get(l.text.trim()) {
                    for id in ids {
                        grounding.insert(Grounding {
                            figure_id: figure_id.to_owned(),
                            marker: s.marker,
                            entity_id: id.clone(),
                            label: l.text.trim().to_owned(),
                        });
                    }
                }
            }
        }
    }
    Alignment {
        figure_id: figure_id.to_owned(),
        subfigures,
        leftovers,
        grounding: grounding.into_iter().collect(),
    }
}

/// Runs the whole pipeline on one layout.
pub fn process_layout(layout: &Layout, aliases: Option<&AliasIndex>) -> Result<Alignment> {
    layout.validate()?;
    let (markers, labels) = detect_markers(&layout.text_boxes);
    let assignment = assign_markers(&markers, &layout.regions);
    let records = merge_regions(&assignment, &layout.regions, &labels);
    Ok(align(&layout.figure_id, records, &split_caption(&layout.caption), aliases))
}

/// Whitespace-free form used to compare captions with reconstructions.
pub fn squash_whitespace(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}
