//! Relation-subtype and event-type registries.
//!
//! Both registries are plain text: one name per line, `#` starts a comment,
//! blank lines are ignored. Every subtype stored in a [`crate::Graph`] must
//! be present in the registry the graph was created with.

use std::collections::BTreeSet;
use std::fmt;

const DEFAULT_RELATIONS: &str = include_str!("../data/relations.txt");
const DEFAULT_EVENTS: &str = include_str!("../data/events.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registry {
    relations: BTreeSet<String>,
    events: BTreeSet<String>,
}

impl Registry {
    pub fn new(relations: BTreeSet<String>, events: BTreeSet<String>) -> Self {
        Self { relations, events }
    }

    pub fn parse(relations: &str, events: &str) -> Self {
        Self::new(parse_lines(relations), parse_lines(events))
    }

    pub fn relations(&self) -> &BTreeSet<String> {
        &self.relations
    }

    pub fn events(&self) -> &BTreeSet<String> {
        &self.events
    }

    pub fn has_relation(&self, subtype: &str) -> bool {
        self.relations.contains(subtype)
    }

    pub fn has_event(&self, event_type: &str) -> bool {
        self.events.contains(event_type)
    }
}

impl Default for Registry {
    /// The bundled registry of curated-database relation subtypes and the
    /// thirteen biomolecular event types.
    fn default() -> Self {
        Self::parse(DEFAULT_RELATIONS, DEFAULT_EVENTS)
    }
}

impl fmt::Display for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} relation subtypes, {} event types",
            self.relations.len(),
            self.events.len()
        )
    }
}

/// Parses a one-name-per-line registry file.
pub fn parse_lines(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|line| match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        })
        .map(str::trim)
        .filter(|line| !line.is_empty())
        .map(str::to_owned)
        .collect()
}
