use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ReportError, Result, QUESTION_COUNT};
use crate::registry::Registry;

pub const DEFAULT_TEMPLATES: &str = include_str!("../../data/report_templates.txt");

/// Stands for each drug alias inside a template query.
pub const DRUG_SLOT: &str = "DRUGNAME";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionTemplate {
    pub queries: Vec<String>,
    pub subtypes: Vec<String>,
}

/// Per-question meta-query strings and subtype sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportTemplates {
    pub questions: BTreeMap<u8, QuestionTemplate>,
}

impl ReportTemplates {
    pub fn parse(text: &str) -> Result<Self> {
        let mut questions: BTreeMap<u8, QuestionTemplate> = BTreeMap::new();
        let mut current: Option<u8> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |message: String| ReportError::Template { line: i + 1, message };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(inner) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let n = inner
                    .trim()
                    .strip_prefix('q')
                    .and_then(|n| n.parse::<u8>().ok())
                    .filter(|n| (1..=QUESTION_COUNT).contains(n))
                    .ok_or_else(|| err(format!("bad section header `{line}`")))?;
                questions.entry(n).or_default();
                current = Some(n);
                continue;
            }
            let n = current.ok_or_else(|| err("entry before any [qN] header".into()))?;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            let value = value.trim();
            let slot = questions.entry(n).or_default();
            match key.trim() {
                "query" => {
                    let q = value
                        .strip_prefix('"')
                        .and_then(|v| v.strip_suffix('"'))
                        .ok_or_else(|| err("query must be double-quoted".into()))?;
                    if q.trim().is_empty() {
                        return Err(err("empty query".into()));
                    }
                    slot.queries.push(q.to_owned());
                }
                "subtypes" => slot.subtypes.extend(
                    value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::to_owned),
                ),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        Ok(Self { questions })
    }

    pub fn question(&self, n: u8) -> Option<&QuestionTemplate> {
        self.questions.get(&n)
    }

    pub fn subtypes(&self, n: u8) -> &[String] {
        self.question(n).map_or(&[], |q| &q.subtypes)
    }

    pub fn queries(&self, n: u8) -> &[String] {
        self.question(n).map_or(&[], |q| &q.queries)
    }

    /// Fails on the first subtype the registry does not know.
    pub fn check(&self, registry: &Registry) -> Result<()> {
        for (n, q) in &self.questions {
            if let Some(s) = q.subtypes.iter().find(|s| !registry.has_relation(s)) {
                return Err(ReportError::Template {
                    line: 0,
                    message: format!("[q{n}] subtype `{s}` is not in the registry"),
                });
            }
        }
        Ok(())
    }
}
