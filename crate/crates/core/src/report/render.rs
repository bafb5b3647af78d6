use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{DrugReport, ItemKind};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Structured,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "structured" | "json" => Ok(ReportFormat::Structured),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

impl DrugReport {
    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Structured => render_structured(self),
            ReportFormat::Markdown => render_markdown(self),
        }
    }
}

/// Pretty JSON with a trailing newline. Field order follows the type
/// definitions, so equal reports render to equal bytes.
pub fn render_structured(report: &DrugReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn parse_structured(text: &str) -> serde_json::Result<DrugReport> {
    serde_json::from_str(text)
}

pub fn render_markdown(report: &DrugReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Drug repurposing report: {} ({})\n", report.drug_name, report.request.drug);
    let _ = writeln!(s, "Generated: {}", report.generated_at);
    let targets: Vec<&str> = report.request.targets.iter().map(String::as_str).collect();
    let _ = writeln!(s, "Targets: {}", targets.join(", "));
    for a in &report.answers {
        let _ = writeln!(s, "\n## {}. {}\n", a.number, a.question);
        for item in &a.items {
            if item.kind == ItemKind::NotFound {
                let _ = writeln!(s, "- Not found");
                continue;
            }
            let mut line = format!("- {}", item.text.replace('\n', " "));
            for r in &item.evidence {
                let _ = write!(line, " [{}:{}]", r.paper_id, r.sentence_idx);
            }
            let _ = writeln!(s, "{line}");
        }
    }
    if !report.subgraphs.is_empty() {
        let _ = writeln!(s, "\n## Connection subgraphs");
        for t in &report.subgraphs {
            let _ = writeln!(s, "\n### {}\n", t.target);
            match (&t.subgraph, &t.error) {
                (Some(sg), _) => {
                    for p in &sg.paths {
                        let _ = writeln!(s, "- {} (score {:.3})", p.nodes.join(" - "), p.score);
                    }
                    if sg.truncated {
                        let _ = writeln!(s, "- (enumeration truncated)");
                    }
                }
                (None, Some(e)) => {
                    let _ = writeln!(s, "- {e}");
                }
                (None, None) => {}
            }
        }
    }
    s
}
