//! The `litkg` command line.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use litkg_core::evidence::{
    match_meta_query_with, parse_meta_query, ContextIndex, EmbeddingProvider, HashingProvider, SidecarProvider,
    TypeVocabulary,
};
use litkg_core::export::{export_graph, ExportFormat};
use litkg_core::figure::{alias_index, process_layout, Grounding, Layout};
use litkg_core::ingest::UpdateManifest;
use litkg_core::pathrank::{connection_subgraph_with, PathQuery, ScoringMode, DEFAULT_MAX_HOPS, DEFAULT_TOP_K};
use litkg_core::report::{generate_report, ReportEnv, ReportFormat, ReportRequest, ReportTemplates, DEFAULT_TEMPLATES};
use litkg_core::{Execution, KnowledgeBase};
use serde::Serialize;

use crate::server::{AppState, MetaQueryResponse};
use crate::store::Store;

#[derive(Debug, Parser)]
#[command(name = "litkg", version, about = "Literature knowledge graph")]
pub struct Cli {
    /// Directory holding the journal.
    #[arg(long, global = true, env = "LITKG_DATA_DIR", default_value = "litkg-data")]
    pub data_dir: PathBuf,

    /// Run everything on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest document bundles.
    Ingest {
        #[arg(required = true)]
        bundles: Vec<String>,
    },
    /// Link a CTD chemical-disease table.
    Ctd { table: PathBuf },
    /// Apply an add/remove/update manifest.
    Update { manifest: PathBuf },
    /// Print graph statistics.
    Stats,
    /// Rank paths between two entities.
    Paths {
        #[arg(long)]
        src: String,
        #[arg(long)]
        dst: String,
        #[arg(long, default_value_t = DEFAULT_MAX_HOPS)]
        hops: usize,
        #[arg(long, default_value_t = DEFAULT_TOP_K)]
        top_k: usize,
        #[arg(long, default_value = "avg")]
        mode: ScoringMode,
        #[arg(long)]
        directed: bool,
    },
    /// Retrieve sentences similar to a query.
    Evidence {
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = 10)]
        top_n: usize,
        /// Precomputed embeddings (`key<TAB>v1,v2,...`).
        #[arg(long)]
        sidecar: Option<PathBuf>,
    },
    /// Match a typed meta-query such as `DRUG inhibits GENE`.
    Metaquery {
        pattern: String,
        #[arg(long, default_value_t = 20)]
        top_n: usize,
    },
    /// Generate drug reports.
    Report {
        #[arg(long)]
        drug: String,
        /// Target entity ids, comma separated.
        #[arg(long, value_delimiter = ',')]
        targets: Vec<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Figure layouts whose groundings feed the figure question.
        #[arg(long)]
        figures: Vec<PathBuf>,
        #[arg(long)]
        generated_at: Option<String>,
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_HOPS)]
        hops: usize,
    },
    /// Dump the graph.
    Export {
        #[arg(long, default_value = "canonical")]
        format: ExportFormat,
        /// Restrict to the connection subgraph between two entities.
        #[arg(long, requires = "dst")]
        src: Option<String>,
        #[arg(long, requires = "src")]
        dst: Option<String>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long)]
        figures: Vec<PathBuf>,
        #[arg(long)]
        templates: Option<PathBuf>,
    },
}

fn print_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, v)?;
    writeln!(out)?;
    Ok(())
}

fn load_templates(path: Option<&Path>) -> Result<ReportTemplates> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => DEFAULT_TEMPLATES.to_owned(),
    };
    Ok(ReportTemplates::parse(&text)?)
}

fn load_groundings(kb: &KnowledgeBase, figures: &[PathBuf]) -> Result<Vec<Grounding>> {
    if figures.is_empty() {
        return Ok(Vec::new());
    }
    let aliases = alias_index(&kb.graph);
    let mut out = Vec::new();
    for f in figures {
        let bytes = std::fs::read(f).with_context(|| format!("reading {}", f.display()))?;
        let layout = Layout::parse(&bytes).with_context(|| f.display().to_string())?;
        out.extend(process_layout(&layout, Some(&aliases))?.grounding);
    }
    Ok(out)
}

/// File-name-safe form of an entity id.
pub fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };
    let mut store = Store::open(Some(&cli.data_dir), exec)?;
    match cli.command {
        Command::Ingest { bundles } => {
            let summaries = store.ingest(&bundles)?;
            for (path, s) in &summaries {
                writeln!(out, "{path}: {}", serde_json::to_string(s)?)?;
            }
            print_json(out, &store.kb().stats())?;
        }
        Command::Ctd { table } => print_json(out, &store.link_ctd(&table)?)?,
        Command::Update { manifest } => {
            let text = std::fs::read_to_string(&manifest).with_context(|| format!("reading {}", manifest.display()))?;
            let m: UpdateManifest = serde_json::from_str(&text).context("parsing manifest")?;
            print_json(out, &store.update(m)?)?;
        }
        Command::Stats => print_json(out, &store.kb().stats())?,
        Command::Paths { src, dst, hops, top_k, mode, directed } => {
            let q = PathQuery::new(src, dst).max_hops(hops).top_k(top_k).mode(mode).directed(directed);
            let g = &store.kb().graph;
            let sg = connection_subgraph_with(g, &q, exec)?;
            print_json(out, &sg.view(g).paths)?;
        }
        Command::Evidence { query, top_n, sidecar } => {
            let provider: Box<dyn EmbeddingProvider> = match sidecar {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    Box::new(SidecarProvider::parse(p.display().to_string(), &text)?)
                }
                None => Box::new(HashingProvider::default()),
            };
            let corpus = &store.kb().corpus;
            let index = ContextIndex::build(provider.as_ref(), corpus, exec)?;
            print_json(out, &index.rank(provider.as_ref(), corpus, &query, None, top_n)?)?;
        }
        Command::Metaquery { pattern, top_n } => {
            let corpus = &store.kb().corpus;
            let mq = parse_meta_query(&pattern, &TypeVocabulary::from_corpus(corpus))?;
            let matches = match_meta_query_with(corpus, &mq, top_n, exec);
            print_json(out, &MetaQueryResponse { query: mq.to_string(), matches })?;
        }
        Command::Report { drug, targets, out: dir, figures, generated_at, templates, hops } => {
            let kb = store.kb();
            let templates = load_templates(templates.as_deref())?;
            let groundings = load_groundings(kb, &figures)?;
            let mut env = ReportEnv::new(&templates, generated_at.unwrap_or_else(crate::now_stamp))
                .with_groundings(&groundings);
            env.exec = exec;
            let mut req = ReportRequest::new(drug, targets);
            req.max_hops = hops;
            let report = generate_report(kb, &req, &env)?;
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let stem = file_stem(&req.drug);
            for (ext, format) in [("json", ReportFormat::Structured), ("md", ReportFormat::Markdown)] {
                let path = dir.join(format!("{stem}.report.{ext}"));
                std::fs::write(&path, report.render(format)).with_context(|| format!("writing {}", path.display()))?;
                writeln!(out, "{}", path.display())?;
            }
        }
        Command::Export { format, src, dst } => {
            let g = &store.kb().graph;
            let text = match (src, dst) {
                (Some(src), Some(dst)) => {
                    let sg = connection_subgraph_with(g, &PathQuery::new(src, dst), exec)?;
                    litkg_core::export::export_subgraph(g, &sg, format)
                }
                (None, None) => export_graph(g, format),
                _ => bail!("--src and --dst go together"),
            };
            out.write_all(text.as_bytes())?;
        }
        Command::Serve { addr, figures, templates } => {
            let groundings = load_groundings(store.kb(), &figures)?;
            let state = AppState::new(store)
                .with_templates(load_templates(templates.as_deref())?)
                .with_groundings(groundings)
                .with_execution(exec);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::server::serve(addr, Arc::new(state)))?;
        }
    }
    Ok(())
}
