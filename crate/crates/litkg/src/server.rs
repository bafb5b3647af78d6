//! HTTP service over knowledge-base snapshots.
//!
//! Readers grab the current snapshot `Arc` and never wait on the writer:
//! `/admin/update` builds the next knowledge base off to the side and swaps
//! it in with one pointer store.

use std::collections::BTreeSet;
use std::net::SocketAddr;
use std::sync::{Arc, OnceLock, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Path, RawQuery, Request, State};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use litkg_core::corpus::SentenceId;
use litkg_core::evidence::{
    match_meta_query_with, parse_meta_query, ContextIndex, EmbeddingProvider, EvidenceError, EvidenceHit,
    HashingProvider, MetaMatch, TypeVocabulary,
};
use litkg_core::export::{export_graph, node_color, ExportFormat};
use litkg_core::facets::{facet_counts, heatmap, ConstraintSet, FacetCounts, FacetKind, HeatmapMatrix};
use litkg_core::figure::Grounding;
use litkg_core::graph::{EntityRecord, Graph};
use litkg_core::ingest::{UpdateManifest, UpdateSummary};
use litkg_core::pathrank::{connection_subgraph_with, PathQuery, PathView, ScoringMode, SubgraphView};
use litkg_core::report::{generate_report, ReportEnv, ReportFormat, ReportRequest, ReportTemplates, DEFAULT_TEMPLATES};
use litkg_core::{Execution, GraphStats, KnowledgeBase};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use crate::error::ApiError;
use crate::store::Store;

type ApiResult<T> = Result<T, ApiError>;

/// One immutable knowledge-base version plus lazily built indexes.
pub struct Snapshot {
    pub kb: Arc<KnowledgeBase>,
    index: OnceLock<Result<ContextIndex, EvidenceError>>,
    vocab: OnceLock<TypeVocabulary>,
}

impl Snapshot {
    fn new(kb: Arc<KnowledgeBase>) -> Self {
        Self {
            kb,
            index: OnceLock::new(),
            vocab: OnceLock::new(),
        }
    }
}

pub struct AppState {
    snapshot: RwLock<Arc<Snapshot>>,
    writer: Mutex<Store>,
    provider: Arc<dyn EmbeddingProvider>,
    templates: ReportTemplates,
    groundings: Vec<Grounding>,
    exec: Execution,
}

impl AppState {
    pub fn new(store: Store) -> Self {
        Self {
            snapshot: RwLock::new(Arc::new(Snapshot::new(store.kb().clone()))),
            writer: Mutex::new(store),
            provider: Arc::new(HashingProvider::default()),
            templates: ReportTemplates::parse(DEFAULT_TEMPLATES).expect("bundled templates parse"),
            groundings: Vec::new(),
            exec: Execution::default(),
        }
    }

    pub fn with_provider(mut self, provider: Arc<dyn EmbeddingProvider>) -> Self {
        self.provider = provider;
        self
    }

    pub fn with_templates(mut self, templates: ReportTemplates) -> Self {
        self.templates = templates;
        self
    }

    pub fn with_groundings(mut self, groundings: Vec<Grounding>) -> Self {
        self.groundings = groundings;
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    /// The current snapshot. Holding it pins that version for the whole
    /// request.
    pub fn snapshot(&self) -> Arc<Snapshot> {
        self.snapshot.read().expect("snapshot lock poisoned").clone()
    }

    fn publish(&self, kb: Arc<KnowledgeBase>) {
        *self.snapshot.write().expect("snapshot lock poisoned") = Arc::new(Snapshot::new(kb));
    }

    /// Applies a manifest through the single writer and publishes the result.
    pub async fn update(self: &Arc<Self>, manifest: UpdateManifest) -> ApiResult<UpdateSummary> {
        let mut store = self.writer.lock().await;
        let mut next = store.clone();
        let (next, summary) = tokio::task::spawn_blocking(move || {
            let r = next.update(manifest);
            (next, r)
        })
        .await
        .map_err(|e| ApiError::new("Internal", e.to_string()))?;
        let summary = summary?;
        *store = next;
        self.publish(store.kb().clone());
        Ok(summary)
    }
}

/// Runs CPU-bound work off the async workers.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new("Internal", e.to_string()))?
}

/// JSON request body whose rejections use the error envelope.
struct Body<T>(T);

impl<S, T> FromRequest<S> for Body<T>
where
    Json<T>: FromRequest<S, Rejection = JsonRejection>,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Body(v)),
            Err(e) => Err(ApiError::new("SchemaError", e.body_text())),
        }
    }
}

/// Decoded query string; keys may repeat.
#[derive(Debug, Default)]
struct Params(Vec<(String, String)>);

impl Params {
    fn parse(raw: Option<String>) -> Self {
        Params(
            form_urlencoded::parse(raw.unwrap_or_default().as_bytes())
                .map(|(k, v)| (k.into_owned(), v.into_owned()))
                .collect(),
        )
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn all(&self, key: &str) -> impl Iterator<Item = &str> + '_ {
        let key = key.to_owned();
        self.0.iter().filter(move |(k, _)| *k == key).map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str) -> ApiResult<&str> {
        self.get(key)
            .filter(|v| !v.trim().is_empty())
            .ok_or_else(|| ApiError::new("InvalidQuery", format!("missing query parameter `{key}`")))
    }

    fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> ApiResult<T> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| ApiError::new("InvalidQuery", format!("bad value `{v}` for `{key}`"))),
        }
    }

    /// `c=facet:value`, repeated; `constraints=` is accepted as a synonym.
    fn constraints(&self) -> ApiResult<ConstraintSet> {
        Ok(ConstraintSet::parse_all(self.all("c").chain(self.all("constraints")))?)
    }

    /// Comma-separated and repeated values, merged.
    fn list(&self, key: &str) -> BTreeSet<String> {
        self.all(key)
            .flat_map(|v| v.split(','))
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(str::to_owned)
            .collect()
    }
}

fn path_query(p: &Params) -> ApiResult<PathQuery> {
    let mut q = PathQuery::new(p.require("src")?, p.require("dst")?)
        .max_hops(p.parse_or("hops", litkg_core::pathrank::DEFAULT_MAX_HOPS)?)
        .top_k(p.parse_or("top_k", litkg_core::pathrank::DEFAULT_TOP_K)?)
        .directed(p.parse_or("directed", false)?);
    if let Some(m) = p.get("mode") {
        q = q.mode(m.parse::<ScoringMode>()?);
    }
    q.min_edge_support = p.parse_or("min_support", 1)?;
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityView {
    #[serde(flatten)]
    pub entity: EntityRecord,
    pub color: String,
}

impl EntityView {
    fn new(entity: EntityRecord) -> Self {
        Self {
            color: node_color(entity.coarse_type).to_owned(),
            entity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathsResponse {
    pub src: String,
    pub dst: String,
    pub mode: ScoringMode,
    pub truncated: bool,
    pub paths: Vec<PathView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphResponse {
    #[serde(flatten)]
    pub subgraph: SubgraphView,
    pub entities: Vec<EntityView>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct EvidenceRequest {
    pub query: String,
    #[serde(default = "default_top_n")]
    pub top_n: usize,
    #[serde(default)]
    pub candidates: Option<BTreeSet<SentenceId>>,
}

fn default_top_n() -> usize {
    10
}

#[derive(Debug, Clone, Deserialize)]
pub struct MetaQueryRequest {
    pub pattern: String,
    #[serde(default = "default_meta_top_n")]
    pub top_n: usize,
}

fn default_meta_top_n() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaQueryResponse {
    pub query: String,
    pub matches: Vec<MetaMatch>,
}

/// Entities whose id, name or alias contains `q` (case-insensitive). Exact
/// matches first, then prefix matches, then the rest, each by name.
pub fn search_entities(graph: &Graph, q: &str, limit: usize) -> Vec<EntityView> {
    let q = q.trim().to_lowercase();
    let mut hits: Vec<(u8, EntityRecord)> = graph
        .entities()
        .filter_map(|e| {
            let keys: Vec<String> = std::iter::once(e.id.to_lowercase())
                .chain(std::iter::once(e.name.to_lowercase()))
                .chain(e.aliases.iter().map(|a| a.to_lowercase()))
                .collect();
            let rank = if q.is_empty() {
                2
            } else if keys.contains(&q) {
                0
            } else if keys.iter().any(|k| k.starts_with(&q)) {
                1
            } else if keys.iter().any(|k| k.contains(&q)) {
                2
            } else {
                return None;
            };
            Some((rank, e))
        })
        .collect();
    hits.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.name.cmp(&b.1.name)).then_with(|| a.1.id.cmp(&b.1.id)));
    hits.into_iter().take(limit).map(|(_, e)| EntityView::new(e)).collect()
}

async fn stats(State(s): State<Arc<AppState>>) -> Json<GraphStats> {
    Json(s.snapshot().kb.stats())
}

async fn entities(State(s): State<Arc<AppState>>, RawQuery(raw): RawQuery) -> ApiResult<Json<Vec<EntityView>>> {
    let p = Params::parse(raw);
    let limit = p.parse_or("limit", 20usize)?;
    Ok(Json(search_entities(&s.snapshot().kb.graph, p.get("q").unwrap_or(""), limit)))
}

async fn paths(State(s): State<Arc<AppState>>, RawQuery(raw): RawQuery) -> ApiResult<Json<PathsResponse>> {
    let q = path_query(&Params::parse(raw))?;
    let snap = s.snapshot();
    let exec = s.exec;
    blocking(move || {
        let sg = connection_subgraph_with(&snap.kb.graph, &q, exec)?;
        let view = sg.view(&snap.kb.graph);
        Ok(Json(PathsResponse {
            src: view.src,
            dst: view.dst,
            mode: view.mode,
            truncated: view.truncated,
            paths: view.paths,
        }))
    })
    .await
}

async fn subgraph(State(s): State<Arc<AppState>>, RawQuery(raw): RawQuery) -> ApiResult<Json<SubgraphResponse>> {
    let q = path_query(&Params::parse(raw))?;
    let snap = s.snapshot();
    let exec = s.exec;
    blocking(move || {
        let g = &snap.kb.graph;
        let sg = connection_subgraph_with(g, &q, exec)?;
        let entities = sg.nodes.iter().filter_map(|id| g.entity(id)).map(EntityView::new).collect();
        Ok(Json(SubgraphResponse {
            subgraph: sg.view(g),
            entities,
        }))
    })
    .await
}

async fn evidence(State(s): State<Arc<AppState>>, Body(req): Body<EvidenceRequest>) -> ApiResult<Json<Vec<EvidenceHit>>> {
    let snap = s.snapshot();
    let provider = s.provider.clone();
    let exec = s.exec;
    blocking(move || {
        let index = snap
            .index
            .get_or_init(|| ContextIndex::build(provider.as_ref(), &snap.kb.corpus, exec))
            .as_ref()
            .map_err(|e| ApiError::from(e.clone()))?;
        Ok(Json(index.rank(
            provider.as_ref(),
            &snap.kb.corpus,
            &req.query,
            req.candidates.as_ref(),
            req.top_n,
        )?))
    })
    .await
}

async fn metaquery(
    State(s): State<Arc<AppState>>,
    Body(req): Body<MetaQueryRequest>,
) -> ApiResult<Json<MetaQueryResponse>> {
    let snap = s.snapshot();
    let exec = s.exec;
    blocking(move || {
        let vocab = snap.vocab.get_or_init(|| TypeVocabulary::from_corpus(&snap.kb.corpus));
        let mq = parse_meta_query(&req.pattern, vocab)?;
        let matches = match_meta_query_with(&snap.kb.corpus, &mq, req.top_n, exec);
        Ok(Json(MetaQueryResponse {
            query: mq.to_string(),
            matches,
        }))
    })
    .await
}

async fn facets(State(s): State<Arc<AppState>>, RawQuery(raw): RawQuery) -> ApiResult<Json<FacetCounts>> {
    let p = Params::parse(raw);
    let kind: FacetKind = p.require("kind")?.parse()?;
    let limit = match p.get("limit") {
        None => None,
        Some(_) => Some(p.parse_or("limit", 0usize)?),
    };
    let cs = p.constraints()?;
    Ok(Json(facet_counts(&s.snapshot().kb.graph, &cs, kind, limit)))
}

async fn heatmap_handler(State(s): State<Arc<AppState>>, RawQuery(raw): RawQuery) -> ApiResult<Json<HeatmapMatrix>> {
    let p = Params::parse(raw);
    let cs = p.constraints()?;
    Ok(Json(heatmap(&s.snapshot().kb.graph, &cs, p.require("row")?, p.require("col")?)?))
}

async fn report(
    State(s): State<Arc<AppState>>,
    Path(drug): Path<String>,
    RawQuery(raw): RawQuery,
) -> ApiResult<Response> {
    let p = Params::parse(raw);
    let mut req = ReportRequest::new(drug, p.list("targets"));
    req.max_hops = p.parse_or("hops", req.max_hops)?;
    req.top_k = p.parse_or("top_k", req.top_k)?;
    req.evidence_per_answer = p.parse_or("evidence", req.evidence_per_answer)?;
    if let Some(m) = p.get("mode") {
        req.mode = m.parse()?;
    }
    let format = match p.get("format").unwrap_or("json") {
        "json" | "structured" => ReportFormat::Structured,
        "markdown" | "md" => ReportFormat::Markdown,
        other => return Err(ApiError::new("UnknownFormat", format!("unknown report format `{other}`"))),
    };
    let generated_at = p.get("generated_at").map_or_else(crate::now_stamp, str::to_owned);
    let snap = s.snapshot();
    let state = s.clone();
    blocking(move || {
        let mut env = ReportEnv::new(&state.templates, generated_at).with_groundings(&state.groundings);
        env.exec = state.exec;
        let r = generate_report(&snap.kb, &req, &env)?;
        let content_type = match format {
            ReportFormat::Structured => "application/json",
            ReportFormat::Markdown => "text/markdown; charset=utf-8",
        };
        Ok(([(header::CONTENT_TYPE, content_type)], r.render(format)).into_response())
    })
    .await
}

async fn export(State(s): State<Arc<AppState>>, RawQuery(raw): RawQuery) -> ApiResult<Response> {
    let p = Params::parse(raw);
    let format: ExportFormat = p.get("format").unwrap_or("canonical").parse()?;
    let content_type = match format {
        ExportFormat::Canonical => "application/x-ndjson",
        ExportFormat::Dot => "text/vnd.graphviz",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], export_graph(&s.snapshot().kb.graph, format)).into_response())
}

async fn admin_update(
    State(s): State<Arc<AppState>>,
    Body(manifest): Body<UpdateManifest>,
) -> ApiResult<Json<UpdateSummary>> {
    Ok(Json(s.update(manifest).await?))
}

async fn not_found() -> ApiError {
    ApiError::new("NotFound", "no such endpoint")
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/stats", get(stats))
        .route("/entities", get(entities))
        .route("/paths", get(paths))
        .route("/subgraph", get(subgraph))
        .route("/evidence", post(evidence))
        .route("/metaquery", post(metaquery))
        .route("/facets", get(facets))
        .route("/heatmap", get(heatmap_handler))
        .route("/report/{drug}", get(report))
        .route("/export", get(export))
        .route("/admin/update", post(admin_update))
        .fallback(not_found)
        .with_state(state)
}

/// Serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("litkg listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
