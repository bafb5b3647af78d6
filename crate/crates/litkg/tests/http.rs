use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use litkg::server::{router, search_entities, AppState};
use litkg::store::Store;
use litkg_core::export::{export_graph, node_color, ExportFormat};
use litkg_core::ingest::{ingest_files, link_ctd, parse_ctd_table};
use litkg_core::{Execution, KnowledgeBase};
use serde_json::{json, Value};
use tower::ServiceExt;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn corpus_files() -> Vec<String> {
    let mut files: Vec<String> = std::fs::read_dir(fixtures().join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path().to_string_lossy().into_owned())
        .collect();
    files.sort();
    files
}

fn fixture_kb() -> KnowledgeBase {
    let mut kb = KnowledgeBase::default();
    ingest_files(&mut kb, &corpus_files(), &|p: &str| std::fs::read(p), Execution::Parallel).unwrap();
    let rows = parse_ctd_table(&std::fs::read_to_string(fixtures().join("ctd.tsv")).unwrap()).unwrap();
    link_ctd(&mut kb, &rows).unwrap();
    kb
}

fn app() -> (Arc<AppState>, Router) {
    let state = Arc::new(AppState::new(Store::in_memory(fixture_kb())));
    (state.clone(), router(state))
}

async fn send(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    (status, to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec())
}

async fn get_json(app: &Router, uri: &str) -> Value {
    let (status, body) = send(app, Method::GET, uri, None).await;
    assert_eq!(status, StatusCode::OK, "{uri}: {}", String::from_utf8_lossy(&body));
    serde_json::from_slice(&body).unwrap()
}

#[tokio::test]
async fn entity_search_ranks_exact_matches_first() {
    let (_, app) = app();
    let hits = get_json(&app, "/entities?q=losartan").await;
    assert_eq!(hits[0]["id"], "MESH:D008784");
    assert_eq!(hits[0]["color"], node_color(litkg_core::CoarseType::Chemical));
    let limited = get_json(&app, "/entities?q=&limit=3").await;
    assert_eq!(limited.as_array().unwrap().len(), 3);
    let kb = fixture_kb();
    assert!(search_entities(&kb.graph, "no such thing", 10).is_empty());
}

#[tokio::test]
async fn subgraph_nodes_carry_type_colors() {
    let (_, app) = app();
    let sg = get_json(&app, "/subgraph?src=MESH:D008784&dst=MESH:D008175&hops=2").await;
    let entities = sg["entities"].as_array().unwrap();
    assert!(entities.iter().any(|e| e["id"] == "GENE:7157"));
    for e in entities {
        let t: litkg_core::CoarseType = serde_json::from_value(e["coarse_type"].clone()).unwrap();
        assert_eq!(e["color"], node_color(t));
    }
    assert_eq!(sg["src"], "MESH:D008784");
    assert!(!sg["edges"].as_array().unwrap().is_empty());

    let paths = get_json(&app, "/paths?src=MESH:D008784&dst=MESH:D008175&hops=2&top_k=1&mode=sum").await;
    assert_eq!(paths["paths"].as_array().unwrap().len(), 1);
    assert_eq!(paths["mode"], "SumSupport");
}

#[tokio::test]
async fn evidence_and_metaquery() {
    let (_, app) = app();
    let (status, body) =
        send(&app, Method::POST, "/evidence", Some(json!({"query": "losartan lung injury", "top_n": 3}))).await;
    assert_eq!(status, StatusCode::OK);
    let hits: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(hits.as_array().unwrap().len(), 3);
    let sims: Vec<f64> = hits.as_array().unwrap().iter().map(|h| h["similarity"].as_f64().unwrap()).collect();
    assert!(sims.windows(2).all(|w| w[0] >= w[1]));

    let candidates = json!([{"paper_id": "paper02", "sentence_idx": 3}]);
    let (_, body) =
        send(&app, Method::POST, "/evidence", Some(json!({"query": "mice", "candidates": candidates}))).await;
    let hits: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(hits.as_array().unwrap().len(), 1);
    assert_eq!(hits[0]["sentence"]["paper_id"], "paper02");

    let (status, body) =
        send(&app, Method::POST, "/metaquery", Some(json!({"pattern": "CHEMICAL decreases GENE", "top_n": 5}))).await;
    assert_eq!(status, StatusCode::OK);
    let m: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(m["query"], "CHEMICAL decreases GENE");
    assert!(!m["matches"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn facets_and_heatmap_take_repeated_constraints() {
    let (_, app) = app();
    let all = get_json(&app, "/facets?kind=EventType").await;
    let phos = all["entries"].as_array().unwrap().iter().find(|e| e["term"] == "Phosphorylation").unwrap();
    assert!(phos["count"].as_u64().unwrap() > 0);
    let narrowed = get_json(&app, "/facets?kind=Action&c=EntityName:TNF&c=CoarseType:Disease").await;
    let wide = get_json(&app, "/facets?kind=Action&c=EntityName:TNF").await;
    let total = |v: &Value| v["entries"].as_array().unwrap().iter().map(|e| e["count"].as_u64().unwrap()).sum::<u64>();
    assert!(total(&narrowed) <= total(&wide));
    let synonym = get_json(&app, "/facets?kind=Action&constraints=EntityName:TNF&c=CoarseType:Disease").await;
    assert_eq!(synonym, narrowed);

    let hm = get_json(&app, "/heatmap?row=Gene&col=Disease").await;
    assert_eq!(hm["row_type"], "Gene");
    assert!(!hm["cells"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn report_in_both_formats() {
    let (_, app) = app();
    let uri = "/report/MESH:D008784?targets=GENE:7157,GENE:59272&generated_at=2020-06-01T00:00:00Z";
    let r = get_json(&app, uri).await;
    assert_eq!(r["answers"].as_array().unwrap().len(), 11);
    assert_eq!(r["generated_at"], "2020-06-01T00:00:00Z");
    let (status, md) = send(&app, Method::GET, &format!("{uri}&format=markdown"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(String::from_utf8(md).unwrap().starts_with("# Drug repurposing report: Losartan"));
}

#[tokio::test]
async fn update_swaps_the_snapshot() {
    let (state, app) = app();
    let before = state.snapshot();
    let (status, body) = send(&app, Method::POST, "/admin/update", Some(json!({"removed": ["paper07"]}))).await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&body));
    let summary: Value = serde_json::from_slice(&body).unwrap();
    assert!(summary["removed"].get("paper07").is_some());

    // The old snapshot is untouched; new requests see the removal.
    assert!(before.kb.corpus.paper("paper07").is_some());
    assert!(state.snapshot().kb.corpus.paper("paper07").is_none());
    let stats = get_json(&app, "/stats").await;
    assert_eq!(stats["papers"], 19);

    let v2 = fixtures().join("update/paper07_v2.json");
    let (status, _) = send(&app, Method::POST, "/admin/update", Some(json!({"added": [v2]}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(get_json(&app, "/stats").await["papers"], 20);
}

#[tokio::test]
async fn readers_run_while_an_update_is_applied() {
    let (state, app) = app();
    let mut readers = Vec::new();
    for _ in 0..8 {
        let app = app.clone();
        readers.push(tokio::spawn(async move {
            for _ in 0..5 {
                let s = get_json(&app, "/stats").await;
                let n = s["papers"].as_u64().unwrap();
                assert!(n == 20 || n == 19, "torn read: {n}");
            }
        }));
    }
    let updater = {
        let state = state.clone();
        tokio::spawn(async move {
            state
                .update(litkg_core::ingest::UpdateManifest {
                    removed: vec!["paper03".into()],
                    ..Default::default()
                })
                .await
                .unwrap()
        })
    };
    for r in readers {
        r.await.unwrap();
    }
    updater.await.unwrap();
    assert_eq!(state.snapshot().kb.stats().papers, 19);
}

#[tokio::test]
async fn export_formats() {
    let (_, app) = app();
    let (status, body) = send(&app, Method::GET, "/export?format=dot", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(String::from_utf8(body).unwrap().starts_with("digraph"));
    let (status, body) = send(&app, Method::GET, "/export", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(String::from_utf8(body).unwrap(), export_graph(&fixture_kb().graph, ExportFormat::Canonical));
}

#[tokio::test]
async fn malformed_json_uses_the_envelope() {
    let (_, app) = app();
    let req = Request::builder()
        .method(Method::POST)
        .uri("/metaquery")
        .header("content-type", "application/json")
        .body(Body::from("{not json"))
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
    let body: Value = serde_json::from_slice(&to_bytes(resp.into_body(), usize::MAX).await.unwrap()).unwrap();
    assert_eq!(body["error"]["code"], "SchemaError");
}
