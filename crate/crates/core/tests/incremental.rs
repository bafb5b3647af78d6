mod common;

use common::*;
use litkg_core::ingest::{apply_update, ingest_files, IngestError, UpdateManifest};
use litkg_core::{Execution, KnowledgeBase};
use proptest::prelude::*;

fn build(files: &[String]) -> KnowledgeBase {
    let mut kb = KnowledgeBase::default();
    ingest_files(&mut kb, files, &read, Execution::Sequential).unwrap();
    kb
}

fn paper_id(path: &str) -> String {
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap();
    v["paper_id"].as_str().unwrap().to_owned()
}

#[test]
fn removing_a_paper_equals_never_ingesting_it() {
    let files = corpus_files();
    for victim in [0usize, 1, 3, 6] {
        let mut kb = build(&files);
        kb.remove_paper(&paper_id(&files[victim]));
        let mut rest = files.clone();
        rest.remove(victim);
        assert_eq!(kb.to_canonical_string(), build(&rest).to_canonical_string(), "victim {victim}");
    }
}

#[test]
fn ingest_order_does_not_matter() {
    let files = corpus_files();
    let mut rev = files.clone();
    rev.reverse();
    assert_eq!(build(&files).to_canonical_string(), build(&rev).to_canonical_string());
}

#[test]
fn update_replaces_a_paper() {
    let files = corpus_files();
    let v2 = fixtures().join("update/paper07_v2.json").to_string_lossy().into_owned();
    let mut kb = build(&files);
    let manifest = UpdateManifest {
        updated: vec![v2.clone()],
        ..Default::default()
    };
    let s = apply_update(&mut kb, &manifest, &read, Execution::Sequential).unwrap();
    assert_eq!(s.updated, vec!["paper07".to_string()]);
    assert!(s.failed.is_empty());

    let mut expected: Vec<String> = files.into_iter().filter(|f| !f.ends_with("paper07.json")).collect();
    expected.push(v2);
    assert_eq!(kb.to_canonical_string(), build(&expected).to_canonical_string());
}

#[test]
fn overlapping_lists_abort_before_mutation() {
    let files = corpus_files();
    let mut kb = build(&files);
    let before = kb.to_canonical_string();
    let manifest = UpdateManifest {
        removed: vec!["paper07".into()],
        updated: vec![fixtures().join("update/paper07_v2.json").to_string_lossy().into_owned()],
        ..Default::default()
    };
    let err = apply_update(&mut kb, &manifest, &read, Execution::Sequential).unwrap_err();
    assert!(matches!(err, IngestError::OverlappingLists(ref ids) if ids == &["paper07".to_string()]));
    assert_eq!(kb.to_canonical_string(), before);
}

#[test]
fn failures_are_per_paper() {
    let files = corpus_files();
    let mut kb = build(&files[..5]);
    let manifest = UpdateManifest {
        added: vec!["/nonexistent/bundle.json".into(), files[6].clone()],
        removed: vec!["not-a-paper".into()],
        ..Default::default()
    };
    let s = apply_update(&mut kb, &manifest, &read, Execution::Sequential).unwrap();
    assert_eq!(s.failed.len(), 1);
    assert_eq!(s.failed[0].code, "IoError");
    assert_eq!(s.added, vec![paper_id(&files[6])]);
    assert_eq!(s.removed["not-a-paper"], Default::default());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn remove_is_inverse_of_ingest(keep in proptest::collection::vec(any::<bool>(), 20), drop in proptest::collection::vec(any::<bool>(), 20)) {
        let files = corpus_files();
        let chosen: Vec<String> = files.iter().zip(&keep).filter(|(_, k)| **k).map(|(f, _)| f.clone()).collect();
        let mut kb = build(&chosen);
        let mut remaining = Vec::new();
        for (f, d) in chosen.iter().zip(&drop) {
            if *d {
                kb.remove_paper(&paper_id(f));
            } else {
                remaining.push(f.clone());
            }
        }
        prop_assert_eq!(kb.to_canonical_string(), build(&remaining).to_canonical_string());
        prop_assert_eq!(kb.stats(), build(&remaining).stats());
    }
}
