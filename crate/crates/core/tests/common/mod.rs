#![allow(dead_code)]

use std::path::{Path, PathBuf};

use litkg_core::ingest::{ingest_files, parse_ctd_table, link_ctd};
use litkg_core::{Execution, KnowledgeBase};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn corpus_files() -> Vec<String> {
    let mut files: Vec<String> = std::fs::read_dir(fixtures().join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| p.to_string_lossy().into_owned())
        .collect();
    files.sort();
    files
}

pub fn read(path: &str) -> std::io::Result<Vec<u8>> {
    std::fs::read(path)
}

pub fn fixture_kb() -> KnowledgeBase {
    let mut kb = KnowledgeBase::default();
    ingest_files(&mut kb, &corpus_files(), &read, Execution::Parallel).unwrap();
    kb
}

pub fn fixture_kb_with_ctd() -> KnowledgeBase {
    let mut kb = fixture_kb();
    let rows = parse_ctd_table(&std::fs::read_to_string(fixtures().join("ctd.tsv")).unwrap()).unwrap();
    link_ctd(&mut kb, &rows).unwrap();
    kb
}

pub const LOSARTAN: &str = "MESH:D008784";
pub const BENAZEPRIL: &str = "MESH:C044946";
pub const AMODIAQUINE: &str = "MESH:D000655";
pub const TP53: &str = "GENE:7157";
pub const LUNG_CANCER: &str = "MESH:D008175";
pub const CTSLP2: &str = "LOCAL:cathepsin-l-pseudogene-2";
pub const ACE2: &str = "GENE:59272";
pub const TMPRSS2: &str = "GENE:7113";
pub const IL6: &str = "GENE:3569";
pub const CTSL: &str = "GENE:1514";

pub fn covid_targets() -> Vec<String> {
    [TP53, ACE2, TMPRSS2, IL6, CTSL, CTSLP2].iter().map(|s| s.to_string()).collect()
}
