//! The structural facts each committed fixture was chosen for.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use semid::decomp::{c_components, decomp_ht_id, estimate, DecompOptions};
use semid::graph::parse_graph_json;
use semid::oracle::{c_tree_exists, run_criterion, Criterion, EnsembleConfig};
use semid::{CovarianceMatrix, MixedGraph};

fn read(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn fixture(name: &str) -> MixedGraph {
    parse_graph_json(&read(name)).unwrap()
}

fn labels(g: &MixedGraph, c: Criterion) -> Vec<String> {
    run_criterion(g, c, &DecompOptions::default())
        .unwrap()
        .identified
        .into_iter()
        .collect()
}

#[test]
fn subset_edge_facts() {
    let g = fixture("subset_edge.json");
    let v3 = g.node("V3").unwrap();
    let sets = g.connected_edge_sets(v3).unwrap();
    assert_eq!(sets.len(), 1);
    assert_eq!(sets[0].labels(&g), ["b", "d"]);
    assert_eq!(labels(&g, Criterion::EdgeSet), ["a"]);
    assert_eq!(labels(&g, Criterion::GHtc), ["a", "b"]);
    assert_eq!(labels(&g, Criterion::Decomp), ["a", "b"]);
}

#[test]
fn chained_subset_facts() {
    let g = fixture("chained_subset.json");
    assert_eq!(labels(&g, Criterion::EdgeSet), ["b"]);
    let status = run_criterion(&g, Criterion::GHtc, &DecompOptions::default()).unwrap();
    let a = status.certificate_for("a").unwrap();
    assert_eq!(a.y_set, ["V1"]);
    assert_eq!(a.dependencies, ["b"]);
    assert!(!status.is_identified("c"));
}

#[test]
fn decomposable_facts() {
    let g = fixture("decomposable.json");
    assert_eq!(c_components(&g).len(), 1);
    let keep: BTreeSet<_> = g.nodes().filter(|&v| g.name(v) != "v6").collect();
    let without_v6 = g.induced_subgraph(&keep);
    assert_eq!(
        c_components(&without_v6),
        [vec!["v1".to_string(), "v4".into()], vec!["v2".into(), "v3".into(), "v5".into()]]
    );
    assert!(!c_tree_exists(&g, g.node("v5").unwrap()).unwrap());
    assert_eq!(labels(&g, Criterion::GHtc), ["a"]);
    let status = decomp_ht_id(&g, &DecompOptions::default()).unwrap();
    assert_eq!(status.identified.len(), 8);
    let h = status.certificate_for("h").unwrap();
    assert!(h.round >= 2, "{h:?}");
    assert!(status.dependency_order_is_valid());
}

#[test]
fn instrument_estimates_match_truth() {
    let g = fixture("instrument.json");
    let sigma = CovarianceMatrix::from_csv_str(&read("instrument_cov.csv")).unwrap();
    let truth: BTreeMap<String, f64> = serde_json::from_str(&read("instrument_truth.json")).unwrap();
    let status = run_criterion(&g, Criterion::GHtc, &DecompOptions::default()).unwrap();
    let est = estimate(&g, &status, &sigma).unwrap();
    for (label, value) in truth {
        assert!((est.values[&label] - value).abs() < 1e-12, "{label}");
    }
}

#[test]
fn bow_and_chain() {
    assert!(labels(&fixture("bow.json"), Criterion::Decomp).is_empty());
    let chain = fixture("chain.json");
    assert_eq!(labels(&chain, Criterion::Htc).len(), chain.directed_edges().len());
}

#[test]
fn ensemble_config_is_valid() {
    let cfg: EnsembleConfig = serde_json::from_str(&read("ensemble.json")).unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.seed, 42);
}
