use super::*;
use crate::htc::ht_id;
use crate::linalg::{implied_covariance, ModelInstance};

fn set(g: &MixedGraph, n: &[&str]) -> BTreeSet<NodeId> {
    n.iter().map(|x| g.node(x).unwrap()).collect()
}

fn chain() -> MixedGraph {
    MixedGraph::from_parts(&["z", "x", "y"], &[("z", "x", "a"), ("x", "y", "b")], &[]).unwrap()
}

fn instrument() -> (MixedGraph, ModelInstance) {
    let g = MixedGraph::from_parts(
        &["z", "x", "y"],
        &[("z", "x", "a"), ("x", "y", "b")],
        &[("x", "y")],
    )
    .unwrap();
    let mut m = ModelInstance::identity(3);
    m.set_coefficient(&g, "a", 0.8);
    m.set_coefficient(&g, "b", 0.5);
    m.omega[(1, 2)] = 0.3;
    m.omega[(2, 1)] = 0.3;
    (g, m)
}

#[test]
fn sub_model_graph_exogenizes_parents() {
    let (g, _) = instrument();
    let sub = sub_model_graph(&g, &set(&g, &["x", "y"])).unwrap();
    assert_eq!(sub.names(), g.names());
    assert_eq!(sub.directed_edges().len(), 2);
    assert_eq!(sub.bidirected_edges().len(), 1);
    let star = sub_model_graph(&g, &set(&g, &["z"])).unwrap();
    assert_eq!(star.names(), &["z".to_string()]);
    assert!(sub_model_graph(&g, &set(&g, &["x"])).is_err());
}

#[test]
fn whole_graph_component_returns_sigma() {
    let g = MixedGraph::from_parts(&["x", "y"], &[("x", "y", "b")], &[("x", "y")]).unwrap();
    let mut m = ModelInstance::identity(2);
    m.set_coefficient(&g, "b", 0.7);
    m.omega[(0, 1)] = 0.2;
    m.omega[(1, 0)] = 0.2;
    let sigma = implied_covariance(&g, &m).unwrap();
    let order = g.topological_order().unwrap();
    let sub = sub_model_covariance(&sigma, &g, &g.nodes().collect(), &order).unwrap();
    assert_eq!(sub, sigma);
}

#[test]
fn markovian_singleton_makes_parents_independent() {
    let g = chain();
    let mut m = ModelInstance::identity(3);
    m.set_coefficient(&g, "a", 1.0);
    m.set_coefficient(&g, "b", 1.0);
    let sigma = implied_covariance(&g, &m).unwrap();
    let order = g.topological_order().unwrap();
    let sub = sub_model_covariance(&sigma, &g, &set(&g, &["y"]), &order).unwrap();
    assert_eq!(sub.nodes(), &["x".to_string(), "y".to_string()]);
    // x keeps its marginal variance 2; y = x + e with unit error.
    assert!((sub.get("x", "x").unwrap() - 2.0).abs() < 1e-12);
    assert!((sub.get("x", "y").unwrap() - 2.0).abs() < 1e-12);
    assert!((sub.get("y", "y").unwrap() - 3.0).abs() < 1e-12);
}

#[test]
fn order_must_be_topological() {
    let g = chain();
    let sigma = implied_covariance(&g, &ModelInstance::identity(3)).unwrap();
    let bad: Vec<NodeId> = g.topological_order().unwrap().into_iter().rev().collect();
    let err = sub_model_covariance(&sigma, &g, &set(&g, &["y"]), &bad).unwrap_err();
    assert!(matches!(err, Error::Graph(GraphError::NotTopological(_))));
}

#[test]
fn descendant_removal() {
    let g = chain();
    let sigma = implied_covariance(&g, &ModelInstance::identity(3)).unwrap();
    let (sub, cov) = remove_descendants(&g, &sigma, &set(&g, &["y"])).unwrap();
    assert_eq!(sub.names(), &["z".to_string(), "x".to_string()]);
    assert_eq!(cov.dim(), 2);
    assert_eq!(cov.get("z", "x").unwrap(), sigma.get("z", "x").unwrap());
    assert!(matches!(
        remove_descendants(&g, &sigma, &set(&g, &["x"])),
        Err(Error::Graph(GraphError::NotDescendantClosed(_)))
    ));
    assert!(remove_descendants(&g, &sigma, &BTreeSet::new()).is_err());
}

#[test]
fn instrument_estimates() {
    let (g, m) = instrument();
    let sigma = implied_covariance(&g, &m).unwrap();
    let status = decomp_ht_id(&g, &DecompOptions::default()).unwrap();
    assert_eq!(status.identified, ht_id(&g, HtcMode::General).identified);
    let est = estimate(&g, &status, &sigma).unwrap();
    assert!((est.values["b"] - 0.5).abs() < 1e-12);
    assert!((est.values["a"] - 0.8).abs() < 1e-12);
}

#[test]
fn chain_regression_estimate() {
    let g = chain();
    let mut m = ModelInstance::identity(3);
    m.set_coefficient(&g, "a", 1.0);
    m.set_coefficient(&g, "b", 1.0);
    let sigma = implied_covariance(&g, &m).unwrap();
    let est = estimate(&g, &ht_id(&g, HtcMode::General), &sigma).unwrap();
    assert!((est.values["b"] - 1.0).abs() < 1e-12);
}

#[test]
fn bow_stays_unidentified() {
    let g = MixedGraph::from_parts(&["x", "y"], &[("x", "y", "b")], &[("x", "y")]).unwrap();
    assert!(decomp_ht_id(&g, &DecompOptions::default()).unwrap().identified.is_empty());
}

#[test]
fn bounds_and_cycles_are_rejected() {
    let g = chain();
    let small = DecompOptions { max_nodes: 2 };
    assert!(matches!(decomp_ht_id(&g, &small), Err(GraphError::TooLarge { nodes: 3, max: 2 })));
    let cyc = MixedGraph::from_parts(&["p", "q"], &[("p", "q", "a"), ("q", "p", "b")], &[]).unwrap();
    assert!(matches!(decomp_ht_id(&cyc, &DecompOptions::default()), Err(GraphError::Cycle(_))));
}
