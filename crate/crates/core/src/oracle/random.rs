use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{GraphBuilder, MixedGraph};
use crate::linalg::ModelInstance;

/// Magnitude range of random coefficients; signs are drawn separately.
pub const COEFFICIENT_RANGE: (f64, f64) = (0.3, 1.2);
/// Magnitude range of random error covariances on bidirected pairs.
pub const CONFOUNDING_RANGE: (f64, f64) = (0.2, 0.8);

/// Parameters of a seeded random ensemble of acyclic mixed graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    /// Node count, or the upper end of the range when `min_nodes` is set.
    pub nodes: usize,
    #[serde(default)]
    pub min_nodes: Option<usize>,
    pub p_directed: f64,
    pub p_bidirected: f64,
    pub seed: u64,
    /// Number of random graphs.
    #[serde(default = "one")]
    pub graphs: usize,
    /// Parameter draws per graph.
    #[serde(default = "one")]
    pub draws: usize,
}

fn one() -> usize {
    1
}

impl EnsembleConfig {
    pub fn new(nodes: usize, p_directed: f64, p_bidirected: f64, seed: u64) -> Self {
        Self {
            nodes,
            min_nodes: None,
            p_directed,
            p_bidirected,
            seed,
            graphs: 1,
            draws: 1,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.nodes == 0 {
            return Err("nodes must be at least 1".into());
        }
        if let Some(lo) = self.min_nodes {
            if lo == 0 || lo > self.nodes {
                return Err(format!("min_nodes must lie in 1..={}", self.nodes));
            }
        }
        for (name, p) in [("p_directed", self.p_directed), ("p_bidirected", self.p_bidirected)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        Ok(())
    }
}

/// One graph of an ensemble with its parameter draws.
#[derive(Debug, Clone)]
pub struct EnsembleGraph {
    pub index: usize,
    pub graph: MixedGraph,
    pub models: Vec<ModelInstance>,
}

fn magnitude(rng: &mut impl Rng, range: (f64, f64)) -> f64 {
    let x = rng.gen_range(range.0..=range.1);
    if rng.gen_bool(0.5) {
        x
    } else {
        -x
    }
}

/// Random acyclic mixed graph on nodes `v1..vn`. The causal order is a random
/// permutation of the names; each forward pair gets a directed edge with
/// probability `p_directed` and each pair a bidirected edge with
/// probability `p_bidirected`. Labels have the form `v1->v2`.
pub fn random_graph(n: usize, p_directed: f64, p_bidirected: f64, rng: &mut impl Rng) -> MixedGraph {
    let names: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut b = GraphBuilder::new();
    for name in &names {
        b.add_node(name).expect("distinct names");
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p_directed) {
                let (t, h) = (&names[order[i]], &names[order[j]]);
                b.add_directed(t, h, &format!("{t}->{h}")).expect("fresh edge");
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p_bidirected) {
                b.add_bidirected(&names[i], &names[j]).expect("fresh edge");
            }
        }
    }
    b.build()
}

/// Random parameters for `g`: coefficients with magnitude in
/// [`COEFFICIENT_RANGE`], confounding covariances in [`CONFOUNDING_RANGE`],
/// and error variances exceeding each row's absolute off-diagonal sum by
/// 0.5 to 1.5, which keeps `Ω` positive definite.
pub fn random_instance(g: &MixedGraph, rng: &mut impl Rng) -> ModelInstance {
    let n = g.node_count();
    let mut m = ModelInstance::identity(n);
    for e in g.directed_edges() {
        m.lambda[(e.tail.0, e.head.0)] = magnitude(rng, COEFFICIENT_RANGE);
    }
    for e in g.bidirected_edges() {
        let w = magnitude(rng, CONFOUNDING_RANGE);
        m.omega[(e.a.0, e.b.0)] = w;
        m.omega[(e.b.0, e.a.0)] = w;
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| m.omega[(i, j)].abs()).sum();
        m.omega[(i, i)] = off + rng.gen_range(0.5..=1.5);
    }
    m
}

fn node_count(cfg: &EnsembleConfig, rng: &mut impl Rng) -> usize {
    match cfg.min_nodes {
        Some(lo) => rng.gen_range(lo..=cfg.nodes),
        None => cfg.nodes,
    }
}

/// Graph and parameters drawn from `cfg.seed`.
pub fn random_model(cfg: &EnsembleConfig) -> (MixedGraph, ModelInstance) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = node_count(cfg, &mut rng);
    let g = random_graph(n, cfg.p_directed, cfg.p_bidirected, &mut rng);
    let m = random_instance(&g, &mut rng);
    (g, m)
}

/// All graphs of the ensemble. Each graph and each draw has its own child
/// seed taken from the master stream, so results do not depend on how many
/// values earlier draws consumed.
pub fn ensemble(cfg: &EnsembleConfig) -> Vec<EnsembleGraph> {
    let mut master = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.graphs)
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
            let n = node_count(cfg, &mut rng);
            let graph = random_graph(n, cfg.p_directed, cfg.p_bidirected, &mut rng);
            let models = (0..cfg.draws)
                .map(|_| random_instance(&graph, &mut ChaCha8Rng::seed_from_u64(rng.gen())))
                .collect();
            EnsembleGraph {
                index,
                graph,
                models,
            }
        })
        .collect()
}
