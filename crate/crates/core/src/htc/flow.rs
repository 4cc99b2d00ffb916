//! Unit-capacity flow network whose integral flows are half-trek systems
//! without sided intersection.
//!
//! Layout: every node `u` has a left copy `L(u)` (start of a half-trek) and a
//! right copy split into `Rin(u) -> Rout(u)` with capacity one, so each node
//! lies in the right set of at most one half-trek.

use std::collections::{BTreeSet, VecDeque};

use crate::graph::{EdgeSet, MixedGraph, NodeId};

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: u32,
    rev: usize,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    n: usize,
    adj: Vec<Vec<usize>>,
    arcs: Vec<Arc>,
    source_arcs: Vec<(NodeId, usize)>,
    flow: usize,
}

const SOURCE: usize = 0;
const SINK: usize = 1;

impl FlowNetwork {
    fn left(&self, u: NodeId) -> usize {
        2 + u.0
    }

    fn right_in(&self, u: NodeId) -> usize {
        2 + self.n + u.0
    }

    fn right_out(&self, u: NodeId) -> usize {
        2 + 2 * self.n + u.0
    }

    fn add_arc(&mut self, from: usize, to: usize) -> usize {
        let idx = self.arcs.len();
        self.arcs.push(Arc {
            to,
            cap: 1,
            rev: idx + 1,
        });
        self.arcs.push(Arc {
            to: from,
            cap: 0,
            rev: idx,
        });
        self.adj[from].push(idx);
        self.adj[to].push(idx + 1);
        idx
    }

    fn augment(&mut self) -> bool {
        let mut pred: Vec<Option<usize>> = vec![None; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[SOURCE] = true;
        let mut queue = VecDeque::from([SOURCE]);
        while let Some(u) = queue.pop_front() {
            if u == SINK {
                break;
            }
            for &a in &self.adj[u] {
                let arc = &self.arcs[a];
                if arc.cap > 0 && !seen[arc.to] {
                    seen[arc.to] = true;
                    pred[arc.to] = Some(a);
                    queue.push_back(arc.to);
                }
            }
        }
        if !seen[SINK] {
            return false;
        }
        let mut v = SINK;
        while let Some(a) = pred[v] {
            self.arcs[a].cap -= 1;
            let r = self.arcs[a].rev;
            self.arcs[r].cap += 1;
            v = self.arcs[r].to;
        }
        true
    }

    /// Runs breadth-first augmentation to completion and returns the flow value.
    pub fn max_flow(&mut self) -> usize {
        while self.augment() {
            self.flow += 1;
        }
        self.flow
    }

    /// Candidates whose source arc carries flow, in ordinal order.
    pub fn sources_used(&self) -> Vec<NodeId> {
        self.source_arcs
            .iter()
            .filter(|(_, a)| self.arcs[*a].cap == 0)
            .map(|(y, _)| *y)
            .collect()
    }
}

/// Builds the network for edge set `e` and candidate set `candidates`.
/// Candidates equal to the head or one of its siblings are ignored.
pub fn build_flow_network(g: &MixedGraph, e: &EdgeSet, candidates: &BTreeSet<NodeId>) -> FlowNetwork {
    let n = g.node_count();
    let v = e.head();
    let mut net = FlowNetwork {
        n,
        adj: vec![Vec::new(); 2 + 3 * n],
        arcs: Vec::new(),
        source_arcs: Vec::new(),
        flow: 0,
    };
    for &y in candidates {
        if y == v || g.sib(v).contains(&y) {
            continue;
        }
        let a = net.add_arc(SOURCE, net.left(y));
        net.source_arcs.push((y, a));
        net.add_arc(net.left(y), net.right_in(y));
        for &s in g.sib(y) {
            net.add_arc(net.left(y), net.right_in(s));
        }
    }
    for u in g.nodes() {
        net.add_arc(net.right_in(u), net.right_out(u));
        for &c in g.ch(u) {
            net.add_arc(net.right_out(u), net.right_in(c));
        }
    }
    for t in e.tails(g) {
        net.add_arc(net.right_out(t), SINK);
    }
    net
}

/// A set `Y ⊆ candidates` with `|Y| = |E|` joined to `Ta(E)` by half-treks with
/// pairwise disjoint right sets, if one exists.
pub fn max_flow_admissible(
    g: &MixedGraph,
    e: &EdgeSet,
    candidates: &BTreeSet<NodeId>,
) -> Option<Vec<NodeId>> {
    let mut net = build_flow_network(g, e, candidates);
    (net.max_flow() == e.len()).then(|| net.sources_used())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(g: &MixedGraph, names: &[&str]) -> BTreeSet<NodeId> {
        names.iter().map(|n| g.node(n).unwrap()).collect()
    }

    fn edge_set(g: &MixedGraph, labels: &[&str]) -> EdgeSet {
        EdgeSet::new(g, labels.iter().map(|l| g.edge_by_label(l).unwrap())).unwrap()
    }

    #[test]
    fn chain_has_unit_flow() {
        let g = MixedGraph::from_parts(&["z", "x", "y"], &[("z", "x", "a"), ("x", "y", "b")], &[])
            .unwrap();
        let e = edge_set(&g, &["b"]);
        let mut net = build_flow_network(&g, &e, &set(&g, &["z"]));
        assert_eq!(net.max_flow(), 1);
        assert_eq!(net.sources_used(), vec![g.node("z").unwrap()]);
    }

    #[test]
    fn no_candidates_no_flow() {
        let g = MixedGraph::from_parts(&["z", "x", "y"], &[("z", "x", "a"), ("x", "y", "b")], &[])
            .unwrap();
        let e = edge_set(&g, &["b"]);
        let mut net = build_flow_network(&g, &e, &BTreeSet::new());
        assert_eq!(net.max_flow(), 0);
        assert_eq!(max_flow_admissible(&g, &e, &BTreeSet::new()), None);
    }

    #[test]
    fn instrument_graph() {
        let g = MixedGraph::from_parts(
            &["z", "x", "y"],
            &[("z", "x", "a"), ("x", "y", "b")],
            &[("x", "y")],
        )
        .unwrap();
        let e = edge_set(&g, &["b"]);
        assert_eq!(
            max_flow_admissible(&g, &e, &set(&g, &["z"])),
            Some(vec![g.node("z").unwrap()])
        );
        // The sibling x is never a usable start, even if offered.
        assert_eq!(max_flow_admissible(&g, &e, &set(&g, &["x"])), None);
    }

    #[test]
    fn shared_right_node_limits_flow() {
        // Both parents of v are only reachable through m, which can sit on
        // one half-trek's right side only.
        let g = MixedGraph::from_parts(
            &["a", "b", "m", "p", "q", "v"],
            &[
                ("a", "m", "am"),
                ("b", "m", "bm"),
                ("m", "p", "mp"),
                ("m", "q", "mq"),
                ("p", "v", "pv"),
                ("q", "v", "qv"),
            ],
            &[],
        )
        .unwrap();
        let e = edge_set(&g, &["pv", "qv"]);
        assert_eq!(max_flow_admissible(&g, &e, &set(&g, &["a", "b"])), None);
        assert!(max_flow_admissible(&g, &e, &set(&g, &["a", "p", "q"])).is_some());
    }

    #[test]
    fn bidirected_start_excludes_left_node_from_right_set() {
        // y <-> s -> t1 and y -> t2: y starts one trek bidirected and is the
        // right set of a second candidate's directed trek.
        let g = MixedGraph::from_parts(
            &["y", "s", "t1", "t2", "v"],
            &[("s", "t1", "st"), ("y", "t2", "yt"), ("t1", "v", "a"), ("t2", "v", "b")],
            &[("y", "s")],
        )
        .unwrap();
        let e = edge_set(&g, &["a", "b"]);
        let y = max_flow_admissible(&g, &e, &set(&g, &["y", "t2"])).unwrap();
        assert_eq!(y, vec![g.node("y").unwrap(), g.node("t2").unwrap()]);
    }
}
