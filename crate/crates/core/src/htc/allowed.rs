use std::collections::BTreeSet;

use super::RowKind;
use crate::graph::{EdgeId, EdgeSet, MixedGraph, NodeId};

/// Structural verdict on one potential member of an admissible set for a
/// fixed edge set `E` with head `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub node: NodeId,
    pub row: RowKind,
    /// Incoming edges of `node` whose coefficients must be known before the
    /// node's equation row can be formed: those from `v`, from nodes
    /// half-trek reachable from `v`, or from nodes connected to a parent of
    /// `v` outside `Ta(E)`.
    pub dependencies: Vec<EdgeId>,
}

impl Candidate {
    pub fn is_allowed(&self, g: &MixedGraph, id_edges: &BTreeSet<String>) -> bool {
        self.dependencies
            .iter()
            .all(|&e| id_edges.contains(&g.edge(e).label))
    }
}

/// Every node that can ever be allowed for `e`, i.e. satisfying
/// `y ∉ {v} ∪ Sib(v)`, `y ∉ Pa(v) \ Ta(E)` and `(Pa(v) \ Ta(E)) ∩ htr(y) = ∅`,
/// together with its row kind and coefficient dependencies.
pub fn candidates(g: &MixedGraph, e: &EdgeSet) -> Vec<Candidate> {
    let v = e.head();
    let n = g.node_count();
    let tails = e.tails(g);
    let others: Vec<NodeId> = g
        .pa(v)
        .iter()
        .copied()
        .filter(|p| !tails.contains(p))
        .collect();
    let mut is_other = vec![false; n];
    for p in &others {
        is_other[p.0] = true;
    }
    let htr_v = g.htr_mask(v);
    let connected = if others.is_empty() {
        vec![false; n]
    } else {
        g.trek_closure(&others, &g.head_avoid_mask(v))
    };

    let mut out = Vec::new();
    for y in g.nodes() {
        if y == v || g.sib(v).contains(&y) || is_other[y.0] {
            continue;
        }
        if !others.is_empty() {
            let htr_y = g.htr_mask(y);
            if others.iter().any(|p| htr_y[p.0]) {
                continue;
            }
        }
        let dependencies: Vec<EdgeId> = g
            .inc(y)
            .iter()
            .copied()
            .filter(|&ed| {
                let k = g.edge(ed).tail;
                k == v || htr_v[k.0] || connected[k.0]
            })
            .collect();
        let row = if htr_v[y.0] || connected[y.0] || !dependencies.is_empty() {
            RowKind::Residual
        } else {
            RowKind::Covariance
        };
        out.push(Candidate {
            node: y,
            row,
            dependencies,
        });
    }
    out
}

/// Nodes usable in an admissible set for `e` given the already identified
/// coefficient labels.
pub fn allowed_nodes(g: &MixedGraph, e: &EdgeSet, id_edges: &BTreeSet<String>) -> BTreeSet<NodeId> {
    candidates(g, e)
        .into_iter()
        .filter(|c| c.is_allowed(g, id_edges))
        .map(|c| c.node)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn es(g: &MixedGraph, labels: &[&str]) -> EdgeSet {
        EdgeSet::new(g, labels.iter().map(|l| g.edge_by_label(l).unwrap())).unwrap()
    }

    fn names(g: &MixedGraph, s: &BTreeSet<NodeId>) -> Vec<String> {
        g.names_of(s)
    }

    #[test]
    fn instrument_is_allowed() {
        let g = MixedGraph::from_parts(
            &["z", "x", "y"],
            &[("z", "x", "a"), ("x", "y", "b")],
            &[("x", "y")],
        )
        .unwrap();
        let a = allowed_nodes(&g, &es(&g, &["b"]), &BTreeSet::new());
        assert_eq!(names(&g, &a), vec!["z"]);
    }

    #[test]
    fn bow_has_no_allowed_nodes() {
        let g = MixedGraph::from_parts(&["x", "y"], &[("x", "y", "b")], &[("x", "y")]).unwrap();
        assert!(allowed_nodes(&g, &es(&g, &["b"]), &BTreeSet::new()).is_empty());
    }

    #[test]
    fn reachable_nodes_need_identified_edges() {
        // y -> w: w is half-trek reachable from y and becomes allowed for
        // edges into y once y -> w is known.
        let g = MixedGraph::from_parts(
            &["x", "y", "w"],
            &[("x", "y", "b"), ("y", "w", "c")],
            &[("x", "y")],
        )
        .unwrap();
        let e = es(&g, &["b"]);
        let cands = candidates(&g, &e);
        let w = cands.iter().find(|c| g.name(c.node) == "w").unwrap();
        assert_eq!(w.row, RowKind::Residual);
        assert_eq!(w.dependencies, vec![g.edge_by_label("c").unwrap()]);
        assert!(allowed_nodes(&g, &e, &BTreeSet::new()).is_empty());
        let known = BTreeSet::from(["c".to_string()]);
        assert_eq!(names(&g, &allowed_nodes(&g, &e, &known)), vec!["w"]);
    }

    #[test]
    fn other_parents_block_half_trek_sources() {
        // p -> v and q -> v; z -> q makes q half-trek reachable from z, so z
        // may not serve the edge p -> v alone.
        let g = MixedGraph::from_parts(
            &["z", "p", "q", "v"],
            &[("z", "q", "zq"), ("z", "p", "zp"), ("p", "v", "a"), ("q", "v", "b")],
            &[("p", "v")],
        )
        .unwrap();
        let a = allowed_nodes(&g, &es(&g, &["a"]), &BTreeSet::new());
        assert!(!a.contains(&g.node("z").unwrap()));
        assert!(!a.contains(&g.node("q").unwrap()));
        let both = allowed_nodes(&g, &es(&g, &["a", "b"]), &BTreeSet::new());
        assert!(both.contains(&g.node("z").unwrap()));
    }
}
