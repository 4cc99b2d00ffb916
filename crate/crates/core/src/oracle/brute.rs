//! Exhaustive path enumerations used as ground truth for the fast
//! graph searches. Only meant for small graphs.

use std::collections::BTreeSet;

use crate::graph::{MixedGraph, NodeId};

/// A simple half-trek: `nodes[0]` is the start; when `bidirected_start` is
/// set the first step is `nodes[0] <-> nodes[1]`, every other step follows a
/// directed edge forward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfTrek {
    pub nodes: Vec<NodeId>,
    pub bidirected_start: bool,
}

impl HalfTrek {
    pub fn start(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn end(&self) -> NodeId {
        *self.nodes.last().expect("nonempty")
    }

    /// Nodes with an outgoing directed edge on the trek, plus the last node.
    pub fn right(&self) -> BTreeSet<NodeId> {
        let skip = usize::from(self.bidirected_start);
        self.nodes[skip..].iter().copied().collect()
    }
}

fn extend_directed(g: &MixedGraph, path: &mut Vec<NodeId>, bidirected: bool, out: &mut Vec<HalfTrek>) {
    out.push(HalfTrek {
        nodes: path.clone(),
        bidirected_start: bidirected,
    });
    let last = *path.last().expect("nonempty");
    for &c in g.ch(last) {
        if !path.contains(&c) {
            path.push(c);
            extend_directed(g, path, bidirected, out);
            path.pop();
        }
    }
}

/// Every simple half-trek starting at `from`, including the trivial one.
pub fn half_treks_from(g: &MixedGraph, from: NodeId) -> Vec<HalfTrek> {
    let mut out = Vec::new();
    extend_directed(g, &mut vec![from], false, &mut out);
    for &s in g.sib(from) {
        extend_directed(g, &mut vec![from, s], true, &mut out);
    }
    out
}

/// End points of nontrivial simple half-treks from `v`, without `v`.
pub fn half_trek_reachable(g: &MixedGraph, v: NodeId) -> BTreeSet<NodeId> {
    half_treks_from(g, v)
        .iter()
        .filter(|t| t.nodes.len() > 1)
        .map(HalfTrek::end)
        .filter(|&u| u != v)
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Step {
    /// Directed edge traversed from tail to head.
    Forward,
    /// Directed edge traversed from head to tail.
    Backward,
    Bidirected,
}

impl Step {
    fn arrow_at_end(self) -> bool {
        matches!(self, Step::Forward | Step::Bidirected)
    }

    fn arrow_at_start(self) -> bool {
        matches!(self, Step::Backward | Step::Bidirected)
    }
}

fn steps(g: &MixedGraph, u: NodeId) -> Vec<(NodeId, Step)> {
    let mut out: Vec<(NodeId, Step)> = g.ch(u).iter().map(|&c| (c, Step::Forward)).collect();
    out.extend(g.pa(u).iter().map(|&p| (p, Step::Backward)));
    out.extend(g.sib(u).iter().map(|&s| (s, Step::Bidirected)));
    out
}

fn search_paths(
    g: &MixedGraph,
    path: &mut Vec<NodeId>,
    last_step: Option<Step>,
    target: NodeId,
    avoid: &BTreeSet<NodeId>,
) -> bool {
    let u = *path.last().expect("nonempty");
    if u == target {
        return true;
    }
    for (w, step) in steps(g, u) {
        if path.contains(&w) || avoid.contains(&w) {
            continue;
        }
        // `u` would be a collider between the previous step and this one.
        if last_step.is_some_and(|p| p.arrow_at_end() && step.arrow_at_start()) {
            continue;
        }
        path.push(w);
        let found = search_paths(g, path, Some(step), target, avoid);
        path.pop();
        if found {
            return true;
        }
    }
    false
}

/// Whether some simple path from `a` to `b` without colliders avoids `avoid`.
pub fn unblocked_connected(g: &MixedGraph, a: NodeId, b: NodeId, avoid: &BTreeSet<NodeId>) -> bool {
    if a == b || avoid.contains(&a) || avoid.contains(&b) {
        return false;
    }
    search_paths(g, &mut vec![a], None, b, avoid)
}

/// Parent blocks of `v` by pairwise path search plus transitive merging,
/// each block given as sorted tails.
pub fn connected_parent_blocks(g: &MixedGraph, v: NodeId) -> Vec<Vec<NodeId>> {
    let pa = g.pa(v);
    let avoid: BTreeSet<NodeId> = if g.is_acyclic() {
        BTreeSet::from([v])
    } else {
        BTreeSet::new()
    };
    let mut block: Vec<usize> = (0..pa.len()).collect();
    fn find(b: &mut [usize], i: usize) -> usize {
        if b[i] == i {
            i
        } else {
            let r = find(b, b[i]);
            b[i] = r;
            r
        }
    }
    for i in 0..pa.len() {
        for j in i + 1..pa.len() {
            if unblocked_connected(g, pa[i], pa[j], &avoid) {
                let (ri, rj) = (find(&mut block, i), find(&mut block, j));
                block[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let roots: Vec<usize> = (0..pa.len()).map(|i| find(&mut block, i)).collect();
    let mut out: Vec<Vec<NodeId>> = Vec::new();
    for (i, &r) in roots.iter().enumerate() {
        if r == i {
            out.push((0..pa.len()).filter(|&j| roots[j] == r).map(|j| pa[j]).collect());
        }
    }
    out
}

/// Nonempty proper node sets closed under children, by subset filtering.
pub fn descendant_sets(g: &MixedGraph) -> Vec<BTreeSet<NodeId>> {
    let n = g.node_count();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << n) - 1 {
        let set: BTreeSet<NodeId> = (0..n).filter(|i| mask >> i & 1 == 1).map(NodeId).collect();
        if set.iter().all(|&v| g.ch(v).iter().all(|c| set.contains(c))) {
            out.push(set);
        }
    }
    out
}

fn assign(
    treks: &[Vec<HalfTrek>],
    targets: &[NodeId],
    i: usize,
    used_targets: &mut Vec<bool>,
    used_right: &mut BTreeSet<NodeId>,
) -> bool {
    if i == treks.len() {
        return true;
    }
    for t in &treks[i] {
        let Some(k) = targets.iter().position(|&x| x == t.end()) else {
            continue;
        };
        if used_targets[k] {
            continue;
        }
        let right = t.right();
        if !right.is_disjoint(used_right) {
            continue;
        }
        used_targets[k] = true;
        used_right.extend(right.iter().copied());
        if assign(treks, targets, i + 1, used_targets, used_right) {
            return true;
        }
        used_targets[k] = false;
        for r in &right {
            used_right.remove(r);
        }
    }
    false
}

/// Whether a system of simple half-treks from `ys` onto `targets` (one each,
/// a bijection) with pairwise disjoint right sets exists.
pub fn half_trek_system_exists(g: &MixedGraph, ys: &[NodeId], targets: &[NodeId]) -> bool {
    if ys.len() != targets.len() {
        return false;
    }
    let treks: Vec<Vec<HalfTrek>> = ys.iter().map(|&y| half_treks_from(g, y)).collect();
    assign(&treks, targets, 0, &mut vec![false; targets.len()], &mut BTreeSet::new())
}

/// The four conditions for `ys` with respect to edges `tails -> v`, checked
/// directly from their statements.
pub fn satisfies_general_criterion(g: &MixedGraph, v: NodeId, tails: &[NodeId], ys: &[NodeId]) -> bool {
    let distinct: BTreeSet<NodeId> = ys.iter().copied().collect();
    if distinct.len() != ys.len() || ys.len() != tails.len() {
        return false;
    }
    if ys.iter().any(|y| *y == v || g.sib(v).contains(y)) {
        return false;
    }
    if !half_trek_system_exists(g, ys, tails) {
        return false;
    }
    let reach: BTreeSet<NodeId> = ys.iter().flat_map(|&y| half_trek_reachable(g, y)).collect();
    g.pa(v)
        .iter()
        .filter(|p| !tails.contains(p))
        .all(|p| !reach.contains(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_sets() {
        let t = HalfTrek {
            nodes: vec![NodeId(0), NodeId(1), NodeId(2)],
            bidirected_start: true,
        };
        assert_eq!(t.right(), BTreeSet::from([NodeId(1), NodeId(2)]));
    }

    #[test]
    fn collider_blocks() {
        let g = MixedGraph::from_parts(&["a", "m", "b"], &[("a", "m", "p")], &[("m", "b")]).unwrap();
        assert!(!unblocked_connected(&g, NodeId(0), NodeId(2), &BTreeSet::new()));
        let g = MixedGraph::from_parts(&["a", "m", "b"], &[("m", "a", "p")], &[("m", "b")]).unwrap();
        assert!(unblocked_connected(&g, NodeId(0), NodeId(2), &BTreeSet::new()));
    }

    #[test]
    fn instrument_criterion() {
        let g = MixedGraph::from_parts(
            &["z", "x", "y"],
            &[("z", "x", "a"), ("x", "y", "b")],
            &[("x", "y")],
        )
        .unwrap();
        let (z, x, y) = (NodeId(0), NodeId(1), NodeId(2));
        assert!(satisfies_general_criterion(&g, y, &[x], &[z]));
        assert!(!satisfies_general_criterion(&g, y, &[x], &[x]));
    }
}
