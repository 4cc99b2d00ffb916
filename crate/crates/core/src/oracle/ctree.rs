use std::collections::BTreeSet;

use crate::error::GraphError;
use crate::graph::{MixedGraph, NodeId};

/// Largest graph accepted by [`c_tree_exists`].
pub const C_TREE_MAX_NODES: usize = 12;

/// Whether `g` has a subgraph that is a `y`-rooted c-tree: a node set `N ∋ y`
/// with at least two nodes, connected by bidirected edges inside `N`, whose
/// directed edges inside `N` contain a spanning tree in which every node has
/// exactly one child and all paths lead to `y`.
///
/// Such a tree exists on `N` exactly when every node of `N` reaches `y` by a
/// directed path inside `N`, so the search runs over node subsets of `An(y)`.
pub fn c_tree_exists(g: &MixedGraph, y: NodeId) -> Result<bool, GraphError> {
    if g.node_count() > C_TREE_MAX_NODES {
        return Err(GraphError::TooLarge {
            nodes: g.node_count(),
            max: C_TREE_MAX_NODES,
        });
    }
    g.topological_order()?;
    let others: Vec<NodeId> = g.ancestors(y)?.into_iter().filter(|&u| u != y).collect();
    for mask in 1u32..(1u32 << others.len()) {
        let mut set: BTreeSet<NodeId> = (0..others.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| others[i])
            .collect();
        set.insert(y);
        if reaches_root(g, &set, y) && bidirected_connected(g, &set) {
            return Ok(true);
        }
    }
    Ok(false)
}

fn reaches_root(g: &MixedGraph, set: &BTreeSet<NodeId>, y: NodeId) -> bool {
    let mut seen = BTreeSet::from([y]);
    let mut stack = vec![y];
    while let Some(u) = stack.pop() {
        for &p in g.pa(u) {
            if set.contains(&p) && seen.insert(p) {
                stack.push(p);
            }
        }
    }
    seen.len() == set.len()
}

fn bidirected_connected(g: &MixedGraph, set: &BTreeSet<NodeId>) -> bool {
    let start = *set.iter().next().expect("nonempty");
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &s in g.sib(u) {
            if set.contains(&s) && seen.insert(s) {
                stack.push(s);
            }
        }
    }
    seen.len() == set.len()
}
