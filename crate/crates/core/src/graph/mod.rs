//! Mixed graphs `G = (V, D, B)` and the purely structural queries the
//! identification algorithms are built on.
//!
//! Nodes are dense ordinals `0..n`; every query iterates in ordinal order so
//! results are reproducible. Ancestor and descendant sets are reflexive.

mod io;

pub use io::{parse_graph_json, GraphFile};

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt;

use crate::error::GraphError;

pub type Result<T> = std::result::Result<T, GraphError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Index into [`MixedGraph::directed_edges`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedEdge {
    pub tail: NodeId,
    pub head: NodeId,
    /// Name of the structural coefficient carried by the edge.
    pub label: String,
}

/// Endpoints are stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BidirectedEdge {
    pub a: NodeId,
    pub b: NodeId,
}

impl BidirectedEdge {
    pub fn new(x: NodeId, y: NodeId) -> Self {
        if x <= y {
            Self { a: x, b: y }
        } else {
            Self { a: y, b: x }
        }
    }
}

/// A nonempty set of directed edges sharing one head, sorted by tail ordinal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeSet {
    head: NodeId,
    edges: Vec<EdgeId>,
}

impl EdgeSet {
    pub fn new(g: &MixedGraph, edges: impl IntoIterator<Item = EdgeId>) -> Option<Self> {
        let mut edges: Vec<EdgeId> = edges.into_iter().collect();
        let head = g.edge(*edges.first()?).head;
        if edges.iter().any(|&e| g.edge(e).head != head) {
            return None;
        }
        edges.sort_by_key(|&e| g.edge(e).tail);
        edges.dedup();
        Some(Self { head, edges })
    }

    pub fn head(&self) -> NodeId {
        self.head
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn tails(&self, g: &MixedGraph) -> Vec<NodeId> {
        self.edges.iter().map(|&e| g.edge(e).tail).collect()
    }

    pub fn labels<'g>(&self, g: &'g MixedGraph) -> Vec<&'g str> {
        self.edges.iter().map(|&e| g.edge(e).label.as_str()).collect()
    }
}

/// Incremental, validating constructor for [`MixedGraph`]. The `at` strings in
/// errors name the offending input entry (`nodes[2]`, `directed[0]`, ...).
#[derive(Debug, Default)]
pub struct GraphBuilder {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    directed: Vec<DirectedEdge>,
    bidirected: Vec<BidirectedEdge>,
    pairs: HashMap<(NodeId, NodeId), EdgeId>,
    labels: HashMap<String, EdgeId>,
    bi_pairs: BTreeSet<BidirectedEdge>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: &str) -> Result<NodeId> {
        let at = format!("nodes[{}]", self.names.len());
        if name.trim().is_empty() {
            return Err(GraphError::EmptyName { at });
        }
        if self.index.contains_key(name) {
            return Err(GraphError::DuplicateNode {
                at,
                name: name.to_string(),
            });
        }
        let id = NodeId(self.names.len());
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    fn lookup(&self, name: &str, at: &str) -> Result<NodeId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::Parse(format!("{at}: unknown node `{name}`")))
    }

    pub fn add_directed(&mut self, tail: &str, head: &str, label: &str) -> Result<EdgeId> {
        let at = format!("directed[{}]", self.directed.len());
        let t = self.lookup(tail, &at)?;
        let h = self.lookup(head, &at)?;
        if t == h {
            return Err(GraphError::SelfLoop {
                at,
                node: tail.to_string(),
            });
        }
        if label.trim().is_empty() {
            return Err(GraphError::EmptyLabel { at });
        }
        if self.pairs.contains_key(&(t, h)) {
            return Err(GraphError::DuplicateEdge {
                at,
                a: tail.to_string(),
                b: head.to_string(),
            });
        }
        if self.labels.contains_key(label) {
            return Err(GraphError::DuplicateLabel {
                at,
                label: label.to_string(),
            });
        }
        let id = EdgeId(self.directed.len());
        self.pairs.insert((t, h), id);
        self.labels.insert(label.to_string(), id);
        self.directed.push(DirectedEdge {
            tail: t,
            head: h,
            label: label.to_string(),
        });
        Ok(id)
    }

    pub fn add_bidirected(&mut self, a: &str, b: &str) -> Result<()> {
        let at = format!("bidirected[{}]", self.bidirected.len());
        let x = self.lookup(a, &at)?;
        let y = self.lookup(b, &at)?;
        if x == y {
            return Err(GraphError::SelfLoop {
                at,
                node: a.to_string(),
            });
        }
        let e = BidirectedEdge::new(x, y);
        if !self.bi_pairs.insert(e) {
            return Err(GraphError::DuplicateEdge {
                at,
                a: a.to_string(),
                b: b.to_string(),
            });
        }
        self.bidirected.push(e);
        Ok(())
    }

    pub fn build(self) -> MixedGraph {
        MixedGraph::assemble(self.names, self.directed, self.bidirected)
    }
}

/// The causal diagram of a linear SEM. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedGraph {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    directed: Vec<DirectedEdge>,
    bidirected: Vec<BidirectedEdge>,
    label_index: HashMap<String, EdgeId>,
    pair_index: HashMap<(NodeId, NodeId), EdgeId>,
    parents: Vec<Vec<NodeId>>,
    children: Vec<Vec<NodeId>>,
    siblings: Vec<Vec<NodeId>>,
    incoming: Vec<Vec<EdgeId>>,
    acyclic: bool,
}

impl MixedGraph {
    /// Convenience constructor from name triples, mostly for tests and fixtures.
    pub fn from_parts(
        nodes: &[&str],
        directed: &[(&str, &str, &str)],
        bidirected: &[(&str, &str)],
    ) -> Result<Self> {
        let mut b = GraphBuilder::new();
        for n in nodes {
            b.add_node(n)?;
        }
        for (t, h, l) in directed {
            b.add_directed(t, h, l)?;
        }
        for (x, y) in bidirected {
            b.add_bidirected(x, y)?;
        }
        Ok(b.build())
    }

    fn assemble(
        names: Vec<String>,
        directed: Vec<DirectedEdge>,
        mut bidirected: Vec<BidirectedEdge>,
    ) -> Self {
        let n = names.len();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), NodeId(i)))
            .collect();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut siblings = vec![Vec::new(); n];
        let mut incoming = vec![Vec::new(); n];
        let mut label_index = HashMap::new();
        let mut pair_index = HashMap::new();
        for (i, e) in directed.iter().enumerate() {
            parents[e.head.0].push(e.tail);
            children[e.tail.0].push(e.head);
            incoming[e.head.0].push(EdgeId(i));
            label_index.insert(e.label.clone(), EdgeId(i));
            pair_index.insert((e.tail, e.head), EdgeId(i));
        }
        bidirected.sort();
        for e in &bidirected {
            siblings[e.a.0].push(e.b);
            siblings[e.b.0].push(e.a);
        }
        for v in 0..n {
            parents[v].sort();
            children[v].sort();
            siblings[v].sort();
            incoming[v].sort_by_key(|&e: &EdgeId| directed[e.0].tail);
        }
        let mut g = Self {
            names,
            index,
            directed,
            bidirected,
            label_index,
            pair_index,
            parents,
            children,
            siblings,
            incoming,
            acyclic: false,
        };
        g.acyclic = g.kahn().is_ok();
        g
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.names.len()).map(NodeId)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: NodeId) -> &str {
        &self.names[v.0]
    }

    pub fn node(&self, name: &str) -> Result<NodeId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.0 < self.names.len()
    }

    fn check(&self, v: NodeId) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange(v.0))
        }
    }

    pub fn directed_edges(&self) -> &[DirectedEdge] {
        &self.directed
    }

    pub fn bidirected_edges(&self) -> &[BidirectedEdge] {
        &self.bidirected
    }

    pub fn edge(&self, e: EdgeId) -> &DirectedEdge {
        &self.directed[e.0]
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.directed.len()).map(EdgeId)
    }

    pub fn edge_by_label(&self, label: &str) -> Option<EdgeId> {
        self.label_index.get(label).copied()
    }

    pub fn edge_between(&self, tail: NodeId, head: NodeId) -> Option<EdgeId> {
        self.pair_index.get(&(tail, head)).copied()
    }

    pub fn has_bidirected(&self, a: NodeId, b: NodeId) -> bool {
        self.siblings[a.0].binary_search(&b).is_ok()
    }

    pub fn is_acyclic(&self) -> bool {
        self.acyclic
    }

    /// Parents of `v`, sorted. Panics on a foreign id.
    pub fn pa(&self, v: NodeId) -> &[NodeId] {
        &self.parents[v.0]
    }

    pub fn ch(&self, v: NodeId) -> &[NodeId] {
        &self.children[v.0]
    }

    pub fn sib(&self, v: NodeId) -> &[NodeId] {
        &self.siblings[v.0]
    }

    /// `Inc(v)`: edges with head `v`, sorted by tail.
    pub fn inc(&self, v: NodeId) -> &[EdgeId] {
        &self.incoming[v.0]
    }

    pub fn parents(&self, v: NodeId) -> Result<BTreeSet<NodeId>> {
        self.check(v)?;
        Ok(self.pa(v).iter().copied().collect())
    }

    pub fn siblings(&self, v: NodeId) -> Result<BTreeSet<NodeId>> {
        self.check(v)?;
        Ok(self.sib(v).iter().copied().collect())
    }

    pub fn ancestors(&self, v: NodeId) -> Result<BTreeSet<NodeId>> {
        self.check(v)?;
        Ok(to_set(&self.closure(&[v], &self.parents, None)))
    }

    pub fn descendants(&self, v: NodeId) -> Result<BTreeSet<NodeId>> {
        self.check(v)?;
        Ok(to_set(&self.closure(&[v], &self.children, None)))
    }

    /// Nodes reachable from `v` by a half-trek: a directed path, or a
    /// bidirected edge followed by a (possibly empty) directed path. `v`
    /// itself is never included.
    pub fn half_trek_reachable(&self, v: NodeId) -> Result<BTreeSet<NodeId>> {
        self.check(v)?;
        Ok(to_set(&self.htr_mask(v)))
    }

    pub(crate) fn htr_mask(&self, v: NodeId) -> Vec<bool> {
        let mut starts: Vec<NodeId> = self.ch(v).to_vec();
        starts.extend_from_slice(self.sib(v));
        let mut mask = self.closure(&starts, &self.children, None);
        mask[v.0] = false;
        mask
    }

    /// Reflexive closure of `starts` along `adj`, never entering `blocked` nodes.
    pub(crate) fn closure(
        &self,
        starts: &[NodeId],
        adj: &[Vec<NodeId>],
        blocked: Option<&[bool]>,
    ) -> Vec<bool> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        for &s in starts {
            if blocked.is_some_and(|b| b[s.0]) || seen[s.0] {
                continue;
            }
            seen[s.0] = true;
            stack.push(s);
        }
        while let Some(u) = stack.pop() {
            for &w in &adj[u.0] {
                if !seen[w.0] && !blocked.is_some_and(|b| b[w.0]) {
                    seen[w.0] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// All nodes joined to some node of `sources` by a collider-free path that
    /// avoids `blocked` (sources included). A collider-free path climbs
    /// against directed edges, crosses at most one bidirected edge at its top,
    /// then descends.
    pub(crate) fn trek_closure(&self, sources: &[NodeId], blocked: &[bool]) -> Vec<bool> {
        let up = self.closure(sources, &self.parents, Some(blocked));
        let mut tops: Vec<NodeId> = Vec::new();
        for u in self.nodes().filter(|u| up[u.0]) {
            tops.push(u);
            tops.extend(self.sib(u).iter().filter(|s| !blocked[s.0]));
        }
        self.closure(&tops, &self.children, Some(blocked))
    }

    /// True iff `a` and `b` are joined by a path without colliders (unblocked
    /// given the empty set) that visits no node of `avoid`.
    pub fn unblocked_connected(
        &self,
        a: NodeId,
        b: NodeId,
        avoid: &BTreeSet<NodeId>,
    ) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        if a == b || avoid.contains(&a) || avoid.contains(&b) {
            return Ok(false);
        }
        let mut blocked = vec![false; self.node_count()];
        for &z in avoid {
            self.check(z)?;
            blocked[z.0] = true;
        }
        Ok(self.trek_closure(&[a], &blocked)[b.0])
    }

    /// Nodes excluded from parent-connecting paths for head `v`. Acyclic graphs
    /// exclude `v` itself; cyclic graphs exclude nothing, since a parent may
    /// then genuinely covary with another through `v`.
    pub(crate) fn head_avoid_mask(&self, v: NodeId) -> Vec<bool> {
        let mut blocked = vec![false; self.node_count()];
        if self.acyclic {
            blocked[v.0] = true;
        }
        blocked
    }

    /// Partition of `Inc(v)` into connected edge sets, ordered by smallest tail.
    pub fn connected_edge_sets(&self, v: NodeId) -> Result<Vec<EdgeSet>> {
        self.check(v)?;
        let pa = self.pa(v);
        if pa.is_empty() {
            return Ok(Vec::new());
        }
        let blocked = self.head_avoid_mask(v);
        // Connection is not transitive, so blocks are merged through chains.
        let mut block_of: Vec<usize> = (0..pa.len()).collect();
        fn root(b: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while b[r] != r {
                r = b[r];
            }
            b[i] = r;
            r
        }
        for i in 0..pa.len() {
            let reach = self.trek_closure(&[pa[i]], &blocked);
            for j in i + 1..pa.len() {
                if reach[pa[j].0] {
                    let (ri, rj) = (root(&mut block_of, i), root(&mut block_of, j));
                    block_of[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        for i in 0..pa.len() {
            block_of[i] = root(&mut block_of, i);
        }
        let mut out = Vec::new();
        for i in 0..pa.len() {
            if block_of[i] != i {
                continue;
            }
            let edges = (0..pa.len())
                .filter(|&j| block_of[j] == i)
                .map(|j| self.edge_between(pa[j], v).expect("parent edge"));
            out.extend(EdgeSet::new(self, edges));
        }
        Ok(out)
    }

    pub fn c_component(&self, v: NodeId) -> Result<BTreeSet<NodeId>> {
        self.check(v)?;
        Ok(to_set(&self.closure(&[v], &self.siblings, None)))
    }

    /// Bidirected-connected components, ordered by smallest member.
    pub fn c_components(&self) -> Vec<BTreeSet<NodeId>> {
        let mut seen = vec![false; self.node_count()];
        let mut out = Vec::new();
        for v in self.nodes() {
            if seen[v.0] {
                continue;
            }
            let comp = self.closure(&[v], &self.siblings, None);
            for (i, &c) in comp.iter().enumerate() {
                seen[i] |= c;
            }
            out.push(to_set(&comp));
        }
        out
    }

    fn kahn(&self) -> std::result::Result<Vec<NodeId>, Vec<bool>> {
        let n = self.node_count();
        let mut indeg: Vec<usize> = (0..n).map(|v| self.parents[v].len()).collect();
        let mut heap: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(u)) = heap.pop() {
            order.push(NodeId(u));
            for &c in &self.children[u] {
                indeg[c.0] -= 1;
                if indeg[c.0] == 0 {
                    heap.push(Reverse(c.0));
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(indeg.iter().map(|&d| d > 0).collect())
        }
    }

    /// Parents before children, ties broken by ordinal.
    pub fn topological_order(&self) -> Result<Vec<NodeId>> {
        self.kahn().map_err(|remaining| {
            // Every leftover node has a leftover parent; walking parents
            // must revisit a node, and that node lies on a cycle.
            let mut u = remaining.iter().position(|&r| r).expect("leftover node");
            let mut visited = vec![false; remaining.len()];
            while !visited[u] {
                visited[u] = true;
                u = self.parents[u]
                    .iter()
                    .find(|p| remaining[p.0])
                    .expect("leftover parent")
                    .0;
            }
            GraphError::Cycle(self.names[u].clone())
        })
    }

    /// Every nonempty proper subset `D` with `De(D) ⊆ D`, smallest first and
    /// lexicographically by sorted ordinals within a size.
    pub fn descendant_sets(&self) -> Result<Vec<BTreeSet<NodeId>>> {
        let order = self.topological_order()?;
        let n = self.node_count();
        let mut out = Vec::new();
        let mut chosen = vec![false; n];
        // Children are decided before parents when walking the reversed order.
        let rev: Vec<NodeId> = order.into_iter().rev().collect();
        self.enumerate_closed(&rev, 0, &mut chosen, &mut out);
        out.retain(|d: &Vec<NodeId>| !d.is_empty() && d.len() < n);
        for d in &mut out {
            d.sort();
        }
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(out.into_iter().map(|d| d.into_iter().collect()).collect())
    }

    fn enumerate_closed(
        &self,
        rev: &[NodeId],
        i: usize,
        chosen: &mut Vec<bool>,
        out: &mut Vec<Vec<NodeId>>,
    ) {
        if i == rev.len() {
            out.push(self.nodes().filter(|v| chosen[v.0]).collect());
            return;
        }
        let v = rev[i];
        self.enumerate_closed(rev, i + 1, chosen, out);
        if self.ch(v).iter().all(|c| chosen[c.0]) {
            chosen[v.0] = true;
            self.enumerate_closed(rev, i + 1, chosen, out);
            chosen[v.0] = false;
        }
    }

    pub fn is_descendant_closed(&self, set: &BTreeSet<NodeId>) -> std::result::Result<(), NodeId> {
        for &v in set {
            if self.ch(v).iter().any(|c| !set.contains(c)) {
                return Err(v);
            }
        }
        Ok(())
    }

    /// Subgraph induced on `keep`; node order and names are preserved.
    pub fn induced_subgraph(&self, keep: &BTreeSet<NodeId>) -> MixedGraph {
        let mut map = vec![None; self.node_count()];
        let mut names = Vec::new();
        for &v in keep {
            map[v.0] = Some(NodeId(names.len()));
            names.push(self.names[v.0].clone());
        }
        let directed = self
            .directed
            .iter()
            .filter_map(|e| {
                Some(DirectedEdge {
                    tail: map[e.tail.0]?,
                    head: map[e.head.0]?,
                    label: e.label.clone(),
                })
            })
            .collect();
        let bidirected = self
            .bidirected
            .iter()
            .filter_map(|e| Some(BidirectedEdge::new(map[e.a.0]?, map[e.b.0]?)))
            .collect();
        MixedGraph::assemble(names, directed, bidirected)
    }

    /// Builds a graph from already validated parts (used for sub-models).
    pub(crate) fn from_validated(
        names: Vec<String>,
        directed: Vec<DirectedEdge>,
        bidirected: Vec<BidirectedEdge>,
    ) -> MixedGraph {
        MixedGraph::assemble(names, directed, bidirected)
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            nodes: self.names.clone(),
            directed: self
                .directed
                .iter()
                .map(|e| {
                    (
                        self.names[e.tail.0].clone(),
                        self.names[e.head.0].clone(),
                        e.label.clone(),
                    )
                })
                .collect(),
            bidirected: self
                .bidirected
                .iter()
                .map(|e| (self.names[e.a.0].clone(), self.names[e.b.0].clone()))
                .collect(),
        }
    }

    pub fn names_of<'a>(&'a self, set: impl IntoIterator<Item = &'a NodeId>) -> Vec<String> {
        set.into_iter().map(|v| self.names[v.0].clone()).collect()
    }
}

pub(crate) fn to_set(mask: &[bool]) -> BTreeSet<NodeId> {
    mask.iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| NodeId(i))
        .collect()
}
