//! C-component decomposition and recursive descendant-set removal.

mod estimate;

pub use estimate::{estimate, CertificateOutcome, ContextCache, Estimates};

use std::collections::{BTreeSet, HashMap, HashSet};

use nalgebra::DMatrix;

use crate::context::{Context, Transform};
use crate::error::{Error, GraphError, LinalgError};
use crate::graph::{BidirectedEdge, DirectedEdge, MixedGraph, NodeId};
use crate::htc::{ht_id_with, HtcMode, IdStatus};
use crate::linalg::{prefix_regression, CovarianceMatrix};

pub const DEFAULT_MAX_NODES: usize = 16;

/// Bidirected components of `g` as node names, ordered by smallest ordinal.
pub fn c_components(g: &MixedGraph) -> Vec<Vec<String>> {
    g.c_components().iter().map(|c| g.names_of(c)).collect()
}

fn check_component(g: &MixedGraph, s: &BTreeSet<NodeId>) -> Result<(), GraphError> {
    let first = *s.iter().next().ok_or(GraphError::NotCComponent)?;
    if first.0 >= g.node_count() || g.c_component(first)? != *s {
        return Err(GraphError::NotCComponent);
    }
    Ok(())
}

/// `S ∪ Pa(S)` in node order.
pub fn sub_model_nodes(g: &MixedGraph, s: &BTreeSet<NodeId>) -> BTreeSet<NodeId> {
    let mut w = s.clone();
    for &v in s {
        w.extend(g.pa(v).iter().copied());
    }
    w
}

/// Graph of the sub-model for c-component `s`: nodes `S ∪ Pa(S)`, the edges
/// of `g` into `S`, and the bidirected edges of `g` inside `S`. Parents
/// outside `S` become exogenous.
pub fn sub_model_graph(g: &MixedGraph, s: &BTreeSet<NodeId>) -> Result<MixedGraph, GraphError> {
    check_component(g, s)?;
    g.topological_order()?;
    let w = sub_model_nodes(g, s);
    let mut map = vec![None; g.node_count()];
    let mut names = Vec::new();
    for &v in &w {
        map[v.0] = Some(NodeId(names.len()));
        names.push(g.name(v).to_string());
    }
    let directed = g
        .directed_edges()
        .iter()
        .filter(|e| s.contains(&e.head))
        .map(|e| DirectedEdge {
            tail: map[e.tail.0].expect("parent in W"),
            head: map[e.head.0].expect("head in S"),
            label: e.label.clone(),
        })
        .collect();
    let bidirected = g
        .bidirected_edges()
        .iter()
        .filter(|e| s.contains(&e.a) && s.contains(&e.b))
        .map(|e| BidirectedEdge::new(map[e.a.0].unwrap(), map[e.b.0].unwrap()))
        .collect();
    Ok(MixedGraph::from_validated(names, directed, bidirected))
}

fn check_order(g: &MixedGraph, order: &[NodeId]) -> Result<Vec<usize>, GraphError> {
    let n = g.node_count();
    let mut pos = vec![usize::MAX; n];
    if order.len() != n {
        return Err(GraphError::NotTopological(format!(
            "{} entries for {} nodes",
            order.len(),
            n
        )));
    }
    for (i, &v) in order.iter().enumerate() {
        if v.0 >= n || pos[v.0] != usize::MAX {
            return Err(GraphError::NotTopological(format!("ordinal {} repeated or out of range", v.0)));
        }
        pos[v.0] = i;
    }
    for e in g.directed_edges() {
        if pos[e.tail.0] > pos[e.head.0] {
            return Err(GraphError::NotTopological(format!(
                "`{}` comes after its child `{}`",
                g.name(e.tail),
                g.name(e.head)
            )));
        }
    }
    Ok(pos)
}

/// Covariance over `S ∪ Pa(S)` of the distribution that multiplies the
/// conditionals `P(v_i | prefix)` for `v_i ∈ S` (prefix taken along `order`)
/// with the marginals of all other nodes, treated as independent.
pub fn sub_model_covariance(
    sigma: &CovarianceMatrix,
    g: &MixedGraph,
    s: &BTreeSet<NodeId>,
    order: &[NodeId],
) -> Result<CovarianceMatrix, Error> {
    check_component(g, s)?;
    check_order(g, order)?;
    let full = sigma.aligned_to(g)?;
    if s.len() == g.node_count() {
        return Ok(full);
    }
    let n = g.node_count();
    let m = full.matrix();
    // X = B X + e with B strictly lower triangular along `order`.
    let mut b = DMatrix::<f64>::zeros(n, n);
    let mut d = vec![0.0; n];
    for (i, &v) in order.iter().enumerate() {
        if s.contains(&v) {
            let prefix: Vec<usize> = order[..i].iter().map(|u| u.0).collect();
            let (beta, var) = prefix_regression(m, v.0, &prefix)
                .ok_or_else(|| LinalgError::SingularPrefix(g.name(v).to_string()))?;
            for (k, &p) in prefix.iter().enumerate() {
                b[(v.0, p)] = beta[k];
            }
            d[v.0] = var;
        } else {
            d[v.0] = m[(v.0, v.0)];
        }
    }
    // Rows of M = (I - B)^{-1}, filled along the order.
    let mut mix = DMatrix::<f64>::zeros(n, n);
    for &v in order {
        mix[(v.0, v.0)] = 1.0;
        for &u in order.iter().take_while(|&&u| u != v) {
            let coef = b[(v.0, u.0)];
            if coef != 0.0 {
                for k in 0..n {
                    mix[(v.0, k)] += coef * mix[(u.0, k)];
                }
            }
        }
    }
    let w: Vec<usize> = sub_model_nodes(g, s).iter().map(|v| v.0).collect();
    let cov = DMatrix::from_fn(w.len(), w.len(), |r, c| {
        (0..n).map(|k| mix[(w[r], k)] * d[k] * mix[(w[c], k)]).sum()
    });
    let names = w.iter().map(|&i| g.names()[i].clone()).collect();
    Ok(CovarianceMatrix::from_trusted(names, cov))
}

/// Drops the descendant-closed set `d`: the induced graph on the remaining
/// nodes and the matching block of `sigma`.
pub fn remove_descendants(
    g: &MixedGraph,
    sigma: &CovarianceMatrix,
    d: &BTreeSet<NodeId>,
) -> Result<(MixedGraph, CovarianceMatrix), Error> {
    if d.is_empty() || d.len() >= g.node_count() || d.iter().any(|v| v.0 >= g.node_count()) {
        return Err(GraphError::NotProperSubset.into());
    }
    if let Err(v) = g.is_descendant_closed(d) {
        return Err(GraphError::NotDescendantClosed(g.name(v).to_string()).into());
    }
    let keep: BTreeSet<NodeId> = g.nodes().filter(|v| !d.contains(v)).collect();
    let sub = g.induced_subgraph(&keep);
    let cov = sigma.restrict(sub.names())?;
    Ok((sub, cov))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecompOptions {
    /// Largest root graph accepted; the descendant-set recursion is exponential.
    pub max_nodes: usize,
}

impl Default for DecompOptions {
    fn default() -> Self {
        Self {
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

struct Decomposer<'g> {
    root: &'g MixedGraph,
    status: IdStatus,
    /// Size of the identified set when HT-ID last ran on a component.
    last_run: HashMap<BTreeSet<NodeId>, usize>,
    /// Same for HT-ID on a whole ancestral node set.
    whole_runs: HashMap<BTreeSet<NodeId>, usize>,
    round: usize,
}

impl Decomposer<'_> {
    fn all_identified(&self, g: &MixedGraph) -> bool {
        g.directed_edges()
            .iter()
            .all(|e| self.status.identified.contains(&e.label))
    }

    /// `u` is an ancestral node set of the root, so its graph is the induced
    /// subgraph and node ids map back through names.
    fn rec(&mut self, u: BTreeSet<NodeId>, ctx: Context, visited: &mut HashSet<BTreeSet<NodeId>>) {
        if !visited.insert(u.clone()) {
            return;
        }
        let gu = self.root.induced_subgraph(&u);
        let to_root: Vec<NodeId> = u.iter().copied().collect();
        let comps = gu.c_components();
        for comp in &comps {
            let key: BTreeSet<NodeId> = comp.iter().map(|v| to_root[v.0]).collect();
            if self.last_run.get(&key) == Some(&self.status.identified.len()) {
                continue;
            }
            let sub = sub_model_graph(&gu, comp).expect("component of an acyclic graph");
            let sub_ctx = ctx.then(Transform::ExtractComponent(gu.names_of(comp)));
            ht_id_with(&sub, HtcMode::General, &mut self.status, &sub_ctx, self.round);
            self.last_run.insert(key, self.status.identified.len());
        }
        // The criterion is not invariant under decomposition, so the
        // undecomposed graph gets its own run. With a single component the
        // sub-model is the graph itself.
        if comps.len() > 1 && self.whole_runs.get(&u) != Some(&self.status.identified.len()) {
            ht_id_with(&gu, HtcMode::General, &mut self.status, &ctx, self.round);
            self.whole_runs.insert(u.clone(), self.status.identified.len());
        }
        if self.all_identified(&gu) {
            return;
        }
        for d in gu.descendant_sets().expect("acyclic") {
            // Removing nodes without siblings cannot split a component.
            if d.iter().all(|&v| gu.sib(v).is_empty()) {
                continue;
            }
            let rest: BTreeSet<NodeId> = u
                .iter()
                .enumerate()
                .filter(|(i, _)| !d.contains(&NodeId(*i)))
                .map(|(_, &v)| v)
                .collect();
            let next = ctx.then(Transform::RemoveDescendants(gu.names_of(&d)));
            self.rec(rest, next, visited);
        }
    }
}

/// Repeats the recursive decomposition from the root until every coefficient
/// is identified or a full pass adds nothing.
pub fn decomp_ht_id(g: &MixedGraph, opts: &DecompOptions) -> Result<IdStatus, GraphError> {
    if g.node_count() > opts.max_nodes {
        return Err(GraphError::TooLarge {
            nodes: g.node_count(),
            max: opts.max_nodes,
        });
    }
    g.topological_order()?;
    let mut dec = Decomposer {
        root: g,
        status: IdStatus::default(),
        last_run: HashMap::new(),
        whole_runs: HashMap::new(),
        round: 0,
    };
    let all: BTreeSet<NodeId> = g.nodes().collect();
    loop {
        dec.round += 1;
        let before = dec.status.identified.len();
        dec.rec(all.clone(), Context::root(), &mut HashSet::new());
        if dec.all_identified(g) || dec.status.identified.len() == before {
            break;
        }
    }
    Ok(dec.status)
}

#[cfg(test)]
mod tests;
