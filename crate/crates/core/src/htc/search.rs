use std::collections::HashMap;

use super::allowed::{candidates, Candidate};
use super::flow::max_flow_admissible;
use super::{Certificate, HtcMode, IdStatus, RowKind};
use crate::context::Context;
use crate::graph::{EdgeSet, MixedGraph};

/// Edge sets tried by one sweep, in sweep order: by head ordinal, then by
/// connected edge set; in `General` mode each connected edge set expands into
/// its nonempty subsets, largest first, ties by tail ordinals. A head with
/// several connected edge sets also gets its whole incoming set, last.
pub fn candidate_edge_sets(g: &MixedGraph, mode: HtcMode) -> Vec<EdgeSet> {
    let mut out = Vec::new();
    for v in g.nodes() {
        if g.inc(v).is_empty() {
            continue;
        }
        match mode {
            HtcMode::Plain => out.extend(EdgeSet::new(g, g.inc(v).iter().copied())),
            HtcMode::EdgeSet | HtcMode::General => {
                let blocks = g.connected_edge_sets(v).expect("node of g");
                let several = blocks.len() > 1;
                for block in blocks {
                    if mode == HtcMode::General {
                        out.extend(subsets_largest_first(g, &block));
                    } else {
                        out.push(block);
                    }
                }
                // The whole incoming set can succeed where every block fails,
                // since the other-parents condition is then vacuous.
                if several {
                    out.extend(EdgeSet::new(g, g.inc(v).iter().copied()));
                }
            }
        }
    }
    out
}

fn subsets_largest_first(g: &MixedGraph, block: &EdgeSet) -> Vec<EdgeSet> {
    let k = block.len();
    let mut subsets: Vec<Vec<usize>> = (1u64..(1 << k))
        .map(|mask| (0..k).filter(|i| mask >> i & 1 == 1).collect())
        .collect();
    // Positions within `block` follow tail ordinals, so comparing position
    // lists is the lexicographic tail order.
    subsets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    subsets
        .into_iter()
        .filter_map(|s| EdgeSet::new(g, s.into_iter().map(|i| block.edges()[i])))
        .collect()
}

/// Runs the identification sweep on `g` from scratch in the root context.
pub fn ht_id(g: &MixedGraph, mode: HtcMode) -> IdStatus {
    let mut status = IdStatus::default();
    ht_id_with(g, mode, &mut status, &Context::root(), 1);
    status
}

/// Repeats sweeps over all candidate edge sets until one adds nothing,
/// appending certificates to `status`. Returns the number of newly
/// identified labels.
pub fn ht_id_with(
    g: &MixedGraph,
    mode: HtcMode,
    status: &mut IdStatus,
    context: &Context,
    round: usize,
) -> usize {
    let sets = candidate_edge_sets(g, mode);
    let mut analysis: HashMap<usize, Vec<Candidate>> = HashMap::new();
    let start = status.identified.len();
    loop {
        let before = status.identified.len();
        for (i, e) in sets.iter().enumerate() {
            if e.labels(g).iter().all(|l| status.identified.contains(*l)) {
                continue;
            }
            let cands = analysis.entry(i).or_insert_with(|| candidates(g, e));
            let allowed: Vec<&Candidate> = cands
                .iter()
                .filter(|c| c.is_allowed(g, &status.identified))
                .collect();
            if allowed.len() < e.len() {
                continue;
            }
            let pool = allowed.iter().map(|c| c.node).collect();
            let Some(y) = max_flow_admissible(g, e, &pool) else {
                continue;
            };
            let rows: Vec<&Candidate> = y
                .iter()
                .map(|n| *allowed.iter().find(|c| c.node == *n).expect("y from pool"))
                .collect();
            let mut dependencies: Vec<String> = rows
                .iter()
                .filter(|c| c.row == RowKind::Residual)
                .flat_map(|c| c.dependencies.iter().map(|&d| g.edge(d).label.clone()))
                .collect();
            dependencies.sort();
            let cert = Certificate {
                id: status.certificates.len(),
                head: g.name(e.head()).to_string(),
                edges: e.labels(g).iter().map(|s| s.to_string()).collect(),
                tails: g.names_of(&e.tails(g)),
                y_set: g.names_of(&y),
                row_kinds: rows.iter().map(|c| c.row).collect(),
                dependencies,
                context: context.clone(),
                round,
            };
            status.identified.extend(cert.edges.iter().cloned());
            status.certificates.push(cert);
        }
        if status.identified.len() == before {
            break;
        }
    }
    status.identified.len() - start
}
