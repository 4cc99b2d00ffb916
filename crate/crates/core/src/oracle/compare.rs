use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decomp::{decomp_ht_id, DecompOptions};
use crate::error::GraphError;
use crate::graph::MixedGraph;
use crate::htc::{ht_id, HtcMode, IdStatus};

/// The four identification procedures, from weakest to strongest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// Whole incoming edge sets only.
    Htc,
    /// Whole connected edge sets only.
    EdgeSet,
    /// Subsets of connected edge sets.
    GHtc,
    /// Subsets of connected edge sets with c-component decomposition.
    Decomp,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [Criterion::Htc, Criterion::EdgeSet, Criterion::GHtc, Criterion::Decomp];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Htc => "htc",
            Criterion::EdgeSet => "edge-set",
            Criterion::GHtc => "g-htc",
            Criterion::Decomp => "decomp",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected htc, edge-set, g-htc or decomp)"))
    }
}

/// Runs one procedure on `g`. Only `Decomp` can fail (cyclic or too large).
pub fn run_criterion(g: &MixedGraph, c: Criterion, opts: &DecompOptions) -> Result<IdStatus, GraphError> {
    Ok(match c {
        Criterion::Htc => ht_id(g, HtcMode::Plain),
        Criterion::EdgeSet => ht_id(g, HtcMode::EdgeSet),
        Criterion::GHtc => ht_id(g, HtcMode::General),
        Criterion::Decomp => decomp_ht_id(g, opts)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub total: usize,
    pub identified: BTreeMap<Criterion, BTreeSet<String>>,
    pub statuses: BTreeMap<Criterion, IdStatus>,
}

impl Comparison {
    /// Whether each procedure's identified set lies inside the next one's,
    /// in the order of [`Criterion::ALL`]; one flag per adjacent pair.
    pub fn containment(&self) -> [bool; 3] {
        let s = |c| &self.identified[&c];
        [
            s(Criterion::Htc).is_subset(s(Criterion::EdgeSet)),
            s(Criterion::EdgeSet).is_subset(s(Criterion::GHtc)),
            s(Criterion::GHtc).is_subset(s(Criterion::Decomp)),
        ]
    }
}

pub fn compare_criteria(g: &MixedGraph, opts: &DecompOptions) -> Result<Comparison, GraphError> {
    let mut identified = BTreeMap::new();
    let mut statuses = BTreeMap::new();
    for c in Criterion::ALL {
        let status = run_criterion(g, c, opts)?;
        identified.insert(c, status.identified.clone());
        statuses.insert(c, status);
    }
    Ok(Comparison {
        total: g.directed_edges().len(),
        identified,
        statuses,
    })
}

/// CSV with one row per (graph, mode): identified count, edge count, the
/// identified labels joined by `;`, and whether the set is contained in the
/// next stronger mode's set (empty for the last mode).
pub fn comparison_csv(rows: &[(String, Comparison)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["graph", "mode", "identified", "total", "labels", "contained_in_next"])
        .expect("in-memory write");
    for (id, cmp) in rows {
        let flags = cmp.containment();
        for (k, c) in Criterion::ALL.iter().enumerate() {
            let set = &cmp.identified[c];
            let labels: Vec<&str> = set.iter().map(String::as_str).collect();
            let flag = flags.get(k).map(|f| f.to_string()).unwrap_or_default();
            w.write_record([
                id.as_str(),
                c.name(),
                &set.len().to_string(),
                &cmp.total.to_string(),
                &labels.join(";"),
                &flag,
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_names_round_trip() {
        for c in Criterion::ALL {
            assert_eq!(c.name().parse::<Criterion>().unwrap(), c);
        }
        assert!("nope".parse::<Criterion>().is_err());
    }

    #[test]
    fn csv_layout() {
        let g = MixedGraph::from_parts(&["x", "y"], &[("x", "y", "b")], &[("x", "y")]).unwrap();
        let cmp = compare_criteria(&g, &DecompOptions::default()).unwrap();
        let csv = comparison_csv(&[("bow".into(), cmp)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "graph,mode,identified,total,labels,contained_in_next");
        assert_eq!(lines[1], "bow,htc,0,1,,true");
        assert_eq!(lines[4], "bow,decomp,0,1,,");
    }
}
