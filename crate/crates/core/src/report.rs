//! JSON documents written by the command-line tool.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decomp::Estimates;
use crate::graph::MixedGraph;
use crate::htc::{Certificate, IdStatus};
use crate::oracle::Criterion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeStatus {
    Identified,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub status: EdgeStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
}

/// Per-edge verdicts plus the certificates that back them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub mode: Criterion,
    pub identified: usize,
    pub total: usize,
    pub edges: BTreeMap<String, EdgeReport>,
    pub certificates: Vec<Certificate>,
}

impl AnalysisReport {
    pub fn new(g: &MixedGraph, mode: Criterion, status: &IdStatus) -> Self {
        let edges = g
            .directed_edges()
            .iter()
            .map(|e| {
                let cert = status.certificate_for(&e.label);
                let rep = EdgeReport {
                    status: if cert.is_some() {
                        EdgeStatus::Identified
                    } else {
                        EdgeStatus::Undecided
                    },
                    certificate: cert.map(|c| c.id),
                    context: cert.map(|c| c.context.id()),
                    estimate: None,
                };
                (e.label.clone(), rep)
            })
            .collect();
        Self {
            mode,
            identified: status.identified.len(),
            total: g.directed_edges().len(),
            edges,
            certificates: status.certificates.clone(),
        }
    }

    pub fn all_identified(&self) -> bool {
        self.identified == self.total
    }

    /// Status rebuilt from the certificates, for replaying a stored report.
    pub fn status(&self) -> IdStatus {
        IdStatus {
            identified: self
                .certificates
                .iter()
                .flat_map(|c| c.edges.iter().cloned())
                .collect(),
            certificates: self.certificates.clone(),
        }
    }

    pub fn attach_estimates(&mut self, est: &Estimates) {
        for (label, rep) in &mut self.edges {
            rep.estimate = est.values.get(label).copied();
        }
    }
}

/// Output of `semid estimate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimates: BTreeMap<String, f64>,
    pub undecided: Vec<String>,
    pub certificates: Vec<crate::decomp::CertificateOutcome>,
}

impl EstimateReport {
    pub fn new(g: &MixedGraph, est: &Estimates) -> Self {
        Self {
            estimates: est.values.clone(),
            undecided: g
                .directed_edges()
                .iter()
                .filter(|e| !est.values.contains_key(&e.label))
                .map(|e| e.label.clone())
                .collect(),
            certificates: est.outcomes.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::htc::{ht_id, HtcMode};

    #[test]
    fn report_round_trips_through_json() {
        let g = MixedGraph::from_parts(
            &["z", "x", "y"],
            &[("z", "x", "a"), ("x", "y", "b")],
            &[("x", "y")],
        )
        .unwrap();
        let status = ht_id(&g, HtcMode::General);
        let rep = AnalysisReport::new(&g, Criterion::GHtc, &status);
        assert!(rep.all_identified());
        let text = serde_json::to_string_pretty(&rep).unwrap();
        assert!(text.contains("\"status\": \"identified\""));
        assert!(text.contains("\"context\": \"root\""));
        let back: AnalysisReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rep);
        assert_eq!(back.status(), status);
    }
}
