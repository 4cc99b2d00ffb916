use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::decomp::{estimate, sub_model_graph};
use crate::error::Error;
use crate::graph::{MixedGraph, NodeId};
use crate::htc::IdStatus;
use crate::linalg::{implied_covariance, CovarianceMatrix, ModelInstance};

/// One identified edge whose estimate missed the true value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripMiss {
    pub label: String,
    pub truth: f64,
    /// `None` when no certificate produced a value.
    pub estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub checked: usize,
    pub max_error: f64,
    pub misses: Vec<RoundTripMiss>,
}

impl RoundTripReport {
    pub fn passed(&self) -> bool {
        self.misses.is_empty()
    }
}

/// Estimates every identified edge of `status` from the exact covariance of
/// `m` and compares with the true coefficients. Edges whose estimate is
/// missing or off by more than `tolerance` are reported as misses.
pub fn verify_round_trip(
    g: &MixedGraph,
    m: &ModelInstance,
    status: &IdStatus,
    tolerance: f64,
) -> Result<RoundTripReport, Error> {
    let sigma = implied_covariance(g, m)?;
    let est = estimate(g, status, &sigma)?;
    let mut report = RoundTripReport {
        checked: 0,
        max_error: 0.0,
        misses: Vec::new(),
    };
    for label in &status.identified {
        let truth = m.coefficient(g, label).expect("label of g");
        report.checked += 1;
        match est.values.get(label) {
            Some(&x) if (x - truth).abs() <= tolerance => {
                report.max_error = report.max_error.max((x - truth).abs());
            }
            Some(&x) => {
                report.max_error = report.max_error.max((x - truth).abs());
                report.misses.push(RoundTripMiss {
                    label: label.clone(),
                    truth,
                    estimate: Some(x),
                });
            }
            None => report.misses.push(RoundTripMiss {
                label: label.clone(),
                truth,
                estimate: None,
            }),
        }
    }
    Ok(report)
}

/// Covariance of the sub-model for c-component `s` built from the true
/// parameters: coefficients of the edges into `s`, error covariance of `s`
/// from `Ω`, and every parent outside `s` an independent variable with its
/// true marginal variance.
pub fn oracle_sub_model_covariance(
    g: &MixedGraph,
    m: &ModelInstance,
    s: &BTreeSet<NodeId>,
) -> Result<CovarianceMatrix, Error> {
    let sub = sub_model_graph(g, s)?;
    let full = implied_covariance(g, m)?;
    let to_root: Vec<NodeId> = sub.names().iter().map(|n| g.node(n).expect("node of g")).collect();
    let k = sub.node_count();
    let mut sm = ModelInstance::identity(k);
    for e in sub.directed_edges() {
        sm.lambda[(e.tail.0, e.head.0)] = m.lambda[(to_root[e.tail.0].0, to_root[e.head.0].0)];
    }
    for i in 0..k {
        for j in 0..k {
            let (ri, rj) = (to_root[i], to_root[j]);
            sm.omega[(i, j)] = if s.contains(&ri) && s.contains(&rj) {
                m.omega[(ri.0, rj.0)]
            } else if i == j {
                full.matrix()[(ri.0, ri.0)]
            } else {
                0.0
            };
        }
    }
    Ok(implied_covariance(&sub, &sm)?)
}
