//! The randomized property run behind `random-check`.

use serde::{Deserialize, Serialize};

use super::compare::{compare_criteria, Criterion};
use super::ctree::{c_tree_exists, C_TREE_MAX_NODES};
use super::random::{ensemble, EnsembleConfig};
use super::roundtrip::verify_round_trip;
use crate::decomp::DecompOptions;
use crate::error::Error;
use crate::graph::GraphFile;
use crate::htc::RowKind;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    /// Largest accepted absolute estimation error.
    pub tolerance: f64,
    pub decomp: DecompOptions,
    /// Corrupts one certificate before estimation to prove the harness
    /// notices a bad certificate.
    pub inject_fault: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            decomp: DecompOptions::default(),
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoundnessViolation {
    pub graph: usize,
    pub draw: usize,
    pub mode: Criterion,
    pub label: String,
    pub truth: f64,
    pub estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentViolation {
    pub graph: usize,
    pub weaker: Criterion,
    pub stronger: Criterion,
    /// Labels found by the weaker mode only.
    pub missing: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CTreeViolation {
    pub graph: usize,
    pub node: String,
    /// Edges into `node` left unidentified although no c-tree is rooted there.
    pub unidentified: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomCheckReport {
    pub config: EnsembleConfig,
    pub tolerance: f64,
    pub graphs: usize,
    pub draws: usize,
    pub edges_checked: usize,
    pub max_error: f64,
    pub c_tree_nodes_checked: usize,
    pub soundness_violations: Vec<SoundnessViolation>,
    pub containment_violations: Vec<ContainmentViolation>,
    pub c_tree_violations: Vec<CTreeViolation>,
    /// Graphs with at least one violation, for reproduction.
    pub failing_graphs: Vec<(usize, GraphFile)>,
    pub passed: bool,
}

/// Runs soundness, containment and c-tree checks over the ensemble.
pub fn random_check(cfg: &EnsembleConfig, opts: &SuiteOptions) -> Result<RandomCheckReport, Error> {
    let mut report = RandomCheckReport {
        config: cfg.clone(),
        tolerance: opts.tolerance,
        graphs: 0,
        draws: 0,
        edges_checked: 0,
        max_error: 0.0,
        c_tree_nodes_checked: 0,
        soundness_violations: Vec::new(),
        containment_violations: Vec::new(),
        c_tree_violations: Vec::new(),
        failing_graphs: Vec::new(),
        passed: true,
    };
    let mut fault_pending = opts.inject_fault;
    for eg in ensemble(cfg) {
        let g = &eg.graph;
        let before = violation_count(&report);
        let mut cmp = compare_criteria(g, &opts.decomp)?;
        report.graphs += 1;

        if fault_pending {
            let status = cmp.statuses.get_mut(&Criterion::GHtc).expect("all modes run");
            if let Some(cert) = status.certificates.first_mut() {
                cert.y_set = vec![cert.head.clone(); cert.edges.len()];
                cert.row_kinds = vec![RowKind::Covariance; cert.edges.len()];
                cert.dependencies.clear();
                fault_pending = false;
            }
        }

        let flags = cmp.containment();
        for (k, ok) in flags.iter().enumerate() {
            if !ok {
                let (weaker, stronger) = (Criterion::ALL[k], Criterion::ALL[k + 1]);
                report.containment_violations.push(ContainmentViolation {
                    graph: eg.index,
                    weaker,
                    stronger,
                    missing: cmp.identified[&weaker]
                        .difference(&cmp.identified[&stronger])
                        .cloned()
                        .collect(),
                });
            }
        }

        for (draw, m) in eg.models.iter().enumerate() {
            report.draws += 1;
            for (mode, status) in &cmp.statuses {
                let rt = verify_round_trip(g, m, status, opts.tolerance)?;
                report.edges_checked += rt.checked;
                report.max_error = report.max_error.max(rt.max_error);
                report.soundness_violations.extend(rt.misses.into_iter().map(|miss| SoundnessViolation {
                    graph: eg.index,
                    draw,
                    mode: *mode,
                    label: miss.label,
                    truth: miss.truth,
                    estimate: miss.estimate,
                }));
            }
        }

        if g.node_count() <= C_TREE_MAX_NODES {
            let decomp = &cmp.identified[&Criterion::Decomp];
            for y in g.nodes() {
                report.c_tree_nodes_checked += 1;
                if c_tree_exists(g, y)? {
                    continue;
                }
                let unidentified: Vec<String> = g
                    .inc(y)
                    .iter()
                    .map(|&e| g.edge(e).label.clone())
                    .filter(|l| !decomp.contains(l))
                    .collect();
                if !unidentified.is_empty() {
                    report.c_tree_violations.push(CTreeViolation {
                        graph: eg.index,
                        node: g.name(y).to_string(),
                        unidentified,
                    });
                }
            }
        }

        if violation_count(&report) > before {
            report.failing_graphs.push((eg.index, g.to_file()));
        }
    }
    report.passed = violation_count(&report) == 0;
    Ok(report)
}

fn violation_count(r: &RandomCheckReport) -> usize {
    r.soundness_violations.len() + r.containment_violations.len() + r.c_tree_violations.len()
}
