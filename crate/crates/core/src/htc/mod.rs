//! The general half-trek criterion: admissible-set search by max-flow,
//! allowed-node tracking, the iterative identification sweep, and the
//! certificates that turn each success into a linear system over `Σ`.

mod allowed;
mod flow;
mod search;
mod system;

pub use allowed::{allowed_nodes, candidates, Candidate};
pub use flow::{build_flow_network, max_flow_admissible, FlowNetwork};
pub use search::{candidate_edge_sets, ht_id, ht_id_with};
pub use system::build_system;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::context::Context;

/// Which family of edge sets the sweep may certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HtcMode {
    /// All incoming edges of a node at once.
    Plain,
    /// Whole connected edge sets.
    EdgeSet,
    /// Any subset of a connected edge set.
    General,
}

/// How one equation row of a certificate is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    /// `Σ_{y,·}`.
    #[serde(rename = "sigma")]
    Covariance,
    /// `[(I - Λ̂)^T Σ]_{y,·}`, using the certificate's dependency coefficients.
    Residual,
}

/// Witness that the coefficients of `edges` (all into `head`) are determined
/// by the covariance of the model selected by `context`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub id: usize,
    pub head: String,
    /// Coefficient labels, ordered by tail ordinal.
    pub edges: Vec<String>,
    /// Tails matching `edges`.
    pub tails: Vec<String>,
    pub y_set: Vec<String>,
    /// Parallel to `y_set`.
    pub row_kinds: Vec<RowKind>,
    /// Labels of edges into members of `y_set` whose values enter the rows.
    pub dependencies: Vec<String>,
    pub context: Context,
    /// Outer fixpoint iteration in which the certificate was found (1-based).
    pub round: usize,
}

/// Identified coefficient labels plus the certificates, in the order they
/// were found. Every dependency of a certificate is covered by an earlier one.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IdStatus {
    pub identified: BTreeSet<String>,
    pub certificates: Vec<Certificate>,
}

impl IdStatus {
    pub fn is_identified(&self, label: &str) -> bool {
        self.identified.contains(label)
    }

    /// First certificate covering `label`.
    pub fn certificate_for(&self, label: &str) -> Option<&Certificate> {
        self.certificates
            .iter()
            .find(|c| c.edges.iter().any(|e| e == label))
    }

    /// Checks that each certificate's dependencies were covered by strictly
    /// earlier certificates.
    pub fn dependency_order_is_valid(&self) -> bool {
        let mut known = BTreeSet::new();
        for c in &self.certificates {
            if !c.dependencies.iter().all(|d| known.contains(d)) {
                return false;
            }
            known.extend(c.edges.iter().cloned());
        }
        known == self.identified
    }
}
