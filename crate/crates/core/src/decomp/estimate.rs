use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{remove_descendants, sub_model_covariance, sub_model_graph};
use crate::context::{Context, Transform};
use crate::error::{EstimateError, GraphError};
use crate::graph::{MixedGraph, NodeId};
use crate::htc::{build_system, IdStatus};
use crate::linalg::{solve, CovarianceMatrix};

/// Condition numbers above this trigger a warning on the certificate.
pub const CONDITION_WARNING: f64 = 1e10;

/// Result of evaluating one certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateOutcome {
    pub certificate: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimates {
    pub values: BTreeMap<String, f64>,
    pub outcomes: Vec<CertificateOutcome>,
}

/// Graphs and covariances of the contexts met so far, keyed by context.
pub struct ContextCache<'r> {
    root: &'r MixedGraph,
    root_order: Vec<String>,
    cache: HashMap<Context, (MixedGraph, CovarianceMatrix)>,
}

impl<'r> ContextCache<'r> {
    pub fn new(root: &'r MixedGraph, sigma: &CovarianceMatrix) -> Result<Self, EstimateError> {
        let order = root.topological_order()?;
        let aligned = sigma
            .aligned_to(root)
            .map_err(|e| EstimateError::Context(Context::root().id(), e.to_string()))?;
        let mut cache = HashMap::new();
        cache.insert(Context::root(), (root.clone(), aligned));
        Ok(Self {
            root,
            root_order: root.names_of(&order),
            cache,
        })
    }

    pub fn root(&self) -> &MixedGraph {
        self.root
    }

    /// Graph and covariance of `ctx`, building missing prefixes on the way.
    pub fn get(&mut self, ctx: &Context) -> Result<&(MixedGraph, CovarianceMatrix), EstimateError> {
        for len in 1..=ctx.transforms().len() {
            let key = ctx.prefix(len);
            if self.cache.contains_key(&key) {
                continue;
            }
            let (g, sigma) = &self.cache[&ctx.prefix(len - 1)];
            let fail = |e: String| EstimateError::Context(key.id(), e);
            let next = match &ctx.transforms()[len - 1] {
                Transform::RemoveDescendants(names) => {
                    let d = node_set(g, names).map_err(|e| fail(e.to_string()))?;
                    remove_descendants(g, sigma, &d).map_err(|e| fail(e.to_string()))?
                }
                Transform::ExtractComponent(names) => {
                    let s = node_set(g, names).map_err(|e| fail(e.to_string()))?;
                    let order: Vec<NodeId> = self
                        .root_order
                        .iter()
                        .filter_map(|n| g.node(n).ok())
                        .collect();
                    let sub = sub_model_graph(g, &s).map_err(|e| fail(e.to_string()))?;
                    let cov =
                        sub_model_covariance(sigma, g, &s, &order).map_err(|e| fail(e.to_string()))?;
                    (sub, cov)
                }
            };
            self.cache.insert(key, next);
        }
        Ok(&self.cache[ctx])
    }
}

fn node_set(g: &MixedGraph, names: &[String]) -> Result<BTreeSet<NodeId>, GraphError> {
    names.iter().map(|n| g.node(n)).collect()
}

/// Replays the certificates of `status` in order against `sigma` (over the
/// nodes of `root`). The first certificate to produce a label's value wins.
/// Certificates that fail numerically are recorded and skipped; a context
/// that cannot be built is an error.
pub fn estimate(
    root: &MixedGraph,
    status: &IdStatus,
    sigma: &CovarianceMatrix,
) -> Result<Estimates, EstimateError> {
    let mut contexts = ContextCache::new(root, sigma)?;
    let mut out = Estimates::default();
    for cert in &status.certificates {
        let (g, cov) = contexts.get(&cert.context)?;
        let mut outcome = CertificateOutcome {
            certificate: cert.id,
            condition: None,
            warning: None,
            error: None,
        };
        let solved = build_system(g, cert, cov, &out.values).and_then(|(a, b)| {
            solve(&a, &b).map_err(|source| EstimateError::Linalg {
                certificate: cert.id,
                source,
            })
        });
        match solved {
            Ok(sol) => {
                if sol.condition > CONDITION_WARNING {
                    outcome.warning = Some(format!("condition number {:.3e}", sol.condition));
                }
                outcome.condition = Some(sol.condition);
                for (label, x) in cert.edges.iter().zip(sol.x) {
                    out.values.entry(label.clone()).or_insert(x);
                }
            }
            Err(EstimateError::Graph(e)) => {
                return Err(EstimateError::Context(cert.context.id(), e.to_string()))
            }
            Err(e) => outcome.error = Some(e.to_string()),
        }
        out.outcomes.push(outcome);
    }
    Ok(out)
}
