//! Identification of linear structural equation models on mixed graphs by
//! half-trek criteria and graph decomposition, with estimation from a
//! covariance matrix and randomized checks.

pub mod context;
pub mod decomp;
pub mod error;
pub mod graph;
pub mod htc;
pub mod linalg;
pub mod oracle;
pub mod report;

pub use context::{Context, Transform};
pub use graph::{EdgeSet, MixedGraph, NodeId};
pub use htc::{ht_id, Certificate, HtcMode, IdStatus};
pub use linalg::{CovarianceMatrix, ModelInstance};
