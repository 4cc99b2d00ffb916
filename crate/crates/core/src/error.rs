use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node ordinal {0} out of range")]
    NodeOutOfRange(usize),
    #[error("{at}: node names must be nonempty")]
    EmptyName { at: String },
    #[error("{at}: duplicate node `{name}`")]
    DuplicateNode { at: String, name: String },
    #[error("{at}: self-loop on `{node}`")]
    SelfLoop { at: String, node: String },
    #[error("{at}: duplicate edge between `{a}` and `{b}`")]
    DuplicateEdge { at: String, a: String, b: String },
    #[error("{at}: duplicate label `{label}`")]
    DuplicateLabel { at: String, label: String },
    #[error("{at}: edge labels must be nonempty")]
    EmptyLabel { at: String },
    #[error("graph has a directed cycle through `{0}`")]
    Cycle(String),
    #[error("node set is not closed under descendants (`{0}` has a descendant outside it)")]
    NotDescendantClosed(String),
    #[error("node set must be a nonempty proper subset of the graph")]
    NotProperSubset,
    #[error("node set is not a c-component of the graph")]
    NotCComponent,
    #[error("graph has {nodes} nodes, more than the configured bound of {max}")]
    TooLarge { nodes: usize, max: usize },
    #[error("malformed graph file: {0}")]
    Parse(String),
    #[error("order is not a topological order of the graph: {0}")]
    NotTopological(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not symmetric: entry ({row}, {col}) differs by {diff:e}")]
    Asymmetric { row: String, col: String, diff: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is numerically singular at pivot {0}")]
    Singular(usize),
    #[error("predictor block for `{0}` is singular")]
    SingularPrefix(String),
    #[error("(I - Lambda) is singular")]
    SingularModel,
    #[error("covariance has no entry for node `{0}`")]
    MissingNode(String),
    #[error("malformed covariance input: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("certificate {certificate}: missing values for dependencies {labels:?}")]
    MissingDependencies {
        certificate: usize,
        labels: Vec<String>,
    },
    #[error("certificate {certificate}: {source}")]
    Linalg {
        certificate: usize,
        #[source]
        source: LinalgError,
    },
    #[error("context `{0}` cannot be materialized: {1}")]
    Context(String, String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Failure of an operation that touches both graph structure and numbers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
}

/// `line L column C: message` for a serde_json error, without the trailing
/// position serde_json appends itself.
pub(crate) fn json_position(e: &serde_json::Error) -> String {
    let full = e.to_string();
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    let msg = full.strip_suffix(&suffix).unwrap_or(&full);
    format!("line {} column {}: {msg}", e.line(), e.column())
}
