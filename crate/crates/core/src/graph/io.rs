use serde::{Deserialize, Serialize};

use super::{GraphBuilder, MixedGraph, Result};
use crate::error::{json_position, GraphError};

/// On-disk graph layout:
/// `{"nodes":[..],"directed":[[tail,head,label],..],"bidirected":[[a,b],..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub directed: Vec<(String, String, String)>,
    #[serde(default)]
    pub bidirected: Vec<(String, String)>,
}

impl GraphFile {
    pub fn into_graph(self) -> Result<MixedGraph> {
        let mut b = GraphBuilder::new();
        for n in &self.nodes {
            b.add_node(n)?;
        }
        for (t, h, l) in &self.directed {
            b.add_directed(t, h, l)?;
        }
        for (x, y) in &self.bidirected {
            b.add_bidirected(x, y)?;
        }
        Ok(b.build())
    }
}

/// Parses and validates a graph document. Syntax errors carry line and column;
/// structural errors name the offending array entry.
pub fn parse_graph_json(text: &str) -> Result<MixedGraph> {
    let file: GraphFile =
        serde_json::from_str(text).map_err(|e| GraphError::Parse(json_position(&e)))?;
    file.into_graph()
}
