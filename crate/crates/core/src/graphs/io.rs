//! JSON graph files.
//!
//! ```json
//! {"version":1,"provenance":{"kind":"explicit"},"vertex_count":2,"edges":[[0,1]]}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cap::CapEmbedding;
use super::graph::{Graph, Provenance};
use crate::error::{invalid, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub version: u32,
    pub provenance: Provenance,
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<CapEmbedding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<serde_json::Value>,
}

impl GraphFile {
    pub fn new(g: &Graph, embedding: Option<&CapEmbedding>) -> Self {
        GraphFile {
            version: FORMAT_VERSION,
            provenance: g.provenance().clone(),
            vertex_count: g.vertex_count(),
            edges: g.edges(),
            embedding: embedding.cloned(),
            certificate: None,
        }
    }

    /// Rebuilds the graph. With an embedding, the edge list must agree with
    /// the adjacency recomputed from the points.
    pub fn to_graph(&self) -> Result<(Graph, Option<CapEmbedding>)> {
        if self.version != FORMAT_VERSION {
            return invalid(format!("unsupported graph file version {}", self.version));
        }
        let g = Graph::from_edges(self.vertex_count, &self.edges, self.provenance.clone())?;
        let Some(emb) = &self.embedding else {
            return Ok((g, None));
        };
        let (derived, emb) = CapEmbedding::from_points(emb.dimension, emb.points.clone())?;
        if derived.vertex_count() != g.vertex_count() || derived.edges() != g.edges() {
            return invalid("edge list disagrees with the embedding");
        }
        Ok((g, Some(emb)))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_explicit() {
        let g = Graph::cycle(5);
        let f = GraphFile::new(&g, None);
        let back: GraphFile = serde_json::from_str(&f.to_json().unwrap()).unwrap();
        let (h, emb) = back.to_graph().unwrap();
        assert_eq!(h, g);
        assert!(emb.is_none());
    }

    #[test]
    fn parses_minimal_document() {
        let f: GraphFile = serde_json::from_str(
            r#"{"version":1,"provenance":{"kind":"kneser","m":2,"k":1},"vertex_count":2,"edges":[[0,1]]}"#,
        )
        .unwrap();
        let (g, _) = f.to_graph().unwrap();
        assert!(g.is_adjacent(0, 1));
    }

    #[test]
    fn embedding_is_rechecked() {
        let (g, emb) = CapEmbedding::from_points(1, vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let mut f = GraphFile::new(&g, Some(&emb));
        let json = f.to_json().unwrap();
        assert!(json.contains("\"1/2\""));
        assert!(f.to_graph().is_ok());
        f.edges.clear();
        assert!(f.to_graph().is_err());
    }
}
