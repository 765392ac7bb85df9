use serde::Serialize;

use super::{ColoredBipartiteGraph, GraphError};

/// An integral matching, stored as sorted edge indices into its graph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Matching {
    edges: Vec<usize>,
    per_color: Vec<usize>,
    total_weight: f64,
}

impl Matching {
    pub fn empty(graph: &ColoredBipartiteGraph) -> Self {
        Self {
            edges: Vec::new(),
            per_color: vec![0; graph.num_colors()],
            total_weight: 0.0,
        }
    }

    /// Builds a matching from edge indices, rejecting unknown edges and
    /// edges that share an endpoint.
    pub fn from_edges(
        graph: &ColoredBipartiteGraph,
        mut edges: Vec<usize>,
    ) -> Result<Self, GraphError> {
        edges.sort_unstable();
        edges.dedup();
        if let Some(&bad) = edges.iter().find(|&&i| i >= graph.num_edges()) {
            return Err(GraphError::InvalidParameter(format!(
                "edge index {bad} out of range"
            )));
        }
        graph.vertices_disjoint(&edges)?;
        let mut per_color = vec![0; graph.num_colors()];
        let mut total_weight = 0.0;
        for &i in &edges {
            let e = graph.edge(i);
            per_color[e.color] += 1;
            total_weight += e.weight;
        }
        Ok(Self {
            edges,
            per_color,
            total_weight,
        })
    }

    /// Builds a matching from `(u, v)` endpoint pairs.
    pub fn from_pairs(
        graph: &ColoredBipartiteGraph,
        pairs: &[(usize, usize)],
    ) -> Result<Self, GraphError> {
        let edges = pairs
            .iter()
            .map(|&(u, v)| graph.find_edge(u, v).ok_or(GraphError::UnknownEdge(u, v)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_edges(graph, edges)
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.edges.binary_search(&edge).is_ok()
    }

    /// `|M_c|` for every color.
    pub fn per_color(&self) -> &[usize] {
        &self.per_color
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// `|M_c| / |M|`, or `None` for the empty matching.
    pub fn share(&self, color: usize) -> Option<f64> {
        if self.is_empty() {
            None
        } else {
            Some(self.per_color[color] as f64 / self.len() as f64)
        }
    }

    pub fn pairs(&self, graph: &ColoredBipartiteGraph) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|&i| (graph.edge(i).u, graph.edge(i).v))
            .collect()
    }
}
