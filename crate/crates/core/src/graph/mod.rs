//! Edge-colored bipartite graphs.
//!
//! Vertices are dense, 0-based indices on each side; an edge stores the
//! side-local index of its left endpoint `u` and right endpoint `v`. Colors are
//! 0-based in memory and 1-based in every text format.

mod generate;
pub mod io;
mod matching;
mod spec;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{
    generate_erdos_renyi, generate_star_fixture, sample_gnp, ErdosRenyiParams, GnpGraph,
};
pub use matching::Matching;
pub use spec::{Bounds, FairnessSpec};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid graph: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("not a matching: edges {0} and {1} share a vertex")]
    NotAMatching(usize, usize),
    #[error("no edge ({0}, {1}) in graph")]
    UnknownEdge(usize, usize),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
    pub color: usize,
}

impl Edge {
    pub fn new(u: usize, v: usize, weight: f64, color: usize) -> Self {
        Self {
            u,
            v,
            weight,
            color,
        }
    }
}

/// A single broken graph invariant, reported by [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NoColors,
    LeftOutOfRange { edge: usize, u: usize },
    RightOutOfRange { edge: usize, v: usize },
    DuplicateEdge { first: usize, second: usize },
    NonpositiveWeight { edge: usize },
    NonFiniteWeight { edge: usize },
    BadColor { edge: usize, color: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoColors => write!(f, "graph must have at least one color"),
            Violation::LeftOutOfRange { edge, u } => {
                write!(f, "edge {edge}: left vertex {u} out of range")
            }
            Violation::RightOutOfRange { edge, v } => {
                write!(f, "edge {edge}: right vertex {v} out of range")
            }
            Violation::DuplicateEdge { first, second } => {
                write!(f, "duplicate edge: {second} repeats {first}")
            }
            Violation::NonpositiveWeight { edge } => write!(f, "edge {edge}: nonpositive weight"),
            Violation::NonFiniteWeight { edge } => write!(f, "edge {edge}: non-finite weight"),
            Violation::BadColor { edge, color } => {
                write!(f, "edge {edge}: color {color} out of range")
            }
        }
    }
}

/// Collects every invariant violation of a prospective graph. An empty result
/// means [`ColoredBipartiteGraph::new`] will accept the same arguments.
pub fn validate(n_left: usize, n_right: usize, num_colors: usize, edges: &[Edge]) -> Vec<Violation> {
    let mut out = Vec::new();
    if num_colors == 0 {
        out.push(Violation::NoColors);
    }
    let mut seen = HashMap::with_capacity(edges.len());
    for (i, e) in edges.iter().enumerate() {
        if e.u >= n_left {
            out.push(Violation::LeftOutOfRange { edge: i, u: e.u });
        }
        if e.v >= n_right {
            out.push(Violation::RightOutOfRange { edge: i, v: e.v });
        }
        if !e.weight.is_finite() {
            out.push(Violation::NonFiniteWeight { edge: i });
        } else if e.weight <= 0.0 {
            out.push(Violation::NonpositiveWeight { edge: i });
        }
        if num_colors > 0 && e.color >= num_colors {
            out.push(Violation::BadColor {
                edge: i,
                color: e.color,
            });
        }
        if let Some(&first) = seen.get(&(e.u, e.v)) {
            out.push(Violation::DuplicateEdge { first, second: i });
        } else {
            seen.insert((e.u, e.v), i);
        }
    }
    out
}

/// Weighted bipartite graph whose edges are partitioned into color classes.
///
/// Immutable once built; adjacency lists hold edge indices sorted by the
/// opposite endpoint.
#[derive(Clone, Debug)]
pub struct ColoredBipartiteGraph {
    n_left: usize,
    n_right: usize,
    num_colors: usize,
    edges: Vec<Edge>,
    left_adj: Vec<Vec<usize>>,
    right_adj: Vec<Vec<usize>>,
}

impl ColoredBipartiteGraph {
    pub fn new(
        n_left: usize,
        n_right: usize,
        num_colors: usize,
        edges: Vec<Edge>,
    ) -> Result<Self, GraphError> {
        let violations = validate(n_left, n_right, num_colors, &edges);
        if !violations.is_empty() {
            return Err(GraphError::Invalid(violations));
        }
        let mut left_adj = vec![Vec::new(); n_left];
        let mut right_adj = vec![Vec::new(); n_right];
        for (i, e) in edges.iter().enumerate() {
            left_adj[e.u].push(i);
            right_adj[e.v].push(i);
        }
        for adj in &mut left_adj {
            adj.sort_by_key(|&i| edges[i].v);
        }
        for adj in &mut right_adj {
            adj.sort_by_key(|&i| edges[i].u);
        }
        Ok(Self {
            n_left,
            n_right,
            num_colors,
            edges,
            left_adj,
            right_adj,
        })
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn num_colors(&self) -> usize {
        self.num_colors
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> &Edge {
        &self.edges[index]
    }

    /// Edges incident to left vertex `u`, sorted by right endpoint.
    pub fn left_incident(&self, u: usize) -> &[usize] {
        &self.left_adj[u]
    }

    /// Edges incident to right vertex `v`, sorted by left endpoint.
    pub fn right_incident(&self, v: usize) -> &[usize] {
        &self.right_adj[v]
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        let adj = self.left_adj.get(u)?;
        adj.binary_search_by_key(&v, |&i| self.edges[i].v)
            .ok()
            .map(|pos| adj[pos])
    }

    /// Indicator of membership in color class `c`.
    pub fn in_color(&self, edge: usize, c: usize) -> bool {
        self.edges[edge].color == c
    }

    pub fn color_class(&self, c: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.color == c)
            .map(|(i, _)| i)
    }

    pub fn max_weight(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.weight).reduce(f64::max)
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.weight).reduce(f64::min)
    }

    /// Copy of the graph with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, GraphError> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                weight: e.weight * factor,
                ..*e
            })
            .collect();
        Self::new(self.n_left, self.n_right, self.num_colors, edges)
    }

    /// Re-checks the construction invariants. Always empty for a value built
    /// through [`ColoredBipartiteGraph::new`].
    pub fn validate(&self) -> Vec<Violation> {
        validate(self.n_left, self.n_right, self.num_colors, &self.edges)
    }

    pub(crate) fn vertices_disjoint(&self, edges: &[usize]) -> Result<(), GraphError> {
        let mut left = HashMap::with_capacity(edges.len());
        let mut right = HashMap::with_capacity(edges.len());
        for &i in edges {
            let e = &self.edges[i];
            if let Some(&j) = left.get(&e.u) {
                return Err(GraphError::NotAMatching(j, i));
            }
            if let Some(&j) = right.get(&e.v) {
                return Err(GraphError::NotAMatching(j, i));
            }
            left.insert(e.u, i);
            right.insert(e.v, i);
        }
        Ok(())
    }
}
