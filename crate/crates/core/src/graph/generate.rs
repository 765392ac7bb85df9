//! Seeded instance generators.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ColoredBipartiteGraph, Edge, GraphError};
use crate::lp::FractionalMatching;

// Independent ChaCha streams per concern, so that e.g. changing the color
// count leaves the sampled edge set untouched.
const STREAM_PARTITION: u64 = 0;
const STREAM_EDGES: u64 = 1;
const STREAM_WEIGHTS: u64 = 2;
const STREAM_COLORS: u64 = 3;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErdosRenyiParams {
    pub n: usize,
    pub p: f64,
    pub ell: usize,
    pub weight_range: (f64, f64),
    pub bipartite_split: bool,
    pub seed: u64,
}

impl ErdosRenyiParams {
    pub fn new(n: usize, p: f64, ell: usize, seed: u64) -> Self {
        Self {
            n,
            p,
            ell,
            weight_range: (1.0, 2.0),
            bipartite_split: true,
            seed,
        }
    }

    fn check(&self) -> Result<(), GraphError> {
        let (lo, hi) = self.weight_range;
        if self.n < 2 {
            return Err(GraphError::InvalidParameter(format!("n must be >= 2, got {}", self.n)));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(GraphError::InvalidParameter(format!("p must lie in [0, 1], got {}", self.p)));
        }
        if self.ell == 0 {
            return Err(GraphError::InvalidParameter("ell must be >= 1".into()));
        }
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(GraphError::InvalidParameter(format!(
                "weight range must satisfy 0 < lo < hi, got [{lo}, {hi})"
            )));
        }
        Ok(())
    }
}

/// A colored, weighted `G(n, p)` sample on vertices `0..n` (not necessarily
/// bipartite).
#[derive(Clone, Debug, PartialEq)]
pub struct GnpGraph {
    pub n: usize,
    pub num_colors: usize,
    /// `(i, j, weight, color)` with `i < j`, in lexicographic order.
    pub edges: Vec<(usize, usize, f64, usize)>,
    partition_seed: u64,
}

pub fn sample_gnp(params: &ErdosRenyiParams) -> Result<GnpGraph, GraphError> {
    params.check()?;
    let mut edge_rng = stream(params.seed, STREAM_EDGES);
    let mut weight_rng = stream(params.seed, STREAM_WEIGHTS);
    let mut color_rng = stream(params.seed, STREAM_COLORS);
    let (lo, hi) = params.weight_range;
    let mut edges = Vec::new();
    for i in 0..params.n {
        for j in (i + 1)..params.n {
            if edge_rng.random::<f64>() < params.p {
                let w = weight_rng.random_range(lo..hi);
                let c = color_rng.random_range(0..params.ell);
                edges.push((i, j, w, c));
            }
        }
    }
    Ok(GnpGraph {
        n: params.n,
        num_colors: params.ell,
        edges,
        partition_seed: params.seed,
    })
}

impl GnpGraph {
    /// Assigns every vertex to a side by an independent fair coin and keeps
    /// only the crossing edges.
    pub fn bipartite_split(&self) -> ColoredBipartiteGraph {
        let mut rng = stream(self.partition_seed, STREAM_PARTITION);
        let left: Vec<bool> = (0..self.n).map(|_| rng.random_bool(0.5)).collect();
        self.with_sides(&left)
            .expect("crossing edges of a partition always form a valid bipartite graph")
    }

    /// Uses the graph as-is if it is 2-colorable, failing otherwise.
    pub fn two_colored(&self) -> Result<ColoredBipartiteGraph, GraphError> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j, _, _) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut side: Vec<Option<bool>> = vec![None; self.n];
        for start in 0..self.n {
            if side[start].is_some() {
                continue;
            }
            side[start] = Some(true);
            let mut queue = VecDeque::from([start]);
            while let Some(a) = queue.pop_front() {
                let sa = side[a].unwrap();
                for &b in &adj[a] {
                    match side[b] {
                        None => {
                            side[b] = Some(!sa);
                            queue.push_back(b);
                        }
                        Some(sb) if sb == sa => return Err(GraphError::NotBipartite),
                        Some(_) => {}
                    }
                }
            }
        }
        let left: Vec<bool> = side.into_iter().map(|s| s.unwrap()).collect();
        self.with_sides(&left)
    }

    fn with_sides(&self, left: &[bool]) -> Result<ColoredBipartiteGraph, GraphError> {
        let mut local = vec![0; self.n];
        let (mut n_left, mut n_right) = (0, 0);
        for (i, &is_left) in left.iter().enumerate() {
            if is_left {
                local[i] = n_left;
                n_left += 1;
            } else {
                local[i] = n_right;
                n_right += 1;
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(i, j, _, _)| left[i] != left[j])
            .map(|&(i, j, w, c)| {
                let (a, b) = if left[i] { (i, j) } else { (j, i) };
                Edge::new(local[a], local[b], w, c)
            })
            .collect();
        ColoredBipartiteGraph::new(n_left, n_right, self.num_colors, edges)
    }
}

/// Samples a colored `G(n, p)` graph with uniform weights and colors.
///
/// With `bipartite_split` set, a random bipartition is drawn and only the
/// crossing edges are kept. Otherwise the sample itself must be bipartite.
pub fn generate_erdos_renyi(params: &ErdosRenyiParams) -> Result<ColoredBipartiteGraph, GraphError> {
    let gnp = sample_gnp(params)?;
    if params.bipartite_split {
        Ok(gnp.bipartite_split())
    } else {
        gnp.two_colored()
    }
}

/// Star with center `u` (left vertex 0) and leaves `v_1..v_{n+1}` (right
/// vertices `0..=n`). The first `n` edges are color 0 with `x = eps/n`; the
/// last edge is color 1 with `x = 1 - eps`. All weights are 1.
pub fn generate_star_fixture(
    n: usize,
    epsilon: f64,
) -> Result<(ColoredBipartiteGraph, FractionalMatching), GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParameter("star needs n >= 1".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(GraphError::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let mut edges: Vec<Edge> = (0..n).map(|t| Edge::new(0, t, 1.0, 0)).collect();
    edges.push(Edge::new(0, n, 1.0, 1));
    let graph = ColoredBipartiteGraph::new(1, n + 1, 2, edges)?;
    let mut x = vec![epsilon / n as f64; n];
    x.push(1.0 - epsilon);
    let fractional = FractionalMatching::new(&graph, x);
    Ok((graph, fractional))
}
