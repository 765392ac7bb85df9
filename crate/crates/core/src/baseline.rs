//! Greedy peeling comparator.
//!
//! For each guessed target size `s`, edges are added round-robin over the
//! colors: on its turn a color contributes its heaviest edge that keeps the
//! set a matching. The guess stops at `s` edges, and is discarded if some
//! color runs out of usable edges before that. The heaviest surviving
//! candidate that is exactly `(α, β)`-balanced is returned.
//!
//! This is a reconstruction from a behavioral description (one-for-one color
//! inclusion, iteration over guessed optimum sizes). It is meant for relative
//! benchmarking, not as a faithful copy of the original procedure.

use crate::fairness::is_balanced;
use crate::graph::{ColoredBipartiteGraph, FairnessSpec, GraphError, Matching};

#[derive(Clone, Debug, Default)]
pub struct PeelingConfig {
    /// Inclusive range of guessed sizes. Defaults to `ℓ ..= min(|U|, |V|)`.
    pub target_sizes: Option<(usize, usize)>,
}

fn by_color_heaviest_first(graph: &ColoredBipartiteGraph) -> Vec<Vec<usize>> {
    (0..graph.num_colors())
        .map(|c| {
            let mut class: Vec<usize> = graph.color_class(c).collect();
            class.sort_by(|&a, &b| {
                graph
                    .edge(b)
                    .weight
                    .total_cmp(&graph.edge(a).weight)
                    .then(a.cmp(&b))
            });
            class
        })
        .collect()
}

fn peel_to_size(graph: &ColoredBipartiteGraph, classes: &[Vec<usize>], size: usize) -> Option<Vec<usize>> {
    let mut left = vec![false; graph.n_left()];
    let mut right = vec![false; graph.n_right()];
    let mut cursor = vec![0usize; classes.len()];
    let mut chosen = Vec::with_capacity(size);
    'guess: while chosen.len() < size {
        for (c, class) in classes.iter().enumerate() {
            if chosen.len() == size {
                break 'guess;
            }
            let next = class[cursor[c]..].iter().position(|&e| {
                let edge = graph.edge(e);
                !left[edge.u] && !right[edge.v]
            });
            let Some(offset) = next else {
                return None;
            };
            cursor[c] += offset + 1;
            let e = class[cursor[c] - 1];
            let edge = graph.edge(e);
            left[edge.u] = true;
            right[edge.v] = true;
            chosen.push(e);
        }
    }
    Some(chosen)
}

/// Runs the peeling heuristic over every guessed size and returns the
/// heaviest balanced candidate, or the empty matching when there is none.
pub fn peel_matching(
    graph: &ColoredBipartiteGraph,
    spec: &FairnessSpec,
    config: &PeelingConfig,
) -> Result<Matching, GraphError> {
    let bounds = spec.resolve(graph.num_colors())?;
    let max_size = graph.n_left().min(graph.n_right());
    let (lo, hi) = match config.target_sizes {
        Some((lo, hi)) => {
            if lo > hi || hi > graph.n_left() + graph.n_right() {
                return Err(GraphError::InvalidParameter(format!(
                    "target size range {lo}..={hi} is empty or exceeds |U| + |V|"
                )));
            }
            (lo, hi)
        }
        // fewer slots than colors leaves nothing to try
        None => (graph.num_colors(), max_size),
    };
    let classes = by_color_heaviest_first(graph);
    let mut best: Option<Matching> = None;
    for size in lo.max(1)..=hi.min(max_size) {
        let Some(edges) = peel_to_size(graph, &classes, size) else {
            continue;
        };
        let candidate = Matching::from_edges(graph, edges)?;
        if is_balanced(&candidate, &bounds)
            && best.as_ref().is_none_or(|b| candidate.total_weight() > b.total_weight())
        {
            best = Some(candidate);
        }
    }
    Ok(best.unwrap_or_else(|| Matching::empty(graph)))
}
