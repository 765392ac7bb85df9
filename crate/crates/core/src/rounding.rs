//! Proposal and contention-resolution rounding of a fractional matching.
//!
//! Right vertices are processed in a fixed order `v_1..v_n`. Vertex `v_t`
//! proposes to a neighbor `u` with probability `x_{u,v_t}` (or to nobody
//! with the remaining mass). A proposal to `u` is accepted by an independent
//! coin with parameter
//!
//! ```text
//! a_{u,v_t} = (1/2) / (1 - (1/2) * sum_{i<t} x_{u,v_i})
//! ```
//!
//! and the edge is added when the coin succeeds and `u` is still free. Since
//! `u` is free at time `t` with probability `1 - (1/2) sum_{i<t} x_{u,v_i}`,
//! every proposal ends up selected with probability exactly 1/2, so
//! `Pr[e in M] = x_e / 2` for every edge.
//!
//! Randomness comes from a ChaCha8 stream per step `t` derived from
//! `(seed, t)`: one uniform for the proposal, one for the coin.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{ColoredBipartiteGraph, Matching};
use crate::lp::{FractionalMatching, TAU_FEAS};

#[derive(Debug, Error)]
pub enum RoundingError {
    #[error("fractional solution is not a valid fractional matching: {0}")]
    InfeasibleFractional(String),
    #[error("order is not a permutation of the right vertices")]
    BadOrder,
}

/// Processing order of the right vertices.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum VertexOrder {
    /// `v_t` is right vertex `t - 1`.
    #[default]
    Identity,
    Permutation(Vec<usize>),
}

impl VertexOrder {
    fn resolve(&self, n_right: usize) -> Result<Vec<usize>, RoundingError> {
        match self {
            VertexOrder::Identity => Ok((0..n_right).collect()),
            VertexOrder::Permutation(p) => {
                let mut seen = vec![false; n_right];
                if p.len() != n_right {
                    return Err(RoundingError::BadOrder);
                }
                for &v in p {
                    if v >= n_right || std::mem::replace(&mut seen[v], true) {
                        return Err(RoundingError::BadOrder);
                    }
                }
                Ok(p.clone())
            }
        }
    }
}

/// What happened when `v_t` was processed.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StepRecord {
    /// 1-based step index.
    pub t: usize,
    pub vertex: usize,
    /// Left vertex proposed to, `None` for the null proposal.
    pub proposal: Option<usize>,
    #[serde(skip)]
    pub edge: Option<usize>,
    pub acceptance_param: Option<f64>,
    pub bit: Option<bool>,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundingTrace {
    pub order: Vec<usize>,
    pub steps: Vec<StepRecord>,
}

impl RoundingTrace {
    /// One JSON object per step.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for step in &self.steps {
            serde_json::to_writer(&mut out, step)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    }
}

#[derive(Clone, Debug)]
pub struct Rounding {
    pub matching: Matching,
    pub trace: RoundingTrace,
}

/// `(1/2) / (1 - (1/2) * prefix_mass)`, the acceptance parameter for a
/// proposal to a left vertex that has seen `prefix_mass` of fractional mass
/// from earlier right vertices. Lies in `[1/2, 1]` for `prefix_mass` in `[0, 1]`.
pub fn acceptance_param(prefix_mass: f64) -> f64 {
    let prefix = prefix_mass.clamp(0.0, 1.0);
    0.5 / (1.0 - 0.5 * prefix)
}

/// Acceptance parameter for a proposal from `v_t` (1-based `t`) to `u`,
/// summing the prefix directly from the order.
pub fn acceptance_prob(
    graph: &ColoredBipartiteGraph,
    x: &FractionalMatching,
    order: &VertexOrder,
    t: usize,
    u: usize,
) -> Result<f64, RoundingError> {
    let order = order.resolve(graph.n_right())?;
    let prefix: f64 = order
        .iter()
        .take(t.saturating_sub(1))
        .filter_map(|&v| graph.find_edge(u, v))
        .map(|e| x.x[e])
        .sum();
    Ok(acceptance_param(prefix))
}

/// A validated rounding setup that can be run for many seeds.
pub struct OcrsRounder<'a> {
    graph: &'a ColoredBipartiteGraph,
    x: &'a [f64],
    order: Vec<usize>,
}

impl<'a> OcrsRounder<'a> {
    pub fn new(
        graph: &'a ColoredBipartiteGraph,
        x: &'a FractionalMatching,
        order: &VertexOrder,
    ) -> Result<Self, RoundingError> {
        if x.x.len() != graph.num_edges() {
            return Err(RoundingError::InfeasibleFractional(format!(
                "{} values for {} edges",
                x.x.len(),
                graph.num_edges()
            )));
        }
        if let Some(e) = x.x.iter().position(|v| !(*v >= -TAU_FEAS && *v <= 1.0 + TAU_FEAS)) {
            return Err(RoundingError::InfeasibleFractional(format!(
                "x[{e}] = {} outside [0, 1]",
                x.x[e]
            )));
        }
        let load = x.max_vertex_load(graph);
        if load > 1.0 + TAU_FEAS * (graph.num_edges().max(1) as f64).sqrt() {
            return Err(RoundingError::InfeasibleFractional(format!(
                "vertex load {load} exceeds 1"
            )));
        }
        Ok(Self {
            graph,
            x: &x.x,
            order: order.resolve(graph.n_right())?,
        })
    }

    fn run(&self, seed: u64, mut trace: Option<&mut Vec<StepRecord>>) -> Matching {
        let graph = self.graph;
        let mut prefix = vec![0.0_f64; graph.n_left()];
        let mut taken = vec![false; graph.n_left()];
        let mut chosen = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (idx, &v) in self.order.iter().enumerate() {
            let t = idx + 1;
            let incident = graph.right_incident(v);
            rng.set_stream(t as u64);
            rng.set_word_pos(0);
            let draw: f64 = rng.random();
            let mut cumulative = 0.0;
            let mut proposal = None;
            for &e in incident {
                cumulative += self.x[e].max(0.0);
                if draw < cumulative {
                    proposal = Some(e);
                    break;
                }
            }
            let mut record = StepRecord {
                t,
                vertex: v,
                proposal: None,
                edge: None,
                acceptance_param: None,
                bit: None,
                matched: false,
            };
            if let Some(e) = proposal {
                let u = graph.edge(e).u;
                let a = acceptance_param(prefix[u]);
                let bit = rng.random::<f64>() < a;
                let matched = bit && !taken[u];
                if matched {
                    taken[u] = true;
                    chosen.push(e);
                }
                record = StepRecord {
                    proposal: Some(u),
                    edge: Some(e),
                    acceptance_param: Some(a),
                    bit: Some(bit),
                    matched,
                    ..record
                };
            }
            for &e in incident {
                prefix[graph.edge(e).u] += self.x[e].max(0.0);
            }
            if let Some(steps) = trace.as_deref_mut() {
                steps.push(record);
            }
        }
        Matching::from_edges(graph, chosen).expect("each left vertex is matched at most once")
    }

    /// Rounds once and records every step.
    pub fn round(&self, seed: u64) -> Rounding {
        let mut steps = Vec::with_capacity(self.order.len());
        let matching = self.run(seed, Some(&mut steps));
        Rounding {
            matching,
            trace: RoundingTrace {
                order: self.order.clone(),
                steps,
            },
        }
    }

    /// Rounds once without keeping a trace.
    pub fn round_matching(&self, seed: u64) -> Matching {
        self.run(seed, None)
    }
}

/// Rounds `x` once with the given order and seed.
pub fn round_ocrs(
    graph: &ColoredBipartiteGraph,
    x: &FractionalMatching,
    order: &VertexOrder,
    seed: u64,
) -> Result<Rounding, RoundingError> {
    Ok(OcrsRounder::new(graph, x, order)?.round(seed))
}

/// Per-edge outcome counts over repeated roundings.
#[derive(Clone, Debug, Serialize)]
pub struct SelectabilityEstimate {
    pub trials: usize,
    /// Trials in which the edge was in the matching.
    pub matched: Vec<usize>,
    /// Trials in which the edge's right endpoint proposed along it.
    pub proposed: Vec<usize>,
}

/// `sqrt(p (1 - p) / n)`.
pub fn binomial_std_error(p: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

impl SelectabilityEstimate {
    pub fn frequency(&self, edge: usize) -> f64 {
        self.matched[edge] as f64 / self.trials as f64
    }

    /// Empirical `Pr[matched | proposed]`, `None` if never proposed.
    pub fn conditional_frequency(&self, edge: usize) -> Option<f64> {
        (self.proposed[edge] > 0).then(|| self.matched[edge] as f64 / self.proposed[edge] as f64)
    }

    /// Three standard errors of the observed frequency.
    pub fn confidence_radius(&self, edge: usize) -> f64 {
        3.0 * binomial_std_error(self.frequency(edge), self.trials)
    }
}

/// Runs `step` for seeds `base_seed..base_seed + trials`, split into
/// contiguous chunks across threads. Chunk results are merged in seed order,
/// so the output does not depend on scheduling.
pub(crate) fn fold_trials<A, I, S, M>(trials: usize, base_seed: u64, init: I, step: S, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, u64) + Sync,
    M: Fn(&mut A, A),
{
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(trials.div_ceil(256))
        .max(1);
    let chunk = trials.div_ceil(workers).max(1);
    let parts: Vec<A> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (init, step) = (&init, &step);
                scope.spawn(move || {
                    let mut acc = init();
                    let lo = w * chunk;
                    let hi = ((w + 1) * chunk).min(trials);
                    for k in lo..hi {
                        step(&mut acc, base_seed.wrapping_add(k as u64));
                    }
                    acc
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("trial worker panicked"))
            .collect()
    });
    let mut parts = parts.into_iter();
    let mut total = parts.next().unwrap_or_else(&init);
    for part in parts {
        merge(&mut total, part);
    }
    total
}

/// Rounds `trials` times with seeds `base_seed..base_seed + trials` in the
/// identity order and counts per-edge proposals and selections.
pub fn estimate_selectability(
    graph: &ColoredBipartiteGraph,
    x: &FractionalMatching,
    trials: usize,
    base_seed: u64,
) -> Result<SelectabilityEstimate, RoundingError> {
    let rounder = OcrsRounder::new(graph, x, &VertexOrder::Identity)?;
    let m = graph.num_edges();
    let (matched, proposed) = fold_trials(
        trials,
        base_seed,
        || (vec![0; m], vec![0; m]),
        |(matched, proposed), seed| {
            for step in rounder.round(seed).trace.steps {
                if let Some(e) = step.edge {
                    proposed[e] += 1;
                    matched[e] += usize::from(step.matched);
                }
            }
        },
        |(matched, proposed), (m2, p2)| {
            matched.iter_mut().zip(m2).for_each(|(a, b)| *a += b);
            proposed.iter_mut().zip(p2).for_each(|(a, b)| *a += b);
        },
    );
    Ok(SelectabilityEstimate {
        trials,
        matched,
        proposed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn single_edge() -> (ColoredBipartiteGraph, FractionalMatching) {
        let g = ColoredBipartiteGraph::new(1, 1, 1, vec![Edge::new(0, 0, 1.0, 0)]).unwrap();
        let x = FractionalMatching::new(&g, vec![1.0]);
        (g, x)
    }

    #[test]
    fn acceptance_parameter_values() {
        assert_eq!(acceptance_param(0.0), 0.5);
        assert_eq!(acceptance_param(1.0), 1.0);
        // 0.5 / 0.75
        assert!((acceptance_param(0.5) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn acceptance_prob_sums_prefix_in_order() {
        // u = 0 adjacent to v0 (0.25), v1 (0.25), v2 (0.5)
        let g = ColoredBipartiteGraph::new(
            1,
            3,
            1,
            vec![Edge::new(0, 0, 1.0, 0), Edge::new(0, 1, 1.0, 0), Edge::new(0, 2, 1.0, 0)],
        )
        .unwrap();
        let x = FractionalMatching::new(&g, vec![0.25, 0.25, 0.5]);
        let id = VertexOrder::Identity;
        assert_eq!(acceptance_prob(&g, &x, &id, 1, 0).unwrap(), 0.5);
        let naive = 0.5 / (1.0 - 0.5 * (0.25 + 0.25));
        assert!((acceptance_prob(&g, &x, &id, 3, 0).unwrap() - naive).abs() < 1e-15);
        let rev = VertexOrder::Permutation(vec![2, 1, 0]);
        assert!((acceptance_prob(&g, &x, &rev, 2, 0).unwrap() - 0.5 / 0.75).abs() < 1e-15);
    }

    #[test]
    fn empty_graph_gives_empty_matching() {
        let g = ColoredBipartiteGraph::new(2, 3, 1, vec![]).unwrap();
        let x = FractionalMatching::new(&g, vec![]);
        let r = round_ocrs(&g, &x, &VertexOrder::Identity, 1).unwrap();
        assert!(r.matching.is_empty());
        assert_eq!(r.trace.steps.len(), 3);
        assert!(r.trace.steps.iter().all(|s| s.proposal.is_none()));
    }

    #[test]
    fn single_edge_always_proposes_with_half_coin() {
        let (g, x) = single_edge();
        let rounder = OcrsRounder::new(&g, &x, &VertexOrder::Identity).unwrap();
        for seed in 0..50 {
            let r = rounder.round(seed);
            let s = &r.trace.steps[0];
            assert_eq!(s.proposal, Some(0));
            assert_eq!(s.acceptance_param, Some(0.5));
            assert_eq!(s.matched, s.bit.unwrap());
            assert_eq!(r.matching.len(), usize::from(s.matched));
        }
    }

    #[test]
    fn single_edge_frequency_is_half() {
        let (g, x) = single_edge();
        let est = estimate_selectability(&g, &x, 20_000, 0).unwrap();
        // 3 sigma of Bernoulli(1/2) at 20000 trials is about 0.0106
        assert!((est.frequency(0) - 0.5).abs() <= 3.0 * binomial_std_error(0.5, 20_000));
        assert_eq!(est.proposed[0], 20_000);
        assert!(est.confidence_radius(0) < 0.011);
    }

    #[test]
    fn rejects_overloaded_solution_and_bad_order() {
        let g = ColoredBipartiteGraph::new(1, 2, 1, vec![Edge::new(0, 0, 1.0, 0), Edge::new(0, 1, 1.0, 0)])
            .unwrap();
        let x = FractionalMatching::new(&g, vec![0.6, 0.6]);
        assert!(matches!(
            round_ocrs(&g, &x, &VertexOrder::Identity, 0),
            Err(RoundingError::InfeasibleFractional(_))
        ));
        let ok = FractionalMatching::new(&g, vec![0.5, 0.5]);
        for bad in [vec![0], vec![0, 0], vec![0, 2]] {
            assert!(matches!(
                round_ocrs(&g, &ok, &VertexOrder::Permutation(bad), 0),
                Err(RoundingError::BadOrder)
            ));
        }
    }

    #[test]
    fn trace_replays_and_serializes() {
        let (g, x) = crate::graph::generate_star_fixture(4, 0.5).unwrap();
        let a = round_ocrs(&g, &x, &VertexOrder::Identity, 42).unwrap();
        let b = round_ocrs(&g, &x, &VertexOrder::Identity, 42).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.matching, b.matching);
        let mut buf = Vec::new();
        a.trace.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        for key in ["t", "proposal", "acceptanceParam", "bit", "matched"] {
            assert!(first.get(key).is_some(), "missing {key}");
        }
    }
}
