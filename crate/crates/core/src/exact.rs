//! Exact β-fairness for upper-bound-only specs, and brute-force optimal
//! balanced matchings for small instances.
//!
//! The rounding pipeline solves the LP with every `β_c` tightened to
//! `(1 - ε) β_c`, rounds it repeatedly, and keeps the heaviest attempt whose
//! shares satisfy the original `β_c` exactly. When the tightened LP carries
//! little mass (`β Σx <= C`) the dispatcher instead enumerates matchings up to
//! the size where an optimum is guaranteed to live.

use serde::Serialize;
use thiserror::Error;

use crate::fairness::{counts_balanced, satisfies_beta};
use crate::graph::{ColoredBipartiteGraph, FairnessSpec, GraphError, Matching};
use crate::lp::{self, FractionalMatching, LpError};
use crate::rounding::{OcrsRounder, RoundingError, VertexOrder};

pub const DEFAULT_MAX_ATTEMPTS: usize = 20;
pub const DEFAULT_WORK_LIMIT: u64 = 10_000_000;
pub const DEFAULT_DISPATCH_THRESHOLD: f64 = 100.0;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("exact mode needs every lower bound to be 0")]
    TwoSidedSpec,
    #[error("brute force exceeded its work limit of {0} search nodes")]
    WorkLimit(u64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactMethod {
    Rounding,
    BruteForce,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AttemptRecord {
    pub seed: u64,
    pub weight: f64,
    pub size: usize,
    pub satisfied_beta: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExactModeResult {
    pub matching: Matching,
    /// Recomputed from `matching`.
    pub satisfied_beta: bool,
    pub attempts: usize,
    pub lp_objective: f64,
    pub method: ExactMethod,
    pub attempt_log: Vec<AttemptRecord>,
}

fn one_sided_bounds(
    graph: &ColoredBipartiteGraph,
    spec: &FairnessSpec,
) -> Result<Vec<(f64, f64)>, ExactError> {
    if !spec.is_one_sided() {
        return Err(ExactError::TwoSidedSpec);
    }
    Ok(spec.resolve(graph.num_colors())?)
}

fn run_attempts(
    graph: &ColoredBipartiteGraph,
    x: &FractionalMatching,
    bounds: &[(f64, f64)],
    max_attempts: usize,
    seed: u64,
) -> Result<ExactModeResult, ExactError> {
    let rounder = OcrsRounder::new(graph, x, &VertexOrder::Identity)?;
    let mut log = Vec::with_capacity(max_attempts);
    let mut best_ok: Option<Matching> = None;
    let mut best_any: Option<Matching> = None;
    for i in 0..max_attempts {
        let s = seed.wrapping_add(i as u64);
        let m = rounder.round_matching(s);
        let ok = satisfies_beta(&m, bounds);
        log.push(AttemptRecord {
            seed: s,
            weight: m.total_weight(),
            size: m.len(),
            satisfied_beta: ok,
        });
        let slot = if ok { &mut best_ok } else { &mut best_any };
        if slot.as_ref().is_none_or(|b| m.total_weight() > b.total_weight()) {
            *slot = Some(m);
        }
    }
    let matching = best_ok
        .or(best_any)
        .unwrap_or_else(|| Matching::empty(graph));
    Ok(ExactModeResult {
        satisfied_beta: satisfies_beta(&matching, bounds),
        matching,
        attempts: max_attempts,
        lp_objective: x.objective,
        method: ExactMethod::Rounding,
        attempt_log: log,
    })
}

/// Solves the LP with `β̃ = (1 - ε) β` and rounds it up to `max_attempts`
/// times with seeds `seed, seed + 1, ...`. Returns the heaviest attempt that
/// satisfies the original `β`, otherwise the heaviest attempt overall with
/// `satisfied_beta = false`.
pub fn solve_exact_beta(
    graph: &ColoredBipartiteGraph,
    spec: &FairnessSpec,
    max_attempts: usize,
    seed: u64,
) -> Result<ExactModeResult, ExactError> {
    let bounds = one_sided_bounds(graph, spec)?;
    if max_attempts == 0 {
        return Err(ExactError::InvalidParameter("max_attempts must be >= 1".into()));
    }
    if graph.num_edges() == 0 {
        return Ok(ExactModeResult {
            matching: Matching::empty(graph),
            satisfied_beta: true,
            attempts: 0,
            lp_objective: 0.0,
            method: ExactMethod::Rounding,
            attempt_log: Vec::new(),
        });
    }
    let x = lp::solve_fair(graph, spec, Some(spec.epsilon))?;
    run_attempts(graph, &x, &bounds, max_attempts, seed)
}

#[derive(Clone, Copy, Debug)]
pub struct ExactConfig {
    pub max_attempts: usize,
    pub seed: u64,
    /// Brute force is used when `β Σx <= threshold` (with `β` the smallest
    /// color bound). Zero disables it.
    pub threshold: f64,
    pub work_limit: u64,
}

impl ExactConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            seed,
            threshold: DEFAULT_DISPATCH_THRESHOLD,
            work_limit: DEFAULT_WORK_LIMIT,
        }
    }
}

/// Exact mode with dispatch: brute force on small LP mass, rounding
/// otherwise or when brute force hits its work limit.
pub fn solve_exact(
    graph: &ColoredBipartiteGraph,
    spec: &FairnessSpec,
    config: &ExactConfig,
) -> Result<ExactModeResult, ExactError> {
    let bounds = one_sided_bounds(graph, spec)?;
    if graph.num_edges() == 0 {
        return solve_exact_beta(graph, spec, config.max_attempts.max(1), config.seed);
    }
    // a tightened LP that only admits x = 0 carries no mass, which is the
    // small case by definition
    let x = match lp::solve_fair(graph, spec, Some(spec.epsilon)) {
        Ok(x) => x,
        Err(LpError::Infeasible) => FractionalMatching::new(graph, vec![0.0; graph.num_edges()]),
        Err(e) => return Err(e.into()),
    };
    let beta = bounds.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
    let mass = beta * x.total_mass();
    if config.threshold > 0.0 && mass <= config.threshold {
        let cap = brute_force_size_bound(
            graph.max_weight().unwrap_or(1.0),
            graph.min_weight().unwrap_or(1.0),
            config.threshold,
            beta,
            spec.epsilon,
        )?;
        let options = BruteForceOptions {
            size_cap: Some(cap),
            work_limit: config.work_limit,
        };
        match brute_force_opt(graph, spec, &options) {
            Ok(found) => {
                let matching = found.unwrap_or_else(|| Matching::empty(graph));
                return Ok(ExactModeResult {
                    satisfied_beta: satisfies_beta(&matching, &bounds),
                    matching,
                    attempts: 0,
                    lp_objective: x.objective,
                    method: ExactMethod::BruteForce,
                    attempt_log: Vec::new(),
                });
            }
            Err(ExactError::WorkLimit(_)) if x.total_mass() > 0.0 => {}
            Err(e) => return Err(e),
        }
    }
    if x.total_mass() == 0.0 {
        return Err(LpError::Infeasible.into());
    }
    run_attempts(graph, &x, &bounds, config.max_attempts.max(1), config.seed)
}

/// `⌊(U²/L²) · C / (β (1 - ε))⌋`.
pub fn brute_force_size_bound(
    max_weight: f64,
    min_weight: f64,
    c: f64,
    beta: f64,
    epsilon: f64,
) -> Result<usize, ExactError> {
    if !(min_weight > 0.0 && max_weight >= min_weight && beta > 0.0 && c > 0.0) {
        return Err(ExactError::InvalidParameter(format!(
            "need 0 < L <= U, beta > 0, C > 0 (U={max_weight}, L={min_weight}, beta={beta}, C={c})"
        )));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(ExactError::InvalidParameter(format!("epsilon must be in [0, 1), got {epsilon}")));
    }
    let ratio = max_weight / min_weight;
    let value = ratio * ratio * c / (beta * (1.0 - epsilon));
    // absorb rounding noise so that exact integers are not floored down
    Ok((value * (1.0 + 1e-12)).floor() as usize)
}

#[derive(Clone, Copy, Debug)]
pub struct BruteForceOptions {
    /// Largest matching size considered. `None` means unbounded.
    pub size_cap: Option<usize>,
    /// Maximum number of search nodes before giving up.
    pub work_limit: u64,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self {
            size_cap: None,
            work_limit: DEFAULT_WORK_LIMIT,
        }
    }
}

struct Search<'a> {
    graph: &'a ColoredBipartiteGraph,
    bounds: &'a [(f64, f64)],
    order: Vec<usize>,
    /// Prefix sums of weights along `order`. Since `order` is sorted by
    /// weight, the heaviest `r` edges from position `k` on are `order[k..k + r]`.
    prefix: Vec<f64>,
    cap: usize,
    work_limit: u64,
    nodes: u64,
    left_used: Vec<bool>,
    right_used: Vec<bool>,
    counts: Vec<usize>,
    chosen: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
}

impl Search<'_> {
    fn optimistic(&self, next: usize, weight: f64) -> f64 {
        let room = self.cap - self.chosen.len();
        let end = (next + room).min(self.order.len());
        weight + self.prefix[end] - self.prefix[next]
    }

    fn visit(&mut self, next: usize, weight: f64) -> Result<(), ExactError> {
        self.nodes += 1;
        if self.nodes > self.work_limit {
            return Err(ExactError::WorkLimit(self.work_limit));
        }
        if counts_balanced(&self.counts, self.chosen.len(), self.bounds)
            && self.best.as_ref().is_none_or(|(w, _)| weight > *w)
        {
            self.best = Some((weight, self.chosen.clone()));
        }
        if self.chosen.len() == self.cap {
            return Ok(());
        }
        for k in next..self.order.len() {
            if let Some((w, _)) = &self.best {
                if self.optimistic(k, weight) <= *w {
                    break;
                }
            }
            let e = self.order[k];
            let edge = *self.graph.edge(e);
            if self.left_used[edge.u] || self.right_used[edge.v] {
                continue;
            }
            self.left_used[edge.u] = true;
            self.right_used[edge.v] = true;
            self.counts[edge.color] += 1;
            self.chosen.push(e);
            self.visit(k + 1, weight + edge.weight)?;
            self.chosen.pop();
            self.counts[edge.color] -= 1;
            self.left_used[edge.u] = false;
            self.right_used[edge.v] = false;
        }
        Ok(())
    }
}

/// Maximum-weight `(α, β)`-balanced matching with at most `size_cap` edges,
/// by depth-first enumeration over edges in decreasing weight. Returns `None`
/// when no balanced matching exists (the empty matching qualifies only when
/// every `α_c` is zero).
pub fn brute_force_opt(
    graph: &ColoredBipartiteGraph,
    spec: &FairnessSpec,
    options: &BruteForceOptions,
) -> Result<Option<Matching>, ExactError> {
    let bounds = spec.resolve(graph.num_colors())?;
    let mut order: Vec<usize> = (0..graph.num_edges()).collect();
    order.sort_by(|&a, &b| {
        graph
            .edge(b)
            .weight
            .total_cmp(&graph.edge(a).weight)
            .then(a.cmp(&b))
    });
    let mut prefix = vec![0.0];
    for &e in &order {
        prefix.push(prefix.last().unwrap() + graph.edge(e).weight);
    }
    let cap = options
        .size_cap
        .unwrap_or(usize::MAX)
        .min(graph.n_left().min(graph.n_right()));
    let mut search = Search {
        graph,
        bounds: &bounds,
        order,
        prefix,
        cap,
        work_limit: options.work_limit,
        nodes: 0,
        left_used: vec![false; graph.n_left()],
        right_used: vec![false; graph.n_right()],
        counts: vec![0; graph.num_colors()],
        chosen: Vec::new(),
        best: None,
    };
    search.visit(0, 0.0)?;
    match search.best {
        Some((_, edges)) => Ok(Some(Matching::from_edges(graph, edges)?)),
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn path3(colors: [usize; 3]) -> ColoredBipartiteGraph {
        // u0 - v0 - u1 - v1
        ColoredBipartiteGraph::new(
            2,
            2,
            2,
            vec![
                Edge::new(0, 0, 1.0, colors[0]),
                Edge::new(1, 0, 1.0, colors[1]),
                Edge::new(1, 1, 1.0, colors[2]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn size_bound_values() {
        assert_eq!(brute_force_size_bound(1.0, 1.0, 100.0, 0.5, 0.0).unwrap(), 200);
        assert_eq!(brute_force_size_bound(2.0, 1.0, 100.0, 0.5, 0.5).unwrap(), 1600);
        assert_eq!(brute_force_size_bound(1.0, 1.0, 0.3 * 0.9, 0.3, 0.1).unwrap(), 1);
        assert!(brute_force_size_bound(1.0, 0.0, 1.0, 0.5, 0.1).is_err());
        assert!(brute_force_size_bound(1.0, 1.0, 1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn path_with_repeated_color_has_no_balanced_pair() {
        // the only disjoint pair is {e0, e2}, both color 0
        let g = path3([0, 1, 0]);
        let spec = FairnessSpec::global(0.5, 0.5).unwrap();
        assert_eq!(brute_force_opt(&g, &spec, &BruteForceOptions::default()).unwrap(), None);
        let loose = FairnessSpec::global(0.0, 1.0).unwrap();
        let m = brute_force_opt(&g, &loose, &BruteForceOptions::default()).unwrap().unwrap();
        assert_eq!(m.edges(), &[0, 2]);
    }

    #[test]
    fn path_with_alternating_colors_balances() {
        let g = path3([0, 0, 1]);
        let spec = FairnessSpec::global(0.5, 0.5).unwrap();
        let m = brute_force_opt(&g, &spec, &BruteForceOptions::default()).unwrap().unwrap();
        assert_eq!(m.edges(), &[0, 2]);
    }

    #[test]
    fn single_edge_and_work_limit() {
        let g = ColoredBipartiteGraph::new(1, 1, 1, vec![Edge::new(0, 0, 2.5, 0)]).unwrap();
        let spec = FairnessSpec::global(0.0, 1.0).unwrap();
        let m = brute_force_opt(&g, &spec, &BruteForceOptions::default()).unwrap().unwrap();
        assert_eq!(m.total_weight(), 2.5);
        let tiny = BruteForceOptions {
            size_cap: None,
            work_limit: 1,
        };
        assert!(matches!(brute_force_opt(&g, &spec, &tiny), Err(ExactError::WorkLimit(1))));
    }

    #[test]
    fn size_cap_limits_search() {
        let g = path3([0, 0, 0]);
        let spec = FairnessSpec::global(0.0, 1.0).unwrap();
        let opts = BruteForceOptions {
            size_cap: Some(1),
            work_limit: DEFAULT_WORK_LIMIT,
        };
        assert_eq!(brute_force_opt(&g, &spec, &opts).unwrap().unwrap().len(), 1);
    }

    #[test]
    fn exact_beta_on_two_disjoint_edges() {
        let g = ColoredBipartiteGraph::new(
            2,
            2,
            2,
            vec![Edge::new(0, 0, 1.0, 0), Edge::new(1, 1, 1.0, 1)],
        )
        .unwrap();
        let spec = FairnessSpec::global(0.0, 0.6).unwrap().with_epsilon(0.1).unwrap();
        let r = solve_exact_beta(&g, &spec, 20, 5).unwrap();
        assert!((r.lp_objective - 2.0).abs() < 1e-9);
        assert!(r.satisfied_beta);
        assert_eq!(r.matching.len(), 2);
        assert_eq!(r.attempt_log.len(), 20);
        assert!(r.attempt_log.iter().all(|a| a.satisfied_beta == (a.size != 1)));
    }

    #[test]
    fn exact_beta_edge_cases() {
        let empty = ColoredBipartiteGraph::new(2, 2, 2, vec![]).unwrap();
        let spec = FairnessSpec::global(0.0, 0.6).unwrap();
        let r = solve_exact_beta(&empty, &spec, 5, 0).unwrap();
        assert!(r.satisfied_beta && r.matching.is_empty());

        let single = ColoredBipartiteGraph::new(1, 1, 1, vec![Edge::new(0, 0, 1.0, 0)]).unwrap();
        let near_one = FairnessSpec::global(0.0, 1.0 - 1e-9).unwrap();
        assert!(matches!(
            solve_exact_beta(&single, &near_one, 5, 0),
            Err(ExactError::Lp(LpError::Infeasible))
        ));
        let two_sided = FairnessSpec::global(0.1, 0.6).unwrap();
        assert!(matches!(
            solve_exact_beta(&empty, &two_sided, 5, 0),
            Err(ExactError::TwoSidedSpec)
        ));
    }

    #[test]
    fn dispatcher_uses_brute_force_on_small_mass() {
        let g = path3([0, 0, 1]);
        let spec = FairnessSpec::global(0.0, 0.5).unwrap().with_epsilon(0.1).unwrap();
        let r = solve_exact(&g, &spec, &ExactConfig::new(0)).unwrap();
        assert_eq!(r.method, ExactMethod::BruteForce);
        assert_eq!(r.matching.edges(), &[0, 2]);
        assert!(r.satisfied_beta);
        let mut no_brute = ExactConfig::new(0);
        no_brute.threshold = 0.0;
        // (1 - ε) β < 1/2 admits only x = 0 on two colors
        assert!(matches!(
            solve_exact(&g, &spec, &no_brute),
            Err(ExactError::Lp(LpError::Infeasible))
        ));
        let wider = FairnessSpec::global(0.0, 0.6).unwrap().with_epsilon(0.1).unwrap();
        assert_eq!(solve_exact(&g, &wider, &no_brute).unwrap().method, ExactMethod::Rounding);
    }
}
