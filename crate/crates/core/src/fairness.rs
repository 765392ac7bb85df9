//! Proportionality certification for integral matchings and the tail bounds
//! that go with the rounding.
//!
//! A matching is δ-fair for color `c` when its share `|M_c| / |M|` lies in
//! `[(1 - δ) α_c, (1 + δ) β_c]`. Violation factors measure how far the
//! observed shares fall outside `[α_c, β_c]`, as ratios that equal 1 inside.

use serde::Serialize;

use crate::graph::{ColoredBipartiteGraph, FairnessSpec, GraphError, Matching};
use crate::lp::FractionalMatching;
use crate::rounding::{binomial_std_error, fold_trials, OcrsRounder, RoundingError, VertexOrder};

/// Absolute slack on share comparisons, so that shares like `3/10` compare
/// equal to a bound written as `0.3`.
pub const SHARE_TOL: f64 = 1e-12;

/// Constant in the denominator of both tail bounds.
const TAIL_DENOMINATOR: f64 = 28.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ColorReport {
    pub color: usize,
    pub count: usize,
    /// `None` for the empty matching.
    pub share: Option<f64>,
    pub lower_target: f64,
    pub upper_target: f64,
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FairnessReport {
    pub delta: f64,
    pub matching_size: usize,
    pub degenerate: bool,
    /// `None` when degenerate.
    pub pass: Option<bool>,
    pub per_color: Vec<ColorReport>,
    /// `max(1, max_c α_c / share_c)`, infinite when a color with positive
    /// lower bound is absent. Serialized as `null` when infinite.
    pub violation_lower: f64,
    /// `max(1, max_c share_c / β_c)`.
    pub violation_upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_bound_two_sided: Option<Vec<f64>>,
}

impl FairnessReport {
    /// Attaches the two-sided tail bound of each color for the fractional
    /// solution the matching was rounded from.
    pub fn with_failure_bounds(
        mut self,
        graph: &ColoredBipartiteGraph,
        x: &FractionalMatching,
    ) -> Self {
        if self.delta > 0.0 {
            self.failure_bound_two_sided = Some(failure_bound_two_sided(x, graph, self.delta));
        }
        self
    }
}

fn share_passes(count: usize, size: usize, lo: f64, hi: f64) -> bool {
    let share = count as f64 / size as f64;
    share >= lo - SHARE_TOL && share <= hi + SHARE_TOL
}

/// Checks `(1 - δ) α_c <= |M_c| / |M| <= (1 + δ) β_c` for every color.
pub fn check_delta_fair(
    matching: &Matching,
    spec: &FairnessSpec,
    delta: f64,
) -> Result<FairnessReport, GraphError> {
    if !(delta >= 0.0) {
        return Err(GraphError::InvalidParameter(format!("delta must be >= 0, got {delta}")));
    }
    let counts = matching.per_color();
    let bounds = spec.resolve(counts.len())?;
    let size = matching.len();
    let degenerate = size == 0;
    let mut per_color = Vec::with_capacity(bounds.len());
    let mut violation_lower: f64 = 1.0;
    let mut violation_upper: f64 = 1.0;
    for (c, (&count, &(alpha, beta))) in counts.iter().zip(&bounds).enumerate() {
        let lower_target = (1.0 - delta) * alpha;
        let upper_target = (1.0 + delta) * beta;
        let (share, pass) = if degenerate {
            (None, None)
        } else {
            let share = count as f64 / size as f64;
            if alpha > 0.0 {
                let ratio = if count == 0 { f64::INFINITY } else { alpha / share };
                violation_lower = violation_lower.max(ratio);
            }
            violation_upper = violation_upper.max(share / beta);
            (
                Some(share),
                Some(share_passes(count, size, lower_target, upper_target)),
            )
        };
        per_color.push(ColorReport {
            color: c,
            count,
            share,
            lower_target,
            upper_target,
            pass,
        });
    }
    let pass = (!degenerate).then(|| per_color.iter().all(|r| r.pass == Some(true)));
    Ok(FairnessReport {
        delta,
        matching_size: size,
        degenerate,
        pass,
        per_color,
        violation_lower,
        violation_upper,
        failure_bound_two_sided: None,
    })
}

/// True when the matching is `(α, β)`-balanced with no slack. The empty
/// matching counts as balanced only when every `α_c` is zero.
pub fn is_balanced(matching: &Matching, bounds: &[(f64, f64)]) -> bool {
    counts_balanced(matching.per_color(), matching.len(), bounds)
}

pub(crate) fn counts_balanced(counts: &[usize], size: usize, bounds: &[(f64, f64)]) -> bool {
    if size == 0 {
        return bounds.iter().all(|&(alpha, _)| alpha == 0.0);
    }
    counts
        .iter()
        .zip(bounds)
        .all(|(&count, &(alpha, beta))| share_passes(count, size, alpha, beta))
}

/// True when every color's share is at most its `β_c`. The empty matching
/// satisfies this vacuously.
pub fn satisfies_beta(matching: &Matching, bounds: &[(f64, f64)]) -> bool {
    let size = matching.len();
    size == 0
        || matching
            .per_color()
            .iter()
            .zip(bounds)
            .all(|(&count, &(_, beta))| count as f64 / size as f64 <= beta + SHARE_TOL)
}

/// `min(1, 4 exp(-δ² S_c / 28))` per color, with `S_c` the fractional mass
/// of color `c`.
pub fn failure_bound_two_sided(
    x: &FractionalMatching,
    graph: &ColoredBipartiteGraph,
    delta: f64,
) -> Vec<f64> {
    (0..graph.num_colors())
        .map(|c| two_sided_bound(x.color_mass(graph, c), delta))
        .collect()
}

pub fn two_sided_bound(color_mass: f64, delta: f64) -> f64 {
    (4.0 * (-delta * delta * color_mass / TAIL_DENOMINATOR).exp()).min(1.0)
}

/// `min(1, 2 exp(-ε² β Σx / 28))`.
pub fn failure_bound_one_sided(x: &FractionalMatching, beta: f64, epsilon: f64) -> f64 {
    one_sided_bound(x.total_mass(), beta, epsilon)
}

pub fn one_sided_bound(total_mass: f64, beta: f64, epsilon: f64) -> f64 {
    (2.0 * (-epsilon * epsilon * beta * total_mass / TAIL_DENOMINATOR).exp()).min(1.0)
}

/// Empirical frequency of an event over repeated roundings.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TailEstimate {
    pub color: usize,
    /// Reference value of `|M_c|` (for concentration) or 0 (for fairness
    /// failures).
    pub expected: f64,
    pub hits: usize,
    pub trials: usize,
}

impl TailEstimate {
    pub fn frequency(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }

    /// Three binomial standard errors of the observed frequency.
    pub fn confidence_radius(&self) -> f64 {
        3.0 * binomial_std_error(self.frequency(), self.trials)
    }
}

fn tail_counts<F>(
    graph: &ColoredBipartiteGraph,
    x: &FractionalMatching,
    trials: usize,
    base_seed: u64,
    hit: F,
) -> Result<Vec<usize>, RoundingError>
where
    F: Fn(&Matching) -> Vec<bool> + Sync,
{
    let rounder = OcrsRounder::new(graph, x, &VertexOrder::Identity)?;
    let ell = graph.num_colors();
    Ok(fold_trials(
        trials,
        base_seed,
        || vec![0usize; ell],
        |acc, seed| {
            let m = rounder.round_matching(seed);
            for (slot, h) in acc.iter_mut().zip(hit(&m)) {
                *slot += usize::from(h);
            }
        },
        |acc, part| {
            for (a, p) in acc.iter_mut().zip(part) {
                *a += p;
            }
        },
    ))
}

/// For each requested color, the frequency over `trials` roundings of
/// `| |M_c| - S_c/2 | >= δ S_c/2`.
pub fn empirical_concentration(
    graph: &ColoredBipartiteGraph,
    x: &FractionalMatching,
    colors: &[usize],
    delta: f64,
    trials: usize,
    base_seed: u64,
) -> Result<Vec<TailEstimate>, RoundingError> {
    let expected: Vec<f64> = (0..graph.num_colors())
        .map(|c| x.color_mass(graph, c) / 2.0)
        .collect();
    let counts = tail_counts(graph, x, trials, base_seed, |m| {
        m.per_color()
            .iter()
            .zip(&expected)
            .map(|(&k, &e)| (k as f64 - e).abs() >= delta * e)
            .collect()
    })?;
    Ok(colors
        .iter()
        .map(|&c| TailEstimate {
            color: c,
            expected: expected[c],
            hits: counts[c],
            trials,
        })
        .collect())
}

/// Per color, the frequency over `trials` roundings with which the matching
/// fails the δ-fairness check for that color. The empty matching counts as
/// a failure for every color.
pub fn delta_fair_failure_frequency(
    graph: &ColoredBipartiteGraph,
    x: &FractionalMatching,
    spec: &FairnessSpec,
    delta: f64,
    trials: usize,
    base_seed: u64,
) -> Result<Vec<TailEstimate>, RoundingError> {
    let bounds = spec
        .resolve(graph.num_colors())
        .map_err(|e| RoundingError::InfeasibleFractional(e.to_string()))?;
    let counts = tail_counts(graph, x, trials, base_seed, |m| {
        let size = m.len();
        m.per_color()
            .iter()
            .zip(&bounds)
            .map(|(&k, &(a, b))| {
                size == 0 || !share_passes(k, size, (1.0 - delta) * a, (1.0 + delta) * b)
            })
            .collect()
    })?;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(c, hits)| TailEstimate {
            color: c,
            expected: 0.0,
            hits,
            trials,
        })
        .collect())
}
