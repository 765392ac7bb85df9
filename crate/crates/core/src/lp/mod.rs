//! The fair matching linear program: construction, solving and export.
//!
//! Rows are a vertex-capacity row per vertex, and for every color `c` a lower
//! and an upper proportionality row, all written in `<= 0` form:
//!
//! ```text
//! alpha_c * sum_E x - sum_{E_c} x <= 0        (cLo_c)
//! sum_{E_c} x - beta_c * sum_E x  <= 0        (cHi_c)
//! ```

mod cplex;
mod simplex;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{ColoredBipartiteGraph, FairnessSpec, GraphError};

pub use cplex::{export_lp, import_solution, write_lp};
pub use simplex::{solve, LpSolution, SolveOptions};

/// Absolute feasibility tolerance on row residuals, scaled by row norm.
pub const TAU_FEAS: f64 = 1e-9;
/// Relative optimality tolerance.
pub const TAU_OPT: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("iteration limit of {0} pivots reached")]
    IterationLimit(usize),
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("solution file: {0}")]
    Solution(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// Sparse `(variable, coefficient)` pairs, sorted by variable.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|&(_, a)| a * a).sum::<f64>().sqrt()
    }
}

/// `maximize objective . x` subject to `constraints`, `x >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub variable_names: Vec<String>,
}

impl LinearProgram {
    pub fn num_variables(&self) -> usize {
        self.objective.len()
    }

    pub fn check(&self) -> Result<(), LpError> {
        let n = self.num_variables();
        if self.variable_names.len() != n {
            return Err(LpError::Malformed("one name per variable required".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Malformed("non-finite objective coefficient".into()));
        }
        for row in &self.constraints {
            if !row.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row {}: non-finite rhs", row.name)));
            }
            for &(j, a) in &row.coeffs {
                if j >= n || !a.is_finite() {
                    return Err(LpError::Malformed(format!("row {}: bad entry ({j}, {a})", row.name)));
                }
            }
        }
        Ok(())
    }

    /// Largest scaled row violation of `x` (negative entries count as violations).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().fold(0.0_f64, |w, &v| w.max(-v));
        for row in &self.constraints {
            let scale = row.norm().max(1.0);
            let slack = row.activity(x) - row.rhs;
            let viol = match row.relation {
                Relation::Le => slack.max(0.0),
                Relation::Ge => (-slack).max(0.0),
                Relation::Eq => slack.abs(),
            };
            worst = worst.max(viol / scale);
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// Name of the variable for edge `(u, v)`.
pub fn edge_variable_name(u: usize, v: usize) -> String {
    format!("x_{u}_{v}")
}

fn vertex_rows(graph: &ColoredBipartiteGraph) -> Vec<Constraint> {
    let n_left = graph.n_left();
    let left = (0..n_left).map(|u| (u, graph.left_incident(u)));
    let right = (0..graph.n_right()).map(|v| (n_left + v, graph.right_incident(v)));
    left.chain(right)
        .map(|(id, incident)| {
            let mut coeffs: Vec<(usize, f64)> = incident.iter().map(|&e| (e, 1.0)).collect();
            coeffs.sort_unstable_by_key(|&(j, _)| j);
            Constraint {
                name: format!("v_{id}"),
                coeffs,
                relation: Relation::Le,
                rhs: 1.0,
            }
        })
        .collect()
}

fn base_program(graph: &ColoredBipartiteGraph, constraints: Vec<Constraint>) -> LinearProgram {
    LinearProgram {
        objective: graph.edges().iter().map(|e| e.weight).collect(),
        constraints,
        variable_names: graph
            .edges()
            .iter()
            .map(|e| edge_variable_name(e.u, e.v))
            .collect(),
    }
}

/// Builds the fair matching LP for `graph` under `spec`.
///
/// With `beta_perturbation = Some(eps)` every upper bound is replaced by
/// `(1 - eps) * beta_c`; this is only meaningful for one-sided specs.
pub fn build_lp_fair(
    graph: &ColoredBipartiteGraph,
    spec: &FairnessSpec,
    beta_perturbation: Option<f64>,
) -> Result<LinearProgram, LpError> {
    let mut bounds = spec.resolve(graph.num_colors())?;
    if let Some(eps) = beta_perturbation {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(GraphError::InvalidParameter(format!("perturbation must lie in (0, 1), got {eps}")).into());
        }
        if !spec.is_one_sided() {
            return Err(GraphError::InvalidParameter(
                "beta perturbation requires alpha = 0 for every color".into(),
            )
            .into());
        }
        for b in &mut bounds {
            b.1 *= 1.0 - eps;
        }
    }
    let m = graph.num_edges();
    let mut rows = vertex_rows(graph);
    for (c, &(alpha, beta)) in bounds.iter().enumerate() {
        let lower = (0..m)
            .map(|e| (e, alpha - if graph.in_color(e, c) { 1.0 } else { 0.0 }))
            .filter(|&(_, a)| a != 0.0)
            .collect();
        let upper = (0..m)
            .map(|e| (e, if graph.in_color(e, c) { 1.0 } else { 0.0 } - beta))
            .filter(|&(_, a)| a != 0.0)
            .collect();
        rows.push(Constraint {
            name: format!("cLo_{}", c + 1),
            coeffs: lower,
            relation: Relation::Le,
            rhs: 0.0,
        });
        rows.push(Constraint {
            name: format!("cHi_{}", c + 1),
            coeffs: upper,
            relation: Relation::Le,
            rhs: 0.0,
        });
    }
    Ok(base_program(graph, rows))
}

/// The plain bipartite matching LP, without any color rows.
pub fn build_matching_lp(graph: &ColoredBipartiteGraph) -> LinearProgram {
    base_program(graph, vertex_rows(graph))
}

/// A fractional matching: one value per edge of its graph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FractionalMatching {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl FractionalMatching {
    /// Wraps `x`, computing the objective from the graph's weights.
    pub fn new(graph: &ColoredBipartiteGraph, x: Vec<f64>) -> Self {
        let objective = graph.edges().iter().zip(&x).map(|(e, v)| e.weight * v).sum();
        Self { x, objective }
    }

    pub fn total_mass(&self) -> f64 {
        self.x.iter().sum()
    }

    /// `S_c`: the mass on color class `c`.
    pub fn color_mass(&self, graph: &ColoredBipartiteGraph, c: usize) -> f64 {
        graph.color_class(c).map(|e| self.x[e]).sum()
    }

    /// Largest vertex load `sum_{e in delta(v)} x_e` over all vertices.
    pub fn max_vertex_load(&self, graph: &ColoredBipartiteGraph) -> f64 {
        let left = (0..graph.n_left()).map(|u| graph.left_incident(u));
        let right = (0..graph.n_right()).map(|v| graph.right_incident(v));
        left.chain(right)
            .map(|inc| inc.iter().map(|&e| self.x[e]).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Checks bounds, vertex loads and (when a spec is given) the color rows.
    pub fn check(
        &self,
        graph: &ColoredBipartiteGraph,
        spec: Option<&FairnessSpec>,
    ) -> Result<(), LpError> {
        let fail = |msg: String| Err(LpError::Solution(msg));
        if self.x.len() != graph.num_edges() {
            return fail(format!("{} values for {} edges", self.x.len(), graph.num_edges()));
        }
        if let Some(e) = self
            .x
            .iter()
            .position(|&v| !v.is_finite() || !(-TAU_FEAS..=1.0 + TAU_FEAS).contains(&v))
        {
            return fail(format!("x[{e}] = {} outside [0, 1]", self.x[e]));
        }
        let load = self.max_vertex_load(graph);
        if load > 1.0 + TAU_FEAS * (graph.num_edges().max(1) as f64).sqrt() {
            return fail(format!("vertex load {load} exceeds 1"));
        }
        if let Some(spec) = spec {
            let total = self.total_mass();
            let scale = TAU_FEAS * (graph.num_edges().max(1) as f64).sqrt();
            for (c, (alpha, beta)) in spec.resolve(graph.num_colors())?.into_iter().enumerate() {
                let mass = self.color_mass(graph, c);
                if mass < alpha * total - scale || mass > beta * total + scale {
                    return fail(format!("color {} mass {mass} outside [{}, {}]", c + 1, alpha * total, beta * total));
                }
            }
        }
        Ok(())
    }

    /// Zeroes tolerance-level negatives and caps values at 1 so the entries
    /// are usable as probabilities.
    pub fn clamp(&mut self, graph: &ColoredBipartiteGraph) {
        for v in &mut self.x {
            *v = v.clamp(0.0, 1.0);
        }
        *self = Self::new(graph, std::mem::take(&mut self.x));
    }
}

/// Solves the fair LP and returns a clamped fractional matching.
///
/// An LP whose only feasible point is `x = 0` on a graph with at least one
/// edge is reported as [`LpError::Infeasible`]: no nonempty fractional
/// balanced matching exists.
pub fn solve_fair(
    graph: &ColoredBipartiteGraph,
    spec: &FairnessSpec,
    beta_perturbation: Option<f64>,
) -> Result<FractionalMatching, LpError> {
    let lp = build_lp_fair(graph, spec, beta_perturbation)?;
    let solution = solve(&lp, &SolveOptions::default())?;
    into_fractional(graph, solution)
}

/// Solves the LP without color rows.
pub fn solve_vanilla(graph: &ColoredBipartiteGraph) -> Result<FractionalMatching, LpError> {
    let lp = build_matching_lp(graph);
    let solution = solve(&lp, &SolveOptions::default())?;
    into_fractional(graph, solution)
}

pub(crate) fn into_fractional(
    graph: &ColoredBipartiteGraph,
    solution: LpSolution,
) -> Result<FractionalMatching, LpError> {
    let mut fm = FractionalMatching {
        x: solution.x,
        objective: solution.objective,
    };
    fm.clamp(graph);
    if graph.num_edges() > 0 && fm.total_mass() <= TAU_FEAS {
        return Err(LpError::Infeasible);
    }
    Ok(fm)
}
