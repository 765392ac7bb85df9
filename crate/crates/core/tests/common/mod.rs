//! Independent reference computations for the integration tests. Nothing
//! here calls into the solver, the rounding or the brute-force search.

#![allow(dead_code)]

use std::collections::HashMap;

use fairmatch::graph::Edge;
use fairmatch::lp::{LinearProgram, Relation};
use fairmatch::ColoredBipartiteGraph;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every matching of a graph with at most 20 edges, as sorted edge lists.
pub fn all_matchings(graph: &ColoredBipartiteGraph) -> Vec<Vec<usize>> {
    let m = graph.num_edges();
    assert!(m <= 20, "enumeration oracle is for tiny graphs");
    let mut out = Vec::new();
    'mask: for mask in 0u32..(1u32 << m) {
        let mut left = vec![false; graph.n_left()];
        let mut right = vec![false; graph.n_right()];
        let mut edges = Vec::new();
        for e in 0..m {
            if mask & (1 << e) != 0 {
                let Edge { u, v, .. } = *graph.edge(e);
                if left[u] || right[v] {
                    continue 'mask;
                }
                left[u] = true;
                right[v] = true;
                edges.push(e);
            }
        }
        out.push(edges);
    }
    out
}

/// Balance test with integer arithmetic up to a tiny slack:
/// `α_c |M| <= |M_c| <= β_c |M|` for all colors.
pub fn oracle_balanced(graph: &ColoredBipartiteGraph, edges: &[usize], bounds: &[(f64, f64)]) -> bool {
    let size = edges.len() as f64;
    if edges.is_empty() {
        return bounds.iter().all(|b| b.0 == 0.0);
    }
    bounds.iter().enumerate().all(|(c, &(lo, hi))| {
        let k = edges.iter().filter(|&&e| graph.edge(e).color == c).count() as f64;
        k >= lo * size - 1e-9 && k <= hi * size + 1e-9
    })
}

pub fn weight_of(graph: &ColoredBipartiteGraph, edges: &[usize]) -> f64 {
    edges.iter().map(|&e| graph.edge(e).weight).sum()
}

/// Maximum weight over all balanced matchings, `None` if none is balanced.
pub fn oracle_best_balanced(graph: &ColoredBipartiteGraph, bounds: &[(f64, f64)]) -> Option<f64> {
    all_matchings(graph)
        .into_iter()
        .filter(|m| oracle_balanced(graph, m, bounds))
        .map(|m| weight_of(graph, &m))
        .fold(None, |best, w| Some(best.map_or(w, |b: f64| b.max(w))))
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Maximum of the objective over the vertices of `{x >= 0, rows}`, found by
/// solving every square system of tight constraints. Assumes the feasible
/// region is bounded and nonempty (true for matching LPs, which contain 0).
pub fn lp_vertex_optimum(lp: &LinearProgram) -> f64 {
    let n = lp.num_variables();
    if n == 0 {
        return 0.0;
    }
    // each row as (dense coefficients, rhs, relation); bounds appended as -x_j <= 0
    let mut rows: Vec<(Vec<f64>, f64, Relation)> = lp
        .constraints
        .iter()
        .map(|r| {
            let mut a = vec![0.0; n];
            for &(j, c) in &r.coeffs {
                a[j] += c;
            }
            (a, r.rhs, r.relation)
        })
        .collect();
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = -1.0;
        rows.push((a, 0.0, Relation::Le));
    }
    let feasible = |x: &DVector<f64>| {
        rows.iter().all(|(a, b, rel)| {
            let act: f64 = a.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
            let tol = 1e-9 * (1.0 + b.abs());
            match rel {
                Relation::Le => act <= b + tol,
                Relation::Ge => act >= b - tol,
                Relation::Eq => (act - b).abs() <= tol,
            }
        })
    };
    let mut best = f64::NEG_INFINITY;
    for subset in combinations(rows.len(), n) {
        let a = DMatrix::from_fn(n, n, |i, j| rows[subset[i]].0[j]);
        let b = DVector::from_fn(n, |i, _| rows[subset[i]].1);
        let Some(x) = a.lu().solve(&b) else { continue };
        if x.iter().all(|v| v.is_finite()) && feasible(&x) {
            let obj: f64 = lp.objective.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
            best = best.max(obj);
        }
    }
    best
}

/// A CPLEX LP file reduced to what the re-import check needs.
#[derive(Debug, Default)]
pub struct ParsedLp {
    pub maximize: bool,
    pub objective: HashMap<String, f64>,
    pub rows: Vec<(String, HashMap<String, f64>, String, f64)>,
    pub nonnegative: Vec<String>,
}

fn parse_terms(text: &str) -> HashMap<String, f64> {
    let mut out = HashMap::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for tok in text.split_whitespace() {
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            _ => {
                if let Ok(v) = tok.parse::<f64>() {
                    coef = Some(v);
                } else {
                    *out.entry(tok.to_string()).or_insert(0.0) += sign * coef.unwrap_or(1.0);
                    sign = 1.0;
                    coef = None;
                }
            }
        }
    }
    out
}

/// Minimal reader for the subset of the CPLEX LP format written by the
/// exporter: `\` comments, one objective, named rows that may wrap, and
/// `x >= 0` bounds.
pub fn parse_cplex_lp(text: &str) -> ParsedLp {
    let mut parsed = ParsedLp::default();
    let mut section = "";
    let mut pending = String::new();
    let mut statements = Vec::new();
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        let upper = line.to_ascii_uppercase();
        if ["MAXIMIZE", "MINIMIZE", "SUBJECT TO", "BOUNDS", "END"].contains(&upper.as_str()) {
            if !pending.is_empty() {
                statements.push((section, std::mem::take(&mut pending)));
            }
            section = match upper.as_str() {
                "MAXIMIZE" => {
                    parsed.maximize = true;
                    "obj"
                }
                "MINIMIZE" => "obj",
                "SUBJECT TO" => "st",
                "BOUNDS" => "bounds",
                _ => "end",
            };
            continue;
        }
        // a line with a label starts a new statement
        let starts_new = section == "bounds" || line.split_whitespace().next().is_some_and(|t| t.ends_with(':'));
        if starts_new && !pending.is_empty() {
            statements.push((section, std::mem::take(&mut pending)));
        }
        pending.push(' ');
        pending.push_str(line);
    }
    if !pending.is_empty() {
        statements.push((section, pending));
    }
    for (section, stmt) in statements {
        match section {
            "obj" => {
                let body = stmt.split_once(':').map_or(stmt.as_str(), |(_, b)| b);
                parsed.objective = parse_terms(body);
            }
            "st" => {
                let (name, body) = stmt.split_once(':').expect("named row");
                let (lhs, rel, rhs) = ["<=", ">=", "="]
                    .iter()
                    .find_map(|op| body.split_once(op).map(|(l, r)| (l, *op, r)))
                    .expect("relation");
                parsed
                    .rows
                    .push((name.trim().to_string(), parse_terms(lhs), rel.to_string(), rhs.trim().parse().unwrap()));
            }
            "bounds" => {
                let var = stmt.split_whitespace().next().unwrap().to_string();
                parsed.nonnegative.push(var);
            }
            _ => {}
        }
    }
    parsed
}

/// Rebuilds a [`LinearProgram`] from a parsed file, using `names` for the
/// variable order.
pub fn to_linear_program(parsed: &ParsedLp, names: &[String]) -> LinearProgram {
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let objective = names
        .iter()
        .map(|n| parsed.objective.get(n).copied().unwrap_or(0.0))
        .collect();
    let constraints = parsed
        .rows
        .iter()
        .map(|(name, terms, rel, rhs)| {
            let mut coeffs: Vec<(usize, f64)> = terms.iter().map(|(n, c)| (index[n.as_str()], *c)).collect();
            coeffs.sort_by_key(|t| t.0);
            fairmatch::lp::Constraint {
                name: name.clone(),
                coeffs,
                relation: match rel.as_str() {
                    "<=" => Relation::Le,
                    ">=" => Relation::Ge,
                    _ => Relation::Eq,
                },
                rhs: *rhs,
            }
        })
        .collect();
    LinearProgram {
        objective,
        constraints,
        variable_names: names.to_vec(),
    }
}

/// A random bipartite colored graph with at most `max_edges` edges, weights
/// in `[1, 2)`.
pub fn random_small_graph(rng: &mut ChaCha8Rng, max_edges: usize, max_side: usize, max_colors: usize) -> ColoredBipartiteGraph {
    let n_left = rng.random_range(1..=max_side);
    let n_right = rng.random_range(1..=max_side);
    let ell = rng.random_range(1..=max_colors);
    let mut pairs: Vec<(usize, usize)> = (0..n_left).flat_map(|u| (0..n_right).map(move |v| (u, v))).collect();
    // partial Fisher-Yates
    let m = rng.random_range(0..=max_edges.min(pairs.len()));
    for i in 0..m {
        let j = rng.random_range(i..pairs.len());
        pairs.swap(i, j);
    }
    let edges = pairs[..m]
        .iter()
        .map(|&(u, v)| Edge::new(u, v, rng.random_range(1.0..2.0), rng.random_range(0..ell)))
        .collect();
    ColoredBipartiteGraph::new(n_left, n_right, ell, edges).unwrap()
}

/// `(α, β)` drawn from a tenth-step grid with `α <= β`.
pub fn random_bounds(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let a = rng.random_range(0..=10);
    let b = rng.random_range(a..=10);
    (a as f64 / 10.0, b as f64 / 10.0)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
