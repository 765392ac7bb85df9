//! Two-phase revised primal simplex with an explicit dense basis inverse.
//!
//! The inverse is updated by elementary row operations after every pivot and
//! rebuilt from scratch whenever the primal residual `b - B x_B` drifts.
//! Pricing is Dantzig's largest reduced cost; after a long run of degenerate
//! pivots the solver switches to Bland's rule until it makes progress again.

use nalgebra::DMatrix;

use super::{LinearProgram, LpError, Relation};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Relative optimality tolerance (reduced costs, duality gap).
    pub tol_opt: f64,
    /// Feasibility tolerance on scaled row residuals.
    pub tol_feas: f64,
    /// Consecutive degenerate pivots before falling back to Bland's rule.
    pub bland_after: usize,
    /// Pivots between residual checks of the basis inverse.
    pub check_every: usize,
    /// Hard pivot limit; `None` picks a limit from the problem size.
    pub max_pivots: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_opt: super::TAU_OPT,
            tol_feas: super::TAU_FEAS,
            bland_after: 1000,
            check_every: 100,
            max_pivots: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One dual value per original row, for the original row orientation.
    pub duals: Vec<f64>,
    /// `b . y` of the dual certificate.
    pub dual_objective: f64,
    pub pivots: usize,
}

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;

struct Tableau {
    m: usize,
    n_struct: usize,
    cols: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    artificial: Vec<bool>,
    flipped: Vec<bool>,
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    pivots: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        let n = lp.num_variables();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut rhs = Vec::with_capacity(m);
        let mut flipped = Vec::with_capacity(m);
        let mut relations = Vec::with_capacity(m);
        for (i, row) in lp.constraints.iter().enumerate() {
            let flip = row.rhs < 0.0;
            let sign = if flip { -1.0 } else { 1.0 };
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    cols[j].push((i, sign * a));
                }
            }
            rhs.push(sign * row.rhs);
            flipped.push(flip);
            relations.push(match (row.relation, flip) {
                (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
                (Relation::Ge, false) | (Relation::Le, true) => Relation::Ge,
                (Relation::Eq, _) => Relation::Eq,
            });
        }
        let mut artificial = vec![false; n];
        let mut basis = vec![usize::MAX; m];
        for (i, rel) in relations.iter().enumerate() {
            match rel {
                Relation::Le => {
                    basis[i] = cols.len();
                    cols.push(vec![(i, 1.0)]);
                    artificial.push(false);
                }
                Relation::Ge => {
                    cols.push(vec![(i, -1.0)]);
                    artificial.push(false);
                    basis[i] = cols.len();
                    cols.push(vec![(i, 1.0)]);
                    artificial.push(true);
                }
                Relation::Eq => {
                    basis[i] = cols.len();
                    cols.push(vec![(i, 1.0)]);
                    artificial.push(true);
                }
            }
        }
        let mut position = vec![None; cols.len()];
        for (i, &j) in basis.iter().enumerate() {
            position[j] = Some(i);
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let xb = rhs.clone();
        Self {
            m,
            n_struct: n,
            cols,
            rhs,
            artificial,
            flipped,
            basis,
            position,
            binv,
            xb,
            pivots: 0,
        }
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &j) in self.basis.iter().enumerate() {
            let cb = cost[j];
            if cb != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yk, &b) in y.iter_mut().zip(row) {
                    *yk += cb * b;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, cost: &[f64], y: &[f64]) -> f64 {
        cost[j] - self.cols[j].iter().map(|&(r, a)| y[r] * a).sum::<f64>()
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut d = vec![0.0; m];
        for &(r, a) in &self.cols[j] {
            for (i, di) in d.iter_mut().enumerate() {
                *di += self.binv[i * m + r] * a;
            }
        }
        d
    }

    fn pivot(&mut self, r: usize, q: usize, d: &[f64]) {
        let m = self.m;
        let pr = d[r];
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (row_r, after) = rest.split_at_mut(m);
        for v in row_r.iter_mut() {
            *v /= pr;
        }
        for (i, chunk) in before.chunks_mut(m).enumerate() {
            let f = d[i];
            if f != 0.0 {
                for (a, &b) in chunk.iter_mut().zip(row_r.iter()) {
                    *a -= f * b;
                }
            }
        }
        for (k, chunk) in after.chunks_mut(m).enumerate() {
            let f = d[r + 1 + k];
            if f != 0.0 {
                for (a, &b) in chunk.iter_mut().zip(row_r.iter()) {
                    *a -= f * b;
                }
            }
        }
        let leaving = self.basis[r];
        self.position[leaving] = None;
        self.basis[r] = q;
        self.position[q] = Some(r);
        self.pivots += 1;
    }

    fn residual(&self) -> f64 {
        let mut r = self.rhs.clone();
        for (i, &j) in self.basis.iter().enumerate() {
            for &(k, a) in &self.cols[j] {
                r[k] -= a * self.xb[i];
            }
        }
        r.iter().fold(0.0, |w, v| w.max(v.abs()))
    }

    fn reinvert(&mut self) -> Result<(), LpError> {
        let m = self.m;
        if m == 0 {
            return Ok(());
        }
        let mut b = DMatrix::<f64>::zeros(m, m);
        for (i, &j) in self.basis.iter().enumerate() {
            for &(k, a) in &self.cols[j] {
                b[(k, i)] = a;
            }
        }
        let inv = b
            .try_inverse()
            .ok_or_else(|| LpError::NumericalFailure("singular basis".into()))?;
        for i in 0..m {
            for k in 0..m {
                self.binv[i * m + k] = inv[(i, k)];
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.xb[i] = row.iter().zip(&self.rhs).map(|(a, b)| a * b).sum();
        }
        Ok(())
    }

    fn run(
        &mut self,
        cost: &[f64],
        enterable: &[bool],
        opts: &SolveOptions,
        limit: usize,
    ) -> Result<Phase, LpError> {
        let scale = cost.iter().fold(0.0_f64, |w, c| w.max(c.abs()));
        let price_tol = opts.tol_opt * if scale > 0.0 { scale } else { 1.0 };
        let mut y = self.duals(cost);
        let mut degenerate_run = 0usize;
        let mut since_check = 0usize;
        let mut fresh = true;
        loop {
            if self.pivots >= limit {
                return Err(LpError::IterationLimit(limit));
            }
            let bland = degenerate_run >= opts.bland_after;
            let mut entering = None;
            let mut best = price_tol;
            for j in 0..self.cols.len() {
                if !enterable[j] || self.position[j].is_some() {
                    continue;
                }
                let dj = self.reduced_cost(j, cost, &y);
                if dj > best {
                    entering = Some((j, dj));
                    if bland {
                        break;
                    }
                    best = dj;
                }
            }
            let Some((q, dq)) = entering else {
                if fresh {
                    return Ok(Phase::Optimal);
                }
                // confirm optimality against duals recomputed from the inverse
                y = self.duals(cost);
                fresh = true;
                continue;
            };

            let d = self.ftran(q);
            let mut leave: Option<(usize, f64)> = None;
            for (i, &di) in d.iter().enumerate() {
                if di <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.xb[i].max(0.0) / di;
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((r, best_ratio)) => {
                        let better = if ratio < best_ratio - DEGENERATE_STEP {
                            true
                        } else if ratio <= best_ratio + DEGENERATE_STEP {
                            if bland {
                                self.basis[i] < self.basis[r]
                            } else {
                                di > d[r]
                            }
                        } else {
                            false
                        };
                        if better {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
            let Some((r, theta)) = leave else {
                return Ok(Phase::Unbounded);
            };

            for (xi, &di) in self.xb.iter_mut().zip(&d) {
                *xi -= theta * di;
                if *xi < 0.0 && *xi > -opts.tol_feas {
                    *xi = 0.0;
                }
            }
            self.xb[r] = theta;
            self.pivot(r, q, &d);
            let row_r = &self.binv[r * self.m..(r + 1) * self.m];
            for (yk, &b) in y.iter_mut().zip(row_r) {
                *yk += dq * b;
            }
            fresh = false;

            if theta <= DEGENERATE_STEP {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            since_check += 1;
            if since_check >= opts.check_every {
                since_check = 0;
                if self.residual() > opts.tol_feas {
                    self.reinvert()?;
                }
                y = self.duals(cost);
                fresh = true;
            }
        }
    }
}

/// Solves `lp` to optimality.
///
/// Returns a primal solution together with a dual certificate; the solution
/// is rejected as a numerical failure if either side misses the tolerances
/// in `opts`.
pub fn solve(lp: &LinearProgram, opts: &SolveOptions) -> Result<LpSolution, LpError> {
    lp.check()?;
    let mut tab = Tableau::new(lp);
    let ncols = tab.cols.len();
    let limit = opts
        .max_pivots
        .unwrap_or(50 * (tab.m + tab.n_struct) + 1000);

    if tab.artificial.iter().any(|&a| a) {
        let cost1: Vec<f64> = tab
            .artificial
            .iter()
            .map(|&a| if a { -1.0 } else { 0.0 })
            .collect();
        let all = vec![true; ncols];
        tab.run(&cost1, &all, opts, limit)?;
        let infeasibility: f64 = tab
            .basis
            .iter()
            .zip(&tab.xb)
            .filter(|(&j, _)| tab.artificial[j])
            .map(|(_, &v)| v)
            .sum();
        let rhs_scale = tab.rhs.iter().fold(1.0_f64, |w, v| w.max(v.abs()));
        if infeasibility > opts.tol_feas * rhs_scale * (tab.m as f64).sqrt() {
            return Err(LpError::Infeasible);
        }
        drive_out_artificials(&mut tab);
    }

    let mut cost = vec![0.0; ncols];
    cost[..tab.n_struct].copy_from_slice(&lp.objective);
    let enterable: Vec<bool> = tab.artificial.iter().map(|&a| !a).collect();
    match tab.run(&cost, &enterable, opts, limit)? {
        Phase::Unbounded => return Err(LpError::Unbounded),
        Phase::Optimal => {}
    }

    if tab.residual() > opts.tol_feas {
        tab.reinvert()?;
        if let Phase::Unbounded = tab.run(&cost, &enterable, opts, limit)? {
            return Err(LpError::Unbounded);
        }
    }

    let mut x = vec![0.0; tab.n_struct];
    for (i, &j) in tab.basis.iter().enumerate() {
        if j < tab.n_struct {
            x[j] = tab.xb[i].max(0.0);
        }
    }
    let objective = lp.objective_value(&x);
    let violation = lp.max_violation(&x);
    if violation > opts.tol_feas * 10.0 {
        return Err(LpError::NumericalFailure(format!(
            "primal residual {violation:e} exceeds tolerance"
        )));
    }

    let y = tab.duals(&cost);
    let scale = lp.objective.iter().fold(1.0_f64, |w, c| w.max(c.abs()));
    let dual_infeasibility = (0..ncols)
        .filter(|&j| !tab.artificial[j])
        .map(|j| tab.reduced_cost(j, &cost, &y))
        .fold(0.0_f64, f64::max);
    if dual_infeasibility > opts.tol_opt * scale * 10.0 {
        return Err(LpError::NumericalFailure(format!(
            "dual infeasibility {dual_infeasibility:e} exceeds tolerance"
        )));
    }
    let dual_objective: f64 = y.iter().zip(&tab.rhs).map(|(a, b)| a * b).sum();
    let gap = (dual_objective - objective).abs();
    if gap > opts.tol_opt * objective.abs().max(1.0) * 10.0 {
        return Err(LpError::NumericalFailure(format!(
            "duality gap {gap:e} exceeds tolerance"
        )));
    }
    let duals = y
        .iter()
        .zip(&tab.flipped)
        .map(|(&v, &f)| if f { -v } else { v })
        .collect();
    Ok(LpSolution {
        x,
        objective,
        duals,
        dual_objective,
        pivots: tab.pivots,
    })
}

fn drive_out_artificials(tab: &mut Tableau) {
    let m = tab.m;
    for r in 0..m {
        if !tab.artificial[tab.basis[r]] {
            continue;
        }
        let row: Vec<f64> = tab.binv[r * m..(r + 1) * m].to_vec();
        let candidate = (0..tab.cols.len())
            .filter(|&j| !tab.artificial[j] && tab.position[j].is_none())
            .find(|&j| {
                let alpha: f64 = tab.cols[j].iter().map(|&(k, a)| row[k] * a).sum();
                alpha.abs() > 1e-7
            });
        // no candidate: the row is redundant and its artificial stays basic at zero
        if let Some(q) = candidate {
            let d = tab.ftran(q);
            let value = tab.xb[r] / d[r];
            for (xi, &di) in tab.xb.iter_mut().zip(&d) {
                *xi -= value * di;
            }
            tab.xb[r] = value;
            tab.pivot(r, q, &d);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Constraint;

    fn lp(objective: Vec<f64>, rows: Vec<(Vec<(usize, f64)>, Relation, f64)>) -> LinearProgram {
        let n = objective.len();
        LinearProgram {
            objective,
            constraints: rows
                .into_iter()
                .enumerate()
                .map(|(i, (coeffs, relation, rhs))| Constraint {
                    name: format!("r{i}"),
                    coeffs,
                    relation,
                    rhs,
                })
                .collect(),
            variable_names: (0..n).map(|j| format!("x{j}")).collect(),
        }
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let p = lp(
            vec![3.0, 5.0],
            vec![
                (vec![(0, 1.0)], Relation::Le, 4.0),
                (vec![(1, 2.0)], Relation::Le, 12.0),
                (vec![(0, 3.0), (1, 2.0)], Relation::Le, 18.0),
            ],
        );
        let s = solve(&p, &SolveOptions::default()).unwrap();
        assert!((s.objective - 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
        assert!((s.dual_objective - 36.0).abs() < 1e-9);
        assert!(s.duals.iter().all(|&y| y >= -1e-12));
    }

    #[test]
    fn needs_phase_one() {
        // max -x - y, x + y >= 2, x - y = 0 -> (1, 1)
        let p = lp(
            vec![-1.0, -1.0],
            vec![
                (vec![(0, 1.0), (1, 1.0)], Relation::Ge, 2.0),
                (vec![(0, 1.0), (1, -1.0)], Relation::Eq, 0.0),
            ],
        );
        let s = solve(&p, &SolveOptions::default()).unwrap();
        assert!((s.objective + 2.0).abs() < 1e-9);
        assert!((s.x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // max x, -x >= -3  (x <= 3)
        let p = lp(vec![1.0], vec![(vec![(0, -1.0)], Relation::Ge, -3.0)]);
        let s = solve(&p, &SolveOptions::default()).unwrap();
        assert!((s.x[0] - 3.0).abs() < 1e-9);
        assert!((s.duals[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = lp(
            vec![1.0],
            vec![
                (vec![(0, 1.0)], Relation::Le, 1.0),
                (vec![(0, 1.0)], Relation::Ge, 2.0),
            ],
        );
        assert!(matches!(solve(&infeasible, &SolveOptions::default()), Err(LpError::Infeasible)));
        let unbounded = lp(vec![1.0, 0.0], vec![(vec![(0, 1.0), (1, -1.0)], Relation::Le, 1.0)]);
        assert!(matches!(solve(&unbounded, &SolveOptions::default()), Err(LpError::Unbounded)));
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let p = lp(
            vec![1.0, 1.0],
            vec![
                (vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.0),
                (vec![(0, 2.0), (1, 2.0)], Relation::Eq, 2.0),
            ],
        );
        let s = solve(&p, &SolveOptions::default()).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_malformed() {
        let p = lp(vec![f64::NAN], vec![]);
        assert!(matches!(solve(&p, &SolveOptions::default()), Err(LpError::Malformed(_))));
        let q = lp(vec![1.0], vec![(vec![(3, 1.0)], Relation::Le, 1.0)]);
        assert!(matches!(solve(&q, &SolveOptions::default()), Err(LpError::Malformed(_))));
    }

    #[test]
    fn iteration_limit_is_reported() {
        let p = lp(
            vec![3.0, 5.0],
            vec![
                (vec![(0, 1.0)], Relation::Le, 4.0),
                (vec![(1, 2.0)], Relation::Le, 12.0),
                (vec![(0, 3.0), (1, 2.0)], Relation::Le, 18.0),
            ],
        );
        let opts = SolveOptions {
            max_pivots: Some(1),
            ..SolveOptions::default()
        };
        assert!(matches!(solve(&p, &opts), Err(LpError::IterationLimit(1))));
    }
}
