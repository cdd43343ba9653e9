//! The discretized primal LP and a dense revised simplex solver.
//!
//! Variables are x_{a,θ} ≥ 0 over grid pairs. Feasibility rows pin the
//! θ-marginal to the prior; obedience rows force Σ_θ u(a,θ) x_{a,θ} = 0
//! per action. The solver keeps an explicit basis inverse, prices sparse
//! columns (two nonzeros each), and recovers row duals exactly from the
//! final basis, so the price function p and multipliers q come out of the
//! same arithmetic as the primal optimum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PreferenceModel;
use crate::problem::{DiscreteProblem, Outcome};

/// Default cap on the number of LP variables.
pub const DEFAULT_VAR_CAP: usize = 250_000;

const TOL_OPT: f64 = 1e-9;
const TOL_PIVOT: f64 = 1e-10;
const MASS_FLOOR: f64 = 1e-11;

/// Standard-form LP: maximize obj·x subject to A x = rhs, x ≥ 0,
/// with sparse columns. rhs must be nonnegative.
#[derive(Debug, Clone)]
pub struct StandardLp {
    pub nrows: usize,
    pub ncols: usize,
    pub cols: Vec<Vec<(usize, f64)>>,
    pub obj: Vec<f64>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Bland's smallest-index rule throughout. Terminates, slowly.
    Bland,
    /// Dantzig pricing with a switch to Bland after a degenerate stall.
    DantzigBland,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub pivot_rule: PivotRule,
    pub max_iters: Option<usize>,
    /// Optional column scan order (a permutation of 0..ncols).
    pub column_order: Option<Vec<usize>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            pivot_rule: PivotRule::DantzigBland,
            max_iters: None,
            column_order: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StandardSolution {
    pub x: Vec<f64>,
    pub duals: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

struct Simplex<'a> {
    lp: &'a StandardLp,
    scan: Vec<usize>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    in_basis: Vec<bool>,
    n: usize,
    iterations: usize,
    degenerate_streak: usize,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a StandardLp, scan: Vec<usize>) -> Self {
        let n = lp.nrows;
        let mut binv = vec![0.0; n * n];
        for i in 0..n {
            binv[i * n + i] = 1.0;
        }
        let basis: Vec<usize> = (0..n).map(|i| lp.ncols + i).collect();
        let mut in_basis = vec![false; lp.ncols + n];
        for &b in &basis {
            in_basis[b] = true;
        }
        Simplex {
            lp,
            scan,
            xb: lp.rhs.clone(),
            basis,
            binv,
            in_basis,
            n,
            iterations: 0,
            degenerate_streak: 0,
        }
    }

    fn col_entries(&self, j: usize) -> ColIter<'_> {
        if j < self.lp.ncols {
            ColIter::Sparse(self.lp.cols[j].iter())
        } else {
            ColIter::Unit(Some(j - self.lp.ncols))
        }
    }

    fn cost(&self, j: usize, phase1: bool) -> f64 {
        if phase1 {
            if j < self.lp.ncols {
                0.0
            } else {
                -1.0
            }
        } else if j < self.lp.ncols {
            self.lp.obj[j]
        } else {
            0.0
        }
    }

    fn row_duals(&self, phase1: bool) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for (k, &b) in self.basis.iter().enumerate() {
            let c = self.cost(b, phase1);
            if c != 0.0 {
                for i in 0..n {
                    y[i] += c * self.binv[k * n + i];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64], phase1: bool) -> f64 {
        let mut d = self.cost(j, phase1);
        for (r, v) in self.col_entries(j) {
            d -= y[r] * v;
        }
        d
    }

    fn direction(&self, j: usize) -> Vec<f64> {
        let n = self.n;
        let mut w = vec![0.0; n];
        for (r, v) in self.col_entries(j) {
            for i in 0..n {
                w[i] += self.binv[i * n + r] * v;
            }
        }
        w
    }

    /// Rebuilds the basis inverse from scratch (Gauss-Jordan with partial
    /// pivoting) and refreshes the basic values.
    fn refactorize(&mut self) -> Result<()> {
        let n = self.n;
        let mut m = vec![0.0; n * 2 * n];
        for (k, &b) in self.basis.iter().enumerate() {
            for (r, v) in self.col_entries(b) {
                m[r * 2 * n + k] = v;
            }
        }
        for i in 0..n {
            m[i * 2 * n + n + i] = 1.0;
        }
        for col in 0..n {
            let mut piv = col;
            let mut best = m[col * 2 * n + col].abs();
            for r in (col + 1)..n {
                let v = m[r * 2 * n + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-13 {
                return Err(Error::Invalid("singular basis during refactorization".into()));
            }
            if piv != col {
                for c in 0..2 * n {
                    m.swap(col * 2 * n + c, piv * 2 * n + c);
                }
            }
            let d = m[col * 2 * n + col];
            for c in 0..2 * n {
                m[col * 2 * n + c] /= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = m[r * 2 * n + col];
                if f != 0.0 {
                    for c in 0..2 * n {
                        m[r * 2 * n + c] -= f * m[col * 2 * n + c];
                    }
                }
            }
        }
        // The inverse maps rows of B; basis position k corresponds to row k.
        for k in 0..n {
            for i in 0..n {
                self.binv[k * n + i] = m[k * 2 * n + n + i];
            }
        }
        self.recompute_xb();
        Ok(())
    }

    fn recompute_xb(&mut self) {
        let n = self.n;
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                s += self.binv[k * n + i] * self.lp.rhs[i];
            }
            self.xb[k] = s;
        }
    }

    /// ||B x_B - rhs||_inf computed from the sparse basis columns.
    fn primal_drift(&self) -> f64 {
        let mut res = self.lp.rhs.clone();
        for (k, &b) in self.basis.iter().enumerate() {
            let xv = self.xb[k];
            if xv != 0.0 {
                for (r, v) in self.col_entries(b) {
                    res[r] -= v * xv;
                }
            }
        }
        res.iter().fold(0.0f64, |m, r| m.max(r.abs()))
    }

    fn pivot(&mut self, entering: usize, row: usize, w: &[f64]) {
        let n = self.n;
        let wr = w[row];
        let t = self.xb[row] / wr;
        for i in 0..n {
            if i != row {
                self.xb[i] -= t * w[i];
                if self.xb[i].abs() < 1e-15 {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[row] = t;
        let inv = 1.0 / wr;
        for c in 0..n {
            self.binv[row * n + c] *= inv;
        }
        for i in 0..n {
            if i == row {
                continue;
            }
            let f = w[i];
            if f != 0.0 {
                for c in 0..n {
                    self.binv[i * n + c] -= f * self.binv[row * n + c];
                }
            }
        }
        self.in_basis[self.basis[row]] = false;
        self.in_basis[entering] = true;
        self.basis[row] = entering;
        if t <= 1e-12 {
            self.degenerate_streak += 1;
        } else {
            self.degenerate_streak = 0;
        }
    }

    fn choose_entering(&self, y: &[f64], phase1: bool, rule: PivotRule) -> Option<usize> {
        let bland = matches!(rule, PivotRule::Bland) || self.degenerate_streak > 64;
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.scan {
            if self.in_basis[j] {
                continue;
            }
            let d = self.reduced_cost(j, y, phase1);
            if d > TOL_OPT {
                if bland {
                    return Some(j);
                }
                match best {
                    Some((_, bd)) if bd >= d => {}
                    _ => best = Some((j, d)),
                }
            }
        }
        best.map(|(j, _)| j)
    }

    /// Min-ratio test. Ties go to the smallest basis variable id (Bland).
    /// In phase 2, any leftover zero-level artificial crossed by the
    /// direction is forced out first to keep the equalities exact.
    fn choose_leaving(&self, w: &[f64], phase2: bool) -> Option<usize> {
        if phase2 {
            for (i, &wv) in w.iter().enumerate() {
                if self.basis[i] >= self.lp.ncols && wv.abs() > TOL_PIVOT {
                    return Some(i);
                }
            }
        }
        let mut best_t = f64::INFINITY;
        let mut best_row: Option<usize> = None;
        for (i, &wv) in w.iter().enumerate() {
            if wv > TOL_PIVOT {
                let t = self.xb[i] / wv;
                let better = match best_row {
                    None => true,
                    Some(r) => {
                        t < best_t - 1e-12 || (t < best_t + 1e-12 && self.basis[i] < self.basis[r])
                    }
                };
                if better {
                    best_t = t.min(best_t);
                    best_row = Some(i);
                }
            }
        }
        best_row
    }

    fn run_phase(&mut self, phase1: bool, opts: &SolveOptions, limit: usize) -> Result<()> {
        loop {
            if self.iterations >= limit {
                return Err(Error::IterationLimit(limit));
            }
            self.iterations += 1;
            if self.iterations % 512 == 0 && self.primal_drift() > 1e-11 {
                self.refactorize()?;
            }
            let y = self.row_duals(phase1);
            let entering = match self.choose_entering(&y, phase1, opts.pivot_rule) {
                Some(j) => j,
                None => return Ok(()),
            };
            let w = self.direction(entering);
            let leaving = match self.choose_leaving(&w, !phase1) {
                Some(r) => r,
                None => {
                    if phase1 {
                        return Err(Error::Invalid("phase-1 LP unbounded".into()));
                    }
                    return Err(Error::Invalid("LP objective is unbounded".into()));
                }
            };
            self.pivot(entering, leaving, &w);
        }
    }
}

enum ColIter<'a> {
    Sparse(std::slice::Iter<'a, (usize, f64)>),
    Unit(Option<usize>),
}

impl<'a> Iterator for ColIter<'a> {
    type Item = (usize, f64);
    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            ColIter::Sparse(it) => it.next().copied(),
            ColIter::Unit(r) => r.take().map(|row| (row, 1.0)),
        }
    }
}

/// Two-phase revised simplex on a standard-form LP.
pub fn solve_standard(lp: &StandardLp, opts: &SolveOptions) -> Result<StandardSolution> {
    debug_assert!(lp.rhs.iter().all(|&b| b >= 0.0));
    let scan: Vec<usize> = match &opts.column_order {
        Some(order) => {
            debug_assert_eq!(order.len(), lp.ncols);
            order.clone()
        }
        None => (0..lp.ncols).collect(),
    };
    let limit = opts.max_iters.unwrap_or(50 * (lp.nrows + lp.ncols));
    let mut s = Simplex::new(lp, scan);

    s.run_phase(true, opts, limit)?;
    let infeas: f64 = s
        .basis
        .iter()
        .zip(&s.xb)
        .filter(|&(&b, _)| b >= lp.ncols)
        .map(|(_, &x)| x.max(0.0))
        .sum();
    if infeas > 1e-7 {
        return Err(Error::Infeasible { residual: infeas });
    }

    s.run_phase(false, opts, limit)?;
    s.refactorize()?;

    // One step of iterative refinement on the basic values.
    {
        let mut res = lp.rhs.clone();
        for (k, &b) in s.basis.iter().enumerate() {
            let xv = s.xb[k];
            for (r, v) in s.col_entries(b) {
                res[r] -= v * xv;
            }
        }
        let n = s.n;
        for k in 0..n {
            let mut corr = 0.0;
            for i in 0..n {
                corr += s.binv[k * n + i] * res[i];
            }
            s.xb[k] += corr;
        }
    }

    let mut x = vec![0.0; lp.ncols];
    for (k, &b) in s.basis.iter().enumerate() {
        if b < lp.ncols {
            x[b] = s.xb[k];
        }
    }
    let duals = s.row_duals(false);
    let value = x
        .iter()
        .zip(&lp.obj)
        .map(|(xi, ci)| xi * ci)
        .sum();
    Ok(StandardSolution {
        x,
        duals,
        value,
        iterations: s.iterations,
    })
}

/// The built primal instance, with the action/column bookkeeping needed
/// to map solutions and duals back to the problem grids.
#[derive(Debug, Clone)]
pub struct PersuasionLp {
    pub lp: StandardLp,
    /// Indices into `problem.a_grid` of the actions kept after dropping
    /// columns whose u(a,·) has strictly constant sign.
    pub kept_actions: Vec<usize>,
    /// Per kept action: 1/max_θ|u(a,θ)|, the obedience-row scale.
    pub row_scale: Vec<f64>,
    pub n_states: usize,
    pub var_cap: usize,
}

/// Builds (P)(P1)(P2) on the problem grids.
///
/// Obedience rows are scaled by 1/max_θ|u(a,θ)| to condition the basis;
/// duals are unscaled on return. Actions whose u has strictly constant
/// sign over the θ-grid can never carry mass and are dropped.
pub fn build_primal(problem: &DiscreteProblem) -> Result<PersuasionLp> {
    build_primal_capped(problem, DEFAULT_VAR_CAP)
}

pub fn build_primal_capped(problem: &DiscreteProblem, cap: usize) -> Result<PersuasionLp> {
    let m = problem.n_actions();
    let n = problem.n_states();
    if m * n > cap {
        return Err(Error::GridTooLarge { vars: m * n, cap });
    }
    let model = &problem.model;
    let mut kept_actions = Vec::new();
    let mut row_scale = Vec::new();
    for (i, &a) in problem.a_grid.iter().enumerate() {
        let mut umin = f64::INFINITY;
        let mut umax = f64::NEG_INFINITY;
        let mut uabs: f64 = 0.0;
        for &th in &problem.theta_grid {
            let u = model.u(a, th);
            umin = umin.min(u);
            umax = umax.max(u);
            uabs = uabs.max(u.abs());
        }
        if umin > 0.0 || umax < 0.0 {
            continue;
        }
        kept_actions.push(i);
        row_scale.push(if uabs > 0.0 { 1.0 / uabs } else { 1.0 });
    }
    let mk = kept_actions.len();
    if mk == 0 {
        return Err(Error::Infeasible { residual: 1.0 });
    }
    let nrows = n + mk;
    let ncols = mk * n;
    let mut cols = Vec::with_capacity(ncols);
    let mut obj = Vec::with_capacity(ncols);
    for (pos, &ai) in kept_actions.iter().enumerate() {
        let a = problem.a_grid[ai];
        let s = row_scale[pos];
        for (j, &th) in problem.theta_grid.iter().enumerate() {
            let u = model.u(a, th);
            let mut col = Vec::with_capacity(2);
            col.push((j, 1.0));
            if u != 0.0 {
                col.push((n + pos, u * s));
            }
            cols.push(col);
            obj.push(model.big_v(a, th));
        }
    }
    let mut rhs = problem.prior_mass.clone();
    rhs.extend(std::iter::repeat(0.0).take(mk));
    Ok(PersuasionLp {
        lp: StandardLp {
            nrows,
            ncols,
            cols,
            obj,
            rhs,
        },
        kept_actions,
        row_scale,
        n_states: n,
        var_cap: cap,
    })
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: f64,
    pub outcome: Outcome,
    /// Dual prices on the θ-grid (the discrete price function p).
    pub dual_row_prices: Vec<f64>,
    /// Dual multipliers on the a-grid, unscaled; entries for dropped
    /// actions are 0 and flagged off in `action_kept`.
    pub dual_obedience: Vec<f64>,
    pub action_kept: Vec<bool>,
    pub status: LpStatus,
    pub iterations: usize,
}

/// Solves the built primal and recovers basis-exact duals.
pub fn solve_lp(problem: &DiscreteProblem, built: &PersuasionLp) -> Result<LpSolution> {
    solve_lp_with(problem, built, &SolveOptions::default())
}

pub fn solve_lp_with(
    problem: &DiscreteProblem,
    built: &PersuasionLp,
    opts: &SolveOptions,
) -> Result<LpSolution> {
    let n = built.n_states;
    let sol = solve_standard(&built.lp, opts)?;
    let mut outcome = Outcome::new(problem.a_grid.clone(), problem.theta_grid.clone());
    for (pos, &ai) in built.kept_actions.iter().enumerate() {
        for j in 0..n {
            let xv = sol.x[pos * n + j];
            if xv > MASS_FLOOR {
                outcome.push(ai, j, xv);
            }
        }
    }
    let dual_row_prices = sol.duals[..n].to_vec();
    let mut dual_obedience = vec![0.0; problem.n_actions()];
    let mut action_kept = vec![false; problem.n_actions()];
    for (pos, &ai) in built.kept_actions.iter().enumerate() {
        dual_obedience[ai] = -sol.duals[n + pos] * built.row_scale[pos];
        action_kept[ai] = true;
    }
    Ok(LpSolution {
        value: sol.value,
        outcome,
        dual_row_prices,
        dual_obedience,
        action_kept,
        status: LpStatus::Optimal,
        iterations: sol.iterations,
    })
}

/// |primal value − Σ_θ p(θ)·prior(θ)|, the discrete strong-duality gap.
pub fn duality_gap(problem: &DiscreteProblem, sol: &LpSolution) -> f64 {
    let dual_value: f64 = sol
        .dual_row_prices
        .iter()
        .zip(&problem.prior_mass)
        .map(|(p, m)| p * m)
        .sum();
    (sol.value - dual_value).abs()
}

/// Σ V(a,θ)·mass over the outcome's support.
pub fn value_under(outcome: &Outcome, model: &PreferenceModel) -> f64 {
    outcome
        .entries
        .iter()
        .map(|&(ai, ti, m)| m * model.big_v(outcome.a_values[ai], outcome.theta_values[ti]))
        .sum()
}

/// Worst per-row violation of (P1) (absolute) and (P2) (relative to
/// max|u| per action), for feasibility audits.
pub fn feasibility_residuals(problem: &DiscreteProblem, outcome: &Outcome) -> (f64, f64) {
    let marg = outcome.theta_marginal();
    let mut p1: f64 = 0.0;
    for (j, &m) in problem.prior_mass.iter().enumerate() {
        p1 = p1.max((marg[j] - m).abs());
    }
    let mut p2: f64 = 0.0;
    let mut per_action: std::collections::BTreeMap<usize, f64> = Default::default();
    for &(ai, ti, m) in &outcome.entries {
        let a = outcome.a_values[ai];
        let th = outcome.theta_values[ti];
        *per_action.entry(ai).or_insert(0.0) += m * problem.model.u(a, th);
    }
    for (ai, r) in per_action {
        let a = outcome.a_values[ai];
        let uabs = problem
            .theta_grid
            .iter()
            .fold(0.0f64, |mx, &th| mx.max(problem.model.u(a, th).abs()))
            .max(1e-30);
        p2 = p2.max(r.abs() / uabs);
    }
    (p1, p2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PreferenceModel;
    use crate::prior::Prior;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn e1_problem(m_actions: usize) -> DiscreteProblem {
        let model = Arc::new(PreferenceModel::simple(
            |a| if a < 0.5 { 0.0 } else { (a - 0.5) * (a - 0.5) },
            |a| if a < 0.5 { 0.0 } else { 2.0 * (a - 0.5) },
        ));
        let prior =
            Prior::atoms(vec![(0.0, 1.0 / 3.0), (0.5, 1.0 / 3.0), (1.0, 1.0 / 3.0)]).unwrap();
        DiscreteProblem::from_prior(model, &prior, m_actions, 0).unwrap()
    }

    #[test]
    fn build_counts_toy() {
        let model = Arc::new(PreferenceModel::simple(|a| a, |_| 1.0));
        let prior = Prior::atoms(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let p = DiscreteProblem::new(
            model,
            vec![0.25, 0.75],
            vec![0.0, 1.0],
            vec![0.5, 0.5],
        )
        .unwrap();
        let _ = prior;
        let built = build_primal(&p).unwrap();
        assert_eq!(built.lp.ncols, 4);
        assert_eq!(built.lp.nrows, 4);
    }

    #[test]
    fn build_counts_e1() {
        let built = build_primal(&e1_problem(101)).unwrap();
        assert_eq!(built.lp.ncols, 303);
        assert_eq!(built.lp.nrows, 104);
    }

    #[test]
    fn grid_cap_enforced() {
        let p = e1_problem(101);
        assert!(matches!(
            build_primal_capped(&p, 100),
            Err(Error::GridTooLarge { .. })
        ));
    }

    #[test]
    fn e1_value_is_one_twelfth() {
        let p = e1_problem(101);
        let built = build_primal(&p).unwrap();
        let sol = solve_lp(&p, &built).unwrap();
        assert_abs_diff_eq!(sol.value, 1.0 / 12.0, epsilon = 1e-8);
        assert!(duality_gap(&p, &sol) <= 1e-8);
        let (p1, p2) = feasibility_residuals(&p, &sol.outcome);
        assert!(p1 <= 1e-9, "P1 residual {p1}");
        assert!(p2 <= 1e-9, "P2 residual {p2}");
        // Basic solutions have at most rows-many nonzeros.
        assert!(sol.outcome.support_size() <= built.lp.nrows);
    }

    #[test]
    fn no_disclosure_single_action() {
        // m = 1 at a*(φ) = 0.5: the only feasible outcome is no disclosure.
        let model = Arc::new(PreferenceModel::simple(|a| a * a, |a| 2.0 * a));
        let p = DiscreteProblem::new(
            model.clone(),
            vec![0.5],
            vec![0.0, 1.0],
            vec![0.5, 0.5],
        )
        .unwrap();
        let built = build_primal(&p).unwrap();
        let sol = solve_lp(&p, &built).unwrap();
        assert_abs_diff_eq!(sol.value, 0.25, epsilon = 1e-10);
    }

    #[test]
    fn infeasible_when_no_action_balances() {
        // Single action with u > 0 at every node: every column dropped.
        let model = Arc::new(PreferenceModel::simple(|a| a, |_| 1.0));
        let p = DiscreteProblem::new(model, vec![0.1], vec![0.5, 1.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            build_primal(&p).err(),
            Some(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn permuted_columns_same_value() {
        let p = e1_problem(41);
        let built = build_primal(&p).unwrap();
        let base = solve_lp(&p, &built).unwrap();
        let ncols = built.lp.ncols;
        let order: Vec<usize> = (0..ncols).rev().collect();
        let permuted = solve_lp_with(
            &p,
            &built,
            &SolveOptions {
                column_order: Some(order),
                ..Default::default()
            },
        )
        .unwrap();
        assert_abs_diff_eq!(base.value, permuted.value, epsilon = 1e-10);
    }

    #[test]
    fn bland_rule_agrees() {
        let p = e1_problem(41);
        let built = build_primal(&p).unwrap();
        let a = solve_lp(&p, &built).unwrap();
        let b = solve_lp_with(
            &p,
            &built,
            &SolveOptions {
                pivot_rule: PivotRule::Bland,
                ..Default::default()
            },
        )
        .unwrap();
        assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-10);
    }

    #[test]
    fn dual_value_matches_primal() {
        let p = e1_problem(101);
        let built = build_primal(&p).unwrap();
        let sol = solve_lp(&p, &built).unwrap();
        let dual: f64 = sol
            .dual_row_prices
            .iter()
            .zip(&p.prior_mass)
            .map(|(pp, m)| pp * m)
            .sum();
        assert_abs_diff_eq!(dual, 1.0 / 12.0, epsilon = 1e-8);
    }
}
