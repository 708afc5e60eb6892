//! Bounded-variable revised simplex.
//!
//! Every row `i` gets a logical variable `s_i = a_i x` whose bounds encode
//! the relation, so the working system is `[A | -I] (x, s) = 0` with bounds
//! on all columns. The initial basis is all logicals. Phase 1 minimizes the
//! sum of bound violations of basic variables and hands over to phase 2 as
//! soon as the basis is feasible; the phase is re-evaluated each iteration
//! so numerical drift falls back to phase 1 on its own.

use crate::lpmodel::{LpProblem, Relation};

use super::lu::{BasisFactor, SparseCol};
use super::{SolveOptions, SolveStatus};

const REFACTOR_INTERVAL: usize = 100;
const STALL_LIMIT: usize = 50;
const PIVOT_TOL: f64 = 1e-9;
const NONBASIC: usize = usize::MAX;

pub(super) struct Outcome {
    pub status: SolveStatus,
    /// Structural values (meaningful for optimal and iteration-limit).
    pub x: Vec<f64>,
    /// Row duals, optimal only.
    pub duals: Option<Vec<f64>>,
    pub iterations: usize,
}

enum Step {
    Flip(f64),
    Pivot { pos: usize, theta: f64, bound: f64 },
    Unbounded,
}

struct Simplex {
    m: usize,
    n: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    obj_scale: f64,
    x: Vec<f64>,
    basis: Vec<usize>,
    pos_of: Vec<usize>,
    factor: BasisFactor,
    ftol: f64,
    otol: f64,
}

pub(super) fn run(lp: &LpProblem, options: &SolveOptions) -> Outcome {
    Simplex::new(lp, options).solve(options.max_iterations)
}

impl Simplex {
    fn new(lp: &LpProblem, options: &SolveOptions) -> Simplex {
        let n = lp.n_variables();
        let m = lp.n_constraints();
        let mut counts = vec![0usize; n + 1];
        for c in lp.constraints() {
            for &(j, _) in &c.coeffs {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let mut fill = counts;
        let nnz = col_start[n];
        let mut col_row = vec![0; nnz];
        let mut col_val = vec![0.0; nnz];
        for (i, c) in lp.constraints().iter().enumerate() {
            for &(j, a) in &c.coeffs {
                col_row[fill[j]] = i;
                col_val[fill[j]] = a;
                fill[j] += 1;
            }
        }

        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        let mut cost = Vec::with_capacity(n + m);
        let obj_scale = lp
            .variables()
            .iter()
            .map(|v| v.cost.abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let obj_scale = if obj_scale > 0.0 && obj_scale.is_finite() { obj_scale } else { 1.0 };
        for v in lp.variables() {
            lower.push(v.lower);
            upper.push(v.upper);
            cost.push(v.cost / obj_scale);
        }
        for c in lp.constraints() {
            let (lo, hi) = match c.relation {
                Relation::Le => (f64::NEG_INFINITY, c.rhs),
                Relation::Ge => (c.rhs, f64::INFINITY),
                Relation::Eq => (c.rhs, c.rhs),
            };
            lower.push(lo);
            upper.push(hi);
            cost.push(0.0);
        }
        let x = (0..n + m)
            .map(|j| {
                if lower[j].is_finite() {
                    lower[j]
                } else if upper[j].is_finite() {
                    upper[j]
                } else {
                    0.0
                }
            })
            .collect();
        let mut pos_of = vec![NONBASIC; n + m];
        let basis: Vec<usize> = (n..n + m).collect();
        for (p, &j) in basis.iter().enumerate() {
            pos_of[j] = p;
        }
        Simplex {
            m,
            n,
            col_start,
            col_row,
            col_val,
            lower,
            upper,
            cost,
            obj_scale,
            x,
            basis,
            pos_of,
            factor: BasisFactor::default(),
            ftol: options.feasibility_tol,
            otol: options.optimality_tol,
        }
    }

    fn sparse_column(&self, j: usize) -> SparseCol {
        if j < self.n {
            let r = self.col_start[j]..self.col_start[j + 1];
            SparseCol {
                idx: self.col_row[r.clone()].to_vec(),
                val: self.col_val[r].to_vec(),
            }
        } else {
            SparseCol {
                idx: vec![j - self.n],
                val: vec![-1.0],
            }
        }
    }

    fn scatter_column(&self, j: usize, out: &mut [f64]) {
        if j < self.n {
            for e in self.col_start[j]..self.col_start[j + 1] {
                out[self.col_row[e]] = self.col_val[e];
            }
        } else {
            out[j - self.n] = -1.0;
        }
    }

    /// `a_j . y` for column `j` of `[A | -I]`.
    fn column_dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            let mut s = 0.0;
            for e in self.col_start[j]..self.col_start[j + 1] {
                s += self.col_val[e] * y[self.col_row[e]];
            }
            s
        } else {
            -y[j - self.n]
        }
    }

    fn nearest_bound(&self, j: usize) -> f64 {
        let (lo, hi, v) = (self.lower[j], self.upper[j], self.x[j]);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => {
                if (v - lo).abs() <= (hi - v).abs() {
                    lo
                } else {
                    hi
                }
            }
            (true, false) => lo,
            (false, true) => hi,
            (false, false) => 0.0,
        }
    }

    /// Factors the current basis, swapping in logicals for columns that
    /// turn out dependent.
    fn refactor(&mut self) {
        loop {
            let cols: Vec<SparseCol> = self.basis.iter().map(|&j| self.sparse_column(j)).collect();
            match BasisFactor::factorize(&cols, self.m) {
                Ok(f) => {
                    self.factor = f;
                    break;
                }
                Err(singular) => {
                    for (&pos, &row) in singular.positions.iter().zip(&singular.rows) {
                        let out = self.basis[pos];
                        self.x[out] = self.nearest_bound(out);
                        self.pos_of[out] = NONBASIC;
                        let logical = self.n + row;
                        self.basis[pos] = logical;
                        self.pos_of[logical] = pos;
                    }
                }
            }
        }
        self.recompute_basics();
    }

    fn recompute_basics(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n + self.m {
            if self.pos_of[j] != NONBASIC || self.x[j] == 0.0 {
                continue;
            }
            let v = self.x[j];
            if j < self.n {
                for e in self.col_start[j]..self.col_start[j + 1] {
                    rhs[self.col_row[e]] -= self.col_val[e] * v;
                }
            } else {
                rhs[j - self.n] += v;
            }
        }
        self.factor.ftran(&mut rhs);
        for (p, &j) in self.basis.iter().enumerate() {
            self.x[j] = rhs[p];
        }
    }

    /// Basis cost vector for the current phase; returns whether any basic
    /// variable is infeasible (phase 1).
    fn phase_costs(&self, cb: &mut [f64]) -> bool {
        let mut infeasible = false;
        for (p, &j) in self.basis.iter().enumerate() {
            let v = self.x[j];
            cb[p] = if v < self.lower[j] - self.ftol {
                infeasible = true;
                -1.0
            } else if v > self.upper[j] + self.ftol {
                infeasible = true;
                1.0
            } else {
                0.0
            };
        }
        if !infeasible {
            for (p, &j) in self.basis.iter().enumerate() {
                cb[p] = self.cost[j];
            }
        }
        infeasible
    }

    /// Picks an entering column and its direction (+1 up, -1 down).
    fn price(&self, y: &[f64], phase1: bool, bland: bool) -> Option<(usize, f64, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n + self.m {
            if self.pos_of[j] != NONBASIC {
                continue;
            }
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo == hi {
                continue;
            }
            let c = if phase1 { 0.0 } else { self.cost[j] };
            let d = c - self.column_dot(j, y);
            let v = self.x[j];
            let dir = if d < -self.otol && v < hi {
                1.0
            } else if d > self.otol && v > lo {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir, d));
            }
            if best.is_none_or(|(_, _, bd)| d.abs() > bd.abs()) {
                best = Some((j, dir, d));
            }
        }
        best
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], bland: bool) -> Step {
        let flip = self.upper[q] - self.lower[q];
        // (position, exact step, bound the leaving variable lands on)
        let mut candidates: Vec<(usize, f64, f64, f64)> = Vec::new();
        let mut theta_max = f64::INFINITY;
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() < PIVOT_TOL {
                continue;
            }
            let j = self.basis[p];
            let r = -dir * a;
            let v = self.x[j];
            let (lo, hi) = (self.lower[j], self.upper[j]);
            let bound = if r > 0.0 {
                if v < lo - self.ftol {
                    lo
                } else if v > hi + self.ftol {
                    continue;
                } else {
                    hi
                }
            } else if v > hi + self.ftol {
                hi
            } else if v < lo - self.ftol {
                continue;
            } else {
                lo
            };
            if !bound.is_finite() {
                continue;
            }
            let exact = ((bound - v) / r).max(0.0);
            let relaxed = ((bound - v) + r.signum() * self.ftol) / r;
            theta_max = theta_max.min(relaxed);
            candidates.push((p, exact, bound, a.abs()));
        }

        if bland {
            let mut best: Option<(usize, f64, f64)> = None;
            for &(p, exact, bound, _) in &candidates {
                let better = match best {
                    None => true,
                    Some((bp, bt, _)) => {
                        exact < bt - 1e-12 || (exact <= bt + 1e-12 && self.basis[p] < self.basis[bp])
                    }
                };
                if better {
                    best = Some((p, exact, bound));
                }
            }
            return match best {
                Some((_, t, _)) if flip <= t => Step::Flip(flip),
                Some((pos, theta, bound)) => Step::Pivot { pos, theta, bound },
                None if flip.is_finite() => Step::Flip(flip),
                None => Step::Unbounded,
            };
        }

        if flip.is_finite() && flip <= theta_max {
            return Step::Flip(flip);
        }
        let mut best: Option<(usize, f64, f64, f64)> = None;
        for &(p, exact, bound, mag) in &candidates {
            if exact > theta_max {
                continue;
            }
            let better = match best {
                None => true,
                Some((bp, _, _, bm)) => mag > bm || (mag == bm && self.basis[p] < self.basis[bp]),
            };
            if better {
                best = Some((p, exact, bound, mag));
            }
        }
        match best {
            Some((pos, theta, bound, _)) => Step::Pivot { pos, theta, bound },
            None => Step::Unbounded,
        }
    }

    fn solve(&mut self, max_iterations: usize) -> Outcome {
        let m = self.m;
        self.refactor();
        let mut iterations = 0;
        let mut stalls = 0;
        let mut dirty = false;
        let mut trouble = 0;
        let mut cb = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        loop {
            if self.factor.n_updates() >= REFACTOR_INTERVAL {
                self.refactor();
                dirty = false;
            }
            let phase1 = self.phase_costs(&mut cb);
            let mut y = cb.clone();
            self.factor.btran(&mut y);
            let bland = stalls >= STALL_LIMIT;
            let Some((q, dir, d)) = self.price(&y, phase1, bland) else {
                if dirty || self.factor.n_updates() > 0 {
                    self.refactor();
                    dirty = false;
                    continue;
                }
                if phase1 {
                    return self.finish(SolveStatus::Infeasible, None, iterations);
                }
                let duals = y.iter().map(|v| v * self.obj_scale).collect();
                return self.finish(SolveStatus::Optimal, Some(duals), iterations);
            };
            if iterations >= max_iterations {
                return self.finish(SolveStatus::IterationLimit, None, iterations);
            }
            iterations += 1;

            alpha.iter_mut().for_each(|a| *a = 0.0);
            self.scatter_column(q, &mut alpha);
            self.factor.ftran(&mut alpha);

            let theta = match self.ratio_test(q, dir, &alpha, bland) {
                Step::Unbounded => {
                    if !phase1 {
                        return self.finish(SolveStatus::Unbounded, None, iterations);
                    }
                    trouble += 1;
                    if trouble > 3 {
                        return self.finish(SolveStatus::IterationLimit, None, iterations);
                    }
                    self.refactor();
                    dirty = false;
                    continue;
                }
                Step::Flip(theta) => {
                    self.shift(&alpha, dir, theta);
                    self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                    dirty = true;
                    theta
                }
                Step::Pivot { pos, theta, bound } => {
                    self.shift(&alpha, dir, theta);
                    self.x[q] += dir * theta;
                    let out = self.basis[pos];
                    self.x[out] = bound;
                    self.pos_of[out] = NONBASIC;
                    self.basis[pos] = q;
                    self.pos_of[q] = pos;
                    self.factor.update(pos, &alpha);
                    dirty = true;
                    if alpha[pos].abs() < 1e-7 {
                        self.refactor();
                        dirty = false;
                    }
                    theta
                }
            };
            if theta * d.abs() <= 1e-12 {
                stalls += 1;
            } else {
                stalls = 0;
            }
        }
    }

    fn shift(&mut self, alpha: &[f64], dir: f64, theta: f64) {
        if theta == 0.0 {
            return;
        }
        for (p, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                self.x[self.basis[p]] -= dir * theta * a;
            }
        }
    }

    fn finish(&self, status: SolveStatus, duals: Option<Vec<f64>>, iterations: usize) -> Outcome {
        Outcome {
            status,
            x: self.x[..self.n].to_vec(),
            duals,
            iterations,
        }
    }
}
