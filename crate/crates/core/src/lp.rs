//! Revised simplex solver for equality-form linear programs
//!
//! ```text
//! minimize / maximize  c^T x   subject to  A x = b,  x >= 0
//! ```
//!
//! Columns of `A` are stored sparsely; the basis inverse is kept as a dense
//! matrix updated by elementary row operations and rebuilt periodically.
//! Pricing is Dantzig's rule (ties to the lowest index) and switches to
//! Bland's rule during long runs of degenerate pivots, which rules out
//! cycling.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// An equality-constrained LP over nonnegative variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    sense: Sense,
    objective: Vec<f64>,
    col_start: Vec<usize>,
    row_index: Vec<usize>,
    values: Vec<f64>,
    rhs: Vec<f64>,
}

impl LinearProgram {
    /// Empty program with `rhs.len()` constraint rows and no columns yet.
    pub fn new(sense: Sense, rhs: Vec<f64>) -> Self {
        Self {
            sense,
            objective: Vec::new(),
            col_start: vec![0],
            row_index: Vec::new(),
            values: Vec::new(),
            rhs,
        }
    }

    /// Appends a variable with objective coefficient `cost` and constraint
    /// entries `(row, value)`. Returns the variable index.
    pub fn add_column(&mut self, cost: f64, entries: &[(usize, f64)]) -> usize {
        for &(r, v) in entries {
            assert!(r < self.rhs.len(), "row {r} out of range");
            if v != 0.0 {
                self.row_index.push(r);
                self.values.push(v);
            }
        }
        self.col_start.push(self.row_index.len());
        self.objective.push(cost);
        self.objective.len() - 1
    }

    pub fn from_dense(sense: Sense, objective: &[f64], a: &[Vec<f64>], rhs: &[f64]) -> Result<Self> {
        if a.len() != rhs.len() {
            return Err(Error::InvalidParameter(format!(
                "{} constraint rows but {} right-hand sides",
                a.len(),
                rhs.len()
            )));
        }
        if let Some(row) = a.iter().find(|r| r.len() != objective.len()) {
            return Err(Error::DimensionMismatch { expected: objective.len(), got: row.len() });
        }
        let mut lp = Self::new(sense, rhs.to_vec());
        for (j, &c) in objective.iter().enumerate() {
            let entries: Vec<(usize, f64)> = a.iter().enumerate().map(|(i, r)| (i, r[j])).collect();
            lp.add_column(c, &entries);
        }
        Ok(lp)
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.col_start[j]..self.col_start[j + 1];
        self.row_index[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    /// Same program with the opposite optimization sense.
    pub fn with_sense(&self, sense: Sense) -> Self {
        Self { sense, ..self.clone() }
    }

    /// `A x - b`.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r: Vec<f64> = self.rhs.iter().map(|b| -b).collect();
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (i, v) in self.column(j) {
                    r[i] += v * xj;
                }
            }
        }
        r
    }

    /// Plain-text tabular dump, one row per constraint, for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let sense = match self.sense {
            Sense::Minimize => "min",
            Sense::Maximize => "max",
        };
        let _ = writeln!(out, "{sense} {} rows x {} cols", self.num_rows(), self.num_cols());
        let _ = write!(out, "{:>6}", "c");
        for c in &self.objective {
            let _ = write!(out, " {c:>10.4}");
        }
        out.push('\n');
        let mut dense = vec![vec![0.0; self.num_cols()]; self.num_rows()];
        for j in 0..self.num_cols() {
            for (i, v) in self.column(j) {
                dense[i][j] += v;
            }
        }
        for (i, row) in dense.iter().enumerate() {
            let _ = write!(out, "{:>6}", format!("r{i}"));
            for v in row {
                let _ = write!(out, " {v:>10.4}");
            }
            let _ = writeln!(out, " = {:.6}", self.rhs[i]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The pivot budget ran out before optimality was proven.
    IterationLimit,
    /// The final basis failed its feasibility or optimality check after
    /// refactoring; the returned point must not be trusted.
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal solution; meaningful only when `status` is `Optimal`.
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
    /// `max_i |(Ax - b)_i|` at the returned point.
    pub primal_residual: f64,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Feasibility tolerance, scaled by `1 + |b|_inf`.
    pub feas_tol: f64,
    /// Smallest admissible pivot magnitude.
    pub pivot_tol: f64,
    /// Reduced-cost tolerance, scaled by `1 + |c|_inf`.
    pub opt_tol: f64,
    /// Pivot budget; `None` picks `20 (m + n) + 10000`.
    pub max_iterations: Option<usize>,
    /// Rebuild the basis inverse from scratch after this many pivots.
    pub refactor_interval: usize,
    /// Consecutive degenerate pivots tolerated before switching to Bland's rule.
    pub degenerate_streak: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-9,
            pivot_tol: 1e-10,
            opt_tol: 1e-11,
            max_iterations: None,
            refactor_interval: 400,
            degenerate_streak: 2000,
        }
    }
}

/// Solves `lp` with default options.
pub fn solve(lp: &LinearProgram) -> LpSolution {
    solve_with(lp, &SolverOptions::default())
}

/// True iff `{x >= 0 : Ax = b}` is nonempty (phase one only).
pub fn feasible(lp: &LinearProgram) -> Result<bool> {
    feasible_with(lp, &SolverOptions::default())
}

pub fn feasible_with(lp: &LinearProgram, opts: &SolverOptions) -> Result<bool> {
    let mut s = Simplex::new(lp, opts);
    match s.phase_one() {
        PhaseOutcome::Done => Ok(s.infeasibility() <= s.feas_tol),
        PhaseOutcome::IterationLimit => Err(Error::IterationLimit(s.iterations)),
        PhaseOutcome::Unbounded => unreachable!("phase one objective is bounded below"),
    }
}

pub fn solve_with(lp: &LinearProgram, opts: &SolverOptions) -> LpSolution {
    let mut s = Simplex::new(lp, opts);
    match s.phase_one() {
        PhaseOutcome::Done => {}
        PhaseOutcome::IterationLimit => return s.finish(LpStatus::IterationLimit),
        PhaseOutcome::Unbounded => unreachable!("phase one objective is bounded below"),
    }
    if s.infeasibility() > s.feas_tol {
        return s.finish(LpStatus::Infeasible);
    }
    s.drive_out_artificials();
    let mut status = match s.phase_two() {
        PhaseOutcome::Done => LpStatus::Optimal,
        PhaseOutcome::Unbounded => LpStatus::Unbounded,
        PhaseOutcome::IterationLimit => LpStatus::IterationLimit,
    };
    if status == LpStatus::Optimal {
        status = s.certify();
    }
    s.finish(status)
}

enum PhaseOutcome {
    Done,
    Unbounded,
    IterationLimit,
}

/// Working state. Variables `0..n` are structural, `n..n+m` artificial.
struct Simplex<'a> {
    lp: &'a LinearProgram,
    m: usize,
    n: usize,
    /// Row signs applied so that every right-hand side is nonnegative.
    row_sign: Vec<f64>,
    b: Vec<f64>,
    /// Minimization costs for the current phase (length n + m).
    cost: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    /// Dense basis inverse, row-major m x m.
    binv: Vec<f64>,
    xb: Vec<f64>,
    /// Simplex multipliers for the current costs, updated after each pivot.
    y: Vec<f64>,
    phase_two: bool,
    iterations: usize,
    since_refactor: usize,
    max_iterations: usize,
    feas_tol: f64,
    pivot_tol: f64,
    opt_tol: f64,
    refactor_interval: usize,
    degenerate_limit: usize,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram, opts: &SolverOptions) -> Self {
        let m = lp.num_rows();
        let n = lp.num_cols();
        let row_sign: Vec<f64> = lp.rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
        let b: Vec<f64> = lp.rhs.iter().zip(&row_sign).map(|(b, s)| b * s).collect();
        let bmax = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let cmax = lp.objective.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let mut in_basis = vec![false; n + m];
        for flag in &mut in_basis[n..] {
            *flag = true;
        }
        Self {
            lp,
            m,
            n,
            row_sign,
            xb: b.clone(),
            y: vec![0.0; m],
            b,
            cost: vec![0.0; n + m],
            basis: (n..n + m).collect(),
            in_basis,
            binv,
            phase_two: false,
            iterations: 0,
            since_refactor: 0,
            max_iterations: opts.max_iterations.unwrap_or(20 * (m + n) + 10_000),
            feas_tol: opts.feas_tol * (1.0 + bmax),
            pivot_tol: opts.pivot_tol,
            opt_tol: opts.opt_tol * (1.0 + cmax),
            refactor_interval: opts.refactor_interval.max(1),
            degenerate_limit: opts.degenerate_streak,
        }
    }

    /// Entries of column `j` (after the row sign flip).
    fn col(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            self.lp.column(j).map(|(i, v)| (i, v * self.row_sign[i])).collect()
        } else {
            vec![(j - self.n, 1.0)]
        }
    }

    fn infeasibility(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.xb)
            .filter(|(&v, _)| v >= self.n)
            .map(|(_, x)| x.max(0.0))
            .sum()
    }

    fn phase_one(&mut self) -> PhaseOutcome {
        for j in 0..self.n {
            self.cost[j] = 0.0;
        }
        for j in self.n..self.n + self.m {
            self.cost[j] = 1.0;
        }
        self.optimize()
    }

    fn phase_two(&mut self) -> PhaseOutcome {
        let sign = match self.lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        for j in 0..self.n {
            self.cost[j] = sign * self.lp.objective[j];
        }
        for j in self.n..self.n + self.m {
            self.cost[j] = 0.0;
        }
        self.phase_two = true;
        self.optimize()
    }

    /// Pivots zero-level artificials out of the basis where some structural
    /// column can replace them; the rest sit on redundant rows.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.n {
                continue;
            }
            let row = &self.binv[r * self.m..(r + 1) * self.m];
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n {
                if self.in_basis[j] {
                    continue;
                }
                let v: f64 = self.lp.column(j).map(|(i, a)| row[i] * a * self.row_sign[i]).sum();
                if v.abs() > 1e-7 && best.map_or(true, |(_, bv)| v.abs() > bv.abs() * 10.0) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                let u = self.ftran(j);
                self.xb[r] = 0.0;
                self.pivot(r, j, &u, 0.0);
            }
        }
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &v) in self.basis.iter().enumerate() {
            let c = self.cost[v];
            if c != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for (yk, bk) in y.iter_mut().zip(row) {
                    *yk += c * bk;
                }
            }
        }
        y
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut u = vec![0.0; m];
        for (k, a) in self.col(j) {
            for i in 0..m {
                u[i] += self.binv[i * m + k] * a;
            }
        }
        u
    }

    fn optimize(&mut self) -> PhaseOutcome {
        let mut degenerate_run = 0usize;
        self.y = self.duals();
        loop {
            if self.iterations >= self.max_iterations {
                return PhaseOutcome::IterationLimit;
            }
            let bland = degenerate_run >= self.degenerate_limit;
            if self.since_refactor == 0 {
                self.y = self.duals();
            }
            let y = std::mem::take(&mut self.y);

            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.n {
                if self.in_basis[j] {
                    continue;
                }
                let mut d = self.cost[j];
                for (i, a) in self.lp.column(j) {
                    d -= y[i] * a * self.row_sign[i];
                }
                if d < -self.opt_tol {
                    match entering {
                        None => entering = Some((j, d)),
                        Some((_, best)) if !bland && d < best => entering = Some((j, d)),
                        _ => {}
                    }
                    if bland {
                        break;
                    }
                }
            }
            let Some((q, dq)) = entering else {
                self.y = y;
                return PhaseOutcome::Done;
            };

            let u = self.ftran(q);
            let leave = self.ratio_test(&u, bland);
            let Some((r, theta)) = leave else {
                self.y = y;
                return PhaseOutcome::Unbounded;
            };

            if theta <= 1e-14 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, q, &u, theta);
            // y += d_q * (row r of the new inverse); a refactor recomputes it
            self.y = y;
            if self.since_refactor != 0 {
                let row = &self.binv[r * self.m..(r + 1) * self.m];
                for (yk, bk) in self.y.iter_mut().zip(row) {
                    *yk += dq * bk;
                }
            }
        }
    }

    /// Leaving row and step length for the entering column `u = B^-1 a_q`.
    ///
    /// Pivots smaller than `pivot_tol` relative to `|u|_inf` are never taken.
    /// Zero-level artificials left on redundant rows block immediately in
    /// phase two. Otherwise Harris' two-pass test picks, among rows whose
    /// ratio is within the feasibility tolerance of the minimum, the largest
    /// pivot; in Bland mode the textbook minimum ratio with lowest-index ties
    /// is used so that the anti-cycling guarantee holds.
    fn ratio_test(&self, u: &[f64], bland: bool) -> Option<(usize, f64)> {
        let umax = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let tol = self.pivot_tol.max(1e-9 * umax);
        if self.phase_two {
            let blocking = (0..self.m)
                .filter(|&i| self.basis[i] >= self.n && u[i].abs() > tol)
                .max_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()));
            if let Some(i) = blocking {
                return Some((i, 0.0));
            }
        }
        let candidates = (0..self.m).filter(|&i| u[i] > tol);
        if bland {
            let mut leave: Option<(usize, f64)> = None;
            for i in candidates {
                let ratio = self.xb[i].max(0.0) / u[i];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                        if (ratio < lr && !tie) || (tie && self.basis[i] < self.basis[li]) {
                            Some((i, ratio.min(lr)))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
            return leave;
        }
        let bound = candidates
            .clone()
            .map(|i| (self.xb[i].max(0.0) + self.feas_tol) / u[i])
            .fold(f64::INFINITY, f64::min);
        if !bound.is_finite() {
            return None;
        }
        let r = candidates
            .filter(|&i| self.xb[i].max(0.0) / u[i] <= bound)
            .max_by(|&a, &b| u[a].total_cmp(&u[b]))?;
        Some((r, self.xb[r].max(0.0) / u[r]))
    }

    fn pivot(&mut self, r: usize, q: usize, u: &[f64], theta: f64) {
        let m = self.m;
        for i in 0..m {
            if i != r {
                self.xb[i] -= theta * u[i];
            }
        }
        self.xb[r] = theta;

        let pr = u[r];
        for k in 0..m {
            self.binv[r * m + k] /= pr;
        }
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (pivot_row, after) = rest.split_at_mut(m);
        for (i, row) in before.chunks_exact_mut(m).enumerate() {
            let f = u[i];
            if f != 0.0 {
                for (a, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *a -= f * p;
                }
            }
        }
        for (off, row) in after.chunks_exact_mut(m).enumerate() {
            let f = u[r + 1 + off];
            if f != 0.0 {
                for (a, p) in row.iter_mut().zip(pivot_row.iter()) {
                    *a -= f * p;
                }
            }
        }

        let old = self.basis[r];
        self.in_basis[old] = false;
        self.in_basis[q] = true;
        self.basis[r] = q;
        self.iterations += 1;
        self.since_refactor += 1;
        if self.since_refactor >= self.refactor_interval {
            self.refactor();
        }
    }

    /// Rebuilds the basis inverse by Gauss-Jordan elimination and recomputes
    /// the basic solution. Keeps the product-form inverse and returns false if
    /// the basis looks numerically singular.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        self.since_refactor = 0;
        let mut mat = vec![0.0; m * m];
        for (c, &v) in self.basis.iter().enumerate() {
            for (i, a) in self.col(v) {
                mat[i * m + c] = a;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&a, &b| mat[a * m + col].abs().total_cmp(&mat[b * m + col].abs()))
                .unwrap();
            let pv = mat[piv * m + col];
            if pv.abs() < 1e-13 {
                return false;
            }
            if piv != col {
                for k in 0..m {
                    mat.swap(piv * m + k, col * m + k);
                    inv.swap(piv * m + k, col * m + k);
                }
            }
            for k in 0..m {
                mat[col * m + k] /= pv;
                inv[col * m + k] /= pv;
            }
            for row in 0..m {
                if row == col {
                    continue;
                }
                let f = mat[row * m + col];
                if f != 0.0 {
                    for k in 0..m {
                        mat[row * m + k] -= f * mat[col * m + k];
                        inv[row * m + k] -= f * inv[col * m + k];
                    }
                }
            }
        }
        // inv now maps original rows to basis positions: B^{-1}
        self.binv = inv;
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            self.xb[i] = row.iter().zip(&self.b).map(|(a, b)| a * b).sum();
        }
        true
    }

    /// Refactors the final basis and checks it from scratch: the basic
    /// solution must be nonnegative and no reduced cost may be negative.
    /// Drift accumulated over long runs is handed back to the optimizer a few
    /// times before giving up.
    fn certify(&mut self) -> LpStatus {
        for _ in 0..4 {
            if !self.refactor() {
                return LpStatus::NumericalFailure;
            }
            if self.xb.iter().any(|&v| v < -self.feas_tol) {
                return LpStatus::NumericalFailure;
            }
            let y = self.duals();
            let priced_out = (0..self.n).filter(|&j| !self.in_basis[j]).all(|j| {
                let d: f64 = self.cost[j]
                    - self.lp.column(j).map(|(i, a)| y[i] * a * self.row_sign[i]).sum::<f64>();
                d >= -self.opt_tol
            });
            if priced_out {
                return LpStatus::Optimal;
            }
            match self.optimize() {
                PhaseOutcome::Done => {}
                PhaseOutcome::Unbounded => return LpStatus::Unbounded,
                PhaseOutcome::IterationLimit => return LpStatus::IterationLimit,
            }
        }
        LpStatus::NumericalFailure
    }

    fn finish(self, status: LpStatus) -> LpSolution {
        let mut x = vec![0.0; self.n];
        for (&v, &val) in self.basis.iter().zip(&self.xb) {
            if v < self.n {
                x[v] = if val < 0.0 && val > -self.feas_tol { 0.0 } else { val };
            }
        }
        let objective_value = x.iter().zip(&self.lp.objective).map(|(a, c)| a * c).sum();
        let primal_residual = self.lp.residual(&x).iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let status = if status == LpStatus::Optimal && primal_residual > self.feas_tol {
            LpStatus::NumericalFailure
        } else {
            status
        };
        LpSolution {
            status,
            x,
            objective_value,
            iterations: self.iterations,
            primal_residual,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimize_sum_on_simplex() {
        let lp = LinearProgram::from_dense(Sense::Minimize, &[1.0, 1.0], &[vec![1.0, 1.0]], &[1.0]).unwrap();
        let s = solve(&lp);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_unbounded() {
        let lp = LinearProgram::from_dense(Sense::Minimize, &[-1.0, 0.0], &[vec![1.0, -1.0]], &[0.0]).unwrap();
        assert_eq!(solve(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn single_transport_cell() {
        // W_1(delta_0, delta_1): one variable, row and column constraints
        let lp = LinearProgram::from_dense(Sense::Minimize, &[1.0], &[vec![1.0], vec![1.0]], &[1.0, 1.0]).unwrap();
        let s = solve(&lp);
        assert!(s.is_optimal());
        assert!((s.objective_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn feasibility_checks() {
        let contradictory = LinearProgram::from_dense(Sense::Minimize, &[0.0], &[vec![1.0], vec![1.0]], &[1.0, 2.0]).unwrap();
        assert!(!feasible(&contradictory).unwrap());
        assert_eq!(solve(&contradictory).status, LpStatus::Infeasible);
        let simplex = LinearProgram::from_dense(Sense::Minimize, &[0.0, 0.0], &[vec![1.0, 1.0]], &[1.0]).unwrap();
        assert!(feasible(&simplex).unwrap());
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // x1 - x2 = -2, x1 + x2 = 4  ->  x = (1, 3)
        let lp = LinearProgram::from_dense(
            Sense::Minimize,
            &[1.0, 0.0],
            &[vec![1.0, -1.0], vec![1.0, 1.0]],
            &[-2.0, 4.0],
        )
        .unwrap();
        let s = solve(&lp);
        assert!(s.is_optimal());
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn maximize_and_minimize_bracket() {
        // x1 + x2 + x3 = 1, objective (3, -1, 2)
        let a = vec![vec![1.0, 1.0, 1.0]];
        let lo = solve(&LinearProgram::from_dense(Sense::Minimize, &[3.0, -1.0, 2.0], &a, &[1.0]).unwrap());
        let hi = solve(&LinearProgram::from_dense(Sense::Maximize, &[3.0, -1.0, 2.0], &a, &[1.0]).unwrap());
        assert!((lo.objective_value + 1.0).abs() < 1e-12);
        assert!((hi.objective_value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        // the second row duplicates the first
        let lp = LinearProgram::from_dense(
            Sense::Minimize,
            &[2.0, 1.0],
            &[vec![1.0, 1.0], vec![2.0, 2.0]],
            &[1.0, 2.0],
        )
        .unwrap();
        let s = solve(&lp);
        assert!(s.is_optimal());
        assert!((s.objective_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let lp = LinearProgram::from_dense(
            Sense::Maximize,
            &[1.0, 2.0, 3.0],
            &[vec![1.0, 1.0, 1.0]],
            &[1.0],
        )
        .unwrap();
        let opts = SolverOptions { max_iterations: Some(0), ..SolverOptions::default() };
        assert_eq!(solve_with(&lp, &opts).status, LpStatus::IterationLimit);
        assert_eq!(feasible_with(&lp, &opts), Err(Error::IterationLimit(0)));
    }

    #[test]
    fn degenerate_transportation_instance_terminates() {
        // 4x4 assignment-like transport with uniform marginals: every basic
        // feasible solution is highly degenerate.
        let n = 4;
        let mut lp = LinearProgram::new(Sense::Minimize, vec![0.25; 2 * n - 1]);
        for i in 0..n {
            for j in 0..n {
                let cost = ((i * 7 + j * 3) % 5) as f64;
                let mut entries = vec![(i, 1.0)];
                if j + 1 < n {
                    entries.push((n + j, 1.0));
                }
                lp.add_column(cost, &entries);
            }
        }
        let s = solve(&lp);
        assert!(s.is_optimal());
        // brute force over the 24 permutations (Birkhoff vertices)
        let mut best = f64::INFINITY;
        let perms = permutations(n);
        for p in perms {
            let c: f64 = (0..n).map(|i| ((i * 7 + p[i] * 3) % 5) as f64 * 0.25).sum();
            best = best.min(c);
        }
        assert!((s.objective_value - best).abs() < 1e-12);
    }

    #[test]
    fn bland_only_pricing_terminates_on_beale_example() {
        // Beale's classic cycling example under Dantzig pricing without
        // anti-cycling, written in equality form with slacks.
        let a = vec![
            vec![0.25, -60.0, -1.0 / 25.0, 9.0, 1.0, 0.0, 0.0],
            vec![0.5, -90.0, -1.0 / 50.0, 3.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        ];
        let c = [-0.75, 150.0, -1.0 / 50.0, 6.0, 0.0, 0.0, 0.0];
        let lp = LinearProgram::from_dense(Sense::Minimize, &c, &a, &[0.0, 0.0, 1.0]).unwrap();
        for streak in [0, 1, 50, SolverOptions::default().degenerate_streak] {
            let opts = SolverOptions { degenerate_streak: streak, ..SolverOptions::default() };
            let s = solve_with(&lp, &opts);
            assert!(s.is_optimal());
            assert!((s.objective_value + 0.05).abs() < 1e-12, "{}", s.objective_value);
        }
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for k in 0..=p.len() {
                let mut q = p.clone();
                q.insert(k, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn dump_lists_every_row() {
        let lp = LinearProgram::from_dense(Sense::Minimize, &[1.0, 2.0], &[vec![1.0, 1.0], vec![1.0, 0.0]], &[1.0, 0.5]).unwrap();
        let d = lp.dump();
        assert!(d.starts_with("min 2 rows x 2 cols"));
        assert_eq!(d.lines().count(), 4);
    }
}
