//! Bounded-variable revised simplex.
//!
//! Every row `i` of the model gets a logical variable `s_i` so that the
//! constraint system becomes `A x - s = 0` with `lower <= (x, s) <= upper`.
//! The basis is held as a sparse LU factorisation with product-form updates,
//! refactored every few dozen pivots.
//!
//! Two algorithms share the state:
//! - a primal simplex (composite phase 1, then phase 2) with Dantzig pricing
//!   and a switch to Bland's rule after a run of degenerate pivots;
//! - a dual simplex used when the current basis is dual feasible, which is
//!   always the case after a bound change in branch-and-bound.

use std::time::Instant;

use crate::factor::BasisFactor;
use crate::model::{MilpModel, Relation, Sense};

pub(crate) const PRIMAL_TOL: f64 = 1e-7;
pub(crate) const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-14;
const REFRESH_EVERY: usize = 100;
const REINVERT_EVERY: usize = 80;
const DEGENERATE_RUN_FOR_BLAND: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    TimeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

/// Column-compressed and row-compressed copies of the structural matrix.
#[derive(Debug, Clone)]
struct SparseMatrix {
    rows: usize,
    cols: usize,
    col_start: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,
    row_start: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<f64>,
}

impl SparseMatrix {
    fn from_model(model: &MilpModel) -> Self {
        let rows = model.num_constraints();
        let cols = model.num_vars();
        let mut row_start = Vec::with_capacity(rows + 1);
        let mut row_cols = Vec::new();
        let mut row_vals = Vec::new();
        let mut col_count = vec![0usize; cols];
        row_start.push(0);
        for c in model.constraints() {
            for &(v, a) in c.expr.terms() {
                row_cols.push(v.0);
                row_vals.push(a);
                col_count[v.0] += 1;
            }
            row_start.push(row_cols.len());
        }
        let mut col_start = vec![0usize; cols + 1];
        for j in 0..cols {
            col_start[j + 1] = col_start[j] + col_count[j];
        }
        let mut fill = col_start.clone();
        let mut col_rows = vec![0usize; row_cols.len()];
        let mut col_vals = vec![0.0; row_cols.len()];
        for i in 0..rows {
            for k in row_start[i]..row_start[i + 1] {
                let j = row_cols[k];
                col_rows[fill[j]] = i;
                col_vals[fill[j]] = row_vals[k];
                fill[j] += 1;
            }
        }
        SparseMatrix { rows, cols, col_start, col_rows, col_vals, row_start, row_cols, row_vals }
    }

    fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.col_start[j]..self.col_start[j + 1];
        self.col_rows[r.clone()].iter().copied().zip(self.col_vals[r].iter().copied())
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_start[i]..self.row_start[i + 1];
        self.row_cols[r.clone()].iter().copied().zip(self.row_vals[r].iter().copied())
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Simplex {
    a: SparseMatrix,
    m: usize,
    n: usize,
    /// Minimisation costs for structurals followed by zeros for logicals.
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    state: Vec<VarState>,
    /// Basic variable at each basis position.
    basis: Vec<usize>,
    /// Basis position of each variable (`usize::MAX` when nonbasic).
    position: Vec<usize>,
    x: Vec<f64>,
    d: Vec<f64>,
    factor: BasisFactor,
    pivots_since_refresh: usize,
    pub(crate) iterations: u64,
    // scratch buffers
    alpha: Vec<f64>,
    alpha_touched: Vec<usize>,
    column: Vec<f64>,
    rho: Vec<f64>,
    tau: Vec<f64>,
    /// Dual steepest-edge weights, one per basis position.
    weights: Vec<f64>,
}

impl Simplex {
    pub(crate) fn from_model(model: &MilpModel) -> Self {
        let a = SparseMatrix::from_model(model);
        let m = a.rows;
        let n = a.cols;
        let flip = if model.objective().sense == Sense::Maximize { -1.0 } else { 1.0 };
        let mut cost = vec![0.0; n + m];
        for &(v, c) in model.objective().expr.terms() {
            cost[v.0] = flip * c;
        }
        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        for v in model.variables() {
            lower.push(v.lower);
            upper.push(v.upper);
        }
        for c in model.constraints() {
            let (lo, hi) = match c.relation {
                Relation::Le => (f64::NEG_INFINITY, c.rhs),
                Relation::Ge => (c.rhs, f64::INFINITY),
                Relation::Eq => (c.rhs, c.rhs),
            };
            lower.push(lo);
            upper.push(hi);
        }
        let mut s = Simplex {
            a,
            m,
            n,
            cost,
            lower,
            upper,
            state: vec![VarState::AtLower; n + m],
            basis: (n..n + m).collect(),
            position: vec![usize::MAX; n + m],
            x: vec![0.0; n + m],
            d: vec![0.0; n + m],
            factor: BasisFactor::negative_identity(m),
            pivots_since_refresh: 0,
            iterations: 0,
            alpha: vec![0.0; n + m],
            alpha_touched: Vec::new(),
            column: vec![0.0; m],
            rho: vec![0.0; m],
            tau: vec![0.0; m],
            weights: vec![1.0; m],
        };
        for (r, &j) in s.basis.iter().enumerate() {
            s.position[j] = r;
            s.state[j] = VarState::Basic;
        }
        for j in 0..n {
            let st = s.preferred_nonbasic_state(j, s.cost[j]);
            s.state[j] = st;
        }
        s.refresh();
        s
    }

    /// Minimisation objective of the current point.
    pub(crate) fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.x[..self.n]
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::Free => 0.0,
            VarState::Basic => self.x[j],
        }
    }

    /// Nonbasic placement that makes reduced cost `dj` dual feasible when possible.
    fn preferred_nonbasic_state(&self, j: usize, dj: f64) -> VarState {
        let lo = self.lower[j].is_finite();
        let hi = self.upper[j].is_finite();
        match (lo, hi) {
            (false, false) => VarState::Free,
            (true, false) => VarState::AtLower,
            (false, true) => VarState::AtUpper,
            (true, true) => {
                if dj < 0.0 {
                    VarState::AtUpper
                } else {
                    VarState::AtLower
                }
            }
        }
    }

    /// Change the bounds of a structural variable, keeping the basis.
    pub(crate) fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
        if self.state[j] != VarState::Basic {
            let st = if self.d[j] > DUAL_TOL {
                if lower.is_finite() { VarState::AtLower } else { self.preferred_nonbasic_state(j, self.d[j]) }
            } else if self.d[j] < -DUAL_TOL {
                if upper.is_finite() { VarState::AtUpper } else { self.preferred_nonbasic_state(j, self.d[j]) }
            } else {
                match self.state[j] {
                    VarState::AtUpper if upper.is_finite() => VarState::AtUpper,
                    _ => self.preferred_nonbasic_state(j, 0.0),
                }
            };
            self.state[j] = st;
            self.x[j] = self.nonbasic_value(j);
        }
    }

    /// Recompute basic values from the nonbasic ones after bound changes.
    pub(crate) fn recompute_primal(&mut self) {
        let m = self.m;
        let mut w = vec![0.0; m];
        for j in 0..self.n + m {
            if self.state[j] == VarState::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            self.x[j] = v;
            if v == 0.0 {
                continue;
            }
            if j < self.n {
                for (i, a) in self.a.col(j) {
                    w[i] += a * v;
                }
            } else {
                w[j - self.n] -= v;
            }
        }
        // x_B = -B^{-1} w
        self.factor.ftran(&mut w);
        for r in 0..m {
            self.x[self.basis[r]] = -w[r];
        }
    }

    /// `y = B^{-T} c_B` for the given costs.
    fn duals_for(&mut self, costs: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.basis.iter().map(|&j| costs[j]).collect();
        self.factor.btran(&mut y);
        y
    }

    fn recompute_duals(&mut self) {
        let m = self.m;
        let y = self.duals_for(&self.cost.clone());
        for j in 0..self.n {
            if self.state[j] == VarState::Basic {
                self.d[j] = 0.0;
                continue;
            }
            let mut s = self.cost[j];
            for (i, a) in self.a.col(j) {
                s -= y[i] * a;
            }
            self.d[j] = s;
        }
        for i in 0..m {
            let j = self.n + i;
            self.d[j] = if self.state[j] == VarState::Basic { 0.0 } else { y[i] };
        }
    }

    fn refresh(&mut self) {
        self.recompute_primal();
        self.recompute_duals();
        self.pivots_since_refresh = 0;
    }

    /// Refactor the basis. Dependent basic columns are swapped for the
    /// logicals of the rows left without a pivot; returns false in that case.
    fn reinvert(&mut self) -> bool {
        let cols: Vec<Vec<(usize, f64)>> = self
            .basis
            .iter()
            .map(|&j| if j < self.n { self.a.col(j).collect() } else { vec![(j - self.n, -1.0)] })
            .collect();
        self.pivots_since_refresh = self.pivots_since_refresh.max(REFRESH_EVERY);
        let Err(sing) = self.factor.factorize(&cols) else {
            return true;
        };
        for (&pos, &row) in sing.positions.iter().zip(&sing.rows) {
            let old = self.basis[pos];
            self.position[old] = usize::MAX;
            self.state[old] = self.preferred_nonbasic_state(old, self.d[old]);
            let lj = self.n + row;
            self.basis[pos] = lj;
            self.position[lj] = pos;
            self.state[lj] = VarState::Basic;
            self.weights[pos] = 1.0;
        }
        let cols: Vec<Vec<(usize, f64)>> = self
            .basis
            .iter()
            .map(|&j| if j < self.n { self.a.col(j).collect() } else { vec![(j - self.n, -1.0)] })
            .collect();
        if self.factor.factorize(&cols).is_err() {
            self.reset_to_slack_basis();
        }
        false
    }

    /// Periodic refactor and refresh; returns false when the basis had to be repaired.
    fn maintenance(&mut self) -> bool {
        let mut intact = true;
        if self.factor.num_updates() >= REINVERT_EVERY {
            intact = self.reinvert();
            self.refresh();
        } else if self.pivots_since_refresh >= REFRESH_EVERY {
            self.refresh();
        }
        intact
    }

    fn reset_to_slack_basis(&mut self) {
        let (n, m) = (self.n, self.m);
        for j in 0..n + m {
            self.position[j] = usize::MAX;
        }
        for r in 0..m {
            self.basis[r] = n + r;
            self.position[n + r] = r;
            self.state[n + r] = VarState::Basic;
        }
        for j in 0..n {
            self.state[j] = self.preferred_nonbasic_state(j, self.cost[j]);
        }
        self.factor = BasisFactor::negative_identity(m);
        self.weights.iter_mut().for_each(|w| *w = 1.0);
    }

    /// `column = B^{-1} a_j`.
    fn ftran(&mut self, j: usize) {
        self.column.iter_mut().for_each(|v| *v = 0.0);
        if j < self.n {
            for (i, a) in self.a.col(j) {
                self.column[i] = a;
            }
        } else {
            self.column[j - self.n] = -1.0;
        }
        self.factor.ftran(&mut self.column);
    }

    /// `alpha_j = (B^{-1})_r a_j` for every nonbasic `j`; touched indices are recorded.
    fn pivot_row(&mut self, r: usize) {
        let m = self.m;
        for &j in &self.alpha_touched {
            self.alpha[j] = 0.0;
        }
        self.alpha_touched.clear();
        self.rho.iter_mut().for_each(|v| *v = 0.0);
        self.rho[r] = 1.0;
        self.factor.btran(&mut self.rho);
        for k in 0..m {
            let rho = self.rho[k];
            if rho.abs() <= DROP_TOL {
                continue;
            }
            let lj = self.n + k;
            if self.alpha[lj] == 0.0 {
                self.alpha_touched.push(lj);
            }
            self.alpha[lj] -= rho;
            for (j, a) in self.a.row(k) {
                if self.alpha[j] == 0.0 {
                    self.alpha_touched.push(j);
                }
                self.alpha[j] += rho * a;
            }
        }
    }

    /// Steepest-edge weight update for a pivot on row `r`; needs `rho` and `column`.
    fn update_weights(&mut self, r: usize) {
        let wr: f64 = self.rho.iter().map(|v| v * v).sum();
        self.tau.copy_from_slice(&self.rho);
        self.factor.ftran(&mut self.tau);
        let piv = self.column[r];
        for i in 0..self.m {
            let c = self.column[i];
            if i == r || c == 0.0 {
                continue;
            }
            let ratio = c / piv;
            let w = self.weights[i] + ratio * (ratio * wr - 2.0 * self.tau[i]);
            self.weights[i] = w.max(1e-4);
        }
        self.weights[r] = (wr / (piv * piv)).max(1e-4);
    }

    /// Replace the basic variable at position `r` by `q`, using `self.column`.
    fn update_inverse(&mut self, r: usize) {
        self.factor.update(r, &self.column);
        self.pivots_since_refresh += 1;
    }

    fn is_dual_feasible(&self) -> bool {
        (0..self.n + self.m).all(|j| match self.state[j] {
            VarState::Basic => true,
            VarState::AtLower => self.lower[j] == self.upper[j] || self.d[j] >= -DUAL_TOL * 10.0,
            VarState::AtUpper => self.lower[j] == self.upper[j] || self.d[j] <= DUAL_TOL * 10.0,
            VarState::Free => self.d[j].abs() <= DUAL_TOL * 10.0,
        })
    }

    /// Move boxed nonbasic variables to the bound their reduced cost prefers.
    /// Returns false when some variable cannot be made dual feasible that way.
    fn make_dual_feasible(&mut self) -> bool {
        let mut ok = true;
        for j in 0..self.n + self.m {
            if self.state[j] == VarState::Basic {
                continue;
            }
            let dj = self.d[j];
            let want = if dj > DUAL_TOL {
                VarState::AtLower
            } else if dj < -DUAL_TOL {
                VarState::AtUpper
            } else {
                continue;
            };
            let finite = match want {
                VarState::AtLower => self.lower[j].is_finite(),
                _ => self.upper[j].is_finite(),
            };
            if finite {
                self.state[j] = want;
            } else if self.lower[j] != self.upper[j] {
                ok = false;
            }
        }
        ok
    }

    /// Solve from the current basis: dual simplex when the basis is (or can be
    /// made) dual feasible, primal simplex otherwise.
    pub(crate) fn solve(&mut self, deadline: Option<Instant>, max_iter: u64) -> LpOutcome {
        self.refresh();
        if self.make_dual_feasible() {
            self.recompute_primal();
            match self.dual(deadline, max_iter) {
                LpOutcome::Optimal => {
                    // Dual may finish with tiny dual infeasibilities; polish with primal.
                    self.primal(deadline, max_iter)
                }
                other => other,
            }
        } else {
            self.recompute_primal();
            self.primal(deadline, max_iter)
        }
    }

    pub(crate) fn solve_primal_only(&mut self, deadline: Option<Instant>, max_iter: u64) -> LpOutcome {
        self.refresh();
        self.primal(deadline, max_iter)
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lower[j] - PRIMAL_TOL {
            v - self.lower[j]
        } else if v > self.upper[j] + PRIMAL_TOL {
            v - self.upper[j]
        } else {
            0.0
        }
    }

    pub(crate) fn dual(&mut self, deadline: Option<Instant>, max_iter: u64) -> LpOutcome {
        let start_iter = self.iterations;
        let mut drift_retries = 0usize;
        loop {
            if self.iterations - start_iter >= max_iter {
                return LpOutcome::IterationLimit;
            }
            if self.iterations % 64 == 0 {
                if let Some(dl) = deadline {
                    if Instant::now() >= dl {
                        return LpOutcome::TimeLimit;
                    }
                }
            }
            if !self.maintenance() && !self.make_dual_feasible() {
                self.recompute_primal();
                return self.primal(deadline, max_iter);
            }
            // leaving row by dual steepest edge, lowest position on ties
            let mut r = usize::MAX;
            let mut worst = 0.0;
            for (pos, &j) in self.basis.iter().enumerate() {
                let inf = self.infeasibility(j);
                if inf != 0.0 {
                    let score = inf * inf / self.weights[pos];
                    if score > worst {
                        worst = score;
                        r = pos;
                    }
                }
            }
            if r == usize::MAX {
                return LpOutcome::Optimal;
            }
            let leaving = self.basis[r];
            let delta = self.infeasibility(leaving);
            self.pivot_row(r);
            // Harris two-pass ratio test
            let mut bound = f64::INFINITY;
            let eligible = |s: &Simplex, j: usize| -> Option<f64> {
                if s.state[j] == VarState::Basic || s.lower[j] == s.upper[j] {
                    return None;
                }
                let a = s.alpha[j];
                if a.abs() <= PIVOT_TOL {
                    return None;
                }
                let ok = match s.state[j] {
                    VarState::AtLower => (delta < 0.0 && a < 0.0) || (delta > 0.0 && a > 0.0),
                    VarState::AtUpper => (delta < 0.0 && a > 0.0) || (delta > 0.0 && a < 0.0),
                    VarState::Free => true,
                    VarState::Basic => false,
                };
                if ok { Some(a) } else { None }
            };
            for &j in &self.alpha_touched {
                if let Some(a) = eligible(self, j) {
                    let t = (self.d[j].abs() + DUAL_TOL) / a.abs();
                    if t < bound {
                        bound = t;
                    }
                }
            }
            if bound == f64::INFINITY {
                return LpOutcome::Infeasible;
            }
            let mut q = usize::MAX;
            let mut best_a = 0.0;
            for &j in &self.alpha_touched {
                if let Some(a) = eligible(self, j) {
                    let t = self.d[j].abs() / a.abs();
                    if t <= bound && (a.abs() > best_a || (a.abs() == best_a && j < q)) {
                        best_a = a.abs();
                        q = j;
                    }
                }
            }
            let alpha_q = self.alpha[q];
            let theta_d = self.d[q] / alpha_q;
            self.ftran(q);
            let piv = self.column[r];
            if (piv - alpha_q).abs() > 1e-6 * (1.0 + alpha_q.abs()) && drift_retries < 2 {
                drift_retries += 1;
                // numerical drift between row and column computations
                let intact = self.reinvert();
                self.refresh();
                if intact {
                    continue;
                }
                if !self.make_dual_feasible() {
                    self.recompute_primal();
                    return self.primal(deadline, max_iter);
                }
                self.recompute_primal();
                continue;
            }
            drift_retries = 0;
            self.update_weights(r);
            // reduced costs
            for &j in &self.alpha_touched {
                if self.state[j] != VarState::Basic {
                    self.d[j] -= theta_d * self.alpha[j];
                }
            }
            self.d[q] = 0.0;
            // primal step
            let theta_p = delta / piv;
            let target = if delta < 0.0 { self.lower[leaving] } else { self.upper[leaving] };
            for i in 0..self.m {
                let c = self.column[i];
                if c != 0.0 {
                    let bj = self.basis[i];
                    self.x[bj] -= theta_p * c;
                }
            }
            self.x[q] += theta_p;
            self.x[leaving] = target;
            self.state[leaving] = if delta < 0.0 { VarState::AtLower } else { VarState::AtUpper };
            self.d[leaving] = -theta_d;
            self.position[leaving] = usize::MAX;
            self.basis[r] = q;
            self.position[q] = r;
            self.state[q] = VarState::Basic;
            self.update_inverse(r);
            self.iterations += 1;
        }
    }

    pub(crate) fn primal(&mut self, deadline: Option<Instant>, max_iter: u64) -> LpOutcome {
        let start_iter = self.iterations;
        let mut degenerate_run = 0usize;
        let mut phase_costs = vec![0.0; self.n + self.m];
        loop {
            if self.iterations - start_iter >= max_iter {
                return LpOutcome::IterationLimit;
            }
            if self.iterations % 64 == 0 {
                if let Some(dl) = deadline {
                    if Instant::now() >= dl {
                        return LpOutcome::TimeLimit;
                    }
                }
            }
            if self.factor.num_updates() >= REINVERT_EVERY {
                self.reinvert();
                self.recompute_primal();
            } else if self.pivots_since_refresh >= REFRESH_EVERY {
                self.recompute_primal();
                self.pivots_since_refresh = 0;
            }
            let phase_one = self.basis.iter().any(|&j| self.infeasibility(j) != 0.0);
            if phase_one {
                phase_costs.iter_mut().for_each(|c| *c = 0.0);
                for &j in &self.basis {
                    let inf = self.infeasibility(j);
                    if inf < 0.0 {
                        phase_costs[j] = -1.0;
                    } else if inf > 0.0 {
                        phase_costs[j] = 1.0;
                    }
                }
                self.reduced_costs_for(&phase_costs);
            } else {
                // phase two uses the real costs; reduced costs are recomputed
                // each iteration so that the primal path stays simple and exact
                let costs = self.cost.clone();
                self.reduced_costs_for(&costs);
            }
            let bland = degenerate_run >= DEGENERATE_RUN_FOR_BLAND;
            let mut q = usize::MAX;
            let mut best = 0.0;
            for j in 0..self.n + self.m {
                let dj = self.d[j];
                let improving = match self.state[j] {
                    VarState::Basic => false,
                    _ if self.lower[j] == self.upper[j] => false,
                    VarState::AtLower => dj < -DUAL_TOL,
                    VarState::AtUpper => dj > DUAL_TOL,
                    VarState::Free => dj.abs() > DUAL_TOL,
                };
                if !improving {
                    continue;
                }
                if bland {
                    q = j;
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    q = j;
                }
            }
            if q == usize::MAX {
                return if phase_one { LpOutcome::Infeasible } else { LpOutcome::Optimal };
            }
            let dir = if self.d[q] < 0.0 { 1.0 } else { -1.0 };
            self.ftran(q);
            // ratio test: x_B(t) = x_B - t * dir * column
            let mut t_max = self.upper[q] - self.lower[q];
            let mut leave: Option<(usize, f64)> = None;
            let mut leave_piv = 0.0;
            for i in 0..self.m {
                let c = self.column[i];
                if c.abs() <= PIVOT_TOL {
                    continue;
                }
                let j = self.basis[i];
                let rate = -dir * c;
                let v = self.x[j];
                let (lo, hi) = (self.lower[j], self.upper[j]);
                let limit = if rate < 0.0 {
                    if v > hi + PRIMAL_TOL {
                        Some(((v - hi) / -rate, hi))
                    } else if v >= lo - PRIMAL_TOL && lo.is_finite() {
                        Some((((v - lo).max(0.0)) / -rate, lo))
                    } else {
                        None
                    }
                } else if v < lo - PRIMAL_TOL {
                    Some(((lo - v) / rate, lo))
                } else if v <= hi + PRIMAL_TOL && hi.is_finite() {
                    Some((((hi - v).max(0.0)) / rate, hi))
                } else {
                    None
                };
                if let Some((t, target)) = limit {
                    let better = t < t_max - 1e-12
                        || (t <= t_max + 1e-12
                            && leave.is_some()
                            && if bland { j < self.basis[leave.unwrap().0] } else { c.abs() > leave_piv });
                    if better {
                        t_max = t;
                        leave = Some((i, target));
                        leave_piv = c.abs();
                    }
                }
            }
            if t_max == f64::INFINITY {
                return if phase_one { LpOutcome::Infeasible } else { LpOutcome::Unbounded };
            }
            if t_max <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            let step = dir * t_max;
            for i in 0..self.m {
                let c = self.column[i];
                if c != 0.0 {
                    let bj = self.basis[i];
                    self.x[bj] -= step * c;
                }
            }
            self.x[q] += step;
            self.iterations += 1;
            match leave {
                None => {
                    // bound flip of the entering variable
                    self.state[q] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                    self.x[q] = self.nonbasic_value(q);
                }
                Some((r, target)) => {
                    let leaving = self.basis[r];
                    self.x[leaving] = target;
                    self.state[leaving] = if target == self.lower[leaving] {
                        VarState::AtLower
                    } else {
                        VarState::AtUpper
                    };
                    self.position[leaving] = usize::MAX;
                    self.basis[r] = q;
                    self.position[q] = r;
                    self.state[q] = VarState::Basic;
                    self.update_inverse(r);
                }
            }
        }
    }

    fn reduced_costs_for(&mut self, costs: &[f64]) {
        let m = self.m;
        let y = self.duals_for(costs);
        for j in 0..self.n {
            if self.state[j] == VarState::Basic {
                self.d[j] = 0.0;
                continue;
            }
            let mut s = costs[j];
            for (i, a) in self.a.col(j) {
                s -= y[i] * a;
            }
            self.d[j] = s;
        }
        for i in 0..m {
            let j = self.n + i;
            self.d[j] = if self.state[j] == VarState::Basic { 0.0 } else { costs[j] + y[i] };
        }
    }

    /// True when the current point satisfies all bounds within tolerance.
    #[allow(dead_code)]
    pub(crate) fn is_primal_feasible(&self) -> bool {
        self.basis.iter().all(|&j| self.infeasibility(j) == 0.0)
    }

    #[allow(dead_code)]
    pub(crate) fn dual_feasible(&self) -> bool {
        self.is_dual_feasible()
    }
}
