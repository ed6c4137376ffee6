//! Dense-tableau two-phase primal simplex with warm-started row and column
//! addition.
//!
//! Every row gets one identity column (its slack, or an artificial for `≥`
//! and `=` rows). Those columns are never dropped, so their tableau columns
//! always hold `B⁻¹` and their reduced costs hold the negated row duals. Added
//! rows are eliminated against the current basis and repaired with the dual
//! simplex; added columns are priced through `B⁻¹` and entered with the
//! primal simplex.
//!
//! Pricing is Dantzig's rule. After a streak of degenerate pivots the solver
//! falls back to Bland's lowest-index rule until the objective moves again,
//! which rules out cycling while keeping every run deterministic.

use super::model::{Constraint, LpModel, Sense, Variable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub max_iters: usize,
    pub pivot_tol: f64,
    pub opt_tol: f64,
    pub feas_tol: f64,
    /// Degenerate pivots in a row before switching to Bland's rule.
    pub degenerate_streak: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_iters: 200_000,
            pivot_tol: 1e-9,
            opt_tol: 1e-9,
            feas_tol: 1e-9,
            degenerate_streak: 30,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    /// One dual per model row; `≥` rows have nonnegative duals, `≤` rows
    /// nonpositive ones.
    pub duals: Vec<f64>,
    pub dual_objective: f64,
    pub max_violation: f64,
    /// Largest `|dual · slack|` or `|reduced cost · value|` product.
    pub cs_residual: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn duality_gap(&self) -> f64 {
        (self.objective - self.dual_objective).abs()
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Surplus,
    Artificial,
}

#[derive(Debug, Clone, Copy)]
enum RowOrigin {
    Model(usize),
    UpperBound,
}

const NONE: usize = usize::MAX;
const DROP: f64 = 1e-13;

pub struct Simplex {
    model: LpModel,
    opts: SimplexOptions,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    /// Internal right-hand side at construction time, for the dual objective.
    rhs0: Vec<f64>,
    dj: Vec<f64>,
    cost: Vec<f64>,
    kind: Vec<ColKind>,
    barred: Vec<bool>,
    basis: Vec<usize>,
    basic_row: Vec<usize>,
    ident: Vec<usize>,
    sign: Vec<f64>,
    origin: Vec<RowOrigin>,
    struct_col: Vec<usize>,
    model_row_tab: Vec<usize>,
    /// Rows appended by `add_rows`, which `purge_slack_rows` may drop.
    removable: Vec<bool>,
    /// Sparse internal rows as built, for iterative refinement.
    orig: Vec<Vec<(usize, f64)>>,
    const_obj: f64,
    status: LpStatus,
    iterations: usize,
    phase_one: bool,
}

struct PendingRow {
    coeffs: Vec<(usize, f64)>,
    sense: Sense,
    rhs: f64,
    sign: f64,
    origin: RowOrigin,
}

impl Simplex {
    pub fn new(model: LpModel, opts: SimplexOptions) -> Result<Self> {
        let nvars = model.num_vars();
        let const_obj: f64 = model.vars.iter().map(|v| v.cost * v.lower).sum();
        let mut pending = Vec::with_capacity(model.num_rows());
        for (ri, row) in model.rows.iter().enumerate() {
            let shift: f64 = row.coeffs.iter().map(|&(v, a)| a * model.vars[v].lower).sum();
            pending.push(normalize(
                row.coeffs.clone(),
                row.sense,
                row.rhs - shift,
                RowOrigin::Model(ri),
            ));
        }
        for (v, var) in model.vars.iter().enumerate() {
            if var.upper.is_finite() {
                pending.push(normalize(
                    vec![(v, 1.0)],
                    Sense::Le,
                    var.upper - var.lower,
                    RowOrigin::UpperBound,
                ));
            }
        }

        let mut kind = vec![ColKind::Structural; nvars];
        let mut cost: Vec<f64> = model.vars.iter().map(|v| v.cost).collect();
        let mut aux = Vec::with_capacity(pending.len());
        for p in &pending {
            let (surplus, ident) = match p.sense {
                Sense::Le => {
                    kind.push(ColKind::Slack);
                    cost.push(0.0);
                    (NONE, kind.len() - 1)
                }
                Sense::Ge => {
                    kind.push(ColKind::Surplus);
                    cost.push(0.0);
                    let s = kind.len() - 1;
                    kind.push(ColKind::Artificial);
                    cost.push(0.0);
                    (s, kind.len() - 1)
                }
                Sense::Eq => {
                    kind.push(ColKind::Artificial);
                    cost.push(0.0);
                    (NONE, kind.len() - 1)
                }
            };
            aux.push((surplus, ident));
        }
        let ncols = kind.len();
        let nrows = pending.len();
        let mut rows = Vec::with_capacity(nrows);
        let mut rhs = Vec::with_capacity(nrows);
        let mut basis = Vec::with_capacity(nrows);
        let mut basic_row = vec![NONE; ncols];
        let mut ident = Vec::with_capacity(nrows);
        let mut sign = Vec::with_capacity(nrows);
        let mut origin = Vec::with_capacity(nrows);
        let mut model_row_tab = vec![NONE; model.num_rows()];
        let mut orig = Vec::with_capacity(nrows);
        for (r, (p, &(surplus, id))) in pending.iter().zip(&aux).enumerate() {
            let mut dense = vec![0.0; ncols];
            for &(v, a) in &p.coeffs {
                dense[v] += a;
            }
            if surplus != NONE {
                dense[surplus] = -1.0;
            }
            dense[id] = 1.0;
            orig.push(sparse(&dense));
            rows.push(dense);
            rhs.push(p.rhs);
            basis.push(id);
            basic_row[id] = r;
            ident.push(id);
            sign.push(p.sign);
            origin.push(p.origin);
            if let RowOrigin::Model(mr) = p.origin {
                model_row_tab[mr] = r;
            }
        }
        let rhs0 = rhs.clone();
        Ok(Simplex {
            struct_col: (0..nvars).collect(),
            model,
            opts,
            rows,
            rhs,
            rhs0,
            dj: vec![0.0; ncols],
            cost,
            barred: vec![false; ncols],
            kind,
            basis,
            basic_row,
            ident,
            sign,
            origin,
            removable: vec![false; nrows],
            orig,
            model_row_tab,
            const_obj,
            status: LpStatus::IterationLimit,
            iterations: 0,
            phase_one: false,
        })
    }

    pub fn model(&self) -> &LpModel {
        &self.model
    }

    pub fn into_model(self) -> LpModel {
        self.model
    }

    pub fn status(&self) -> LpStatus {
        self.status
    }

    fn ncols(&self) -> usize {
        self.kind.len()
    }

    /// Runs both phases from the current basis.
    pub fn solve(&mut self) -> LpStatus {
        let has_art = self
            .basis
            .iter()
            .any(|&b| self.kind[b] == ColKind::Artificial && !self.barred[b]);
        if has_art {
            self.phase_one = true;
            self.recompute_dj();
            let st = self.primal_loop();
            self.phase_one = false;
            if st == LpStatus::IterationLimit {
                self.status = st;
                return st;
            }
            let infeas: f64 = self
                .basis
                .iter()
                .zip(&self.rhs)
                .filter(|(&b, _)| self.kind[b] == ColKind::Artificial)
                .map(|(_, &v)| v.max(0.0))
                .sum();
            let scale = self.rhs0.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
            if infeas > 1e-7 * scale {
                self.status = LpStatus::Infeasible;
                return self.status;
            }
            self.drive_out_artificials();
        }
        for c in 0..self.ncols() {
            if self.kind[c] == ColKind::Artificial {
                self.barred[c] = true;
            }
        }
        self.status = self.phase_two();
        self.status
    }

    fn phase_two(&mut self) -> LpStatus {
        let mut st = LpStatus::Optimal;
        for _ in 0..4 {
            self.recompute_dj();
            st = self.primal_loop();
            if st != LpStatus::Optimal {
                return st;
            }
            self.recompute_dj();
            if self.entering_candidate(false).is_none() {
                self.refine();
                return LpStatus::Optimal;
            }
        }
        st
    }

    fn drive_out_artificials(&mut self) {
        for r in 0..self.rows.len() {
            let b = self.basis[r];
            if self.kind[b] != ColKind::Artificial {
                continue;
            }
            let q = (0..self.ncols())
                .filter(|&c| self.kind[c] != ColKind::Artificial && self.basic_row[c] == NONE)
                .max_by(|&a, &c| self.rows[r][a].abs().total_cmp(&self.rows[r][c].abs()));
            if let Some(q) = q {
                if self.rows[r][q].abs() > self.opts.pivot_tol {
                    self.rhs[r] = 0.0;
                    self.pivot(r, q);
                }
            }
        }
    }

    fn col_cost(&self, c: usize) -> f64 {
        if self.phase_one {
            if self.kind[c] == ColKind::Artificial {
                1.0
            } else {
                0.0
            }
        } else {
            self.cost[c]
        }
    }

    fn recompute_dj(&mut self) {
        let n = self.ncols();
        let mut dj: Vec<f64> = (0..n).map(|c| self.col_cost(c)).collect();
        for (r, row) in self.rows.iter().enumerate() {
            let cb = self.col_cost(self.basis[r]);
            if cb != 0.0 {
                for (d, &a) in dj.iter_mut().zip(row) {
                    *d -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            dj[b] = 0.0;
        }
        self.dj = dj;
    }

    fn eligible(&self, c: usize) -> bool {
        self.basic_row[c] == NONE && !self.barred[c]
    }

    fn entering_candidate(&self, bland: bool) -> Option<usize> {
        let tol = self.opts.opt_tol;
        if bland {
            (0..self.ncols()).find(|&c| self.eligible(c) && self.dj[c] < -tol)
        } else {
            let mut best = None;
            let mut best_val = -tol;
            for c in 0..self.ncols() {
                if self.dj[c] < best_val && self.eligible(c) {
                    best_val = self.dj[c];
                    best = Some(c);
                }
            }
            best
        }
    }

    fn primal_loop(&mut self) -> LpStatus {
        let mut streak = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= self.opts.max_iters {
                return LpStatus::IterationLimit;
            }
            let Some(q) = self.entering_candidate(bland) else {
                return LpStatus::Optimal;
            };
            let tol = self.opts.feas_tol;
            let mut bound = f64::INFINITY;
            for r in 0..self.rows.len() {
                let a = self.rows[r][q];
                if a > self.opts.pivot_tol {
                    bound = bound.min((self.rhs[r].max(0.0) + tol) / a);
                }
            }
            let mut leave = NONE;
            let mut best_ratio = f64::INFINITY;
            let mut best_piv = 0.0;
            for r in 0..self.rows.len() {
                let a = self.rows[r][q];
                if a <= self.opts.pivot_tol {
                    continue;
                }
                let ratio = self.rhs[r].max(0.0) / a;
                if ratio > bound {
                    continue;
                }
                let better = if leave == NONE {
                    true
                } else if bland {
                    self.basis[r] < self.basis[leave]
                } else {
                    a > best_piv
                };
                if better {
                    leave = r;
                    best_ratio = ratio;
                    best_piv = a;
                }
            }
            if leave == NONE {
                return LpStatus::Unbounded;
            }
            if best_ratio <= 1e-12 {
                streak += 1;
                if streak > self.opts.degenerate_streak {
                    bland = true;
                }
            } else {
                streak = 0;
                bland = false;
            }
            if self.phase_one {
                let out = self.basis[leave];
                if self.kind[out] == ColKind::Artificial {
                    self.barred[out] = true;
                }
            }
            self.pivot(leave, q);
        }
    }

    fn dual_loop(&mut self) -> LpStatus {
        // Same anti-cycling scheme as the primal loop: a run of dual
        // degenerate pivots switches to the smallest-index rule.
        let mut streak = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= self.opts.max_iters {
                return LpStatus::IterationLimit;
            }
            let mut leave = NONE;
            let mut worst = -self.opts.feas_tol;
            for (r, &v) in self.rhs.iter().enumerate() {
                if v >= -self.opts.feas_tol {
                    continue;
                }
                let better = if bland {
                    leave == NONE || self.basis[r] < self.basis[leave]
                } else {
                    v < worst
                };
                if better {
                    worst = v;
                    leave = r;
                }
            }
            if leave == NONE {
                return LpStatus::Optimal;
            }
            let row = &self.rows[leave];
            // Harris two-pass ratio test: relax the reduced costs by the
            // tolerance, then take the largest pivot among the near-ties.
            let tol = self.opts.opt_tol;
            let mut bound = f64::INFINITY;
            for c in 0..self.ncols() {
                let a = row[c];
                if a < -self.opts.pivot_tol && self.eligible(c) {
                    bound = bound.min((self.dj[c].max(0.0) + tol) / -a);
                }
            }
            let mut enter = NONE;
            let mut best_ratio = f64::INFINITY;
            let mut best_piv = 0.0;
            for c in 0..self.ncols() {
                let a = row[c];
                if a >= -self.opts.pivot_tol || !self.eligible(c) {
                    continue;
                }
                let ratio = self.dj[c].max(0.0) / -a;
                if ratio > bound {
                    continue;
                }
                let better = if bland { enter == NONE } else { -a > best_piv };
                if better {
                    enter = c;
                    best_ratio = ratio;
                    best_piv = -a;
                }
            }
            if enter == NONE {
                return LpStatus::Infeasible;
            }
            if best_ratio <= 1e-12 {
                streak += 1;
                if streak > self.opts.degenerate_streak {
                    bland = true;
                }
            } else {
                streak = 0;
                bland = false;
            }
            self.pivot(leave, enter);
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        self.iterations += 1;
        let piv = self.rows[r][q];
        let inv = 1.0 / piv;
        let mut nz = Vec::new();
        for (c, v) in self.rows[r].iter_mut().enumerate() {
            if *v != 0.0 {
                *v *= inv;
                if v.abs() < DROP {
                    *v = 0.0;
                } else {
                    nz.push((c, *v));
                }
            }
        }
        self.rows[r][q] = 1.0;
        self.rhs[r] *= inv;
        let prhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let a = self.rows[i][q];
            if a == 0.0 {
                continue;
            }
            let row = &mut self.rows[i];
            for &(c, v) in &nz {
                let nv = row[c] - a * v;
                row[c] = if nv.abs() < DROP { 0.0 } else { nv };
            }
            row[q] = 0.0;
            self.rhs[i] -= a * prhs;
        }
        let a = self.dj[q];
        if a != 0.0 {
            for &(c, v) in &nz {
                self.dj[c] -= a * v;
            }
            self.dj[q] = 0.0;
        }
        let out = self.basis[r];
        self.basic_row[out] = NONE;
        self.basis[r] = q;
        self.basic_row[q] = r;
    }

    fn push_column(&mut self, kind: ColKind, cost: f64) -> usize {
        for row in &mut self.rows {
            row.push(0.0);
        }
        self.kind.push(kind);
        self.cost.push(cost);
        self.dj.push(0.0);
        self.barred.push(false);
        self.basic_row.push(NONE);
        self.kind.len() - 1
    }

    /// Appends `≤`/`≥` rows and restores optimality with the dual simplex.
    /// Falls back to a cold solve when the current basis is not optimal.
    pub fn add_rows(&mut self, new_rows: Vec<Constraint>) -> Result<LpStatus> {
        for row in new_rows {
            if row.sense == Sense::Eq {
                return Err(Error::Lp("equality rows cannot be added incrementally".into()));
            }
            let mr = self.model.add_row(row)?;
            let row = &self.model.rows[mr];
            let shift: f64 = row.coeffs.iter().map(|&(v, a)| a * self.model.vars[v].lower).sum();
            let (s, rhs) = match row.sense {
                Sense::Le => (1.0, row.rhs - shift),
                _ => (-1.0, -(row.rhs - shift)),
            };
            let coeffs: Vec<(usize, f64)> = row.coeffs.iter().map(|&(v, a)| (self.struct_col[v], s * a)).collect();
            let slack = self.push_column(ColKind::Slack, 0.0);
            let mut dense = vec![0.0; self.ncols()];
            for (c, a) in coeffs {
                dense[c] += a;
            }
            dense[slack] = 1.0;
            self.orig.push(sparse(&dense));
            let mut value = rhs;
            let factors: Vec<(usize, f64)> = self
                .basis
                .iter()
                .enumerate()
                .filter_map(|(r, &b)| (dense[b] != 0.0).then_some((r, dense[b])))
                .collect();
            for (r, f) in factors {
                for (d, &t) in dense.iter_mut().zip(&self.rows[r]) {
                    if t != 0.0 {
                        *d -= f * t;
                    }
                }
                value -= f * self.rhs[r];
            }
            for &b in &self.basis {
                dense[b] = 0.0;
            }
            dense[slack] = 1.0;
            let r = self.rows.len();
            self.rows.push(dense);
            self.rhs.push(value);
            self.rhs0.push(rhs);
            self.basis.push(slack);
            self.basic_row[slack] = r;
            self.ident.push(slack);
            self.sign.push(s);
            self.origin.push(RowOrigin::Model(mr));
            self.model_row_tab.push(r);
            self.removable.push(true);
        }
        if self.status != LpStatus::Optimal {
            return Ok(self.solve());
        }
        self.recompute_dj();
        let st = self.dual_loop();
        self.status = if st == LpStatus::Optimal { self.phase_two() } else { st };
        Ok(self.status)
    }

    /// Appends nonnegative columns given as `(variable, [(model row, coeff)])`
    /// and re-optimises with the primal simplex.
    pub fn add_columns(&mut self, cols: Vec<(Variable, Vec<(usize, f64)>)>) -> Result<LpStatus> {
        for (var, entries) in cols {
            if var.lower != 0.0 || var.upper.is_finite() {
                return Err(Error::Lp("added columns must have bounds [0, inf)".into()));
            }
            let v = self
                .model
                .add_var(&var.block, &var.index, var.cost, 0.0, f64::INFINITY)?;
            for &(mr, a) in &entries {
                if mr >= self.model.rows.len() {
                    return Err(Error::Lp(format!("column references unknown row {mr}")));
                }
                self.model.rows[mr].coeffs.push((v, a));
            }
            let c = self.push_column(ColKind::Structural, var.cost);
            self.struct_col.push(c);
            let mut dj = var.cost;
            let mut col = vec![0.0; self.rows.len()];
            for &(mr, a) in &entries {
                let tr = self.model_row_tab[mr];
                let a = a * self.sign[tr];
                self.orig[tr].push((c, a));
                let id = self.ident[tr];
                dj += a * self.dj_for_dual(id);
                for (k, row) in self.rows.iter().enumerate() {
                    let t = row[id];
                    if t != 0.0 {
                        col[k] += a * t;
                    }
                }
            }
            for (row, v) in self.rows.iter_mut().zip(col) {
                row[c] = if v.abs() < DROP { 0.0 } else { v };
            }
            self.dj[c] = dj;
        }
        if self.status != LpStatus::Optimal {
            return Ok(self.solve());
        }
        self.status = self.phase_two();
        Ok(self.status)
    }

    /// Drops appended rows whose own slack is basic with value above
    /// `min_slack`, together with those slack columns. The current basis
    /// stays optimal for the remaining rows. Model row indices are compacted.
    pub fn purge_slack_rows(&mut self, min_slack: f64) -> usize {
        let drop_row: Vec<bool> = (0..self.rows.len())
            .map(|r| self.removable[r] && self.basis[r] == self.ident[r] && self.rhs[r] > min_slack)
            .collect();
        let count = drop_row.iter().filter(|&&d| d).count();
        if count == 0 {
            return 0;
        }
        let mut drop_col = vec![false; self.ncols()];
        for r in (0..self.rows.len()).filter(|&r| drop_row[r]) {
            drop_col[self.ident[r]] = true;
        }
        let mut col_map = vec![NONE; self.ncols()];
        let mut next = 0;
        for (c, slot) in col_map.iter_mut().enumerate() {
            if !drop_col[c] {
                *slot = next;
                next += 1;
            }
        }
        let keep = |c: &usize| !drop_col[*c];
        let filter_cols =
            |v: &[f64]| -> Vec<f64> { v.iter().enumerate().filter(|(c, _)| keep(c)).map(|(_, &x)| x).collect() };

        let mut model_drop = vec![false; self.model.num_rows()];
        for r in (0..self.rows.len()).filter(|&r| drop_row[r]) {
            if let RowOrigin::Model(mr) = self.origin[r] {
                model_drop[mr] = true;
            }
        }
        let mut model_map = vec![NONE; model_drop.len()];
        let mut next = 0;
        for (mr, slot) in model_map.iter_mut().enumerate() {
            if !model_drop[mr] {
                *slot = next;
                next += 1;
            }
        }
        let mut mr = 0;
        self.model.rows.retain(|_| {
            mr += 1;
            !model_drop[mr - 1]
        });

        let old_rows = std::mem::take(&mut self.rows);
        let mut kept_rows = Vec::with_capacity(old_rows.len() - count);
        let mut rhs = Vec::new();
        let mut rhs0 = Vec::new();
        let mut basis = Vec::new();
        let mut ident = Vec::new();
        let mut sign = Vec::new();
        let mut origin = Vec::new();
        let mut removable = Vec::new();
        let mut orig = Vec::new();
        for (r, row) in old_rows.into_iter().enumerate() {
            if drop_row[r] {
                continue;
            }
            orig.push(
                self.orig[r]
                    .iter()
                    .filter(|(c, _)| keep(c))
                    .map(|&(c, a)| (col_map[c], a))
                    .collect(),
            );
            kept_rows.push(filter_cols(&row));
            rhs.push(self.rhs[r]);
            rhs0.push(self.rhs0[r]);
            basis.push(col_map[self.basis[r]]);
            ident.push(col_map[self.ident[r]]);
            sign.push(self.sign[r]);
            origin.push(match self.origin[r] {
                RowOrigin::Model(mr) => RowOrigin::Model(model_map[mr]),
                o => o,
            });
            removable.push(self.removable[r]);
        }
        self.rows = kept_rows;
        self.rhs = rhs;
        self.rhs0 = rhs0;
        self.basis = basis;
        self.ident = ident;
        self.sign = sign;
        self.origin = origin;
        self.removable = removable;
        self.orig = orig;
        self.dj = filter_cols(&self.dj);
        self.cost = filter_cols(&self.cost);
        self.kind = self
            .kind
            .iter()
            .enumerate()
            .filter(|(c, _)| keep(c))
            .map(|(_, &k)| k)
            .collect();
        self.barred = self
            .barred
            .iter()
            .enumerate()
            .filter(|(c, _)| keep(c))
            .map(|(_, &b)| b)
            .collect();
        self.basic_row = vec![NONE; self.kind.len()];
        for (r, &b) in self.basis.iter().enumerate() {
            self.basic_row[b] = r;
        }
        for c in &mut self.struct_col {
            *c = col_map[*c];
        }
        self.model_row_tab = vec![NONE; self.model.num_rows()];
        for (r, o) in self.origin.iter().enumerate() {
            if let RowOrigin::Model(mr) = o {
                self.model_row_tab[*mr] = r;
            }
        }
        count
    }

    /// Iterative refinement of the basic values against the original rows.
    /// Tableau column `ident[r]` holds `B⁻¹ e_r`, so one correction costs a
    /// residual and a dense product.
    fn refine(&mut self) {
        for _ in 0..2 {
            let value = |c: usize| {
                let r = self.basic_row[c];
                if r == NONE {
                    0.0
                } else {
                    self.rhs[r]
                }
            };
            let res: Vec<f64> = self
                .orig
                .iter()
                .zip(&self.rhs0)
                .map(|(row, &b)| b - row.iter().map(|&(c, a)| a * value(c)).sum::<f64>())
                .collect();
            let worst = res.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            if worst < 1e-14 {
                return;
            }
            for k in 0..self.rows.len() {
                let row = &self.rows[k];
                let fix: f64 = self.ident.iter().zip(&res).map(|(&id, &e)| row[id] * e).sum();
                self.rhs[k] += fix;
            }
        }
    }

    /// Reduced cost of an identity column under phase-two costs.
    fn dj_for_dual(&self, id: usize) -> f64 {
        if self.basic_row[id] != NONE {
            0.0
        } else {
            self.dj[id]
        }
    }

    /// Internal row duals `y` with `y_i = −d_{ident(i)}`.
    fn internal_duals(&self) -> Vec<f64> {
        self.ident.iter().map(|&id| -self.dj_for_dual(id)).collect()
    }

    pub fn solution(&self) -> LpSolution {
        let nvars = self.model.num_vars();
        let mut primal = vec![0.0; nvars];
        for v in 0..nvars {
            let c = self.struct_col[v];
            let r = self.basic_row[c];
            let val = if r == NONE { 0.0 } else { self.rhs[r].max(0.0) };
            primal[v] = self.model.vars[v].lower + val;
        }
        let y = self.internal_duals();
        let mut duals = vec![0.0; self.model.num_rows()];
        for (tr, origin) in self.origin.iter().enumerate() {
            if let RowOrigin::Model(mr) = origin {
                duals[*mr] = self.sign[tr] * y[tr];
            }
        }
        let dual_objective = self.const_obj + y.iter().zip(&self.rhs0).map(|(a, b)| a * b).sum::<f64>();
        let objective = self.model.objective(&primal);
        let max_violation = self.model.max_violation(&primal);
        let mut cs_residual = 0.0f64;
        for (row, &dual) in self.model.rows.iter().zip(&duals) {
            cs_residual = cs_residual.max((dual * (row.activity(&primal) - row.rhs)).abs());
        }
        for v in 0..nvars {
            let c = self.struct_col[v];
            cs_residual = cs_residual.max((self.dj[c] * (primal[v] - self.model.vars[v].lower)).abs());
        }
        LpSolution {
            status: self.status,
            objective,
            primal,
            duals,
            dual_objective,
            max_violation,
            cs_residual,
            iterations: self.iterations,
        }
    }
}

fn sparse(dense: &[f64]) -> Vec<(usize, f64)> {
    dense
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != 0.0)
        .map(|(c, &a)| (c, a))
        .collect()
}

fn normalize(coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64, origin: RowOrigin) -> PendingRow {
    let flip = rhs < 0.0 || (rhs == 0.0 && sense == Sense::Ge);
    if !flip {
        return PendingRow {
            coeffs,
            sense,
            rhs,
            sign: 1.0,
            origin,
        };
    }
    let sense = match sense {
        Sense::Le => Sense::Ge,
        Sense::Ge => Sense::Le,
        Sense::Eq => Sense::Eq,
    };
    PendingRow {
        coeffs: coeffs.into_iter().map(|(v, a)| (v, -a)).collect(),
        sense,
        rhs: -rhs,
        sign: -1.0,
        origin,
    }
}

/// Solves `model` from scratch with default options.
pub fn solve_lp(model: &LpModel) -> LpSolution {
    solve_lp_with(model, SimplexOptions::default())
}

pub fn solve_lp_with(model: &LpModel, opts: SimplexOptions) -> LpSolution {
    let mut s = Simplex::new(model.clone(), opts).expect("model rows were validated on insertion");
    s.solve();
    s.solution()
}
