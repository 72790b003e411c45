//! Dense bounded-variable primal simplex.
//!
//! Each row `a x (<=|=|>=) b` gets a slack `s = b - a x` with bounds
//! `[0, inf)`, `[0, 0]` or `(-inf, 0]`. Phase 1 minimizes the total bound
//! violation of the basic variables, so a warm basis that became infeasible
//! after a bound change or a new row needs no artificial variables. The
//! basis inverse is kept dense and rebuilt from the original columns
//! periodically.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const CHECK_TOL: f64 = 1e-7;
const REINVERT_EVERY: usize = 64;
const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// How far `x` is from satisfying the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Structural values; meaningful when optimal.
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarStatus {
    Basic,
    Lower,
    Upper,
}

/// Snapshot of a simplex basis, reusable after rows are appended.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    structural: Vec<VarStatus>,
    /// Nonbasic slacks by row id.
    nonbasic_slacks: Vec<(u64, VarStatus)>,
}

/// Minimization LP with bounded structural variables.
#[derive(Debug, Clone, Default)]
pub struct LpModel {
    obj: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    rows: Vec<Row>,
    warm_struct: Vec<VarStatus>,
    warm_slack: Vec<VarStatus>,
    warm_valid: bool,
    /// Stable identity of each row, unaffected by removals.
    row_ids: Vec<u64>,
    next_row_id: u64,
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.obj.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective(&self) -> &[f64] {
        &self.obj
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.hi[j])
    }

    /// Adds a variable; `lo` must be finite, `hi` may be infinite.
    pub fn add_var(&mut self, lo: f64, hi: f64, cost: f64) -> Result<usize> {
        check_bounds(lo, hi)?;
        if !cost.is_finite() {
            return Err(Error::Usage("objective coefficient must be finite".into()));
        }
        self.obj.push(cost);
        self.lo.push(lo);
        self.hi.push(hi);
        self.warm_struct.push(VarStatus::Lower);
        Ok(self.obj.len() - 1)
    }

    pub fn set_objective(&mut self, j: usize, cost: f64) -> Result<()> {
        self.check_var(j)?;
        if !cost.is_finite() {
            return Err(Error::Usage("objective coefficient must be finite".into()));
        }
        self.obj[j] = cost;
        Ok(())
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) -> Result<()> {
        self.check_var(j)?;
        check_bounds(lo, hi)?;
        self.lo[j] = lo;
        self.hi[j] = hi;
        if self.warm_struct[j] == VarStatus::Upper && hi.is_infinite() {
            self.warm_struct[j] = VarStatus::Lower;
        }
        Ok(())
    }

    /// Appends a row; duplicate indices in `coeffs` are summed.
    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Result<usize> {
        if !rhs.is_finite() {
            return Err(Error::Usage("row right-hand side must be finite".into()));
        }
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        let mut sorted = coeffs;
        sorted.sort_by_key(|&(j, _)| j);
        for (j, a) in sorted {
            self.check_var(j)?;
            if !a.is_finite() {
                return Err(Error::Usage(format!("row coefficient of variable {j} is not finite")));
            }
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.rows.push(Row {
            coeffs: merged,
            sense,
            rhs,
        });
        self.warm_slack.push(VarStatus::Basic);
        self.row_ids.push(self.next_row_id);
        self.next_row_id += 1;
        Ok(self.rows.len() - 1)
    }

    pub fn remove_row(&mut self, i: usize) -> Result<Row> {
        if i >= self.rows.len() {
            return Err(Error::Usage(format!(
                "row {i} out of range ({} rows)",
                self.rows.len()
            )));
        }
        let status = self.warm_slack.remove(i);
        if status != VarStatus::Basic {
            self.warm_valid = false;
        }
        self.row_ids.remove(i);
        Ok(self.rows.remove(i))
    }

    /// Removes every row `i` with `!keep[i]`.
    pub fn retain_rows(&mut self, keep: &[bool]) -> Result<()> {
        if keep.len() != self.rows.len() {
            return Err(Error::Usage("keep mask length differs from the row count".into()));
        }
        if (0..keep.len()).any(|i| !keep[i] && self.warm_slack[i] != VarStatus::Basic) {
            self.warm_valid = false;
        }
        retain_mask(&mut self.rows, keep);
        retain_mask(&mut self.warm_slack, keep);
        retain_mask(&mut self.row_ids, keep);
        Ok(())
    }

    /// The basis left by the last solve, if any.
    pub fn basis(&self) -> Option<Basis> {
        self.warm_valid.then(|| Basis {
            structural: self.warm_struct.clone(),
            nonbasic_slacks: self
                .row_ids
                .iter()
                .zip(&self.warm_slack)
                .filter(|(_, &st)| st != VarStatus::Basic)
                .map(|(&id, &st)| (id, st))
                .collect(),
        })
    }

    /// Restores a saved basis. Rows added since it was saved start with
    /// their slack basic. A basis that no longer has one basic variable per
    /// row (because rows it relied on were removed) is ignored and the
    /// current one kept. Returns whether the basis was applied.
    pub fn set_basis(&mut self, basis: &Basis) -> bool {
        if basis.structural.len() != self.obj.len() {
            return false;
        }
        let mut slack = vec![VarStatus::Basic; self.rows.len()];
        let mut found = 0;
        for &(id, st) in &basis.nonbasic_slacks {
            if let Ok(i) = self.row_ids.binary_search(&id) {
                slack[i] = st;
                found += 1;
            }
        }
        let basics = basis.structural.iter().filter(|&&s| s == VarStatus::Basic).count() + self.rows.len() - found;
        if basics != self.rows.len() {
            return false;
        }
        self.warm_struct.clone_from(&basis.structural);
        for (j, st) in self.warm_struct.iter_mut().enumerate() {
            if *st == VarStatus::Upper && self.hi[j].is_infinite() {
                *st = VarStatus::Lower;
            }
        }
        self.warm_slack = slack;
        self.warm_valid = true;
        true
    }

    /// Forgets the stored basis; the next solve starts from the slack basis.
    pub fn reset_basis(&mut self) {
        self.warm_valid = false;
    }

    fn check_var(&self, j: usize) -> Result<()> {
        if j >= self.obj.len() {
            return Err(Error::Usage(format!(
                "variable {j} out of range ({} variables)",
                self.obj.len()
            )));
        }
        Ok(())
    }

    /// Plain-text dump: one `var` line per variable, then one `row` line per
    /// row listing `index:coefficient` pairs.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "lp {} vars {} rows", self.num_vars(), self.num_rows());
        for j in 0..self.num_vars() {
            let _ = writeln!(out, "var {j} [{}, {}] cost {}", self.lo[j], self.hi[j], self.obj[j]);
        }
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "row {i}");
            for &(j, a) in &row.coeffs {
                let _ = write!(out, " {j}:{a}");
            }
            let _ = writeln!(out, " {} {}", row.sense.symbol(), row.rhs);
        }
        out
    }

    /// Largest violation of a row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.num_vars() {
            worst = worst.max(self.lo[j] - x[j]).max(x[j] - self.hi[j]);
        }
        for row in &self.rows {
            worst = worst.max(row.violation(x));
        }
        worst
    }

    pub fn solve(&mut self) -> Result<LpResult> {
        solve_lp(self)
    }
}

fn retain_mask<T>(v: &mut Vec<T>, keep: &[bool]) {
    let mut i = 0;
    v.retain(|_| {
        i += 1;
        keep[i - 1]
    });
}

fn check_bounds(lo: f64, hi: f64) -> Result<()> {
    if !lo.is_finite() {
        return Err(Error::Usage("variable lower bounds must be finite".into()));
    }
    if hi.is_nan() || lo > hi {
        return Err(Error::Usage(format!("invalid bounds [{lo}, {hi}]")));
    }
    Ok(())
}

/// Solves `m`, warm-starting from the basis left by its previous solve.
pub fn solve_lp(m: &mut LpModel) -> Result<LpResult> {
    let mut sx = Simplex::new(m);
    let warm = m.warm_valid;
    if !warm || !sx.load_warm(m) {
        sx.cold_basis();
    }
    if !sx.reinvert() {
        sx.cold_basis();
        if !sx.reinvert() {
            return Err(Error::Solver("slack basis is singular".into()));
        }
    }
    let status = sx.run()?;
    m.warm_struct.copy_from_slice(&sx.status[..sx.n]);
    m.warm_slack.copy_from_slice(&sx.status[sx.n..]);
    m.warm_valid = true;
    let mut x: Vec<f64> = sx.x[..sx.n].to_vec();
    if status == LpStatus::Optimal {
        for (j, v) in x.iter_mut().enumerate() {
            *v = v.clamp(m.lo[j], m.hi[j]);
        }
        let worst = m.max_violation(&x);
        if worst > CHECK_TOL {
            return Err(Error::Solver(format!(
                "simplex returned a point violating the model by {worst:e}"
            )));
        }
    }
    let objective = x.iter().zip(&m.obj).map(|(a, b)| a * b).sum();
    Ok(LpResult {
        status,
        x,
        objective,
        iterations: sx.iterations,
    })
}

struct Simplex {
    n: usize,
    m: usize,
    /// Row-major `m x n` structural matrix.
    a: Vec<f64>,
    /// Nonzeros of each row.
    sparse: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    status: Vec<VarStatus>,
    basic: Vec<usize>,
    x: Vec<f64>,
    /// Row-major `m x m` basis inverse.
    binv: Vec<f64>,
    iterations: usize,
}

impl Simplex {
    fn new(model: &LpModel) -> Self {
        let n = model.num_vars();
        let m = model.num_rows();
        let mut a = vec![0.0; m * n];
        let mut lo = model.lo.clone();
        let mut hi = model.hi.clone();
        for (i, row) in model.rows.iter().enumerate() {
            for &(j, v) in &row.coeffs {
                a[i * n + j] += v;
            }
            let (l, h) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Eq => (0.0, 0.0),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
            };
            lo.push(l);
            hi.push(h);
        }
        let mut cost = model.obj.clone();
        cost.resize(n + m, 0.0);
        Simplex {
            n,
            m,
            a,
            sparse: model.rows.iter().map(|r| r.coeffs.clone()).collect(),
            b: model.rows.iter().map(|r| r.rhs).collect(),
            cost,
            lo,
            hi,
            status: vec![VarStatus::Lower; n + m],
            basic: Vec::with_capacity(m),
            x: vec![0.0; n + m],
            binv: vec![0.0; m * m],
            iterations: 0,
        }
    }

    fn cold_basis(&mut self) {
        for j in 0..self.n {
            self.status[j] = VarStatus::Lower;
        }
        self.basic.clear();
        for i in 0..self.m {
            self.status[self.n + i] = VarStatus::Basic;
            self.basic.push(self.n + i);
        }
        self.fix_nonbasic_sides();
    }

    fn load_warm(&mut self, model: &LpModel) -> bool {
        self.status[..self.n].copy_from_slice(&model.warm_struct);
        self.status[self.n..].copy_from_slice(&model.warm_slack);
        self.basic = (0..self.n + self.m)
            .filter(|&j| self.status[j] == VarStatus::Basic)
            .collect();
        if self.basic.len() != self.m {
            return false;
        }
        self.fix_nonbasic_sides();
        true
    }

    /// Nonbasic variables must sit at a finite bound.
    fn fix_nonbasic_sides(&mut self) {
        for j in 0..self.n + self.m {
            match self.status[j] {
                VarStatus::Lower if self.lo[j].is_infinite() => self.status[j] = VarStatus::Upper,
                VarStatus::Upper if self.hi[j].is_infinite() => self.status[j] = VarStatus::Lower,
                _ => {}
            }
        }
    }

    fn column(&self, j: usize, out: &mut [f64]) {
        if j < self.n {
            for i in 0..self.m {
                out[i] = self.a[i * self.n + j];
            }
        } else {
            out.fill(0.0);
            out[j - self.n] = 1.0;
        }
    }

    /// Rebuilds the basis inverse and recomputes the basic values. Returns
    /// false when the basis is singular.
    ///
    /// Basic slack columns are unit vectors, so only the block of structural
    /// basic columns on the rows whose slack is nonbasic needs inverting.
    fn reinvert(&mut self) -> bool {
        let (n, m) = (self.n, self.m);
        let structural: Vec<usize> = (0..m).filter(|&r| self.basic[r] < n).collect();
        let free_rows: Vec<usize> = (0..m).filter(|&i| self.status[n + i] != VarStatus::Basic).collect();
        let k = structural.len();
        if free_rows.len() != k {
            return false;
        }
        // K[q][p] = A[free_rows[q]][basic[structural[p]]], inverted in place.
        let mut mat = vec![0.0; k * k];
        for (q, &i) in free_rows.iter().enumerate() {
            for (p, &r) in structural.iter().enumerate() {
                mat[q * k + p] = self.a[i * n + self.basic[r]];
            }
        }
        let mut inv = vec![0.0; k * k];
        for i in 0..k {
            inv[i * k + i] = 1.0;
        }
        for c in 0..k {
            let mut piv = c;
            for i in c + 1..k {
                if mat[i * k + c].abs() > mat[piv * k + c].abs() {
                    piv = i;
                }
            }
            if mat[piv * k + c].abs() < 1e-11 {
                return false;
            }
            if piv != c {
                for j in 0..k {
                    mat.swap(c * k + j, piv * k + j);
                    inv.swap(c * k + j, piv * k + j);
                }
            }
            let p = mat[c * k + c];
            for j in 0..k {
                mat[c * k + j] /= p;
                inv[c * k + j] /= p;
            }
            for i in 0..k {
                if i != c {
                    let f = mat[i * k + c];
                    if f != 0.0 {
                        for j in 0..k {
                            mat[i * k + j] -= f * mat[c * k + j];
                            inv[i * k + j] -= f * inv[c * k + j];
                        }
                    }
                }
            }
        }
        let mut pos = vec![usize::MAX; n];
        for (p, &r) in structural.iter().enumerate() {
            pos[self.basic[r]] = p;
        }
        let binv = &mut self.binv;
        binv.fill(0.0);
        for (p, &r) in structural.iter().enumerate() {
            for (q, &i) in free_rows.iter().enumerate() {
                binv[r * m + i] = inv[p * k + q];
            }
        }
        let mut acc = vec![0.0; k];
        for r in 0..m {
            let j = self.basic[r];
            if j < n {
                continue;
            }
            let i = j - n;
            binv[r * m + i] = 1.0;
            acc.fill(0.0);
            for &(c, a) in &self.sparse[i] {
                let p = pos[c];
                if p != usize::MAX {
                    for (q, v) in acc.iter_mut().enumerate() {
                        *v += a * inv[p * k + q];
                    }
                }
            }
            for (q, &fi) in free_rows.iter().enumerate() {
                binv[r * m + fi] = -acc[q];
            }
        }
        self.recompute_basic_values();
        true
    }

    fn recompute_basic_values(&mut self) {
        let (n, m) = (self.n, self.m);
        for j in 0..n + m {
            match self.status[j] {
                VarStatus::Lower => self.x[j] = self.lo[j],
                VarStatus::Upper => self.x[j] = self.hi[j],
                VarStatus::Basic => {}
            }
        }
        // r = b - A_N x_N, where slack columns are unit vectors.
        let mut r = self.b.clone();
        for i in 0..m {
            let row = &self.a[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for j in 0..n {
                if self.status[j] != VarStatus::Basic {
                    acc += row[j] * self.x[j];
                }
            }
            if self.status[n + i] != VarStatus::Basic {
                acc += self.x[n + i];
            }
            r[i] -= acc;
        }
        for (k, &j) in self.basic.iter().enumerate() {
            let row = &self.binv[k * m..(k + 1) * m];
            self.x[j] = row.iter().zip(&r).map(|(p, q)| p * q).sum();
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        (self.lo[j] - self.x[j]).max(self.x[j] - self.hi[j]).max(0.0)
    }

    fn run(&mut self) -> Result<LpStatus> {
        let (n, m) = (self.n, self.m);
        let limit = 100 * (n + m) + 10_000;
        let mut bland = false;
        let mut best_measure = f64::INFINITY;
        let mut since_best = 0usize;
        let mut since_reinvert = 0usize;
        let mut rechecks = 0;
        let mut cb = vec![0.0; m];
        let mut y = vec![0.0; m];
        let mut d = vec![0.0; n + m];
        let mut alpha = vec![0.0; m];
        let mut col = vec![0.0; m];
        loop {
            if since_reinvert >= REINVERT_EVERY {
                if !self.reinvert() {
                    return Err(Error::Solver("basis became singular".into()));
                }
                since_reinvert = 0;
            }
            if self.iterations > limit {
                return Err(Error::Solver(format!("simplex iteration limit {limit} reached")));
            }

            // Phase selection and basic costs.
            let mut phase1 = false;
            let mut measure = 0.0;
            for (r, &j) in self.basic.iter().enumerate() {
                cb[r] = if self.x[j] < self.lo[j] - FEAS_TOL {
                    phase1 = true;
                    -1.0
                } else if self.x[j] > self.hi[j] + FEAS_TOL {
                    phase1 = true;
                    1.0
                } else {
                    0.0
                };
                measure += self.infeasibility(j);
            }
            if !phase1 {
                for (r, &j) in self.basic.iter().enumerate() {
                    cb[r] = self.cost[j];
                }
                measure = (0..n + m).map(|j| self.cost[j] * self.x[j]).sum();
            }
            // Stall detection on the phase objective; the phase switch counts
            // as progress.
            let phase_key = if phase1 { measure } else { measure - 1e300 };
            if phase_key < best_measure - 1e-12 * (1.0 + best_measure.abs().min(1e290)) {
                best_measure = phase_key;
                since_best = 0;
            } else {
                since_best += 1;
                if since_best > STALL_LIMIT {
                    bland = true;
                }
            }

            // Duals y = c_B B^-1 and reduced costs.
            y.fill(0.0);
            for (r, &c) in cb.iter().enumerate() {
                if c != 0.0 {
                    let row = &self.binv[r * m..(r + 1) * m];
                    for i in 0..m {
                        y[i] += c * row[i];
                    }
                }
            }
            for j in 0..n {
                d[j] = if phase1 { 0.0 } else { self.cost[j] };
            }
            for i in 0..m {
                d[n + i] = -y[i];
                if y[i] != 0.0 {
                    let row = &self.a[i * n..(i + 1) * n];
                    for j in 0..n {
                        d[j] -= y[i] * row[j];
                    }
                }
            }
            let mut enter = None;
            let mut best_score = 0.0;
            for j in 0..n + m {
                let score = match self.status[j] {
                    VarStatus::Basic => continue,
                    _ if self.lo[j] == self.hi[j] => continue,
                    VarStatus::Lower => -d[j],
                    VarStatus::Upper => d[j],
                };
                if score > OPT_TOL {
                    if bland {
                        enter = Some(j);
                        break;
                    }
                    if score > best_score {
                        best_score = score;
                        enter = Some(j);
                    }
                }
            }
            let Some(q) = enter else {
                // Confirm on a fresh factorization before declaring anything.
                if since_reinvert > 0 && rechecks < 3 {
                    rechecks += 1;
                    if !self.reinvert() {
                        return Err(Error::Solver("basis became singular".into()));
                    }
                    since_reinvert = 0;
                    continue;
                }
                return Ok(if phase1 { LpStatus::Infeasible } else { LpStatus::Optimal });
            };
            let dir = if self.status[q] == VarStatus::Lower { 1.0 } else { -1.0 };

            // alpha = B^-1 a_q; basic values move by -dir * t * alpha.
            self.column(q, &mut col);
            for r in 0..m {
                let row = &self.binv[r * m..(r + 1) * m];
                alpha[r] = row.iter().zip(&col).map(|(p, v)| p * v).sum();
            }
            let range = self.hi[q] - self.lo[q];
            let mut leave: Option<(usize, f64)> = None;
            let mut best_limit = f64::INFINITY;
            for r in 0..m {
                if alpha[r].abs() <= PIVOT_TOL {
                    continue;
                }
                let delta = -dir * alpha[r];
                let j = self.basic[r];
                let v = self.x[j];
                let (limit, target) = if delta < 0.0 {
                    if v > self.hi[j] + FEAS_TOL {
                        ((v - self.hi[j]) / -delta, self.hi[j])
                    } else if v < self.lo[j] - FEAS_TOL || self.lo[j].is_infinite() {
                        continue;
                    } else {
                        ((v - self.lo[j]) / -delta, self.lo[j])
                    }
                } else if v < self.lo[j] - FEAS_TOL {
                    ((self.lo[j] - v) / delta, self.lo[j])
                } else if v > self.hi[j] + FEAS_TOL || self.hi[j].is_infinite() {
                    continue;
                } else {
                    ((self.hi[j] - v) / delta, self.hi[j])
                };
                let limit = limit.max(0.0);
                let better = match leave {
                    None => true,
                    Some((r0, _)) => {
                        if limit < best_limit - 1e-12 {
                            true
                        } else if limit <= best_limit + 1e-12 {
                            if bland {
                                j < self.basic[r0]
                            } else {
                                alpha[r].abs() > alpha[r0].abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    best_limit = limit;
                    leave = Some((r, target));
                }
            }
            let flip = leave.is_none() || range <= best_limit;
            let step = if flip { range } else { best_limit };
            if step.is_infinite() {
                if phase1 {
                    return Err(Error::Solver("unbounded ray while minimizing infeasibility".into()));
                }
                return Ok(LpStatus::Unbounded);
            }
            let leave = if flip { None } else { leave };

            self.iterations += 1;
            since_reinvert += 1;
            self.x[q] += dir * step;
            for r in 0..m {
                if alpha[r] != 0.0 {
                    let j = self.basic[r];
                    self.x[j] -= dir * step * alpha[r];
                }
            }
            match leave {
                None => {
                    // Bound flip of the entering variable.
                    self.status[q] = if dir > 0.0 { VarStatus::Upper } else { VarStatus::Lower };
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                }
                Some((r, target)) => {
                    let out = self.basic[r];
                    self.x[out] = target;
                    self.status[out] = if target == self.lo[out] { VarStatus::Lower } else { VarStatus::Upper };
                    self.status[q] = VarStatus::Basic;
                    self.basic[r] = q;
                    let p = alpha[r];
                    for c in 0..m {
                        self.binv[r * m + c] /= p;
                    }
                    for i in 0..m {
                        if i != r && alpha[i] != 0.0 {
                            let f = alpha[i];
                            for c in 0..m {
                                self.binv[i * m + c] -= f * self.binv[r * m + c];
                            }
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn bound_only_problem() {
        let mut lp = LpModel::new();
        lp.add_var(0.0, 1.0, -1.0).unwrap();
        let res = solve_lp(&mut lp).unwrap();
        assert_eq!(res.status, LpStatus::Optimal);
        assert_eq!(res.x, vec![1.0]);
        assert_eq!(res.objective, -1.0);
    }

    #[test]
    fn covering_row() {
        let mut lp = LpModel::new();
        let x = lp.add_var(0.0, 5.0, 1.0).unwrap();
        let y = lp.add_var(0.0, 5.0, 1.0).unwrap();
        lp.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Ge, 2.0).unwrap();
        let res = solve_lp(&mut lp).unwrap();
        assert!((res.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LpModel::new();
        let x = lp.add_var(0.0, 1.0, 1.0).unwrap();
        lp.add_row(vec![(x, 1.0)], Sense::Ge, 2.0).unwrap();
        assert_eq!(solve_lp(&mut lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LpModel::new();
        let x = lp.add_var(0.0, f64::INFINITY, -1.0).unwrap();
        let y = lp.add_var(0.0, f64::INFINITY, 0.0).unwrap();
        lp.add_row(vec![(x, 1.0), (y, -1.0)], Sense::Le, 1.0).unwrap();
        assert_eq!(solve_lp(&mut lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn rejects_bad_input() {
        let mut lp = LpModel::new();
        assert!(lp.add_var(f64::NEG_INFINITY, 0.0, 0.0).is_err());
        assert!(lp.add_var(1.0, 0.0, 0.0).is_err());
        let x = lp.add_var(0.0, 1.0, 0.0).unwrap();
        assert!(lp.add_row(vec![(x, f64::NAN)], Sense::Le, 0.0).is_err());
        assert!(lp.add_row(vec![(7, 1.0)], Sense::Le, 0.0).is_err());
        assert!(matches!(lp.remove_row(0), Err(Error::Usage(_))));
    }

    #[test]
    fn incremental_rows() {
        let mut lp = LpModel::new();
        let x = lp.add_var(0.0, 10.0, -1.0).unwrap();
        let y = lp.add_var(0.0, 10.0, -2.0).unwrap();
        lp.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Le, 8.0).unwrap();
        let base = solve_lp(&mut lp).unwrap().objective;
        // Redundant row.
        let r = lp.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Le, 100.0).unwrap();
        assert!((solve_lp(&mut lp).unwrap().objective - base).abs() < 1e-9);
        lp.remove_row(r).unwrap();
        // Cutting row.
        lp.add_row(vec![(y, 1.0)], Sense::Le, 3.0).unwrap();
        let cut = solve_lp(&mut lp).unwrap().objective;
        assert!(cut >= base - 1e-9);
        assert!((cut - (-11.0)).abs() < 1e-9);
        lp.remove_row(lp.num_rows() - 1).unwrap();
        assert!((solve_lp(&mut lp).unwrap().objective - base).abs() < 1e-9);
    }

    #[test]
    fn text_dump_lists_everything() {
        let mut lp = LpModel::new();
        let x = lp.add_var(0.0, 1.0, 2.0).unwrap();
        lp.add_row(vec![(x, 3.0)], Sense::Ge, 1.0).unwrap();
        let text = lp.to_text();
        assert!(text.contains("var 0 [0, 1] cost 2"));
        assert!(text.contains("row 0 0:3 >= 1"));
    }

    /// Every vertex of `{lo <= x <= hi, rows}` is the solution of some square
    /// system made of tight rows and tight bounds.
    pub(crate) fn vertex_oracle(lp: &LpModel) -> Option<f64> {
        let n = lp.num_vars();
        let mut cands: Vec<(Vec<f64>, f64)> = Vec::new();
        for row in lp.rows() {
            let mut a = vec![0.0; n];
            for &(j, v) in &row.coeffs {
                a[j] = v;
            }
            cands.push((a, row.rhs));
        }
        for j in 0..n {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            cands.push((a.clone(), lp.bounds(j).0));
            cands.push((a, lp.bounds(j).1));
        }
        let eq_rows: Vec<usize> = (0..lp.num_rows()).filter(|&i| lp.rows()[i].sense == Sense::Eq).collect();
        let k = cands.len();
        let mut best: Option<f64> = None;
        let mut pick = Vec::new();
        fn rec(
            start: usize,
            k: usize,
            n: usize,
            pick: &mut Vec<usize>,
            f: &mut dyn FnMut(&[usize]),
        ) {
            if pick.len() == n {
                f(pick);
                return;
            }
            for c in start..k {
                pick.push(c);
                rec(c + 1, k, n, pick, f);
                pick.pop();
            }
        }
        rec(0, k, n, &mut pick, &mut |set: &[usize]| {
            if !eq_rows.iter().all(|e| set.contains(e)) {
                return;
            }
            let mut mat: Vec<Vec<f64>> = set.iter().map(|&c| {
                let mut r = cands[c].0.clone();
                r.push(cands[c].1);
                r
            }).collect();
            for col in 0..n {
                let piv = (col..n).max_by(|&a, &b| mat[a][col].abs().total_cmp(&mat[b][col].abs())).unwrap();
                if mat[piv][col].abs() < 1e-10 {
                    return;
                }
                mat.swap(col, piv);
                for r in 0..n {
                    if r != col {
                        let f = mat[r][col] / mat[col][col];
                        for c2 in col..=n {
                            mat[r][c2] -= f * mat[col][c2];
                        }
                    }
                }
            }
            let x: Vec<f64> = (0..n).map(|r| mat[r][n] / mat[r][r]).collect();
            if lp.max_violation(&x) <= 1e-9 {
                let obj: f64 = x.iter().zip(lp.objective()).map(|(a, b)| a * b).sum();
                if best.map_or(true, |b| obj < b) {
                    best = Some(obj);
                }
            }
        });
        best
    }

    pub(crate) fn random_lp(rng: &mut SplitMix64) -> LpModel {
        let mut lp = LpModel::new();
        for _ in 0..5 {
            let hi = rng.uniform(1.0, 10.0);
            lp.add_var(0.0, hi, rng.uniform(-5.0, 5.0)).unwrap();
        }
        for _ in 0..5 {
            let mut coeffs = Vec::new();
            for j in 0..5 {
                if rng.next_f64() < 0.8 {
                    coeffs.push((j, (rng.uniform(-5.0, 5.0) * 4.0).round() / 4.0));
                }
            }
            let sense = match rng.next_u64() % 5 {
                0 => Sense::Eq,
                1 | 2 => Sense::Ge,
                _ => Sense::Le,
            };
            lp.add_row(coeffs, sense, rng.uniform(-5.0, 15.0)).unwrap();
        }
        lp
    }

    #[test]
    fn matches_vertex_enumeration() {
        let mut rng = SplitMix64::new(2024);
        let mut feasible = 0;
        for case in 0..200 {
            let mut lp = random_lp(&mut rng);
            let oracle = vertex_oracle(&lp);
            let res = solve_lp(&mut lp).unwrap();
            match oracle {
                Some(best) => {
                    feasible += 1;
                    assert_eq!(res.status, LpStatus::Optimal, "case {case}\n{}", lp.to_text());
                    assert!((res.objective - best).abs() <= 1e-7, "case {case}: {} vs {best}", res.objective);
                }
                None => assert_eq!(res.status, LpStatus::Infeasible, "case {case}"),
            }
        }
        assert!(feasible > 50, "only {feasible} feasible cases");
    }

    #[test]
    fn warm_and_cold_agree_after_bound_changes() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..100 {
            let mut lp = random_lp(&mut rng);
            let _ = solve_lp(&mut lp).unwrap();
            let j = (rng.next_u64() % 5) as usize;
            let (lo, hi) = lp.bounds(j);
            let mid = 0.5 * (lo + hi);
            lp.set_bounds(j, lo, mid).unwrap();
            let warm = solve_lp(&mut lp).unwrap();
            let mut cold = lp.clone();
            cold.reset_basis();
            let cold = solve_lp(&mut cold).unwrap();
            assert_eq!(warm.status, cold.status);
            if warm.status == LpStatus::Optimal {
                assert!((warm.objective - cold.objective).abs() <= 1e-7);
            }
        }
    }

    #[test]
    fn deterministic() {
        let mut rng = SplitMix64::new(3);
        let lp = random_lp(&mut rng);
        let a = solve_lp(&mut lp.clone()).unwrap();
        let b = solve_lp(&mut lp.clone()).unwrap();
        assert_eq!(a, b);
    }
}
