//! Exact solvers: Benders-type optimality cuts on a spanning tree master,
//! either in the classical outer loop (master solved to integrality, then a
//! new cut) or embedded in a single branch-and-cut search.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::EdgeBounds;
use crate::instance::Instance;
use crate::lp::{Basis, LpModel, LpStatus, Sense};
use crate::preprocess::{compute_bounds, reduce, Reduction};
use crate::report::{relative_gap, BoundSample, Counters, Method, SolveReport, SolveStatus};
use crate::sec::{component_cuts, separate_sec};
use crate::spanning_tree::{enumerate_all, mst, Tree, DEFAULT_ENUMERATION_CAP};
use crate::subproblem::{solve_points, GeometricSolution, SubproblemOptions};

const INTEGRAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Absolute tolerance on `UB - LB`.
    pub eps: f64,
    /// Seconds; `None` for no limit.
    pub time_limit: Option<f64>,
    /// Outer iterations of the classical loop.
    pub max_iterations: usize,
    /// Stop once the relative gap is at most this.
    pub gap_limit: Option<f64>,
    pub preprocess: bool,
    pub enumeration_cap: f64,
    pub subproblem: SubproblemOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            eps: 1e-6,
            time_limit: None,
            max_iterations: 100_000,
            gap_limit: None,
            preprocess: true,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            subproblem: SubproblemOptions::default(),
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps >= 0.0) {
            return Err(Error::Usage("eps must be nonnegative".into()));
        }
        if let Some(t) = self.time_limit {
            if !(t >= 0.0) {
                return Err(Error::Usage("time limit must be nonnegative".into()));
            }
        }
        self.subproblem.validate()
    }
}

/// `sum theta >= value + sum_{e in T} U_e (x_e - 1) + sum_{e not in T} u_e x_e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BendersCut {
    pub source_tree: Tree,
    pub value: f64,
    /// Coefficient of each `x_e` on the right-hand side.
    pub coefficients: Vec<f64>,
    /// Constant part of the right-hand side.
    pub constant: f64,
}

impl BendersCut {
    pub fn rhs(&self, x: &[f64]) -> f64 {
        self.constant + self.coefficients.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }
}

pub fn make_cut(tree: &Tree, geo: &GeometricSolution, bounds: &[EdgeBounds]) -> BendersCut {
    let mut coefficients: Vec<f64> = bounds.iter().map(|b| b.lower).collect();
    let mut constant = geo.objective;
    for &e in tree.edge_ids() {
        coefficients[e] = bounds[e].upper;
        constant -= bounds[e].upper;
    }
    BendersCut {
        source_tree: tree.clone(),
        value: geo.objective,
        coefficients,
        constant,
    }
}

/// Globally valid row kept in the pool, in the LP only while it matters.
struct PooledRow {
    coeffs: Vec<(usize, f64)>,
    sense: Sense,
    rhs: f64,
    active: bool,
}

impl PooledRow {
    fn violation(&self, x: &[f64]) -> f64 {
        let act: f64 = self.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
        match self.sense {
            Sense::Le => act - self.rhs,
            Sense::Ge => self.rhs - act,
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

/// Relaxed master: `x_e` at column `e`, `theta_e` at column `m + e`.
/// Subtour and Benders rows live in a pool; rows that stop binding are
/// dropped from the LP once the pool grows past `purge_above`, and return
/// when violated again.
struct Master {
    lp: LpModel,
    m: usize,
    root_lo: Vec<f64>,
    root_hi: Vec<f64>,
    secs: HashSet<Vec<usize>>,
    cuts: HashSet<Tree>,
    pool: Vec<PooledRow>,
    /// Pool index of each LP row (`None` for the fixed rows).
    row_pool: Vec<Option<usize>>,
    purge_above: usize,
}

impl Master {
    fn new(inst: &Instance, red: &Reduction) -> Result<Self> {
        let m = inst.num_edges();
        let mut lp = LpModel::new();
        let mut root_lo = vec![0.0; m];
        let mut root_hi = vec![1.0; m];
        for &e in &red.removed {
            root_hi[e] = 0.0;
        }
        for &e in &red.forced {
            root_lo[e] = 1.0;
        }
        for e in 0..m {
            lp.add_var(root_lo[e], root_hi[e], 0.0)?;
        }
        for _ in 0..m {
            lp.add_var(0.0, f64::INFINITY, 1.0)?;
        }
        let n = inst.num_vertices() as f64;
        lp.add_row((0..m).map(|e| (e, 1.0)).collect(), Sense::Eq, n - 1.0)?;
        for (e, b) in red.bounds.iter().enumerate() {
            lp.add_row(vec![(m + e, 1.0), (e, -b.lower)], Sense::Ge, 0.0)?;
            lp.add_row(vec![(m + e, 1.0), (e, -b.upper)], Sense::Ge, b.lower - b.upper)?;
        }
        let fixed = lp.num_rows();
        Ok(Master {
            lp,
            m,
            root_lo,
            root_hi,
            secs: HashSet::new(),
            cuts: HashSet::new(),
            pool: Vec::new(),
            row_pool: vec![None; fixed],
            purge_above: 2 * m + 20,
        })
    }

    fn add_pooled(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Result<()> {
        self.lp.add_row(coeffs.clone(), sense, rhs)?;
        self.row_pool.push(Some(self.pool.len()));
        self.pool.push(PooledRow {
            coeffs,
            sense,
            rhs,
            active: true,
        });
        Ok(())
    }

    fn add_sec(&mut self, inst: &Instance, set: &[usize]) -> Result<bool> {
        if !self.secs.insert(set.to_vec()) {
            return Ok(false);
        }
        let mut mask = vec![false; inst.num_vertices()];
        for &v in set {
            mask[v] = true;
        }
        let coeffs = crate::sec::inner_edges(inst, &mask).into_iter().map(|e| (e, 1.0)).collect();
        self.add_pooled(coeffs, Sense::Le, set.len() as f64 - 1.0)?;
        Ok(true)
    }

    fn add_cut(&mut self, cut: &BendersCut) -> Result<bool> {
        if !self.cuts.insert(cut.source_tree.clone()) {
            return Ok(false);
        }
        let m = self.m;
        let mut coeffs: Vec<(usize, f64)> = (0..m).map(|e| (m + e, 1.0)).collect();
        coeffs.extend(cut.coefficients.iter().enumerate().map(|(e, &a)| (e, -a)));
        self.add_pooled(coeffs, Sense::Ge, cut.constant)?;
        Ok(true)
    }

    /// Puts violated pool rows back into the LP; returns how many.
    fn activate_violated(&mut self, x: &[f64]) -> Result<usize> {
        let mut count = 0;
        for p in 0..self.pool.len() {
            let row = &self.pool[p];
            if row.active || row.violation(x) <= 1e-9 * row.rhs.abs().max(1.0) {
                continue;
            }
            self.lp.add_row(row.coeffs.clone(), row.sense, row.rhs)?;
            self.pool[p].active = true;
            self.row_pool.push(Some(p));
            count += 1;
        }
        Ok(count)
    }

    /// Drops pool rows that are slack at `x` when too many are active.
    fn purge(&mut self, x: &[f64]) -> Result<()> {
        let active = self.row_pool.iter().filter(|p| p.is_some()).count();
        if active <= self.purge_above {
            return Ok(());
        }
        let keep: Vec<bool> = self
            .row_pool
            .iter()
            .map(|p| match p {
                None => true,
                Some(p) => {
                    let row = &self.pool[*p];
                    row.violation(x) > -1e-6 * row.rhs.abs().max(1.0)
                }
            })
            .collect();
        self.lp.retain_rows(&keep)?;
        let mut i = 0;
        self.row_pool.retain(|p| {
            i += 1;
            if !keep[i - 1] {
                if let Some(p) = p {
                    self.pool[*p].active = false;
                }
            }
            keep[i - 1]
        });
        Ok(())
    }

    fn apply_fixings(&mut self, fixings: &[(usize, f64)]) -> Result<()> {
        for e in 0..self.m {
            self.lp.set_bounds(e, self.root_lo[e], self.root_hi[e])?;
        }
        for &(e, v) in fixings {
            self.lp.set_bounds(e, v, v)?;
        }
        Ok(())
    }
}

enum NodeOutcome {
    Infeasible,
    /// LP bound at or above the cutoff.
    Pruned(f64),
    /// Integral spanning tree with its LP value.
    Integral(Tree, f64),
    Fractional(f64, Vec<f64>, Option<Basis>),
}

#[derive(Clone)]
struct Node {
    bound: f64,
    seq: u64,
    fixings: Vec<(usize, f64)>,
    basis: Option<Basis>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap order reversed: smallest bound first, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    inst: &'a Instance,
    opts: &'a SolveOptions,
    red: Reduction,
    master: Master,
    cache: HashMap<Tree, GeometricSolution>,
    counters: Counters,
    start: Instant,
    ub: f64,
    incumbent: Tree,
    lb: f64,
    trace: Vec<BoundSample>,
    mst_lower: f64,
    center_value: f64,
    center_tree: Tree,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, opts: &'a SolveOptions) -> Result<Self> {
        opts.validate()?;
        let start = Instant::now();
        let bounds = compute_bounds(inst)?;
        let red = if opts.preprocess {
            reduce(inst, &bounds)
        } else {
            Reduction::trivial(bounds)
        };
        let lower = red.lower();
        let mst_lower = mst(inst, &lower, &[], &[])?.weight(&lower);
        let center_tree = mst(inst, &inst.center_distances(), &[], &[])?;
        let master = Master::new(inst, &red)?;
        let mut search = Search {
            inst,
            opts,
            red,
            master,
            cache: HashMap::new(),
            counters: Counters::default(),
            start,
            ub: f64::INFINITY,
            incumbent: center_tree.clone(),
            lb: mst_lower,
            trace: Vec::new(),
            mst_lower,
            center_value: 0.0,
            center_tree: center_tree.clone(),
        };
        search.center_value = search.evaluate(&center_tree)?.objective;
        search.offer(&center_tree)?;
        Ok(search)
    }

    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn out_of_time(&self) -> bool {
        self.opts.time_limit.is_some_and(|t| self.elapsed() >= t)
    }

    fn gap_reached(&self) -> bool {
        self.opts
            .gap_limit
            .is_some_and(|g| relative_gap(self.lb, self.ub) <= g)
    }

    fn closed(&self) -> bool {
        self.ub - self.lb <= self.opts.eps
    }

    fn evaluate(&mut self, tree: &Tree) -> Result<&GeometricSolution> {
        if !self.cache.contains_key(tree) {
            let geo = solve_points(self.inst, tree, &self.opts.subproblem)?;
            self.counters.subproblem_solves += 1;
            self.cache.insert(tree.clone(), geo);
        }
        Ok(&self.cache[tree])
    }

    /// Evaluates `tree`, updates the incumbent and returns its length.
    fn offer(&mut self, tree: &Tree) -> Result<f64> {
        let value = self.evaluate(tree)?.objective;
        if value < self.ub || (value == self.ub && tree < &self.incumbent) {
            self.ub = value;
            self.incumbent = tree.clone();
        }
        Ok(value)
    }

    fn add_cut_for(&mut self, tree: &Tree) -> Result<bool> {
        let geo = self.evaluate(tree)?.clone();
        let cut = make_cut(tree, &geo, &self.red.bounds);
        let added = self.master.add_cut(&cut)?;
        if added {
            self.counters.benders_cuts += 1;
        }
        Ok(added)
    }

    fn sample(&mut self) {
        self.trace.push(BoundSample {
            lb: self.lb,
            ub: self.ub,
        });
    }

    /// Cutting-plane loop at one node. With `embedded`, integral trees are
    /// evaluated and cut off by Benders cuts while they are underestimated.
    fn process_node(&mut self, node: &Node, cutoff: &dyn Fn(&Self) -> f64, embedded: bool) -> Result<NodeOutcome> {
        self.master.apply_fixings(&node.fixings)?;
        if let Some(b) = &node.basis {
            self.master.lp.set_basis(b);
        }
        let m = self.master.m;
        loop {
            let res = self.master.lp.solve()?;
            self.counters.lp_solves += 1;
            match res.status {
                LpStatus::Infeasible => return Ok(NodeOutcome::Infeasible),
                LpStatus::Unbounded => return Err(Error::Solver("master relaxation is unbounded".into())),
                LpStatus::Optimal => {}
            }
            let bound = res.objective;
            if bound >= cutoff(self) {
                self.master.purge(&res.x)?;
                return Ok(NodeOutcome::Pruned(bound));
            }
            if self.master.activate_violated(&res.x)? > 0 {
                continue;
            }
            let x = &res.x[..m];
            let integral = x.iter().all(|v| (v - v.round()).abs() <= INTEGRAL_TOL);
            let mut sets = component_cuts(self.inst, x);
            if sets.is_empty() && !integral {
                sets = separate_sec(self.inst, x);
            }
            let mut added = 0;
            for s in &sets {
                if self.master.add_sec(self.inst, &s.vertices)? {
                    added += 1;
                }
            }
            self.counters.sec_cuts += added;
            if added > 0 {
                continue;
            }
            if !integral {
                self.master.purge(&res.x)?;
                return Ok(NodeOutcome::Fractional(bound, x.to_vec(), self.master.lp.basis()));
            }
            let ids: Vec<usize> = (0..m).filter(|&e| x[e] > 0.5).collect();
            let tree = Tree::new(self.inst, ids)?;
            self.master.purge(&res.x)?;
            if !embedded {
                return Ok(NodeOutcome::Integral(tree, bound));
            }
            self.counters.iterations += 1;
            let value = self.offer(&tree)?;
            if bound < value - self.opts.eps && self.add_cut_for(&tree)? {
                continue;
            }
            return Ok(NodeOutcome::Integral(tree, bound));
        }
    }

    /// Most fractional edge; ties by larger max length, then smaller id.
    fn branching_edge(&self, x: &[f64]) -> usize {
        let mut best = usize::MAX;
        let mut best_dist = f64::INFINITY;
        for (e, &v) in x.iter().enumerate() {
            if (v - v.round()).abs() <= INTEGRAL_TOL {
                continue;
            }
            let dist = (v - 0.5).abs();
            let better = if best == usize::MAX || dist < best_dist - 1e-12 {
                true
            } else if dist <= best_dist + 1e-12 {
                self.red.bounds[e].upper > self.red.bounds[best].upper
            } else {
                false
            };
            if better {
                best = e;
                best_dist = dist;
            }
        }
        best
    }

    fn report(&mut self, method: Method, status: SolveStatus, gap0: f64) -> Result<SolveReport> {
        let tree = self.incumbent.clone();
        let points = self.evaluate(&tree)?.clone();
        let bound = self.lb.min(self.ub);
        Ok(SolveReport {
            instance: self.inst.name().to_string(),
            method,
            status,
            objective: self.ub,
            bound,
            gap: relative_gap(bound, self.ub),
            gap0,
            tree_labels: tree.labels(self.inst),
            tree_is_center_mst: tree == self.center_tree,
            tree,
            points,
            counters: self.counters.clone(),
            wall_time: self.elapsed(),
            trace: self.trace.clone(),
            mst_lower_bound: self.mst_lower,
            center_mst_value: self.center_value,
            removed_edges: self.red.removed.len(),
            forced_edges: self.red.forced.len(),
            starts: Vec::new(),
        })
    }

    /// Best-first branch-and-cut with Benders cuts at integral points.
    fn branch_and_cut(&mut self) -> Result<SolveReport> {
        self.add_cut_for(&self.incumbent.clone())?;
        self.sample();
        if self.out_of_time() {
            let gap0 = relative_gap(self.lb, self.ub);
            return self.report(Method::ExactBc, SolveStatus::TimeLimit, gap0);
        }
        let eps = self.opts.eps;
        let cutoff = move |s: &Self| s.ub - eps;
        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        heap.push(Node {
            bound: self.lb,
            seq,
            fixings: Vec::new(),
            basis: None,
        });
        let mut gap0 = None;
        // Smallest bound among nodes discarded against the cutoff.
        let mut pruned_min = f64::INFINITY;
        let mut status = SolveStatus::Optimal;
        while let Some(node) = heap.pop() {
            self.lb = self.lb.max(node.bound.min(pruned_min)).min(self.ub);
            if self.closed() {
                pruned_min = pruned_min.min(node.bound);
                heap.push(node);
                break;
            }
            if self.out_of_time() || self.gap_reached() {
                status = if self.out_of_time() { SolveStatus::TimeLimit } else { SolveStatus::GapLimit };
                heap.push(node);
                break;
            }
            if node.bound >= cutoff(self) {
                pruned_min = pruned_min.min(node.bound);
                continue;
            }
            self.counters.nodes += 1;
            let outcome = self.process_node(&node, &cutoff, true)?;
            match outcome {
                NodeOutcome::Infeasible => {}
                NodeOutcome::Pruned(b) => pruned_min = pruned_min.min(b),
                NodeOutcome::Integral(_, b) => pruned_min = pruned_min.min(b),
                NodeOutcome::Fractional(bound, x, basis) => {
                    let e = self.branching_edge(&x);
                    for value in [1.0, 0.0] {
                        seq += 1;
                        let mut fixings = node.fixings.clone();
                        fixings.push((e, value));
                        heap.push(Node {
                            bound,
                            seq,
                            fixings,
                            basis: basis.clone(),
                        });
                    }
                }
            }
            if gap0.is_none() {
                let root_bound = match heap.peek() {
                    Some(n) => n.bound.min(pruned_min),
                    None => pruned_min,
                };
                self.lb = self.lb.max(root_bound.min(self.ub));
                gap0 = Some(relative_gap(self.lb, self.ub));
            }
            self.sample();
        }
        let open_min = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
        self.lb = self.lb.max(open_min.min(pruned_min)).min(self.ub);
        if status == SolveStatus::Optimal && !self.closed() && !heap.is_empty() {
            status = SolveStatus::TimeLimit;
        }
        self.sample();
        let gap0 = gap0.unwrap_or_else(|| relative_gap(self.lb, self.ub));
        self.report(Method::ExactBc, status, gap0)
    }

    /// Solves the current master to integrality. Returns `None` on timeout.
    ///
    /// The leaves of the previous master search partition the tree space
    /// and their bounds stay valid when cuts are added, so each solve starts
    /// from that frontier instead of the root.
    fn solve_master(&mut self, leaves: &mut Vec<Node>, seq: &mut u64) -> Result<Option<(Tree, f64)>> {
        let mut best: Option<(Tree, f64)> = None;
        let cutoff = |_: &Self| f64::INFINITY;
        let mut heap: BinaryHeap<Node> = if leaves.is_empty() {
            BinaryHeap::from(vec![Node {
                bound: f64::NEG_INFINITY,
                seq: 0,
                fixings: Vec::new(),
                basis: None,
            }])
        } else {
            leaves.drain(..).collect()
        };
        while let Some(node) = heap.pop() {
            if best.as_ref().is_some_and(|(_, v)| node.bound >= *v - 1e-9) {
                leaves.push(node);
                continue;
            }
            if self.out_of_time() {
                leaves.push(node);
                leaves.extend(heap);
                return Ok(None);
            }
            self.counters.nodes += 1;
            match self.process_node(&node, &cutoff, false)? {
                NodeOutcome::Infeasible | NodeOutcome::Pruned(_) => {}
                NodeOutcome::Integral(tree, value) => {
                    let better = match &best {
                        None => true,
                        Some((t, v)) => value < *v - 1e-12 || (value <= *v + 1e-12 && tree < *t),
                    };
                    if better {
                        best = Some((tree, value));
                    }
                    leaves.push(Node {
                        bound: value,
                        basis: self.master.lp.basis(),
                        ..node
                    });
                }
                NodeOutcome::Fractional(bound, x, basis) => {
                    if best.as_ref().is_some_and(|(_, v)| bound >= *v - 1e-9) {
                        leaves.push(Node { bound, basis, ..node });
                        continue;
                    }
                    let e = self.branching_edge(&x);
                    for value in [1.0, 0.0] {
                        *seq += 1;
                        let mut fixings = node.fixings.clone();
                        fixings.push((e, value));
                        heap.push(Node {
                            bound,
                            seq: *seq,
                            fixings,
                            basis: basis.clone(),
                        });
                    }
                }
            }
        }
        match best {
            Some(b) => Ok(Some(b)),
            None => Err(Error::Infeasible("master problem has no spanning tree".into())),
        }
    }

    /// Outer loop: evaluate, cut, re-solve the master.
    fn iterative(&mut self) -> Result<SolveReport> {
        let mut current = self.incumbent.clone();
        let mut gap0 = None;
        self.sample();
        if self.out_of_time() {
            let g = relative_gap(self.lb, self.ub);
            return self.report(Method::ExactIter, SolveStatus::TimeLimit, g);
        }
        let mut status = SolveStatus::Optimal;
        let mut leaves = Vec::new();
        let mut seq = 0;
        loop {
            self.counters.iterations += 1;
            self.offer(&current)?;
            if self.closed() {
                break;
            }
            self.add_cut_for(&current)?;
            let Some((tree, theta)) = self.solve_master(&mut leaves, &mut seq)? else {
                status = SolveStatus::TimeLimit;
                break;
            };
            self.lb = self.lb.max(theta).min(self.ub);
            self.sample();
            if gap0.is_none() {
                gap0 = Some(relative_gap(self.lb.min(self.ub), self.ub));
            }
            if self.closed() {
                break;
            }
            if self.out_of_time() {
                status = SolveStatus::TimeLimit;
                break;
            }
            if self.gap_reached() {
                status = SolveStatus::GapLimit;
                break;
            }
            if self.counters.iterations >= self.opts.max_iterations {
                status = SolveStatus::IterationLimit;
                break;
            }
            current = tree;
        }
        self.lb = self.lb.min(self.ub);
        self.sample();
        let gap0 = gap0.unwrap_or_else(|| relative_gap(self.lb, self.ub));
        self.report(Method::ExactIter, status, gap0)
    }
}

pub fn solve_branch_and_cut(inst: &Instance, opts: &SolveOptions) -> Result<SolveReport> {
    Search::new(inst, opts)?.branch_and_cut()
}

pub fn solve_iterative(inst: &Instance, opts: &SolveOptions) -> Result<SolveReport> {
    Search::new(inst, opts)?.iterative()
}

/// Proven optimum by trying every spanning tree, skipping trees whose sum
/// of minimum lengths already reaches the incumbent.
pub fn solve_enumerate(inst: &Instance, opts: &SolveOptions) -> Result<SolveReport> {
    let mut s = Search::new(inst, opts)?;
    let trees = enumerate_all(inst, opts.enumeration_cap)?;
    let lower = s.red.lower();
    let removed: HashSet<usize> = s.red.removed.iter().copied().collect();
    let forced = s.red.forced.clone();
    let mut status = SolveStatus::Optimal;
    for tree in trees {
        if s.out_of_time() {
            status = SolveStatus::TimeLimit;
            break;
        }
        if tree.edge_ids().iter().any(|e| removed.contains(e)) || !forced.iter().all(|&e| tree.contains(e)) {
            continue;
        }
        s.counters.nodes += 1;
        if tree.weight(&lower) >= s.ub {
            continue;
        }
        // Enumerated trees are not revisited, so skip the cache.
        let geo = solve_points(inst, &tree, &opts.subproblem)?;
        s.counters.subproblem_solves += 1;
        if geo.objective < s.ub {
            s.ub = geo.objective;
            s.incumbent = tree.clone();
            s.cache.insert(tree, geo);
        }
    }
    s.lb = if status == SolveStatus::Optimal { s.ub } else { s.lb };
    s.sample();
    let gap0 = relative_gap(s.lb, s.ub);
    s.report(Method::Enumerate, status, gap0)
}

/// Dispatches the exact methods.
pub fn solve_exact(inst: &Instance, method: Method, opts: &SolveOptions) -> Result<SolveReport> {
    match method {
        Method::ExactBc => solve_branch_and_cut(inst, opts),
        Method::ExactIter => solve_iterative(inst, opts),
        Method::Enumerate => solve_enumerate(inst, opts),
        Method::Heuristic => Err(Error::Usage("the heuristic is not an exact method".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Neighborhood;
    use crate::instance::{example1, generate, GeneratorConfig};
    use crate::report::approx_eq;
    use crate::spanning_tree::enumerate_all;

    fn zero_radii(inst: &Instance) -> Instance {
        inst.map_neighborhoods(|nb| Neighborhood::ball(nb.center().clone(), 0.0)).unwrap()
    }

    #[test]
    fn cut_is_tight_at_its_tree_and_matches_swap_bound() {
        let inst = generate(&GeneratorConfig::new(5, 2, 2, 4)).unwrap();
        let bounds = compute_bounds(&inst).unwrap();
        let tree = mst(&inst, &inst.center_distances(), &[], &[]).unwrap();
        let geo = solve_points(&inst, &tree, &SubproblemOptions::default()).unwrap();
        let cut = make_cut(&tree, &geo, &bounds);
        let x = tree.incidence(inst.num_edges());
        assert!((cut.rhs(&x) - geo.objective).abs() < 1e-12);
        // Swap one tree edge for a non-tree edge that reconnects the tree.
        let e1 = tree.edge_ids()[0];
        let rest: Vec<usize> = tree.edge_ids()[1..].to_vec();
        let e2 = (0..inst.num_edges())
            .find(|&e| !tree.contains(e) && Tree::new(&inst, [rest.clone(), vec![e]].concat()).is_ok())
            .unwrap();
        let swapped = Tree::new(&inst, [rest, vec![e2]].concat()).unwrap();
        let expect = geo.objective - bounds[e1].upper + bounds[e2].lower;
        assert!((cut.rhs(&swapped.incidence(inst.num_edges())) - expect).abs() < 1e-9);
    }

    #[test]
    fn cuts_are_valid_on_every_tree() {
        for seed in 0..3 {
            let inst = generate(&GeneratorConfig::new(5, 2, 1 + seed as u32, seed)).unwrap();
            let bounds = compute_bounds(&inst).unwrap();
            let opts = SubproblemOptions::default();
            let trees: Vec<Tree> = enumerate_all(&inst, 1e6).unwrap().collect();
            assert_eq!(trees.len(), 125);
            let values: Vec<f64> = trees.iter().map(|t| solve_points(&inst, t, &opts).unwrap().objective).collect();
            for src in trees.iter().step_by(25) {
                let geo = solve_points(&inst, src, &opts).unwrap();
                let cut = make_cut(src, &geo, &bounds);
                for (t, &u) in trees.iter().zip(&values) {
                    assert!(cut.rhs(&t.incidence(inst.num_edges())) <= u + 1e-6);
                }
            }
        }
    }

    #[test]
    fn example_instance_optimum() {
        let inst = example1();
        let expect = Tree::from_labels(&inst, &[(1, 3), (1, 4), (2, 5), (4, 5), (5, 6), (6, 7), (6, 8)]).unwrap();
        let opts = SolveOptions::default();
        for report in [solve_branch_and_cut(&inst, &opts).unwrap(), solve_iterative(&inst, &opts).unwrap()] {
            assert_eq!(report.status, SolveStatus::Optimal);
            assert_eq!(report.tree, expect, "{:?}", report.method);
            assert!(report.points.points[0].euclidean(&report.points.points[2]) < 1e-2);
            report.validate(&inst).unwrap();
            assert!(report.bound >= report.mst_lower_bound - 1e-9);
            assert!(report.objective <= report.center_mst_value + 1e-12);
        }
    }

    #[test]
    fn radius_zero_closes_after_one_iteration() {
        for seed in 0..5 {
            let inst = zero_radii(&generate(&GeneratorConfig::new(7, 2, 1, seed)).unwrap());
            let opts = SolveOptions {
                preprocess: false,
                ..SolveOptions::default()
            };
            let rep = solve_iterative(&inst, &opts).unwrap();
            assert_eq!(rep.counters.iterations, 1, "seed {seed}");
            assert!(rep.objective - rep.bound <= 1e-6);
            assert!(rep.tree_is_center_mst);
        }
    }

    #[test]
    fn methods_agree_with_enumeration() {
        for seed in 0..6 {
            let n = 5 + (seed % 2) as usize;
            let inst = generate(&GeneratorConfig::new(n, 2, 1 + (seed % 4) as u32, seed)).unwrap();
            let oracle = solve_enumerate(
                &inst,
                &SolveOptions {
                    preprocess: false,
                    ..SolveOptions::default()
                },
            )
            .unwrap();
            let bc = solve_branch_and_cut(&inst, &SolveOptions::default()).unwrap();
            let it = solve_iterative(&inst, &SolveOptions::default()).unwrap();
            assert!(approx_eq(bc.objective, oracle.objective, 1e-6), "seed {seed}: {} vs {}", bc.objective, oracle.objective);
            assert!(approx_eq(it.objective, oracle.objective, 1e-6), "seed {seed}: {} vs {}", it.objective, oracle.objective);
            for rep in [&bc, &it] {
                assert!(rep.trace.windows(2).all(|w| w[1].lb >= w[0].lb - 1e-9 * w[0].ub && w[1].ub <= w[0].ub + 1e-12), "{:?}", rep.method);
                assert!(rep.counters.nodes >= 1);
                rep.validate(&inst).unwrap();
            }
        }
    }

    #[test]
    fn zero_time_limit_returns_center_tree() {
        let inst = generate(&GeneratorConfig::new(7, 2, 3, 9)).unwrap();
        let opts = SolveOptions {
            time_limit: Some(0.0),
            ..SolveOptions::default()
        };
        for method in [Method::ExactBc, Method::ExactIter, Method::Enumerate] {
            let rep = solve_exact(&inst, method, &opts).unwrap();
            assert_eq!(rep.status, SolveStatus::TimeLimit, "{method}");
            assert!(rep.tree_is_center_mst);
            assert_eq!(rep.objective, rep.center_mst_value);
            rep.validate(&inst).unwrap();
        }
    }
}
