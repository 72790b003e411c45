//! Alternating mathheuristic: a multistart loop over the k-best spanning
//! trees under center distances, each start refined by an inner loop that
//! alternates a fixed-weight MST with a fixed-tree placement.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::preprocess::compute_bounds;
use crate::report::{relative_gap, BoundSample, Counters, Method, SolveReport, SolveStatus, StartRecord};
use crate::spanning_tree::{kbest_stream, mst, Tree};
use crate::subproblem::{solve_points, GeometricSolution, SubproblemOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicOptions {
    /// Starts to try; `None` means `100 |E|`.
    pub max_trees: Option<usize>,
    /// Consecutive non-improving starts before stopping; `None` means `|E|`.
    pub no_improve_cap: Option<usize>,
    pub inner_max_iter: usize,
    pub subproblem: SubproblemOptions,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        HeuristicOptions {
            max_trees: None,
            no_improve_cap: None,
            inner_max_iter: 100,
            subproblem: SubproblemOptions::default(),
        }
    }
}

impl HeuristicOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_trees == Some(0) || self.no_improve_cap == Some(0) || self.inner_max_iter == 0 {
            return Err(Error::Usage("heuristic limits must be positive".into()));
        }
        self.subproblem.validate()
    }

    pub fn max_trees_for(&self, inst: &Instance) -> usize {
        self.max_trees.unwrap_or(100 * inst.num_edges())
    }

    pub fn no_improve_cap_for(&self, inst: &Instance) -> usize {
        self.no_improve_cap.unwrap_or(inst.num_edges())
    }
}

/// Final iterate of the inner loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialOptimum {
    pub tree: Tree,
    pub geo: GeometricSolution,
    pub objective: f64,
    /// Placement solves after the start tree.
    pub inner_iterations: usize,
    /// Weights `u-bar` after the last update.
    pub weights: Vec<f64>,
    /// Objective of each evaluated tree, beginning with the start tree.
    pub sequence: Vec<f64>,
    pub stopped_on_equal_weight: bool,
}

impl PartialOptimum {
    /// Largest increase between consecutive objectives (0 when monotone).
    pub fn max_increase(&self) -> f64 {
        self.sequence.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// Memoized placement solves keyed by tree.
struct Evaluator<'a> {
    inst: &'a Instance,
    opts: &'a SubproblemOptions,
    cache: HashMap<Tree, GeometricSolution>,
    solves: usize,
}

impl<'a> Evaluator<'a> {
    fn new(inst: &'a Instance, opts: &'a SubproblemOptions) -> Self {
        Evaluator {
            inst,
            opts,
            cache: HashMap::new(),
            solves: 0,
        }
    }

    fn get(&mut self, tree: &Tree) -> Result<GeometricSolution> {
        if let Some(g) = self.cache.get(tree) {
            return Ok(g.clone());
        }
        let g = solve_points(self.inst, tree, self.opts)?;
        self.solves += 1;
        self.cache.insert(tree.clone(), g.clone());
        Ok(g)
    }
}

fn inner(eval: &mut Evaluator, start: &Tree, lower: &[f64], max_iter: usize) -> Result<PartialOptimum> {
    let inst = eval.inst;
    let m = inst.num_edges();
    let mut weights = lower.to_vec();
    let mut tree = start.clone();
    let mut geo = eval.get(&tree)?;
    let mut sequence = vec![geo.objective];
    let mut iterations = 0;
    let mut equal_weight = false;
    loop {
        for (&e, &len) in tree.edge_ids().iter().zip(&geo.lengths) {
            weights[e] = len;
        }
        if iterations >= max_iter {
            break;
        }
        let next = mst(inst, &weights, &[], &[])?;
        if next == tree {
            break;
        }
        let (wn, wt) = (next.weight(&weights), tree.weight(&weights));
        if wn >= wt - 1e-12 * wt.abs().max(1.0) {
            equal_weight = true;
            log::debug!("inner loop stopped on a tie between two trees of weight {wt}");
            break;
        }
        tree = next;
        let previous = geo.objective;
        geo = eval.get(&tree)?;
        if geo.objective > previous {
            log::debug!("inner objective rose from {previous} to {}", geo.objective);
        }
        sequence.push(geo.objective);
        iterations += 1;
    }
    debug_assert_eq!(weights.len(), m);
    Ok(PartialOptimum {
        objective: geo.objective,
        tree,
        geo,
        inner_iterations: iterations,
        weights,
        sequence,
        stopped_on_equal_weight: equal_weight,
    })
}

/// Inner loop from `start`: weights begin at the minimum edge lengths and
/// are overwritten on the edges of each evaluated tree.
pub fn inner_loop(inst: &Instance, start: &Tree, opts: &HeuristicOptions) -> Result<PartialOptimum> {
    opts.validate()?;
    Tree::new(inst, start.edge_ids().to_vec())?;
    let lower: Vec<f64> = compute_bounds(inst)?.iter().map(|b| b.lower).collect();
    let mut eval = Evaluator::new(inst, &opts.subproblem);
    inner(&mut eval, start, &lower, opts.inner_max_iter)
}

/// Re-solves both blocks at `p`. Returns the excess of the final tree over
/// an MST under the final weights, and the relative improvement a fresh
/// placement solve finds.
pub fn partial_optimality_gaps(inst: &Instance, p: &PartialOptimum, opts: &SubproblemOptions) -> Result<(f64, f64)> {
    let best = mst(inst, &p.weights, &[], &[])?;
    let tree_gap = p.tree.weight(&p.weights) - best.weight(&p.weights);
    let fresh = solve_points(inst, &p.tree, opts)?;
    let place_gap = (p.objective - fresh.objective) / p.objective.abs().max(1.0);
    Ok((tree_gap, place_gap))
}

/// Multistart over the k-best trees by center distance.
pub fn multistart(inst: &Instance, opts: &HeuristicOptions) -> Result<SolveReport> {
    opts.validate()?;
    let clock = Instant::now();
    let bounds = compute_bounds(inst)?;
    let lower: Vec<f64> = bounds.iter().map(|b| b.lower).collect();
    let lb = mst(inst, &lower, &[], &[])?.weight(&lower);
    let centers = inst.center_distances();
    let center_tree = mst(inst, &centers, &[], &[])?;
    let max_trees = opts.max_trees_for(inst);
    let cap = opts.no_improve_cap_for(inst);

    let mut eval = Evaluator::new(inst, &opts.subproblem);
    let center_value = eval.get(&center_tree)?.objective;
    let mut best: Option<PartialOptimum> = None;
    let mut records = Vec::new();
    let mut trace = Vec::new();
    let mut counters = Counters::default();
    let mut stale = 0;
    for (i, (start, _)) in kbest_stream(inst, &centers)?.take(max_trees).enumerate() {
        let p = inner(&mut eval, &start, &lower, opts.inner_max_iter)?;
        counters.starts += 1;
        counters.inner_iterations_total += p.inner_iterations;
        records.push(StartRecord {
            start: i,
            inner_iterations: p.inner_iterations,
            objective: p.objective,
            sequence: p.sequence.clone(),
            stopped_on_equal_weight: p.stopped_on_equal_weight,
        });
        let improves = match &best {
            None => true,
            Some(b) => p.objective < b.objective || (p.objective == b.objective && p.tree < b.tree),
        };
        let strictly = best.as_ref().is_none_or(|b| p.objective < b.objective);
        if improves {
            best = Some(p);
        }
        let ub = best.as_ref().map_or(f64::INFINITY, |b| b.objective);
        trace.push(BoundSample { lb: lb.min(ub), ub });
        if strictly {
            stale = 0;
        } else {
            stale += 1;
            if stale >= cap {
                break;
            }
        }
    }
    let best = best.ok_or_else(|| Error::Solver("no start tree was generated".into()))?;
    counters.iterations = counters.inner_iterations_total;
    counters.subproblem_solves = eval.solves;
    let bound = lb.min(best.objective);
    let gap = relative_gap(bound, best.objective);
    Ok(SolveReport {
        instance: inst.name().to_string(),
        method: Method::Heuristic,
        status: SolveStatus::Feasible,
        objective: best.objective,
        bound,
        gap,
        gap0: gap,
        tree_labels: best.tree.labels(inst),
        tree_is_center_mst: best.tree == center_tree,
        tree: best.tree,
        points: best.geo,
        counters,
        wall_time: clock.elapsed().as_secs_f64(),
        trace,
        mst_lower_bound: lb,
        center_mst_value: center_value,
        removed_edges: 0,
        forced_edges: 0,
        starts: records,
    })
}
