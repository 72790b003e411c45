//! Edge length bounds and the cycle/cut reduction rules.
//!
//! An edge whose endpoints can be joined by a path of edges that are all
//! surely shorter (max length below its min length) is never in an optimal
//! tree. An edge that is surely shorter than every other edge crossing some
//! cut is in every optimal tree.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{pair_bounds, EdgeBounds};
use crate::instance::Instance;
use crate::spanning_tree::UnionFind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub bounds: Vec<EdgeBounds>,
    /// Edge ids that belong to no optimal tree, sorted.
    pub removed: Vec<usize>,
    /// Edge ids that belong to every optimal tree, sorted.
    pub forced: Vec<usize>,
}

impl Reduction {
    /// A reduction that removes and forces nothing.
    pub fn trivial(bounds: Vec<EdgeBounds>) -> Self {
        Reduction {
            bounds,
            removed: Vec::new(),
            forced: Vec::new(),
        }
    }

    pub fn lower(&self) -> Vec<f64> {
        self.bounds.iter().map(|b| b.lower).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.bounds.iter().map(|b| b.upper).collect()
    }
}

/// `pair_bounds` for every edge, indexed by edge id.
pub fn compute_bounds(inst: &Instance) -> Result<Vec<EdgeBounds>> {
    inst.edges()
        .iter()
        .map(|&(v, w)| pair_bounds(inst.neighborhood(v), inst.neighborhood(w), inst.norm()))
        .collect()
}

fn joined_without(
    inst: &Instance,
    skip: usize,
    active: &[bool],
    keep: impl Fn(usize) -> bool,
) -> bool {
    let (a, b) = inst.edge(skip);
    let mut uf = UnionFind::new(inst.num_vertices());
    for (e, &(v, w)) in inst.edges().iter().enumerate() {
        if e != skip && active[e] && keep(e) {
            uf.union(v, w);
            if uf.same(a, b) {
                return true;
            }
        }
    }
    false
}

/// Applies both rules until neither changes anything. Ties never trigger.
pub fn reduce(inst: &Instance, bounds: &[EdgeBounds]) -> Reduction {
    let m = inst.num_edges();
    let mut active = vec![true; m];
    let mut forced = vec![false; m];
    loop {
        let mut changed = false;
        let snapshot = active.clone();
        for e in 0..m {
            if !snapshot[e] || forced[e] {
                continue;
            }
            let floor = bounds[e].lower;
            if joined_without(inst, e, &snapshot, |f| bounds[f].upper < floor) {
                active[e] = false;
                changed = true;
            }
        }
        for e in 0..m {
            if !active[e] || forced[e] {
                continue;
            }
            let ceiling = bounds[e].upper;
            if !joined_without(inst, e, &active, |f| bounds[f].lower <= ceiling) {
                forced[e] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Reduction {
        bounds: bounds.to_vec(),
        removed: (0..m).filter(|&e| !active[e]).collect(),
        forced: (0..m).filter(|&e| forced[e]).collect(),
    }
}

/// Bounds followed by [`reduce`].
pub fn preprocess(inst: &Instance) -> Result<Reduction> {
    let bounds = compute_bounds(inst)?;
    Ok(reduce(inst, &bounds))
}
