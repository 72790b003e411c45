//! Solver reports shared by the exact methods, the heuristic and the oracle.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::spanning_tree::Tree;
use crate::subproblem::{evaluate, GeometricSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactBc,
    ExactIter,
    Heuristic,
    Enumerate,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::ExactBc, Method::ExactIter, Method::Heuristic, Method::Enumerate];

    pub fn name(self) -> &'static str {
        match self {
            Method::ExactBc => "exact-bc",
            Method::ExactIter => "exact-iter",
            Method::Heuristic => "heuristic",
            Method::Enumerate => "enumerate",
        }
    }

    pub fn is_exact(self) -> bool {
        self != Method::Heuristic
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    TimeLimit,
    GapLimit,
    IterationLimit,
    /// Heuristic run that stopped normally; no optimality claim.
    Feasible,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    pub nodes: usize,
    pub sec_cuts: usize,
    pub benders_cuts: usize,
    /// Outer iterations, or integral points evaluated in branch-and-cut.
    pub iterations: usize,
    pub lp_solves: usize,
    pub subproblem_solves: usize,
    pub starts: usize,
    pub inner_iterations_total: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSample {
    pub lb: f64,
    pub ub: f64,
}

/// One start of the multistart heuristic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub start: usize,
    pub inner_iterations: usize,
    pub objective: f64,
    /// Objective after each inner iteration, beginning with the start tree.
    pub sequence: Vec<f64>,
    pub stopped_on_equal_weight: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub instance: String,
    pub method: Method,
    pub status: SolveStatus,
    /// Best tree length found (UB).
    pub objective: f64,
    /// Proven lower bound (LB).
    pub bound: f64,
    /// `(UB - LB) / UB`.
    pub gap: f64,
    /// Gap after the root node or the first iteration.
    pub gap0: f64,
    pub tree: Tree,
    /// Tree edges by 1-based vertex label.
    pub tree_labels: Vec<(usize, usize)>,
    pub points: GeometricSolution,
    pub counters: Counters,
    pub wall_time: f64,
    pub trace: Vec<BoundSample>,
    /// Weight of the MST under the minimum edge lengths.
    pub mst_lower_bound: f64,
    /// Tree length of the center-distance MST after placement.
    pub center_mst_value: f64,
    /// Whether the returned tree equals the center-distance MST.
    pub tree_is_center_mst: bool,
    pub removed_edges: usize,
    pub forced_edges: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub starts: Vec<StartRecord>,
}

impl SolveReport {
    /// Re-checks the tree, the placements and the objective against `inst`.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        let tree = Tree::new(inst, self.tree.edge_ids().to_vec())?;
        let (_, total) = evaluate(inst, &tree, &self.points.points)?;
        if (total - self.objective).abs() > 1e-9 * self.objective.abs().max(1.0) {
            return Err(Error::validation(
                "objective",
                format!("reported {} but the points give {}", self.objective, total),
            ));
        }
        if self.bound > self.objective + 1e-6 * self.objective.abs().max(1.0) {
            return Err(Error::validation("bound", "lower bound exceeds the objective"));
        }
        Ok(())
    }
}

/// `(ub - lb) / ub`, falling back to the absolute gap when `ub` is ~0.
pub fn relative_gap(lb: f64, ub: f64) -> f64 {
    let diff = (ub - lb).max(0.0);
    if ub.abs() < 1e-12 {
        diff
    } else {
        diff / ub.abs()
    }
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}
