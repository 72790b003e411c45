//! Spanning trees: Kruskal with forced/excluded edges, the k-best stream
//! used to seed the multistart heuristic, and exhaustive enumeration.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

/// Default refusal threshold for [`enumerate_all`].
pub const DEFAULT_ENUMERATION_CAP: f64 = 1e7;

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

/// A spanning tree as a sorted list of edge ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tree(Vec<usize>);

impl Tree {
    /// Checks that `edge_ids` form a spanning tree of `inst`.
    pub fn new(inst: &Instance, mut edge_ids: Vec<usize>) -> Result<Self> {
        edge_ids.sort_unstable();
        edge_ids.dedup();
        let n = inst.num_vertices();
        if edge_ids.len() != n - 1 {
            return Err(Error::Usage(format!(
                "a spanning tree on {n} vertices needs {} edges, got {}",
                n - 1,
                edge_ids.len()
            )));
        }
        let mut uf = UnionFind::new(n);
        for &e in &edge_ids {
            if e >= inst.num_edges() {
                return Err(Error::Usage(format!("edge id {e} out of range")));
            }
            let (a, b) = inst.edge(e);
            if !uf.union(a, b) {
                return Err(Error::Usage(format!("edge {e} closes a cycle")));
            }
        }
        Ok(Tree(edge_ids))
    }

    /// Builds a tree from 1-based endpoint labels, e.g. `[(1, 3), (1, 4)]`.
    pub fn from_labels(inst: &Instance, labels: &[(usize, usize)]) -> Result<Self> {
        let ids = labels
            .iter()
            .map(|&(a, b)| {
                inst.edge_id(a - 1, b - 1)
                    .ok_or_else(|| Error::Usage(format!("no edge {a}-{b}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Tree::new(inst, ids)
    }

    pub(crate) fn from_sorted(edge_ids: Vec<usize>) -> Self {
        debug_assert!(edge_ids.windows(2).all(|w| w[0] < w[1]));
        Tree(edge_ids)
    }

    pub fn edge_ids(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    /// 0/1 incidence vector over all edges.
    pub fn incidence(&self, num_edges: usize) -> Vec<f64> {
        let mut x = vec![0.0; num_edges];
        for &e in &self.0 {
            x[e] = 1.0;
        }
        x
    }

    pub fn weight(&self, weights: &[f64]) -> f64 {
        self.0.iter().map(|&e| weights[e]).sum()
    }

    /// Endpoints as 1-based labels, handy for reports.
    pub fn labels(&self, inst: &Instance) -> Vec<(usize, usize)> {
        self.0
            .iter()
            .map(|&e| {
                let (a, b) = inst.edge(e);
                (a + 1, b + 1)
            })
            .collect()
    }
}

fn check_weights(inst: &Instance, weights: &[f64]) -> Result<()> {
    if weights.len() != inst.num_edges() {
        return Err(Error::Usage(format!(
            "expected {} edge weights, got {}",
            inst.num_edges(),
            weights.len()
        )));
    }
    if let Some(e) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::Usage(format!("weight of edge {e} is not a finite nonnegative number")));
    }
    Ok(())
}

/// Edge ids sorted by weight, ties by id.
fn weight_order(weights: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));
    order
}

fn constrained_kruskal(
    n: usize,
    edges: &[(usize, usize)],
    order: &[usize],
    forced: &[usize],
    excluded: &[bool],
) -> Option<Vec<usize>> {
    let mut uf = UnionFind::new(n);
    let mut chosen = Vec::with_capacity(n - 1);
    for &e in forced {
        let (a, b) = edges[e];
        if excluded[e] || !uf.union(a, b) {
            return None;
        }
        chosen.push(e);
    }
    for &e in order {
        if chosen.len() == n - 1 {
            break;
        }
        if excluded[e] {
            continue;
        }
        let (a, b) = edges[e];
        if uf.union(a, b) {
            chosen.push(e);
        }
    }
    if chosen.len() != n - 1 {
        return None;
    }
    chosen.sort_unstable();
    Some(chosen)
}

/// Minimum-weight spanning tree containing every `forced` edge and none of
/// the `excluded` ones. Ties go to the smaller edge id.
pub fn mst(inst: &Instance, weights: &[f64], forced: &[usize], excluded: &[usize]) -> Result<Tree> {
    check_weights(inst, weights)?;
    let mut banned = vec![false; inst.num_edges()];
    for &e in excluded {
        banned[e] = true;
    }
    let order = weight_order(weights);
    constrained_kruskal(inst.num_vertices(), inst.edges(), &order, forced, &banned)
        .map(Tree::from_sorted)
        .ok_or_else(|| {
            Error::Infeasible("no spanning tree satisfies the forced/excluded edge sets".into())
        })
}

#[derive(Debug, Clone)]
struct Candidate {
    weight: f64,
    edges: Vec<usize>,
    forced: Vec<usize>,
    excluded: Vec<usize>,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Reversed so that BinaryHeap pops the lightest, then lexicographically
    // smallest, tree first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .weight
            .total_cmp(&self.weight)
            .then_with(|| other.edges.cmp(&self.edges))
    }
}

/// Distinct spanning trees in nondecreasing weight.
///
/// Each emitted tree `T` with free edges `e_1..e_k` (ordered by weight)
/// spawns the children "contains `e_1..e_{i-1}`, avoids `e_i`", inheriting
/// the constraints of the subproblem `T` came from. All pending children
/// share one priority queue, so the output is globally sorted.
pub struct KBestTrees<'a> {
    inst: &'a Instance,
    weights: Vec<f64>,
    order: Vec<usize>,
    queue: BinaryHeap<Candidate>,
    seen: HashSet<Vec<usize>>,
}

impl<'a> KBestTrees<'a> {
    fn push(&mut self, forced: Vec<usize>, excluded: Vec<usize>) {
        let mut banned = vec![false; self.inst.num_edges()];
        for &e in &excluded {
            banned[e] = true;
        }
        if let Some(edges) = constrained_kruskal(
            self.inst.num_vertices(),
            self.inst.edges(),
            &self.order,
            &forced,
            &banned,
        ) {
            let weight = edges.iter().map(|&e| self.weights[e]).sum();
            self.queue.push(Candidate {
                weight,
                edges,
                forced,
                excluded,
            });
        }
    }
}

impl Iterator for KBestTrees<'_> {
    type Item = (Tree, f64);

    fn next(&mut self) -> Option<Self::Item> {
        while let Some(cand) = self.queue.pop() {
            let mut free: Vec<usize> = cand
                .edges
                .iter()
                .copied()
                .filter(|e| !cand.forced.contains(e))
                .collect();
            free.sort_by(|&a, &b| self.weights[a].total_cmp(&self.weights[b]).then(a.cmp(&b)));
            for i in 0..free.len() {
                let mut forced = cand.forced.clone();
                forced.extend_from_slice(&free[..i]);
                let mut excluded = cand.excluded.clone();
                excluded.push(free[i]);
                self.push(forced, excluded);
            }
            if self.seen.insert(cand.edges.clone()) {
                return Some((Tree::from_sorted(cand.edges), cand.weight));
            }
        }
        None
    }
}

/// Lazily enumerates spanning trees of `inst` by increasing `weights`.
pub fn kbest_stream<'a>(inst: &'a Instance, weights: &[f64]) -> Result<KBestTrees<'a>> {
    check_weights(inst, weights)?;
    let mut stream = KBestTrees {
        inst,
        weights: weights.to_vec(),
        order: weight_order(weights),
        queue: BinaryHeap::new(),
        seen: HashSet::new(),
    };
    stream.push(Vec::new(), Vec::new());
    Ok(stream)
}

/// The `limit` cheapest spanning trees (fewer if the graph has fewer).
pub fn kbest(inst: &Instance, weights: &[f64], limit: usize) -> Result<Vec<(Tree, f64)>> {
    if limit == 0 {
        return Err(Error::Usage("limit must be at least 1".into()));
    }
    Ok(kbest_stream(inst, weights)?.take(limit).collect())
}

/// Number of spanning trees by the matrix-tree theorem (floating point).
pub fn count_spanning_trees(inst: &Instance) -> f64 {
    let n = inst.num_vertices();
    let m = n - 1;
    // Laplacian with the last row and column removed.
    let mut lap = vec![0.0f64; m * m];
    for &(a, b) in inst.edges() {
        for (x, y) in [(a, b), (b, a)] {
            if x < m {
                lap[x * m + x] += 1.0;
                if y < m {
                    lap[x * m + y] -= 1.0;
                }
            }
        }
    }
    let mut det = 1.0;
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| lap[i * m + col].abs().total_cmp(&lap[j * m + col].abs()))
            .unwrap();
        if lap[piv * m + col].abs() < 1e-12 {
            return 0.0;
        }
        if piv != col {
            for k in 0..m {
                lap.swap(piv * m + k, col * m + k);
            }
            det = -det;
        }
        let p = lap[col * m + col];
        det *= p;
        for i in col + 1..m {
            let f = lap[i * m + col] / p;
            if f != 0.0 {
                for k in col..m {
                    lap[i * m + k] -= f * lap[col * m + k];
                }
            }
        }
    }
    det.round()
}

/// Every spanning tree of `inst`, each exactly once.
///
/// Refuses (reporting the count) when the matrix-tree count exceeds `cap`.
pub fn enumerate_all(inst: &Instance, cap: f64) -> Result<SpanningTrees<'_>> {
    let count = count_spanning_trees(inst);
    if count > cap {
        return Err(Error::Capability(format!(
            "graph has {count:.0} spanning trees, above the enumeration cap of {cap:.0}"
        )));
    }
    Ok(SpanningTrees {
        inst,
        stack: vec![(0, Vec::new())],
    })
}

/// Depth-first include/exclude search over edges in id order. Every frame
/// on the stack can still be completed to a spanning tree, so each leaf is
/// a distinct tree.
pub struct SpanningTrees<'a> {
    inst: &'a Instance,
    stack: Vec<(usize, Vec<usize>)>,
}

impl SpanningTrees<'_> {
    fn still_connects(&self, next: usize, chosen: &[usize]) -> bool {
        let n = self.inst.num_vertices();
        let mut uf = UnionFind::new(n);
        let mut parts = n;
        for e in chosen.iter().copied().chain(next..self.inst.num_edges()) {
            let (a, b) = self.inst.edge(e);
            if uf.union(a, b) {
                parts -= 1;
            }
        }
        parts == 1
    }

    fn stays_acyclic(&self, chosen: &[usize]) -> bool {
        let mut uf = UnionFind::new(self.inst.num_vertices());
        chosen.iter().all(|&e| {
            let (a, b) = self.inst.edge(e);
            uf.union(a, b)
        })
    }
}

impl Iterator for SpanningTrees<'_> {
    type Item = Tree;

    fn next(&mut self) -> Option<Tree> {
        let target = self.inst.num_vertices() - 1;
        while let Some((next, chosen)) = self.stack.pop() {
            if chosen.len() == target {
                return Some(Tree::from_sorted(chosen));
            }
            if next >= self.inst.num_edges() {
                continue;
            }
            if self.still_connects(next + 1, &chosen) {
                self.stack.push((next + 1, chosen.clone()));
            }
            let mut with = chosen;
            with.push(next);
            if self.stays_acyclic(&with) {
                self.stack.push((next + 1, with));
            }
        }
        None
    }
}
