//! Exact separation of subtour elimination constraints
//! `x(E(S)) <= |S| - 1`.
//!
//! With `b_v = deg_x(v) / 2 - 1`, source arcs of capacity `max(0, b_v)`,
//! sink arcs of capacity `max(0, -b_v)` and capacity `x_e / 2` on both
//! directions of each edge, the cut whose source side is `S` costs
//! `sum(max(0, b)) + |S| - x(E(S))`. A set is violated exactly when its cut
//! is below `sum(max(0, b)) + 1`. Forcing vertex `k` into `S` and every
//! smaller vertex out of it covers each set once, by its smallest member.

use std::collections::BTreeSet;
use std::collections::VecDeque;

use crate::instance::Instance;
use crate::spanning_tree::UnionFind;

pub const SEC_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ViolatedSet {
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    /// `x(E(S))`.
    pub inside: f64,
    /// `x(E(S)) - (|S| - 1)`.
    pub violation: f64,
}

/// Edge ids with both ends in `set` (a membership mask).
pub fn inner_edges(inst: &Instance, in_set: &[bool]) -> Vec<usize> {
    inst.edges()
        .iter()
        .enumerate()
        .filter(|(_, &(v, w))| in_set[v] && in_set[w])
        .map(|(e, _)| e)
        .collect()
}

fn make_set(inst: &Instance, x: &[f64], vertices: Vec<usize>) -> ViolatedSet {
    let mut mask = vec![false; inst.num_vertices()];
    for &v in &vertices {
        mask[v] = true;
    }
    let inside: f64 = inner_edges(inst, &mask).iter().map(|&e| x[e]).sum();
    let violation = inside - (vertices.len() as f64 - 1.0);
    ViolatedSet {
        vertices,
        inside,
        violation,
    }
}

/// Connected components of the support graph `{e : x_e > tol}` whose
/// inner weight exceeds `|S| - 1`. Exact when `x` is integral.
pub fn component_cuts(inst: &Instance, x: &[f64]) -> Vec<ViolatedSet> {
    let n = inst.num_vertices();
    let mut uf = UnionFind::new(n);
    for (e, &(v, w)) in inst.edges().iter().enumerate() {
        if x[e] > SEC_TOL {
            uf.union(v, w);
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        let r = uf.find(v);
        groups[r].push(v);
    }
    groups
        .into_iter()
        .filter(|g| g.len() >= 2 && g.len() < n)
        .map(|g| make_set(inst, x, g))
        .filter(|s| s.violation > SEC_TOL)
        .collect()
}

/// All sets found by min cut, one per forced vertex at most, deduplicated
/// and sorted. Empty exactly when no subtour constraint is violated by
/// more than [`SEC_TOL`].
pub fn separate_sec(inst: &Instance, x: &[f64]) -> Vec<ViolatedSet> {
    let n = inst.num_vertices();
    let mut deg = vec![0.0; n];
    for (e, &(v, w)) in inst.edges().iter().enumerate() {
        deg[v] += x[e];
        deg[w] += x[e];
    }
    let b: Vec<f64> = deg.iter().map(|d| d / 2.0 - 1.0).collect();
    let plus_total: f64 = b.iter().map(|&v| v.max(0.0)).sum();
    let big = 1.0 + plus_total + x.iter().sum::<f64>();

    let s = n;
    let t = n + 1;
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    for k in 0..n.saturating_sub(1) {
        let mut net = Dinic::new(n + 2);
        for v in 0..n {
            let src = if v == k { big } else { b[v].max(0.0) };
            let snk = if v < k { big } else { (-b[v]).max(0.0) };
            if src > 0.0 {
                net.add_arc(s, v, src);
            }
            if snk > 0.0 {
                net.add_arc(v, t, snk);
            }
        }
        for (e, &(v, w)) in inst.edges().iter().enumerate() {
            if x[e] > 0.0 {
                net.add_edge(v, w, x[e] / 2.0);
            }
        }
        let flow = net.max_flow(s, t);
        if flow >= plus_total + 1.0 - SEC_TOL {
            continue;
        }
        let side = net.source_side(s);
        let set: Vec<usize> = (0..n).filter(|&v| side[v]).collect();
        let sec = make_set(inst, x, set.clone());
        if set.len() >= 2 && set.len() < n && sec.violation > SEC_TOL && found.insert(set) {
            out.push(sec);
        }
    }
    out
}

/// Max flow by shortest augmenting paths in a layered network.
struct Dinic {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    level: Vec<i64>,
    next: Vec<usize>,
}

const FLOW_EPS: f64 = 1e-12;

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
            level: vec![0; n],
            next: vec![0; n],
        }
    }

    fn add_arc(&mut self, a: usize, b: usize, c: f64) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(0.0);
    }

    fn add_edge(&mut self, a: usize, b: usize, c: f64) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(c);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.fill(-1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &a in &self.head[v] {
                let w = self.to[a];
                if self.cap[a] > FLOW_EPS && self.level[w] < 0 {
                    self.level[w] = self.level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, v: usize, t: usize, pushed: f64) -> f64 {
        if v == t {
            return pushed;
        }
        while self.next[v] < self.head[v].len() {
            let a = self.head[v][self.next[v]];
            let w = self.to[a];
            if self.cap[a] > FLOW_EPS && self.level[w] == self.level[v] + 1 {
                let got = self.dfs(w, t, pushed.min(self.cap[a]));
                if got > 0.0 {
                    self.cap[a] -= got;
                    self.cap[a ^ 1] += got;
                    return got;
                }
            }
            self.next[v] += 1;
        }
        0.0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut flow = 0.0;
        while self.bfs(s, t) {
            self.next.fill(0);
            loop {
                let got = self.dfs(s, t, f64::INFINITY);
                if got <= 0.0 {
                    break;
                }
                flow += got;
            }
        }
        flow
    }

    /// Vertices reachable from `s` in the residual network.
    fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &a in &self.head[v] {
                let w = self.to[a];
                if self.cap[a] > FLOW_EPS && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}
