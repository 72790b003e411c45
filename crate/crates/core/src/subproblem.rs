//! Fixed-tree placement problem: put every `y_v` inside `N_v` so that the
//! total length of the given tree is minimal.
//!
//! Edge norms are smoothed (`sqrt(|z|^2 + mu^2)` for L2, per coordinate for
//! L1, log-sum-exp for LInf) and `mu` is divided by 10 per stage down to the
//! floor. Each stage minimizes `t f_mu + barrier` by damped Newton, with
//! `t = (barrier terms) / mu`. The Hessian follows the tree, so one Newton
//! system is solved by eliminating vertices from the leaves to the root.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance_unchecked, Neighborhood, Norm, Point};
use crate::instance::Instance;
use crate::spanning_tree::Tree;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubproblemOptions {
    /// Bound on the projected-gradient residual, divided by the coordinate scale.
    pub tolerance: f64,
    /// Budget of Newton steps over all stages.
    pub max_iterations: usize,
    /// First smoothing level; `None` means `1e-2` times the coordinate scale.
    pub smoothing_start: Option<f64>,
    pub smoothing_floor: f64,
}

impl Default for SubproblemOptions {
    fn default() -> Self {
        SubproblemOptions {
            tolerance: 1e-8,
            max_iterations: 50_000,
            smoothing_start: None,
            smoothing_floor: 1e-9,
        }
    }
}

impl SubproblemOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Usage("subproblem tolerance must be positive".into()));
        }
        if !(self.smoothing_floor > 0.0) {
            return Err(Error::Usage("smoothing floor must be positive".into()));
        }
        if let Some(start) = self.smoothing_start {
            if !(start > self.smoothing_floor) {
                return Err(Error::Usage(
                    "smoothing start must exceed the smoothing floor".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricSolution {
    pub points: Vec<Point>,
    /// Length of each tree edge, in the order of `Tree::edge_ids`.
    pub lengths: Vec<f64>,
    pub objective: f64,
    /// Scaled projected-gradient norm of `f_mu` at the floor level. Where
    /// points merge this is dominated by rounding (about `ulp(y) / mu`).
    pub residual: f64,
    pub iterations: usize,
    /// Residual within tolerance, or the last stage was centered to full
    /// precision, which bounds the gap to the optimum by about `n mu`.
    pub converged: bool,
    /// Best exact objective after each smoothing stage.
    pub stage_objectives: Vec<f64>,
}

impl GeometricSolution {
    /// Map from edge id to length, 0 for edges outside the tree.
    pub fn lengths_by_edge(&self, tree: &Tree, num_edges: usize) -> Vec<f64> {
        let mut out = vec![0.0; num_edges];
        for (&e, &len) in tree.edge_ids().iter().zip(&self.lengths) {
            out[e] = len;
        }
        out
    }
}

/// Width of the bounding box of all neighborhoods, at least 1.
pub fn coordinate_scale(inst: &Instance) -> f64 {
    let d = inst.dimension();
    let mut extent: f64 = 0.0;
    for k in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for nb in inst.vertices() {
            let c = nb.center().0[k];
            lo = lo.min(c - nb.size());
            hi = hi.max(c + nb.size());
        }
        extent = extent.max(hi - lo);
    }
    extent.max(1.0)
}

/// Lengths of the tree edges at `points` and their sum.
pub fn evaluate(inst: &Instance, tree: &Tree, points: &[Point]) -> Result<(Vec<f64>, f64)> {
    check_points(inst, points, 1e-6)?;
    if tree.edge_ids().iter().any(|&e| e >= inst.num_edges()) {
        return Err(Error::Usage("tree refers to an edge outside the instance".into()));
    }
    let lengths: Vec<f64> = tree
        .edge_ids()
        .iter()
        .map(|&e| {
            let (v, w) = inst.edge(e);
            distance_unchecked(&points[v].0, &points[w].0, inst.norm())
        })
        .collect();
    let total = lengths.iter().sum();
    Ok((lengths, total))
}

fn check_points(inst: &Instance, points: &[Point], tol: f64) -> Result<()> {
    if points.len() != inst.num_vertices() {
        return Err(Error::Usage(format!(
            "expected {} points, got {}",
            inst.num_vertices(),
            points.len()
        )));
    }
    for (v, (p, nb)) in points.iter().zip(inst.vertices()).enumerate() {
        if p.dim() != inst.dimension() {
            return Err(Error::DimensionMismatch {
                expected: inst.dimension(),
                got: p.dim(),
            });
        }
        if !p.is_finite() || !nb.contains(p, tol) {
            return Err(Error::validation(
                format!("points[{v}]"),
                format!("point lies outside the neighborhood of vertex {}", v + 1),
            ));
        }
    }
    Ok(())
}

/// Smoothed tree length at `points` and its gradient (flattened by vertex).
pub fn smoothed_objective(
    inst: &Instance,
    tree: &Tree,
    points: &[Point],
    mu: f64,
) -> Result<(f64, Vec<f64>)> {
    let prob = Problem::new(inst, tree)?;
    if points.len() != prob.n || points.iter().any(|p| p.dim() != prob.d) {
        return Err(Error::Usage("point array does not match the instance".into()));
    }
    let y: Vec<f64> = points.iter().flat_map(|p| p.0.iter().copied()).collect();
    let mut grad = vec![0.0; y.len()];
    let value = prob.smooth_value_grad(&y, mu, &mut grad);
    Ok((value, grad))
}

pub fn solve_points(inst: &Instance, tree: &Tree, opts: &SubproblemOptions) -> Result<GeometricSolution> {
    let start: Vec<Point> = inst.vertices().iter().map(|nb| nb.center().clone()).collect();
    solve_from(inst, tree, start, opts)
}

/// Same as [`solve_points`] from another start. The start is projected onto
/// the neighborhoods and pulled slightly toward the centers.
pub fn solve_points_with_start(
    inst: &Instance,
    tree: &Tree,
    start: &[Point],
    opts: &SubproblemOptions,
) -> Result<GeometricSolution> {
    if start.len() != inst.num_vertices() || start.iter().any(|p| p.dim() != inst.dimension()) {
        return Err(Error::Usage("start does not match the instance".into()));
    }
    let pulled = start
        .iter()
        .zip(inst.vertices())
        .map(|(p, nb)| {
            let mut q = p.0.clone();
            nb.project_in_place(&mut q);
            for (x, c) in q.iter_mut().zip(&nb.center().0) {
                *x = c + 0.999 * (*x - c);
            }
            Point(q)
        })
        .collect();
    solve_from(inst, tree, pulled, opts)
}

fn solve_from(
    inst: &Instance,
    tree: &Tree,
    start: Vec<Point>,
    opts: &SubproblemOptions,
) -> Result<GeometricSolution> {
    opts.validate()?;
    let prob = Problem::new(inst, tree)?;
    let scale = coordinate_scale(inst);
    let mut y: Vec<f64> = start.into_iter().flat_map(|p| p.0).collect();
    let mut ws = Workspace::new(prob.n, prob.d, prob.edges.len());

    let mut best_y = y.clone();
    let mut best = prob.exact_value(&y);
    let mut stage_objectives = Vec::new();
    let mut iterations = 0usize;
    let mut budget_hit = false;

    let floor = opts.smoothing_floor;
    let mut mu = opts.smoothing_start.unwrap_or(1e-2 * scale).max(floor);
    let nu = prob.barrier_terms.max(1.0);
    let mut certified = false;
    loop {
        let t = nu / mu;
        let (steps, centered) = prob.center(&mut y, mu, t, &mut ws, opts.max_iterations - iterations);
        iterations += steps;
        let value = prob.exact_value(&y);
        if value < best {
            best = value;
            best_y.copy_from_slice(&y);
        }
        stage_objectives.push(best);
        if iterations >= opts.max_iterations {
            budget_hit = true;
            break;
        }
        if mu <= floor {
            certified = centered && best_y == y;
            break;
        }
        mu = (mu / 10.0).max(floor);
    }
    let residual = prob.residual(&best_y, floor) / scale;

    let points: Vec<Point> = best_y.chunks(prob.d).map(|c| Point(c.to_vec())).collect();
    let lengths: Vec<f64> = prob
        .edges
        .iter()
        .map(|&(v, w)| distance_unchecked(&points[v].0, &points[w].0, prob.norm))
        .collect();
    let objective = lengths.iter().sum();
    Ok(GeometricSolution {
        points,
        lengths,
        objective,
        residual,
        iterations,
        converged: !budget_hit && (certified || residual <= opts.tolerance),
        stage_objectives,
    })
}

const MAX_CENTERING_STEPS: usize = 200;

struct Problem<'a> {
    n: usize,
    d: usize,
    norm: Norm,
    nbs: &'a [Neighborhood],
    /// Tree edges as vertex pairs, in tree order.
    edges: Vec<(usize, usize)>,
    /// Vertices in breadth-first order from vertex 0.
    order: Vec<usize>,
    parent: Vec<usize>,
    parent_edge: Vec<usize>,
    free: Vec<bool>,
    barrier_terms: f64,
}

impl<'a> Problem<'a> {
    fn new(inst: &'a Instance, tree: &Tree) -> Result<Self> {
        let n = inst.num_vertices();
        if tree.len() + 1 != n || tree.edge_ids().iter().any(|&e| e >= inst.num_edges()) {
            return Err(Error::Usage("input is not a spanning tree of the instance".into()));
        }
        let edges: Vec<(usize, usize)> = tree.edge_ids().iter().map(|&e| inst.edge(e)).collect();
        let mut adj = vec![Vec::new(); n];
        for (i, &(v, w)) in edges.iter().enumerate() {
            adj[v].push((w, i));
            adj[w].push((v, i));
        }
        let mut order = Vec::with_capacity(n);
        let mut parent = vec![usize::MAX; n];
        let mut parent_edge = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[0] = true;
        order.push(0);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &(w, i) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = v;
                    parent_edge[w] = i;
                    order.push(w);
                }
            }
        }
        if order.len() != n {
            return Err(Error::Usage("input is not a spanning tree of the instance".into()));
        }
        let d = inst.dimension();
        let free: Vec<bool> = inst.vertices().iter().map(|nb| !nb.is_singleton()).collect();
        let barrier_terms = inst
            .vertices()
            .iter()
            .zip(&free)
            .filter(|(_, &f)| f)
            .map(|(nb, _)| match nb {
                Neighborhood::Ball { .. } => 1.0,
                Neighborhood::Box { .. } => 2.0 * d as f64,
            })
            .sum();
        Ok(Problem {
            n,
            d,
            norm: inst.norm(),
            nbs: inst.vertices(),
            edges,
            order,
            parent,
            parent_edge,
            free,
            barrier_terms,
        })
    }

    fn exact_value(&self, y: &[f64]) -> f64 {
        let d = self.d;
        self.edges
            .iter()
            .map(|&(v, w)| distance_unchecked(&y[v * d..(v + 1) * d], &y[w * d..(w + 1) * d], self.norm))
            .sum()
    }

    fn smooth_value_grad(&self, y: &[f64], mu: f64, grad: &mut [f64]) -> f64 {
        let d = self.d;
        grad.fill(0.0);
        let mut z = vec![0.0; d];
        let mut g = vec![0.0; d];
        let mut total = 0.0;
        for &(v, w) in &self.edges {
            for k in 0..d {
                z[k] = y[v * d + k] - y[w * d + k];
            }
            total += edge_term(self.norm, &z, mu, &mut g, None);
            for k in 0..d {
                grad[v * d + k] += g[k];
                grad[w * d + k] -= g[k];
            }
        }
        total
    }

    /// `|y - P(y - grad f_mu(y))|_2` over the free vertices.
    fn residual(&self, y: &[f64], mu: f64) -> f64 {
        let d = self.d;
        let mut grad = vec![0.0; y.len()];
        self.smooth_value_grad(y, mu, &mut grad);
        let mut sq = 0.0;
        let mut q = vec![0.0; d];
        for v in 0..self.n {
            let yv = &y[v * d..(v + 1) * d];
            for k in 0..d {
                q[k] = yv[k] - grad[v * d + k];
            }
            self.nbs[v].project_in_place(&mut q);
            for k in 0..d {
                sq += (yv[k] - q[k]).powi(2);
            }
        }
        sq.sqrt()
    }

    /// `t f_mu(y) + barrier(y)`, infinite outside the interior.
    fn merit(&self, y: &[f64], mu: f64, t: f64, ws: &mut Workspace) -> f64 {
        let d = self.d;
        let mut total = 0.0;
        for v in 0..self.n {
            if self.free[v] {
                match barrier(&self.nbs[v], &y[v * d..(v + 1) * d], None) {
                    Some(b) => total += b,
                    None => return f64::INFINITY,
                }
            }
        }
        let mut smooth = 0.0;
        for &(v, w) in &self.edges {
            for k in 0..d {
                ws.z[k] = y[v * d + k] - y[w * d + k];
            }
            smooth += edge_term(self.norm, &ws.z, mu, &mut ws.g, None);
        }
        total + t * smooth
    }

    /// Damped Newton on the merit function. Returns the number of steps and
    /// whether the Newton decrement reached its stopping level.
    fn center(&self, y: &mut [f64], mu: f64, t: f64, ws: &mut Workspace, budget: usize) -> (usize, bool) {
        let d = self.d;
        let dd = d * d;
        let mut steps = 0;
        let mut centered = false;
        let mut f0 = self.merit(y, mu, t, ws);
        while steps < budget.min(MAX_CENTERING_STEPS) {
            // Gradient and Hessian blocks.
            ws.grad.fill(0.0);
            ws.diag.fill(0.0);
            ws.off.fill(0.0);
            for v in 0..self.n {
                if self.free[v] {
                    let (gv, hv) = (&mut ws.bgrad, &mut ws.bhess);
                    barrier(&self.nbs[v], &y[v * d..(v + 1) * d], Some((gv, hv)));
                    for k in 0..d {
                        ws.grad[v * d + k] += ws.bgrad[k];
                    }
                    for k in 0..dd {
                        ws.diag[v * dd + k] += ws.bhess[k];
                    }
                }
            }
            for (i, &(v, w)) in self.edges.iter().enumerate() {
                for k in 0..d {
                    ws.z[k] = y[v * d + k] - y[w * d + k];
                }
                edge_term(self.norm, &ws.z, mu, &mut ws.g, Some(&mut ws.h));
                let (fv, fw) = (self.free[v], self.free[w]);
                for k in 0..d {
                    if fv {
                        ws.grad[v * d + k] += t * ws.g[k];
                    }
                    if fw {
                        ws.grad[w * d + k] -= t * ws.g[k];
                    }
                }
                for k in 0..dd {
                    let h = t * ws.h[k];
                    if fv {
                        ws.diag[v * dd + k] += h;
                    }
                    if fw {
                        ws.diag[w * dd + k] += h;
                    }
                    if fv && fw {
                        ws.off[i * dd + k] = -h;
                    }
                }
            }
            for v in 0..self.n {
                if !self.free[v] {
                    for k in 0..d {
                        ws.diag[v * dd + k * d + k] = 1.0;
                    }
                }
            }
            if !self.newton_direction(ws) {
                break;
            }
            let slope: f64 = ws.grad.iter().zip(&ws.step).map(|(g, s)| g * s).sum();
            // The merit is only known to about 1e-13 relative, which also
            // bounds how small a resolvable Newton decrement can be.
            let decrement = -slope / 2.0;
            if !(slope < 0.0) || decrement <= 1e-10 || decrement <= 1e-13 * f0.abs() {
                centered = slope.is_finite();
                break;
            }
            // Near the center take full steps: the merit difference is then
            // below its rounding error and cannot steer a line search.
            if decrement < 1e-3 {
                for (k, trial) in ws.trial.iter_mut().enumerate() {
                    *trial = y[k] + ws.step[k];
                }
                let trial = std::mem::take(&mut ws.trial);
                let f1 = self.merit(&trial, mu, t, ws);
                ws.trial = trial;
                steps += 1;
                if f1.is_finite() {
                    y.copy_from_slice(&ws.trial);
                    f0 = f1;
                    continue;
                }
            }
            // Backtracking, staying strictly interior.
            let mut alpha = 1.0;
            let mut accepted = false;
            while alpha > 1e-14 {
                for (k, trial) in ws.trial.iter_mut().enumerate() {
                    *trial = y[k] + alpha * ws.step[k];
                }
                let trial = std::mem::take(&mut ws.trial);
                let f1 = self.merit(&trial, mu, t, ws);
                ws.trial = trial;
                if f1.is_finite() && f1 <= f0 + 0.25 * alpha * slope {
                    y.copy_from_slice(&ws.trial);
                    f0 = f1;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            steps += 1;
            if !accepted {
                break;
            }
        }
        (steps, centered)
    }

    /// Solves `H step = -grad` by block elimination along the tree.
    fn newton_direction(&self, ws: &mut Workspace) -> bool {
        let d = self.d;
        let dd = d * d;
        for (r, g) in ws.rhs.iter_mut().zip(&ws.grad) {
            *r = -g;
        }
        for &v in self.order.iter().skip(1).rev() {
            let p = self.parent[v];
            let e = self.parent_edge[v];
            let dv = &mut ws.diag[v * dd..(v + 1) * dd];
            if !cholesky(dv, d) {
                return false;
            }
            // W = D_v^{-1} B, w = D_v^{-1} r_v, where B = H_{v,p} is symmetric.
            let b = &ws.off[e * dd..(e + 1) * dd];
            let wm = &mut ws.wmat[v * dd..(v + 1) * dd];
            for col in 0..d {
                for row in 0..d {
                    ws.col[row] = b[row * d + col];
                }
                chol_solve(dv, d, &mut ws.col);
                for row in 0..d {
                    wm[row * d + col] = ws.col[row];
                }
            }
            ws.col.copy_from_slice(&ws.rhs[v * d..(v + 1) * d]);
            chol_solve(dv, d, &mut ws.col);
            ws.wvec[v * d..(v + 1) * d].copy_from_slice(&ws.col);
            for row in 0..d {
                let mut acc_r = 0.0;
                for k in 0..d {
                    acc_r += b[row * d + k] * ws.col[k];
                }
                ws.rhs[p * d + row] -= acc_r;
                for col in 0..d {
                    let mut acc = 0.0;
                    for k in 0..d {
                        acc += b[row * d + k] * wm[k * d + col];
                    }
                    ws.diag[p * dd + row * d + col] -= acc;
                }
            }
        }
        let root = self.order[0];
        let droot = &mut ws.diag[root * dd..(root + 1) * dd];
        if !cholesky(droot, d) {
            return false;
        }
        ws.col.copy_from_slice(&ws.rhs[root * d..(root + 1) * d]);
        chol_solve(droot, d, &mut ws.col);
        ws.step[root * d..(root + 1) * d].copy_from_slice(&ws.col);
        for &v in self.order.iter().skip(1) {
            let p = self.parent[v];
            for row in 0..d {
                let mut acc = ws.wvec[v * d + row];
                for k in 0..d {
                    acc -= ws.wmat[v * dd + row * d + k] * ws.step[p * d + k];
                }
                ws.step[v * d + row] = acc;
            }
        }
        ws.step.iter().all(|s| s.is_finite())
    }
}

struct Workspace {
    grad: Vec<f64>,
    rhs: Vec<f64>,
    step: Vec<f64>,
    trial: Vec<f64>,
    diag: Vec<f64>,
    off: Vec<f64>,
    wmat: Vec<f64>,
    wvec: Vec<f64>,
    z: Vec<f64>,
    g: Vec<f64>,
    h: Vec<f64>,
    bgrad: Vec<f64>,
    bhess: Vec<f64>,
    col: Vec<f64>,
}

impl Workspace {
    fn new(n: usize, d: usize, m: usize) -> Self {
        Workspace {
            grad: vec![0.0; n * d],
            rhs: vec![0.0; n * d],
            step: vec![0.0; n * d],
            trial: vec![0.0; n * d],
            diag: vec![0.0; n * d * d],
            off: vec![0.0; m * d * d],
            wmat: vec![0.0; n * d * d],
            wvec: vec![0.0; n * d],
            z: vec![0.0; d],
            g: vec![0.0; d],
            h: vec![0.0; d * d],
            bgrad: vec![0.0; d],
            bhess: vec![0.0; d * d],
            col: vec![0.0; d],
        }
    }
}

/// Smoothed norm of `z`; writes the gradient and optionally the Hessian.
fn edge_term(norm: Norm, z: &[f64], mu: f64, g: &mut [f64], h: Option<&mut Vec<f64>>) -> f64 {
    let d = z.len();
    match norm {
        Norm::L2 => {
            let rho = (z.iter().map(|x| x * x).sum::<f64>() + mu * mu).sqrt();
            for k in 0..d {
                g[k] = z[k] / rho;
            }
            if let Some(h) = h {
                for a in 0..d {
                    for b in 0..d {
                        let id = if a == b { 1.0 } else { 0.0 };
                        h[a * d + b] = (id - g[a] * g[b]) / rho;
                    }
                }
            }
            rho
        }
        Norm::L1 => {
            let mut total = 0.0;
            let mut hd = h;
            if let Some(h) = hd.as_deref_mut() {
                h.fill(0.0);
            }
            for k in 0..d {
                let rho = (z[k] * z[k] + mu * mu).sqrt();
                total += rho;
                g[k] = z[k] / rho;
                if let Some(h) = hd.as_deref_mut() {
                    h[k * d + k] = mu * mu / (rho * rho * rho);
                }
            }
            total
        }
        Norm::LInf => {
            let m = z.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let mut sum = 0.0;
            for &x in z {
                sum += ((x - m) / mu).exp() + ((-x - m) / mu).exp();
            }
            for k in 0..d {
                let plus = ((z[k] - m) / mu).exp() / sum;
                let minus = ((-z[k] - m) / mu).exp() / sum;
                g[k] = plus - minus;
            }
            if let Some(h) = h {
                for a in 0..d {
                    for b in 0..d {
                        h[a * d + b] = -g[a] * g[b] / mu;
                    }
                    let plus = ((z[a] - m) / mu).exp() / sum;
                    let minus = ((-z[a] - m) / mu).exp() / sum;
                    h[a * d + a] += (plus + minus) / mu;
                }
            }
            m + mu * sum.ln()
        }
    }
}

/// Log barrier of a neighborhood with positive size; `None` outside the interior.
fn barrier(nb: &Neighborhood, y: &[f64], out: Option<(&mut Vec<f64>, &mut Vec<f64>)>) -> Option<f64> {
    let d = y.len();
    match nb {
        Neighborhood::Ball { center, radius } => {
            let mut sq = 0.0;
            for k in 0..d {
                sq += (y[k] - center.0[k]).powi(2);
            }
            let dist = sq.sqrt();
            let s = (radius - dist) * (radius + dist);
            if !(s > 0.0) {
                return None;
            }
            if let Some((g, h)) = out {
                for k in 0..d {
                    g[k] = 2.0 * (y[k] - center.0[k]) / s;
                }
                for a in 0..d {
                    for b in 0..d {
                        let id = if a == b { 2.0 / s } else { 0.0 };
                        h[a * d + b] = id + g[a] * g[b];
                    }
                }
            }
            Some(-s.ln())
        }
        Neighborhood::Box { center, half_width } => {
            let mut total = 0.0;
            let mut out = out;
            if let Some((_, h)) = out.as_mut() {
                h.fill(0.0);
            }
            for k in 0..d {
                let delta = y[k] - center.0[k];
                let a = half_width - delta;
                let b = half_width + delta;
                if !(a > 0.0 && b > 0.0) {
                    return None;
                }
                total -= a.ln() + b.ln();
                if let Some((g, h)) = out.as_mut() {
                    g[k] = 1.0 / a - 1.0 / b;
                    h[k * d + k] = 1.0 / (a * a) + 1.0 / (b * b);
                }
            }
            Some(total)
        }
    }
}

/// In-place lower Cholesky factor of a row-major `d x d` matrix.
fn cholesky(a: &mut [f64], d: usize) -> bool {
    for j in 0..d {
        let mut s = a[j * d + j];
        for k in 0..j {
            s -= a[j * d + k] * a[j * d + k];
        }
        if !(s > 0.0) {
            return false;
        }
        let l = s.sqrt();
        a[j * d + j] = l;
        for i in j + 1..d {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= a[i * d + k] * a[j * d + k];
            }
            a[i * d + j] = s / l;
        }
    }
    true
}

fn chol_solve(l: &[f64], d: usize, b: &mut [f64]) {
    for i in 0..d {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * d + k] * b[k];
        }
        b[i] = s / l[i * d + i];
    }
    for i in (0..d).rev() {
        let mut s = b[i];
        for k in i + 1..d {
            s -= l[k * d + i] * b[k];
        }
        b[i] = s / l[i * d + i];
    }
}
