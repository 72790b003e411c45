//! SEC-MSTN and MTZ-MSTN as mixed-integer second-order cone models, written
//! in a subset of the Conic Benchmark Format (CBF) version 1.
//!
//! Every variable is declared free; bounds are ordinary `L+` rows so that
//! only the `VAR`, `INT`, `CON`, `OBJACOORD`, `ACOORD` and `BCOORD` sections
//! are needed. A row is `sum_j a_ij x_j + b_i` and must lie in its cone:
//! `L+` (>= 0), `L=` (= 0) or `Q` (first entry >= Euclidean norm of the rest).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Neighborhood, Norm, Point};
use crate::instance::Instance;
use crate::preprocess::compute_bounds;
use crate::spanning_tree::Tree;

/// Largest number of subtour rows an SEC export may contain.
pub const MAX_SEC_ROWS: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formulation {
    Sec { max_subset_size: usize },
    Mtz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cone {
    /// `>= 0`
    NonNeg,
    /// `= 0`
    Zero,
    /// First entry at least the norm of the others.
    Quad,
}

impl Cone {
    fn tag(self) -> &'static str {
        match self {
            Cone::NonNeg => "L+",
            Cone::Zero => "L=",
            Cone::Quad => "Q",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "L+" => Ok(Cone::NonNeg),
            "L=" => Ok(Cone::Zero),
            "Q" => Ok(Cone::Quad),
            _ => Err(Error::Capability(format!("cone {s:?} is outside the supported subset"))),
        }
    }
}

/// Affine expression `sum a_j x_j + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Affine {
    fn new(terms: Vec<(usize, f64)>, constant: f64) -> Self {
        Affine { terms, constant }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, a)| a * x[j]).sum::<f64>()
    }
}

/// A block of rows constrained to one cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    /// Constraint family, e.g. `"MTZ4"` or `"U1"`.
    pub group: String,
    pub cone: Cone,
    pub rows: Vec<Affine>,
}

impl Block {
    /// Amount by which `x` leaves the cone (0 when inside).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let v: Vec<f64> = self.rows.iter().map(|r| r.value(x)).collect();
        match self.cone {
            Cone::NonNeg => v.iter().map(|&a| (-a).max(0.0)).fold(0.0, f64::max),
            Cone::Zero => v.iter().map(|a| a.abs()).fold(0.0, f64::max),
            Cone::Quad => {
                let norm = v[1..].iter().map(|a| a * a).sum::<f64>().sqrt();
                (norm - v[0]).max(0.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportModel {
    pub formulation: Formulation,
    pub var_names: Vec<String>,
    pub integer: Vec<usize>,
    /// Minimized.
    pub objective: Vec<(usize, f64)>,
    pub blocks: Vec<Block>,
    /// Header comment lines.
    pub metadata: Vec<String>,
}

impl ExportModel {
    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn num_rows(&self) -> usize {
        self.blocks.iter().map(|b| b.rows.len()).sum()
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|v| v == name)
    }

    /// Rows of every block in `group`, counted one per cone row.
    pub fn group_rows(&self, group: &str) -> usize {
        self.blocks.iter().filter(|b| b.group == group).map(|b| b.rows.len()).sum()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Worst violation over all blocks and integrality, with the group
    /// where it occurs.
    pub fn evaluate(&self, x: &[f64]) -> Result<(f64, String)> {
        if x.len() != self.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars(),
                got: x.len(),
            });
        }
        let mut worst = (0.0, String::new());
        for b in &self.blocks {
            let v = b.violation(x);
            if v > worst.0 {
                worst = (v, b.group.clone());
            }
        }
        for &j in &self.integer {
            let v = (x[j] - x[j].round()).abs();
            if v > worst.0 {
                worst = (v, "integrality".into());
            }
        }
        Ok(worst)
    }

    /// CBF text; identical models give identical bytes.
    pub fn to_cbf(&self) -> String {
        let mut out = String::new();
        for line in &self.metadata {
            let _ = writeln!(out, "# {line}");
        }
        for (j, name) in self.var_names.iter().enumerate() {
            let _ = writeln!(out, "# var {j} {name}");
        }
        let _ = writeln!(out, "VER\n1\n\nOBJSENSE\nMIN\n");
        let n = self.num_vars();
        let _ = writeln!(out, "VAR\n{n} 1\nF {n}\n");
        if !self.integer.is_empty() {
            let _ = writeln!(out, "INT\n{}", self.integer.len());
            for j in &self.integer {
                let _ = writeln!(out, "{j}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "CON\n{} {}", self.num_rows(), self.blocks.len());
        for b in &self.blocks {
            let _ = writeln!(out, "{} {}", b.cone.tag(), b.rows.len());
        }
        out.push('\n');
        let _ = writeln!(out, "OBJACOORD\n{}", self.objective.len());
        for &(j, a) in &self.objective {
            let _ = writeln!(out, "{j} {a}");
        }
        out.push('\n');
        let rows: Vec<&Affine> = self.blocks.iter().flat_map(|b| &b.rows).collect();
        let nnz: usize = rows.iter().map(|r| r.terms.len()).sum();
        let _ = writeln!(out, "ACOORD\n{nnz}");
        for (i, r) in rows.iter().enumerate() {
            for &(j, a) in &r.terms {
                let _ = writeln!(out, "{i} {j} {a}");
            }
        }
        out.push('\n');
        let consts: Vec<(usize, f64)> = rows.iter().enumerate().filter(|(_, r)| r.constant != 0.0).map(|(i, r)| (i, r.constant)).collect();
        let _ = writeln!(out, "BCOORD\n{}", consts.len());
        for (i, b) in consts {
            let _ = writeln!(out, "{i} {b}");
        }
        out
    }
}

/// The parts of a CBF file this crate writes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CbfDocument {
    pub num_vars: usize,
    pub integer: Vec<usize>,
    pub objective: Vec<(usize, f64)>,
    /// `(cone, size)` chunks in row order.
    pub cones: Vec<(Cone, usize)>,
    pub rows: Vec<Affine>,
    pub comments: Vec<String>,
}

impl CbfDocument {
    /// Worst violation of the rows and integrality at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                got: x.len(),
            });
        }
        let mut worst: f64 = 0.0;
        let mut start = 0;
        for &(cone, size) in &self.cones {
            let block = Block {
                group: String::new(),
                cone,
                rows: self.rows[start..start + size].to_vec(),
            };
            worst = worst.max(block.violation(x));
            start += size;
        }
        for &j in &self.integer {
            worst = worst.max((x[j] - x[j].round()).abs());
        }
        Ok(worst)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::validation(format!("cbf line {line}"), msg)
}

/// Reads the CBF subset produced by [`ExportModel::to_cbf`].
pub fn parse_cbf(text: &str) -> Result<CbfDocument> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut doc = CbfDocument::default();
    let mut version = None;
    let mut num_rows = 0;
    fn nums<T: std::str::FromStr>(line: usize, s: &str, count: usize) -> Result<Vec<T>> {
        let v: Vec<T> = s
            .split_whitespace()
            .map(|t| t.parse::<T>().map_err(|_| parse_err(line, format!("bad number {t:?}"))))
            .collect::<Result<_>>()?;
        if v.len() != count {
            return Err(parse_err(line, format!("expected {count} fields")));
        }
        Ok(v)
    }
    let mut next = |what: &str| -> Result<(usize, &str)> {
        loop {
            match lines.next() {
                Some((_, l)) if l.starts_with('#') => continue,
                Some(x) => return Ok(x),
                None => return Err(Error::validation("cbf", format!("unexpected end of file in {what}"))),
            }
        }
    };
    let mut comments = Vec::new();
    for l in text.lines() {
        if let Some(c) = l.trim().strip_prefix('#') {
            comments.push(c.trim().to_string());
        }
    }
    doc.comments = comments;
    loop {
        let (ln, key) = match next("section") {
            Ok(x) => x,
            Err(_) => break,
        };
        match key {
            "VER" => {
                let (ln, v) = next("VER")?;
                let v: Vec<u32> = nums(ln, v, 1)?;
                if v[0] != 1 {
                    return Err(parse_err(ln, "only version 1 is supported"));
                }
                version = Some(v[0]);
            }
            "OBJSENSE" => {
                let (ln, v) = next("OBJSENSE")?;
                if v != "MIN" {
                    return Err(parse_err(ln, "only MIN is supported"));
                }
            }
            "VAR" => {
                let (ln, v) = next("VAR")?;
                let h: Vec<usize> = nums(ln, v, 2)?;
                let mut seen = 0;
                for _ in 0..h[1] {
                    let (ln, v) = next("VAR")?;
                    let (tag, size) = v.split_once(' ').ok_or_else(|| parse_err(ln, "bad domain"))?;
                    if tag != "F" {
                        return Err(parse_err(ln, "only free variables are supported"));
                    }
                    seen += nums::<usize>(ln, size, 1)?[0];
                }
                if seen != h[0] {
                    return Err(parse_err(ln, "variable domains do not add up"));
                }
                doc.num_vars = h[0];
            }
            "INT" => {
                let (ln, v) = next("INT")?;
                let k = nums::<usize>(ln, v, 1)?[0];
                for _ in 0..k {
                    let (ln, v) = next("INT")?;
                    doc.integer.push(nums::<usize>(ln, v, 1)?[0]);
                }
            }
            "CON" => {
                let (ln, v) = next("CON")?;
                let h: Vec<usize> = nums(ln, v, 2)?;
                let mut seen = 0;
                for _ in 0..h[1] {
                    let (ln, v) = next("CON")?;
                    let (tag, size) = v.split_once(' ').ok_or_else(|| parse_err(ln, "bad cone"))?;
                    let size = nums::<usize>(ln, size, 1)?[0];
                    doc.cones.push((Cone::parse(tag)?, size));
                    seen += size;
                }
                if seen != h[0] {
                    return Err(parse_err(ln, "cone sizes do not add up"));
                }
                num_rows = h[0];
                doc.rows = vec![Affine::new(Vec::new(), 0.0); num_rows];
            }
            "OBJACOORD" => {
                let (ln, v) = next("OBJACOORD")?;
                for _ in 0..nums::<usize>(ln, v, 1)?[0] {
                    let (ln, v) = next("OBJACOORD")?;
                    let (j, a) = v.split_once(' ').ok_or_else(|| parse_err(ln, "bad entry"))?;
                    let j = nums::<usize>(ln, j, 1)?[0];
                    doc.objective.push((j, nums::<f64>(ln, a, 1)?[0]));
                }
            }
            "ACOORD" => {
                let (ln, v) = next("ACOORD")?;
                for _ in 0..nums::<usize>(ln, v, 1)?[0] {
                    let (ln, v) = next("ACOORD")?;
                    let f: Vec<&str> = v.split_whitespace().collect();
                    if f.len() != 3 {
                        return Err(parse_err(ln, "expected i j value"));
                    }
                    let i = nums::<usize>(ln, f[0], 1)?[0];
                    let j = nums::<usize>(ln, f[1], 1)?[0];
                    let a = nums::<f64>(ln, f[2], 1)?[0];
                    if i >= num_rows || j >= doc.num_vars {
                        return Err(parse_err(ln, "index out of range"));
                    }
                    doc.rows[i].terms.push((j, a));
                }
            }
            "BCOORD" => {
                let (ln, v) = next("BCOORD")?;
                for _ in 0..nums::<usize>(ln, v, 1)?[0] {
                    let (ln, v) = next("BCOORD")?;
                    let (i, b) = v.split_once(' ').ok_or_else(|| parse_err(ln, "bad entry"))?;
                    let i = nums::<usize>(ln, i, 1)?[0];
                    if i >= num_rows {
                        return Err(parse_err(ln, "row out of range"));
                    }
                    doc.rows[i].constant = nums::<f64>(ln, b, 1)?[0];
                }
            }
            other => return Err(parse_err(ln, format!("unsupported section {other:?}"))),
        }
    }
    if version.is_none() {
        return Err(Error::validation("cbf", "missing VER section"));
    }
    Ok(doc)
}

/// Column layout shared by both formulations.
struct Layout {
    m: usize,
    n: usize,
    d: usize,
}

impl Layout {
    fn x(&self, e: usize) -> usize {
        e
    }
    fn u(&self, e: usize) -> usize {
        self.m + e
    }
    fn theta(&self, e: usize) -> usize {
        2 * self.m + e
    }
    fn y(&self, v: usize, k: usize) -> usize {
        3 * self.m + v * self.d + k
    }
    /// Arc `a -> b` of edge `e = (a, b)` when `forward`, else `b -> a`.
    fn z(&self, e: usize, forward: bool) -> usize {
        3 * self.m + self.n * self.d + 2 * e + usize::from(!forward)
    }
    fn s(&self, v: usize) -> usize {
        3 * self.m + self.n * self.d + 2 * self.m + v
    }
}

fn nonneg(group: &str, rows: Vec<Affine>) -> Block {
    Block {
        group: group.into(),
        cone: Cone::NonNeg,
        rows,
    }
}

fn zero(group: &str, rows: Vec<Affine>) -> Block {
    Block {
        group: group.into(),
        cone: Cone::Zero,
        rows,
    }
}

/// Objective, linearization, distance cones, neighborhoods and bounds.
fn common(inst: &Instance, lay: &Layout, names: &mut Vec<String>, blocks: &mut Vec<Block>) -> Result<Vec<(usize, f64)>> {
    if inst.norm() != Norm::L2 {
        return Err(Error::Capability(format!(
            "export writes Euclidean cones; instance uses the {} norm",
            inst.norm().name()
        )));
    }
    let bounds = compute_bounds(inst)?;
    let (m, n, d) = (lay.m, lay.n, lay.d);
    let label = |e: usize| {
        let (a, b) = inst.edge(e);
        format!("{}_{}", a + 1, b + 1)
    };
    for e in 0..m {
        names.push(format!("x_{}", label(e)));
    }
    for e in 0..m {
        names.push(format!("u_{}", label(e)));
    }
    for e in 0..m {
        names.push(format!("theta_{}", label(e)));
    }
    for v in 0..n {
        for k in 0..d {
            names.push(format!("y_{}_{}", v + 1, k + 1));
        }
    }
    // theta_e >= u_e - U_e (1 - x_e)
    blocks.push(nonneg(
        "LIN-Mc",
        (0..m)
            .map(|e| Affine::new(vec![(lay.theta(e), 1.0), (lay.u(e), -1.0), (lay.x(e), -bounds[e].upper)], bounds[e].upper))
            .collect(),
    ));
    // theta_e >= u~_e x_e
    blocks.push(nonneg(
        "THETA-LB",
        (0..m)
            .map(|e| Affine::new(vec![(lay.theta(e), 1.0), (lay.x(e), -bounds[e].lower)], 0.0))
            .collect(),
    ));
    for (e, &(a, b)) in inst.edges().iter().enumerate() {
        let mut rows = vec![Affine::new(vec![(lay.u(e), 1.0)], 0.0)];
        for k in 0..d {
            rows.push(Affine::new(vec![(lay.y(a, k), 1.0), (lay.y(b, k), -1.0)], 0.0));
        }
        blocks.push(Block {
            group: "U1".into(),
            cone: Cone::Quad,
            rows,
        });
    }
    let mut box_rows = Vec::new();
    for v in 0..n {
        match inst.neighborhood(v) {
            Neighborhood::Ball { center, radius } => {
                let mut rows = vec![Affine::new(Vec::new(), *radius)];
                for k in 0..d {
                    rows.push(Affine::new(vec![(lay.y(v, k), 1.0)], -center.coords()[k]));
                }
                blocks.push(Block {
                    group: "U2".into(),
                    cone: Cone::Quad,
                    rows,
                });
            }
            Neighborhood::Box { center, half_width } => {
                for k in 0..d {
                    let c = center.coords()[k];
                    let h = *half_width;
                    box_rows.push(Affine::new(vec![(lay.y(v, k), 1.0)], -(c - h)));
                    box_rows.push(Affine::new(vec![(lay.y(v, k), -1.0)], c + h));
                }
            }
        }
    }
    if !box_rows.is_empty() {
        blocks.push(nonneg("U2", box_rows));
    }
    let mut bound_rows = Vec::new();
    for e in 0..m {
        bound_rows.push(Affine::new(vec![(lay.x(e), 1.0)], 0.0));
        bound_rows.push(Affine::new(vec![(lay.x(e), -1.0)], 1.0));
    }
    for e in 0..m {
        bound_rows.push(Affine::new(vec![(lay.u(e), 1.0)], 0.0));
        bound_rows.push(Affine::new(vec![(lay.theta(e), 1.0)], 0.0));
    }
    blocks.push(nonneg("D1", bound_rows));
    Ok((0..m).map(|e| (lay.theta(e), 1.0)).collect())
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn header(inst: &Instance, formulation: &str) -> Vec<String> {
    vec![
        format!("MSTN {formulation} model"),
        format!("instance {}", inst.name()),
        format!("vertices {} edges {} dimension {}", inst.num_vertices(), inst.num_edges(), inst.dimension()),
    ]
}

/// Subtour formulation with every subset of size `2..=max_subset_size`.
pub fn export_sec(inst: &Instance, max_subset_size: usize) -> Result<ExportModel> {
    let n = inst.num_vertices();
    if max_subset_size < 2 || max_subset_size > n - 1 {
        return Err(Error::Usage(format!("subset size must lie in 2..={}", n - 1)));
    }
    let total: u64 = (2..=max_subset_size as u64).map(|k| binomial(n as u64, k)).fold(0, u64::saturating_add);
    if total > MAX_SEC_ROWS {
        return Err(Error::Capability(format!(
            "{total} subtour rows exceed the export limit of {MAX_SEC_ROWS}"
        )));
    }
    let lay = Layout {
        m: inst.num_edges(),
        n,
        d: inst.dimension(),
    };
    let mut names = Vec::new();
    let mut blocks = Vec::new();
    let objective = common(inst, &lay, &mut names, &mut blocks)?;
    blocks.push(zero(
        "ST1",
        vec![Affine::new((0..lay.m).map(|e| (lay.x(e), 1.0)).collect(), -(n as f64 - 1.0))],
    ));
    let mut st2 = Vec::new();
    let mut subset = Vec::new();
    for size in 2..=max_subset_size {
        subsets(n, size, 0, &mut subset, &mut |s| {
            let mut inside = vec![false; n];
            for &v in s {
                inside[v] = true;
            }
            let terms = inst
                .edges()
                .iter()
                .enumerate()
                .filter(|(_, &(a, b))| inside[a] && inside[b])
                .map(|(e, _)| (lay.x(e), -1.0))
                .collect();
            st2.push(Affine::new(terms, s.len() as f64 - 1.0));
        });
    }
    blocks.push(nonneg("ST2", st2));
    let mut metadata = header(inst, "SEC");
    if max_subset_size < n - 1 {
        metadata.push(format!(
            "ST2 truncated to subsets of size <= {max_subset_size}; larger subtours need lazy separation"
        ));
    } else {
        metadata.push("ST2 complete".into());
    }
    Ok(ExportModel {
        formulation: Formulation::Sec { max_subset_size },
        integer: (0..lay.m).collect(),
        var_names: names,
        objective,
        blocks,
        metadata,
    })
}

fn subsets(n: usize, size: usize, from: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == size {
        f(cur);
        return;
    }
    for v in from..n {
        if n - v < size - cur.len() {
            break;
        }
        cur.push(v);
        subsets(n, size, v + 1, cur, f);
        cur.pop();
    }
}

/// Compact formulation. Arcs point from child to parent toward root vertex
/// 1 (index 0); each non-root vertex has one outgoing arc and labels grow
/// away from the root.
pub fn export_mtz(inst: &Instance) -> Result<ExportModel> {
    let n = inst.num_vertices();
    let lay = Layout {
        m: inst.num_edges(),
        n,
        d: inst.dimension(),
    };
    let mut names = Vec::new();
    let mut blocks = Vec::new();
    let objective = common(inst, &lay, &mut names, &mut blocks)?;
    for (e, &(a, b)) in inst.edges().iter().enumerate() {
        debug_assert_eq!(names.len(), lay.z(e, true));
        names.push(format!("z_{}_{}", a + 1, b + 1));
        names.push(format!("z_{}_{}", b + 1, a + 1));
    }
    for v in 0..n {
        names.push(format!("s_{}", v + 1));
    }
    let nf = n as f64;
    let root = 0;
    // MTZ1: x_e = z_ab + z_ba
    blocks.push(zero(
        "MTZ1",
        (0..lay.m)
            .map(|e| Affine::new(vec![(lay.x(e), 1.0), (lay.z(e, true), -1.0), (lay.z(e, false), -1.0)], 0.0))
            .collect(),
    ));
    // Arcs (tail, head, column).
    let mut arcs = Vec::new();
    for (e, &(a, b)) in inst.edges().iter().enumerate() {
        arcs.push((a, b, lay.z(e, true)));
        arcs.push((b, a, lay.z(e, false)));
    }
    // MTZ2: at least one arc enters the root.
    let into_root: Vec<(usize, f64)> = arcs.iter().filter(|a| a.1 == root).map(|a| (a.2, 1.0)).collect();
    blocks.push(nonneg("MTZ2", vec![Affine::new(into_root, -1.0)]));
    // MTZ3: one outgoing arc per non-root vertex.
    blocks.push(zero(
        "MTZ3",
        (0..n)
            .filter(|&v| v != root)
            .map(|v| Affine::new(arcs.iter().filter(|a| a.0 == v).map(|a| (a.2, 1.0)).collect(), -1.0))
            .collect(),
    ));
    // MTZ4: z_vw = 1 forces s_v >= s_w + 1.
    blocks.push(nonneg(
        "MTZ4",
        arcs.iter()
            .map(|&(v, w, z)| Affine::new(vec![(z, -nf), (lay.s(w), -1.0), (lay.s(v), 1.0)], nf - 1.0))
            .collect(),
    ));
    // MTZ5: s_root = 1, 2 <= s_v <= n.
    blocks.push(zero("MTZ5", vec![Affine::new(vec![(lay.s(root), 1.0)], -1.0)]));
    let mut label_rows = Vec::new();
    for v in (0..n).filter(|&v| v != root) {
        label_rows.push(Affine::new(vec![(lay.s(v), 1.0)], -2.0));
        label_rows.push(Affine::new(vec![(lay.s(v), -1.0)], nf));
    }
    blocks.push(nonneg("MTZ5", label_rows));
    let mut z_bounds = Vec::new();
    for &(_, _, z) in &arcs {
        z_bounds.push(Affine::new(vec![(z, 1.0)], 0.0));
        z_bounds.push(Affine::new(vec![(z, -1.0)], 1.0));
    }
    blocks.push(nonneg("D2", z_bounds));
    let mut integer: Vec<usize> = (0..lay.m).collect();
    integer.extend(arcs.iter().map(|a| a.2));
    integer.sort_unstable();
    let mut metadata = header(inst, "MTZ");
    metadata.push("arcs point toward root vertex 1; MTZ3 fixes out-degree 1 for other vertices".into());
    Ok(ExportModel {
        formulation: Formulation::Mtz,
        integer,
        var_names: names,
        objective,
        blocks,
        metadata,
    })
}

/// Column values for `tree` with `points`: `x` the incidence vector,
/// `u` the lengths, `theta = u x`; for MTZ the tree is oriented toward the
/// root and `s` is one plus the depth.
pub fn assignment(inst: &Instance, model: &ExportModel, tree: &Tree, points: &[Point]) -> Result<Vec<f64>> {
    let n = inst.num_vertices();
    let lay = Layout {
        m: inst.num_edges(),
        n,
        d: inst.dimension(),
    };
    if points.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: points.len(),
        });
    }
    let mut x = vec![0.0; model.num_vars()];
    for (e, &(a, b)) in inst.edges().iter().enumerate() {
        let inside = tree.contains(e);
        let len = points[a].euclidean(&points[b]);
        x[lay.x(e)] = if inside { 1.0 } else { 0.0 };
        x[lay.u(e)] = len;
        x[lay.theta(e)] = if inside { len } else { 0.0 };
    }
    for (v, p) in points.iter().enumerate() {
        for k in 0..lay.d {
            x[lay.y(v, k)] = p.coords()[k];
        }
    }
    if model.formulation == Formulation::Mtz {
        let mut adj = vec![Vec::new(); n];
        for &e in tree.edge_ids() {
            let (a, b) = inst.edge(e);
            adj[a].push((b, e));
            adj[b].push((a, e));
        }
        let mut depth = vec![usize::MAX; n];
        depth[0] = 0;
        let mut queue = std::collections::VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for &(w, e) in &adj[v] {
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    // Arc w -> v points toward the root.
                    let forward = inst.edge(e).0 == w;
                    x[lay.z(e, forward)] = 1.0;
                    queue.push_back(w);
                }
            }
        }
        for v in 0..n {
            x[lay.s(v)] = depth[v] as f64 + 1.0;
        }
    }
    Ok(x)
}
