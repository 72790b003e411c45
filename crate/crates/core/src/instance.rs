//! Instance data model, the seeded benchmark generator, JSON I/O and the
//! eight-vertex worked example.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Neighborhood, Norm, Point};
use crate::rng::SplitMix64;

/// File extension used for instance documents.
pub const INSTANCE_EXTENSION: &str = "mstn.json";

/// A connected graph whose vertices live in convex neighborhoods.
///
/// Vertex ids are positions in `vertices`. Edges are stored as `(v, w)`
/// with `v < w`, sorted lexicographically; an edge id is its position.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    dimension: usize,
    norm: Norm,
    vertices: Vec<Neighborhood>,
    edges: Vec<(usize, usize)>,
    seed: Option<u64>,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        dimension: usize,
        norm: Norm,
        vertices: Vec<Neighborhood>,
        edges: Vec<(usize, usize)>,
        seed: Option<u64>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::validation("dimension", "must be positive"));
        }
        if vertices.len() < 2 {
            return Err(Error::validation("vertices", "at least two vertices are required"));
        }
        for (i, nb) in vertices.iter().enumerate() {
            if nb.dim() != dimension {
                return Err(Error::validation(
                    format!("vertices[{i}].center"),
                    format!("expected {dimension} coordinates, got {}", nb.dim()),
                ));
            }
            nb.validate()
                .map_err(|e| Error::validation(format!("vertices[{i}]"), e.to_string()))?;
        }
        let n = vertices.len();
        let mut normalized = Vec::with_capacity(edges.len());
        for (i, &(a, b)) in edges.iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::validation(
                    format!("edges[{i}]"),
                    format!("endpoint out of range for {n} vertices"),
                ));
            }
            if a == b {
                return Err(Error::validation(format!("edges[{i}]"), "self-loop"));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        let mut sorted = normalized.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            let pos = normalized.iter().rposition(|e| *e == w[0]).unwrap_or(0);
            return Err(Error::validation(
                format!("edges[{pos}]"),
                format!("duplicate edge {:?}", w[0]),
            ));
        }
        let inst = Instance {
            name: name.into(),
            dimension,
            norm,
            vertices,
            edges: sorted,
            seed,
        };
        if !inst.is_connected() {
            return Err(Error::validation("edges", "graph is not connected"));
        }
        Ok(inst)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Neighborhood] {
        &self.vertices
    }

    pub fn neighborhood(&self, v: usize) -> &Neighborhood {
        &self.vertices[v]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Id of the edge joining `a` and `b`, if present.
    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Same graph with every neighborhood replaced by `f(neighborhood)`.
    pub fn map_neighborhoods(&self, f: impl Fn(&Neighborhood) -> Neighborhood) -> Result<Self> {
        Instance::new(
            self.name.clone(),
            self.dimension,
            self.norm,
            self.vertices.iter().map(f).collect(),
            self.edges.clone(),
            self.seed,
        )
    }

    /// Same vertices restricted to the given edge ids.
    pub fn subgraph(&self, keep: &[usize]) -> Result<Self> {
        Instance::new(
            self.name.clone(),
            self.dimension,
            self.norm,
            self.vertices.clone(),
            keep.iter().map(|&e| self.edges[e]).collect(),
            self.seed,
        )
    }

    /// Length of every edge measured between neighborhood centers.
    pub fn center_distances(&self) -> Vec<f64> {
        self.edges
            .iter()
            .map(|&(v, w)| {
                crate::geometry::distance_unchecked(
                    &self.vertices[v].center().0,
                    &self.vertices[w].center().0,
                    self.norm,
                )
            })
            .collect()
    }

    fn is_connected(&self) -> bool {
        let n = self.num_vertices();
        let mut uf = crate::spanning_tree::UnionFind::new(n);
        let mut parts = n;
        for &(a, b) in &self.edges {
            if uf.union(a, b) {
                parts -= 1;
            }
        }
        parts == 1
    }

    pub fn to_json(&self) -> String {
        let doc = InstanceDoc {
            name: self.name.clone(),
            dimension: self.dimension,
            norm: self.norm,
            vertices: self
                .vertices
                .iter()
                .enumerate()
                .map(|(id, nb)| VertexDoc {
                    id,
                    shape: match nb {
                        Neighborhood::Ball { .. } => Shape::Ball,
                        Neighborhood::Box { .. } => Shape::Box,
                    },
                    center: nb.center().0.clone(),
                    radius: nb.size(),
                })
                .collect(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            seed: self.seed,
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("instance serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| {
            Error::validation(format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        let mut vertices = Vec::with_capacity(doc.vertices.len());
        for (i, v) in doc.vertices.into_iter().enumerate() {
            if v.id != i {
                return Err(Error::validation(
                    format!("vertices[{i}].id"),
                    format!("expected id {i}, got {}", v.id),
                ));
            }
            let center = Point(v.center);
            vertices.push(match v.shape {
                Shape::Ball => Neighborhood::Ball {
                    center,
                    radius: v.radius,
                },
                Shape::Box => Neighborhood::Box {
                    center,
                    half_width: v.radius,
                },
            });
        }
        let edges = doc.edges.into_iter().map(|[a, b]| (a, b)).collect();
        Instance::new(doc.name, doc.dimension, doc.norm, vertices, edges, doc.seed)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Validation { location, message } => Error::Validation {
                location: format!("{}: {location}", path.display()),
                message,
            },
            other => other,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    name: String,
    dimension: usize,
    norm: Norm,
    vertices: Vec<VertexDoc>,
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    id: usize,
    shape: Shape,
    center: Vec<f64>,
    /// Ball radius, or box half width.
    radius: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Shape {
    Ball,
    Box,
}

/// Parameters of the random benchmark generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub dimension: usize,
    /// Scenario `k` draws radii uniformly from `[5(k-1), 5k]`.
    pub radii_scenario: u32,
    pub complete: bool,
    pub coord_range: (f64, f64),
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(n: usize, dimension: usize, radii_scenario: u32, seed: u64) -> Self {
        GeneratorConfig {
            n,
            dimension,
            radii_scenario,
            complete: true,
            coord_range: (0.0, 100.0),
            seed,
        }
    }

    pub fn radius_range(&self) -> (f64, f64) {
        let k = self.radii_scenario as f64;
        (5.0 * (k - 1.0), 5.0 * k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=10_000).contains(&self.n) {
            return Err(Error::Usage(format!("n must lie in [2, 10000], got {}", self.n)));
        }
        if self.dimension == 0 {
            return Err(Error::Usage("dimension must be positive".into()));
        }
        if !(1..=4).contains(&self.radii_scenario) {
            return Err(Error::Usage(format!(
                "radii scenario must be 1..4, got {}",
                self.radii_scenario
            )));
        }
        if !self.complete {
            return Err(Error::Capability("the generator only builds complete graphs".into()));
        }
        let (lo, hi) = self.coord_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Usage("invalid coordinate range".into()));
        }
        Ok(())
    }
}

/// Random complete-graph instance with Euclidean balls.
///
/// Draw order per vertex: `dimension` center coordinates, then the radius,
/// all from one SplitMix64 stream seeded with `config.seed`.
pub fn generate(config: &GeneratorConfig) -> Result<Instance> {
    config.validate()?;
    let mut rng = SplitMix64::new(config.seed);
    let (clo, chi) = config.coord_range;
    let (rlo, rhi) = config.radius_range();
    let vertices = (0..config.n)
        .map(|_| {
            let center: Vec<f64> = (0..config.dimension).map(|_| rng.uniform(clo, chi)).collect();
            let radius = rng.uniform(rlo, rhi);
            Neighborhood::ball(center, radius)
        })
        .collect();
    let mut edges = Vec::with_capacity(config.n * (config.n - 1) / 2);
    for v in 0..config.n {
        for w in v + 1..config.n {
            edges.push((v, w));
        }
    }
    let name = format!(
        "mstn_n{}_d{}_r{}_s{}",
        config.n, config.dimension, config.radii_scenario, config.seed
    );
    Instance::new(name, config.dimension, Norm::L2, vertices, edges, Some(config.seed))
}

/// Vertex centers of the eight-vertex example, listed by label 1..8.
pub const EXAMPLE1_CENTERS: [[f64; 2]; 8] = [
    [0.0, 5.0],
    [1.0, 1.0],
    [1.0, 6.0],
    [1.0, 4.0],
    [3.5, 3.0],
    [9.0, 3.0],
    [7.5, 0.0],
    [8.0, 6.0],
];

pub const EXAMPLE1_RADII: [f64; 8] = [1.0, 0.6, 1.0, 0.6, 1.4, 2.4, 0.8, 1.0];

/// Edges of the example graph by 1-based vertex label.
pub const EXAMPLE1_EDGES: [(usize, usize); 15] = [
    (1, 2),
    (1, 3),
    (1, 4),
    (2, 3),
    (2, 4),
    (2, 5),
    (2, 7),
    (3, 5),
    (3, 8),
    (4, 5),
    (5, 6),
    (5, 7),
    (5, 8),
    (6, 7),
    (6, 8),
];

/// The eight-vertex worked example with Euclidean ball neighborhoods.
pub fn example1() -> Instance {
    example1_with(|c, r| Neighborhood::ball(c, r)).with_name("example1")
}

/// The same graph with square (L-infinity ball) neighborhoods.
pub fn example1_boxes() -> Instance {
    example1_with(|c, r| Neighborhood::cube(c, r)).with_name("example1-boxes")
}

fn example1_with(shape: impl Fn(Vec<f64>, f64) -> Neighborhood) -> Instance {
    let vertices = EXAMPLE1_CENTERS
        .iter()
        .zip(EXAMPLE1_RADII)
        .map(|(c, r)| shape(c.to_vec(), r))
        .collect();
    let edges = EXAMPLE1_EDGES.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
    Instance::new("example1", 2, Norm::L2, vertices, edges, None).expect("fixture is valid")
}
