//! Minimum spanning trees with neighborhoods.
//!
//! Every vertex of a graph may be placed anywhere inside its own convex
//! neighborhood; the task is to pick the placements and a spanning tree so
//! that the total length of the tree is as small as possible. The crate
//! provides an exact branch-and-cut driven by Benders-type optimality cuts,
//! an alternating multistart heuristic, a brute-force enumeration oracle,
//! edge-elimination preprocessing, a seeded instance generator, and export
//! of the compact mixed-integer conic models.

pub mod error;
pub mod exact;
pub mod geometry;
pub mod heuristic;
pub mod instance;
pub mod lp;
pub mod model_export;
pub mod preprocess;
pub mod report;
pub mod rng;
pub mod sec;
pub mod spanning_tree;
pub mod subproblem;

pub use error::{Error, Result};
pub use geometry::{EdgeBounds, Neighborhood, Norm, Point};
pub use instance::{example1, generate, GeneratorConfig, Instance};
pub use spanning_tree::Tree;
