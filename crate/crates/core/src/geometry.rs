//! Points, edge norms, convex neighborhoods and the extreme distances
//! between pairs of neighborhoods.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for neighborhood membership.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn euclidean(&self, other: &Point) -> f64 {
        l2(&self.0, &other.0)
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// Norm used to measure edge lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    #[serde(rename = "linf")]
    LInf,
}

impl Norm {
    /// Norm of a difference vector.
    pub fn of(self, z: &[f64]) -> f64 {
        match self {
            Norm::L1 => z.iter().map(|t| t.abs()).sum(),
            Norm::L2 => z.iter().map(|t| t * t).sum::<f64>().sqrt(),
            Norm::LInf => z.iter().fold(0.0, |m, t| m.max(t.abs())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::LInf => "linf",
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" | "l-inf" | "inf" => Ok(Norm::LInf),
            other => Err(Error::Usage(format!("unknown norm '{other}'"))),
        }
    }
}

pub(crate) fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Distance between two points under `norm`.
pub fn distance(a: &Point, b: &Point, norm: Norm) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(distance_unchecked(&a.0, &b.0, norm))
}

pub(crate) fn distance_unchecked(a: &[f64], b: &[f64], norm: Norm) -> f64 {
    match norm {
        Norm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        Norm::L2 => l2(a, b),
        Norm::LInf => a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs())),
    }
}

/// Convex region a vertex may be placed in.
///
/// `Box` is the axis-aligned cube `{z : |z_k - c_k| <= half_width for all k}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Neighborhood {
    Ball { center: Point, radius: f64 },
    Box { center: Point, half_width: f64 },
}

impl Neighborhood {
    pub fn ball(center: impl Into<Point>, radius: f64) -> Self {
        Neighborhood::Ball {
            center: center.into(),
            radius,
        }
    }

    pub fn cube(center: impl Into<Point>, half_width: f64) -> Self {
        Neighborhood::Box {
            center: center.into(),
            half_width,
        }
    }

    pub fn center(&self) -> &Point {
        match self {
            Neighborhood::Ball { center, .. } | Neighborhood::Box { center, .. } => center,
        }
    }

    /// Radius for balls, half width for boxes.
    pub fn size(&self) -> f64 {
        match self {
            Neighborhood::Ball { radius, .. } => *radius,
            Neighborhood::Box { half_width, .. } => *half_width,
        }
    }

    pub fn dim(&self) -> usize {
        self.center().dim()
    }

    pub fn shape_name(&self) -> &'static str {
        match self {
            Neighborhood::Ball { .. } => "ball",
            Neighborhood::Box { .. } => "box",
        }
    }

    /// A neighborhood of size zero is the single point at its center.
    pub fn is_singleton(&self) -> bool {
        self.size() <= 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let size = self.size();
        if !(size.is_finite() && size >= 0.0) {
            return Err(Error::Usage(format!(
                "neighborhood size must be finite and nonnegative, got {size}"
            )));
        }
        if !self.center().is_finite() {
            return Err(Error::Usage("neighborhood center is not finite".into()));
        }
        Ok(())
    }

    /// Membership with absolute slack `tol`.
    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        self.contains_slice(&p.0, tol)
    }

    pub(crate) fn contains_slice(&self, p: &[f64], tol: f64) -> bool {
        match self {
            Neighborhood::Ball { center, radius } => l2(p, &center.0) <= radius + tol,
            Neighborhood::Box { center, half_width } => p
                .iter()
                .zip(&center.0)
                .all(|(x, c)| (x - c).abs() <= half_width + tol),
        }
    }

    /// Amount by which `p` lies outside the set (0 when inside).
    pub fn violation(&self, p: &[f64]) -> f64 {
        match self {
            Neighborhood::Ball { center, radius } => (l2(p, &center.0) - radius).max(0.0),
            Neighborhood::Box { center, half_width } => p
                .iter()
                .zip(&center.0)
                .fold(0.0, |m, (x, c)| m.max((x - c).abs() - half_width)),
        }
    }

    pub(crate) fn project_in_place(&self, p: &mut [f64]) {
        match self {
            Neighborhood::Ball { center, radius } => {
                let dist = l2(p, &center.0);
                if dist > *radius {
                    let scale = radius / dist;
                    for (x, c) in p.iter_mut().zip(&center.0) {
                        *x = c + scale * (*x - c);
                    }
                }
            }
            Neighborhood::Box { center, half_width } => {
                for (x, c) in p.iter_mut().zip(&center.0) {
                    *x = x.clamp(c - half_width, c + half_width);
                }
            }
        }
    }
}

/// Euclidean projection of `p` onto `nb`.
pub fn project(p: &Point, nb: &Neighborhood) -> Result<Point> {
    if p.dim() != nb.dim() {
        return Err(Error::DimensionMismatch {
            expected: nb.dim(),
            got: p.dim(),
        });
    }
    let mut out = p.0.clone();
    nb.project_in_place(&mut out);
    Ok(Point(out))
}

/// Smallest and largest length an edge can take.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Extreme distances between a point of `a` and a point of `b`.
///
/// Supported: ball/ball and ball/box under L2, box/box under every norm,
/// and singleton balls against anything.
pub fn pair_bounds(a: &Neighborhood, b: &Neighborhood, norm: Norm) -> Result<EdgeBounds> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    use Neighborhood::*;
    let bounds = match (a, b) {
        (Box { center: ca, half_width: ra }, Box { center: cb, half_width: rb }) => {
            box_box(&ca.0, *ra, &cb.0, *rb, norm)
        }
        // A radius-0 ball is a point, i.e. a box of half width 0.
        (Ball { center: ca, radius: ra }, Box { center: cb, half_width: rb }) if *ra <= 0.0 => {
            box_box(&ca.0, 0.0, &cb.0, *rb, norm)
        }
        (Box { center: ca, half_width: ra }, Ball { center: cb, radius: rb }) if *rb <= 0.0 => {
            box_box(&ca.0, *ra, &cb.0, 0.0, norm)
        }
        (Ball { center: ca, radius: ra }, Ball { center: cb, radius: rb })
            if *ra <= 0.0 && *rb <= 0.0 =>
        {
            box_box(&ca.0, 0.0, &cb.0, 0.0, norm)
        }
        _ if norm != Norm::L2 => {
            return Err(Error::Capability(format!(
                "{}/{} neighborhoods are only supported with the l2 norm",
                a.shape_name(),
                b.shape_name()
            )))
        }
        (Ball { center: ca, radius: ra }, Ball { center: cb, radius: rb }) => {
            let d = l2(&ca.0, &cb.0);
            EdgeBounds {
                lower: (d - ra - rb).max(0.0),
                upper: d + ra + rb,
            }
        }
        (Ball { center, radius }, Box { center: bc, half_width })
        | (Box { center: bc, half_width }, Ball { center, radius }) => {
            ball_box_l2(&center.0, *radius, &bc.0, *half_width)
        }
    };
    Ok(bounds)
}

fn box_box(ca: &[f64], ra: f64, cb: &[f64], rb: f64, norm: Norm) -> EdgeBounds {
    let gap: Vec<f64> = ca
        .iter()
        .zip(cb)
        .map(|(x, y)| ((x - y).abs() - ra - rb).max(0.0))
        .collect();
    let span: Vec<f64> = ca
        .iter()
        .zip(cb)
        .map(|(x, y)| (x - y).abs() + ra + rb)
        .collect();
    EdgeBounds {
        lower: norm.of(&gap),
        upper: norm.of(&span),
    }
}

fn ball_box_l2(c: &[f64], r: f64, bc: &[f64], h: f64) -> EdgeBounds {
    let to_box: f64 = c
        .iter()
        .zip(bc)
        .map(|(x, y)| ((x - y).abs() - h).max(0.0).powi(2))
        .sum::<f64>()
        .sqrt();
    // Farthest box corner from the ball center.
    let far: f64 = c
        .iter()
        .zip(bc)
        .map(|(x, y)| ((x - y).abs() + h).powi(2))
        .sum::<f64>()
        .sqrt();
    EdgeBounds {
        lower: (to_box - r).max(0.0),
        upper: far + r,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point(c.to_vec())
    }

    #[test]
    fn distances() {
        assert_eq!(distance(&p(&[0.0, 0.0]), &p(&[3.0, 4.0]), Norm::L2).unwrap(), 5.0);
        assert_eq!(distance(&p(&[1.0, 2.0]), &p(&[1.0, 2.0]), Norm::L1).unwrap(), 0.0);
        assert_eq!(distance(&p(&[0.0, 0.0]), &p(&[3.0, 4.0]), Norm::LInf).unwrap(), 4.0);
        assert!(matches!(
            distance(&p(&[0.0]), &p(&[0.0, 1.0]), Norm::L2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn projections() {
        let ball = Neighborhood::ball(vec![0.0, 0.0], 1.0);
        assert_eq!(project(&p(&[3.0, 0.0]), &ball).unwrap(), p(&[1.0, 0.0]));
        assert_eq!(project(&p(&[0.3, -0.2]), &ball).unwrap(), p(&[0.3, -0.2]));
        let cube = Neighborhood::cube(vec![0.0, 0.0], 1.0);
        assert_eq!(project(&p(&[2.0, -2.0]), &cube).unwrap(), p(&[1.0, -1.0]));
    }

    #[test]
    fn ball_pairs() {
        let a = Neighborhood::ball(vec![0.0, 0.0], 1.0);
        let b = Neighborhood::ball(vec![5.0, 0.0], 2.0);
        assert_eq!(pair_bounds(&a, &b, Norm::L2).unwrap(), EdgeBounds { lower: 2.0, upper: 8.0 });
        let a = Neighborhood::ball(vec![0.0, 0.0], 1.5);
        let b = Neighborhood::ball(vec![2.0, 0.0], 1.0);
        assert_eq!(pair_bounds(&a, &b, Norm::L2).unwrap(), EdgeBounds { lower: 0.0, upper: 4.5 });
    }

    #[test]
    fn ball_with_polyhedral_norm_is_rejected() {
        let a = Neighborhood::ball(vec![0.0, 0.0], 1.0);
        let b = Neighborhood::ball(vec![5.0, 0.0], 2.0);
        assert!(matches!(pair_bounds(&a, &b, Norm::L1), Err(Error::Capability(_))));
        let point = Neighborhood::ball(vec![0.0, 0.0], 0.0);
        let other = Neighborhood::ball(vec![3.0, 4.0], 0.0);
        let eb = pair_bounds(&point, &other, Norm::L1).unwrap();
        assert_eq!((eb.lower, eb.upper), (7.0, 7.0));
    }

    // Box((0,0),1) against Box((4,3),1): closest corners (1,1),(3,2) and
    // farthest corners (-1,-1),(5,4). The values below were confirmed with
    // the grid search in `box_pair_matches_grid_search`.
    #[test]
    fn box_pair_closed_form() {
        let a = Neighborhood::cube(vec![0.0, 0.0], 1.0);
        let b = Neighborhood::cube(vec![4.0, 3.0], 1.0);
        let eb = pair_bounds(&a, &b, Norm::L2).unwrap();
        assert!((eb.lower - 5f64.sqrt()).abs() < 1e-12);
        assert!((eb.upper - 61f64.sqrt()).abs() < 1e-12);
        let l1 = pair_bounds(&a, &b, Norm::L1).unwrap();
        assert_eq!((l1.lower, l1.upper), (3.0, 11.0));
        let linf = pair_bounds(&a, &b, Norm::LInf).unwrap();
        assert_eq!((linf.lower, linf.upper), (2.0, 6.0));
    }

    #[test]
    fn box_pair_matches_grid_search() {
        // Extremes of a convex distance over boxes are attained on the
        // boundary, so a boundary grid at step 1e-3 bounds the error by ~1e-3.
        let step = 1e-3;
        let ticks: Vec<f64> = (0..=2000).map(|i| -1.0 + i as f64 * step).collect();
        let mut perimeter = Vec::new();
        for &t in &ticks {
            perimeter.push((t, -1.0));
            perimeter.push((t, 1.0));
            perimeter.push((-1.0, t));
            perimeter.push((1.0, t));
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (ax, ay) in &perimeter {
            for (bx, by) in &perimeter {
                let d = ((4.0 + bx - ax).powi(2) + (3.0 + by - ay).powi(2)).sqrt();
                lo = lo.min(d);
                hi = hi.max(d);
            }
        }
        assert!((lo - 5f64.sqrt()).abs() < 1e-3, "{lo}");
        assert!((hi - 61f64.sqrt()).abs() < 1e-3, "{hi}");
    }

    #[test]
    fn ball_box_mixed() {
        let ball = Neighborhood::ball(vec![0.0, 0.0], 1.0);
        let cube = Neighborhood::cube(vec![5.0, 0.0], 1.0);
        let eb = pair_bounds(&ball, &cube, Norm::L2).unwrap();
        assert!((eb.lower - 3.0).abs() < 1e-12);
        assert!((eb.upper - (37f64.sqrt() + 1.0)).abs() < 1e-12);
    }
}
