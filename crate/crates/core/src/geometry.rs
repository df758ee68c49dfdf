//! Bounded convex domains in one and two dimensions.
//!
//! Points are stored as `[f64; 2]` in both dimensions; for an interval only
//! the first coordinate is meaningful and the second is ignored.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Point = [f64; 2];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("interval requires a < b (got a = {a}, b = {b})")]
    EmptyInterval { a: f64, b: f64 },
    #[error("disk radius must be positive and finite (got {0})")]
    BadRadius(f64),
    #[error("polygon needs at least 3 vertices (got {0})")]
    TooFewVertices(usize),
    #[error("polygon is not strictly convex and counterclockwise at vertex {0}")]
    NotConvex(usize),
    #[error("non-finite coordinate in domain description")]
    NonFinite,
    #[error("point {0:?} lies outside the closed domain")]
    OutsideDomain(Point),
}

/// A bounded convex region `Ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainSpec", into = "DomainSpec")]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Disk { center: Point, radius: f64 },
    ConvexPolygon { vertices: Vec<Point> },
}

/// The JSON shape of a domain, before validation.
///
/// ```json
/// {"kind": "interval", "a": 0, "b": 1}
/// {"kind": "disk", "center": [0, 0], "radius": 1.0}
/// {"kind": "convex_polygon", "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Interval { a: f64, b: f64 },
    Disk { center: Point, radius: f64 },
    ConvexPolygon { vertices: Vec<Point> },
}

impl TryFrom<DomainSpec> for Domain {
    type Error = GeometryError;

    fn try_from(spec: DomainSpec) -> Result<Self, Self::Error> {
        match spec {
            DomainSpec::Interval { a, b } => Domain::interval(a, b),
            DomainSpec::Disk { center, radius } => Domain::disk(center, radius),
            DomainSpec::ConvexPolygon { vertices } => Domain::polygon(vertices),
        }
    }
}

impl From<Domain> for DomainSpec {
    fn from(d: Domain) -> Self {
        match d {
            Domain::Interval { a, b } => DomainSpec::Interval { a, b },
            Domain::Disk { center, radius } => DomainSpec::Disk { center, radius },
            Domain::ConvexPolygon { vertices } => DomainSpec::ConvexPolygon { vertices },
        }
    }
}

/// A closed ball `B_R(x0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

fn sub(p: Point, q: Point) -> Point {
    [p[0] - q[0], p[1] - q[1]]
}

fn dot(p: Point, q: Point) -> f64 {
    p[0] * q[0] + p[1] * q[1]
}

fn cross(p: Point, q: Point) -> f64 {
    p[0] * q[1] - p[1] * q[0]
}

fn norm(p: Point) -> f64 {
    p[0].hypot(p[1])
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self, GeometryError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if a >= b {
            return Err(GeometryError::EmptyInterval { a, b });
        }
        Ok(Domain::Interval { a, b })
    }

    pub fn disk(center: Point, radius: f64) -> Result<Self, GeometryError> {
        if !center.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::BadRadius(radius));
        }
        Ok(Domain::Disk { center, radius })
    }

    /// Vertices must be listed counterclockwise with every turn strictly left.
    pub fn polygon(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::TooFewVertices(n));
        }
        if !vertices.iter().flatten().all(|c| c.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        for i in 0..n {
            let p = vertices[i];
            let q = vertices[(i + 1) % n];
            let r = vertices[(i + 2) % n];
            if cross(sub(q, p), sub(r, q)) <= 0.0 {
                return Err(GeometryError::NotConvex((i + 1) % n));
            }
        }
        // Consecutive left turns alone admit star-shaped winding twice around.
        let total_turn: f64 = (0..n)
            .map(|i| {
                let p = vertices[i];
                let q = vertices[(i + 1) % n];
                let r = vertices[(i + 2) % n];
                let e1 = sub(q, p);
                let e2 = sub(r, q);
                cross(e1, e2).atan2(dot(e1, e2))
            })
            .sum();
        if (total_turn - std::f64::consts::TAU).abs() > 1e-6 {
            return Err(GeometryError::NotConvex(0));
        }
        Ok(Domain::ConvexPolygon { vertices })
    }

    /// Axis-aligned square `[x0, x0 + side] × [y0, y0 + side]`.
    pub fn square(origin: Point, side: f64) -> Result<Self, GeometryError> {
        let [x, y] = origin;
        Domain::polygon(vec![[x, y], [x + side, y], [x + side, y + side], [x, y + side]])
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// True iff `x` lies in the open region.
    pub fn contains(&self, x: Point) -> bool {
        match self {
            Domain::Interval { a, b } => *a < x[0] && x[0] < *b,
            Domain::Disk { center, radius } => norm(sub(x, *center)) < *radius,
            Domain::ConvexPolygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|i| {
                    let p = vertices[i];
                    let q = vertices[(i + 1) % n];
                    cross(sub(q, p), sub(x, p)) > 0.0
                })
            }
        }
    }

    /// Signed distance to the boundary: positive inside, negative outside.
    ///
    /// For polygons the exterior value is the largest violated half-plane
    /// distance, which is exact along edges and a lower bound near corners.
    pub fn signed_distance(&self, x: Point) -> f64 {
        match self {
            Domain::Interval { a, b } => (x[0] - a).min(b - x[0]),
            Domain::Disk { center, radius } => radius - norm(sub(x, *center)),
            Domain::ConvexPolygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let p = vertices[i];
                        let e = sub(vertices[(i + 1) % n], p);
                        cross(e, sub(x, p)) / norm(e)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// `dist(x, ∂Ω)` for points of the closed domain.
    pub fn distance_to_boundary(&self, x: Point) -> f64 {
        self.signed_distance(x).max(0.0)
    }

    fn contains_closed(&self, x: Point) -> bool {
        let tol = 1e-12 * self.diameter();
        self.signed_distance(x) >= -tol
    }

    /// Smallest `t ∈ (0, t_max]` with `x + t e` on the boundary, if any.
    ///
    /// `e` must be a unit vector; in one dimension only `e[0]` (±1) is used.
    pub fn boundary_crossing(
        &self,
        x: Point,
        e: Point,
        t_max: f64,
    ) -> Result<Option<f64>, GeometryError> {
        if !self.contains_closed(x) {
            return Err(GeometryError::OutsideDomain(x));
        }
        let t = match self {
            Domain::Interval { a, b } => {
                if e[0] > 0.0 {
                    (b - x[0]) / e[0]
                } else if e[0] < 0.0 {
                    (a - x[0]) / e[0]
                } else {
                    f64::INFINITY
                }
            }
            Domain::Disk { center, radius } => {
                // |d + t e|^2 = r^2 with d = x - c; take the positive root
                // in the cancellation-free form.
                let d = sub(x, *center);
                let b = dot(d, e);
                let c = dot(d, d) - radius * radius;
                let s = (b * b - c).max(0.0).sqrt();
                if b > 0.0 {
                    -c / (b + s)
                } else {
                    s - b
                }
            }
            Domain::ConvexPolygon { vertices } => {
                let n = vertices.len();
                let mut best = f64::INFINITY;
                for i in 0..n {
                    let p = vertices[i];
                    let edge = sub(vertices[(i + 1) % n], p);
                    // Outward normal (counterclockwise ordering).
                    let normal = [edge[1], -edge[0]];
                    let rate = dot(normal, e);
                    if rate > 0.0 {
                        let t = dot(normal, sub(p, x)) / rate;
                        if t < best {
                            best = t;
                        }
                    }
                }
                best
            }
        };
        Ok(if t > 0.0 && t <= t_max { Some(t) } else { None })
    }

    /// Ball containing the closed domain, inflated by `1 + margin`.
    pub fn enclosing_ball(&self, margin: f64) -> Ball {
        let (center, radius) = match self {
            Domain::Interval { a, b } => ([0.5 * (a + b), 0.0], 0.5 * (b - a)),
            Domain::Disk { center, radius } => (*center, *radius),
            Domain::ConvexPolygon { vertices } => {
                let k = vertices.len() as f64;
                let c = vertices
                    .iter()
                    .fold([0.0, 0.0], |acc, v| [acc[0] + v[0] / k, acc[1] + v[1] / k]);
                let r = vertices
                    .iter()
                    .map(|v| norm(sub(*v, c)))
                    .fold(0.0, f64::max);
                (c, r)
            }
        };
        Ball {
            center,
            radius: (1.0 + margin) * radius,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Interval { a, b } => b - a,
            Domain::Disk { radius, .. } => 2.0 * radius,
            Domain::ConvexPolygon { vertices } => {
                let mut d: f64 = 0.0;
                for (i, p) in vertices.iter().enumerate() {
                    for q in &vertices[i + 1..] {
                        d = d.max(norm(sub(*p, *q)));
                    }
                }
                d
            }
        }
    }

    /// Lebesgue measure `|Ω|`.
    pub fn measure(&self) -> f64 {
        match self {
            Domain::Interval { a, b } => b - a,
            Domain::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
            Domain::ConvexPolygon { vertices } => {
                let n = vertices.len();
                0.5 * (0..n)
                    .map(|i| cross(vertices[i], vertices[(i + 1) % n]))
                    .sum::<f64>()
            }
        }
    }

    /// Boundary length (the point count 2 for an interval).
    pub fn perimeter(&self) -> f64 {
        match self {
            Domain::Interval { .. } => 2.0,
            Domain::Disk { radius, .. } => std::f64::consts::TAU * radius,
            Domain::ConvexPolygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| norm(sub(vertices[(i + 1) % n], vertices[i])))
                    .sum()
            }
        }
    }

    /// `(min corner, max corner)` of the bounding box.
    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            Domain::Interval { a, b } => ([*a, 0.0], [*b, 0.0]),
            Domain::Disk { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            Domain::ConvexPolygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Image of the domain under `x ↦ t x`.
    pub fn scaled(&self, t: f64) -> Result<Self, GeometryError> {
        match self {
            Domain::Interval { a, b } => Domain::interval(t * a, t * b),
            Domain::Disk { center, radius } => {
                Domain::disk([t * center[0], t * center[1]], t * radius)
            }
            Domain::ConvexPolygon { vertices } => {
                Domain::polygon(vertices.iter().map(|v| [t * v[0], t * v[1]]).collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_square() -> Domain {
        Domain::square([0.0, 0.0], 1.0).unwrap()
    }

    #[test]
    fn containment_examples() {
        assert!(Domain::interval(0.0, 1.0).unwrap().contains([0.5, 0.0]));
        assert!(!Domain::disk([0.0, 0.0], 1.0).unwrap().contains([1.0, 0.0]));
        assert!(!unit_square().contains([-0.1, 0.5]));
        assert!(unit_square().contains([0.3, 0.9]));
    }

    #[test]
    fn crossing_examples() {
        let disk = Domain::disk([0.0, 0.0], 1.0).unwrap();
        let t = disk.boundary_crossing([0.0, 0.0], [1.0, 0.0], 2.0).unwrap();
        assert_eq!(t, Some(1.0));

        let iv = Domain::interval(0.0, 1.0).unwrap();
        let t = iv.boundary_crossing([0.25, 0.0], [-1.0, 0.0], 1.0).unwrap();
        assert_eq!(t, Some(0.25));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let t = unit_square()
            .boundary_crossing([0.5, 0.5], [s, s], 1.0)
            .unwrap()
            .unwrap();
        assert!((t - s).abs() < 1e-15);

        // Segment stays inside.
        assert_eq!(disk.boundary_crossing([0.0, 0.0], [0.0, 1.0], 0.5).unwrap(), None);
        assert!(disk.boundary_crossing([2.0, 0.0], [1.0, 0.0], 1.0).is_err());
    }

    #[test]
    fn enclosing_ball_examples() {
        let b = unit_square().enclosing_ball(0.0);
        assert_eq!(b.center, [0.5, 0.5]);
        assert!((b.radius - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        let b = Domain::disk([0.3, -0.2], 2.0).unwrap().enclosing_ball(0.1);
        assert_eq!(b.center, [0.3, -0.2]);
        assert!((b.radius - 2.2).abs() < 1e-15);

        let b = Domain::interval(0.0, 1.0).unwrap().enclosing_ball(0.0);
        assert_eq!(b.center[0], 0.5);
        assert_eq!(b.radius, 0.5);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(Domain::interval(1.0, 1.0).is_err());
        assert!(Domain::disk([0.0, 0.0], 0.0).is_err());
        assert!(Domain::polygon(vec![[0.0, 0.0], [1.0, 0.0]]).is_err());
        // Clockwise square.
        assert!(Domain::polygon(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).is_err());
        // Collinear vertex.
        assert!(Domain::polygon(vec![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [0.0, 1.0]]).is_err());
        // Pentagram: all left turns but winds twice.
        let star: Vec<Point> = (0..5)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_2 + 2.0 * k as f64 * std::f64::consts::TAU / 5.0;
                [a.cos(), a.sin()]
            })
            .collect();
        assert!(Domain::polygon(star).is_err());
    }

    #[test]
    fn measures() {
        assert!((unit_square().measure() - 1.0).abs() < 1e-15);
        assert!((unit_square().perimeter() - 4.0).abs() < 1e-15);
        assert!((unit_square().diameter() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn json_schema() {
        let d: Domain = serde_json::from_str(r#"{"kind":"disk","center":[0,0],"radius":1.0}"#).unwrap();
        assert_eq!(d, Domain::disk([0.0, 0.0], 1.0).unwrap());
        let d: Domain =
            serde_json::from_str(r#"{"kind":"convex_polygon","vertices":[[0,0],[1,0],[0,1]]}"#).unwrap();
        assert_eq!(d.dim(), 2);
        assert!(serde_json::from_str::<Domain>(r#"{"kind":"disk","center":[0,0],"radius":-1}"#).is_err());
        assert!(serde_json::from_str::<Domain>(r#"{"kind":"interval","a":0,"b":1,"c":2}"#).is_err());
        let back = serde_json::to_string(&Domain::interval(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(back, r#"{"kind":"interval","a":0.0,"b":1.0}"#);
    }

    fn domains() -> Vec<Domain> {
        vec![
            Domain::interval(-0.5, 2.0).unwrap(),
            Domain::disk([0.2, -0.1], 1.3).unwrap(),
            unit_square(),
            Domain::polygon(vec![[0.0, 0.0], [2.0, 0.2], [1.1, 1.5]]).unwrap(),
            Domain::polygon(vec![[0.0, 0.0], [1.0, -0.5], [2.0, 0.0], [2.0, 1.0], [0.5, 1.2]]).unwrap(),
        ]
    }

    /// Maps (s, t) in the unit square to an interior point via the enclosing ball center.
    fn interior_point(d: &Domain, s: f64, angle: f64) -> Point {
        let c = d.enclosing_ball(0.0).center;
        let e = if d.dim() == 1 {
            [if angle.sin() >= 0.0 { 1.0 } else { -1.0 }, 0.0]
        } else {
            [angle.cos(), angle.sin()]
        };
        let t = d.boundary_crossing(c, e, f64::INFINITY).unwrap().unwrap();
        [c[0] + s * t * e[0], c[1] + s * t * e[1]]
    }

    proptest! {
        #[test]
        fn crossing_lands_on_boundary(k in 0usize..5, s in 0.0f64..0.95, a in 0.0f64..std::f64::consts::TAU, b in 0.0f64..std::f64::consts::TAU) {
            let d = &domains()[k];
            let x = interior_point(d, s, a);
            prop_assume!(d.contains(x));
            let e = if d.dim() == 1 { [if b.sin() >= 0.0 { 1.0 } else { -1.0 }, 0.0] } else { [b.cos(), b.sin()] };
            let t = d.boundary_crossing(x, e, 10.0 * d.diameter()).unwrap().unwrap();
            let p = [x[0] + t * e[0], x[1] + t * e[1]];
            prop_assert!(d.signed_distance(p).abs() <= 1e-12 * d.diameter());
        }

        #[test]
        fn boundary_midpoints_are_in_closed_domain(k in 0usize..5, a in 0.0f64..std::f64::consts::TAU, b in 0.0f64..std::f64::consts::TAU) {
            let d = &domains()[k];
            let c = d.enclosing_ball(0.0).center;
            let hit = |ang: f64| {
                let e = if d.dim() == 1 { [if ang.sin() >= 0.0 { 1.0 } else { -1.0 }, 0.0] } else { [ang.cos(), ang.sin()] };
                let t = d.boundary_crossing(c, e, f64::INFINITY).unwrap().unwrap();
                [c[0] + t * e[0], c[1] + t * e[1]]
            };
            let (p, q) = (hit(a), hit(b));
            let m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            prop_assert!(d.signed_distance(m) >= -1e-12 * d.diameter());
        }
    }

    #[test]
    fn ball_center_is_inside() {
        for d in domains() {
            assert!(d.contains(d.enclosing_ball(0.05).center));
            let b = d.enclosing_ball(0.0);
            let (lo, hi) = d.bounding_box();
            if let Domain::ConvexPolygon { vertices } = &d {
                for v in vertices {
                    assert!(norm(sub(*v, b.center)) <= b.radius + 1e-14);
                }
            }
            assert!(lo[0] <= hi[0]);
        }
    }
}
