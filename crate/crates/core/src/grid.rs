//! Structured lattice over a convex domain with cut-cell boundary arms.
//!
//! Unknowns live at lattice nodes in the open domain. Every unknown carries,
//! for each stencil direction, a forward and a backward [`Arm`]: either the
//! neighbouring unknown one lattice step away, or the point where the ray
//! leaves the domain, where the value is pinned to zero.

use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::geometry::{Domain, Point};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("spacing h = {h} must lie in (0, diam/8] = (0, {max}]")]
    BadSpacing { h: f64, max: f64 },
    #[error("stencil width W = {0} must lie in [1, 4]")]
    BadWidth(usize),
    #[error("grid too coarse: {0} unknown nodes, need at least 9")]
    TooCoarse(usize),
    #[error("exponent p = {0} must be >= 1")]
    BadExponent(f64),
    #[error("field has {got} values, grid has {expected} unknowns")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    /// Every stencil arm ends at another unknown.
    Interior,
    /// At least one arm is cut by the boundary.
    BoundaryAdjacent,
    /// Outside the open domain (or on its boundary).
    Exterior,
}

impl NodeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeClass::Interior => "interior",
            NodeClass::BoundaryAdjacent => "boundary",
            NodeClass::Exterior => "exterior",
        }
    }
}

/// One side of a directional second difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arm {
    /// Neighbouring unknown, or `None` when the arm ends on the boundary.
    pub neighbor: Option<usize>,
    /// Physical arm length, in `(0, |v| h]`.
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct Grid {
    domain: Domain,
    h: f64,
    width: usize,
    origin: Point,
    nx: usize,
    ny: usize,
    class: Vec<NodeClass>,
    lattice_to_unknown: Vec<Option<usize>>,
    unknown_lattice: Vec<(usize, usize)>,
    positions: Vec<Point>,
    boundary_distance: Vec<f64>,
    weights: Vec<f64>,
    directions: Vec<[i32; 2]>,
    pairs: Vec<[usize; 2]>,
    arms: Vec<Arm>,
}

/// Primitive lattice vectors of sup-norm at most `width`, grouped into
/// orthogonal pairs ordered by angle in `[0, π/2)`.
pub fn stencil_pairs(width: usize) -> (Vec<[i32; 2]>, Vec<[usize; 2]>) {
    fn gcd(a: i32, b: i32) -> i32 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let w = width as i32;
    let mut first: Vec<[i32; 2]> = Vec::new();
    for p in 0..=w {
        for q in 0..=w {
            // Angles in [0, π/2): p > 0, q >= 0.
            if p > 0 && gcd(p, q) == 1 {
                first.push([p, q]);
            }
        }
    }
    first.sort_by(|a, b| {
        let ta = (a[1] as f64).atan2(a[0] as f64);
        let tb = (b[1] as f64).atan2(b[0] as f64);
        ta.partial_cmp(&tb).unwrap()
    });
    let mut directions = Vec::with_capacity(2 * first.len());
    let mut pairs = Vec::with_capacity(first.len());
    for v in first {
        let k = directions.len();
        directions.push(v);
        directions.push([-v[1], v[0]]);
        pairs.push([k, k + 1]);
    }
    (directions, pairs)
}

impl Grid {
    pub fn build(domain: &Domain, h: f64, width: usize) -> Result<Grid, GridError> {
        let max = domain.diameter() / 8.0;
        if !(h > 0.0 && h <= max * (1.0 + 1e-12)) {
            return Err(GridError::BadSpacing { h, max });
        }
        let dim = domain.dim();
        let (directions, pairs) = if dim == 1 {
            (vec![[1, 0]], Vec::new())
        } else {
            if !(1..=4).contains(&width) {
                return Err(GridError::BadWidth(width));
            }
            stencil_pairs(width)
        };
        let width = if dim == 1 { 1 } else { width };

        let (lo, hi) = domain.bounding_box();
        let count = |k: usize| ((hi[k] - lo[k]) / h - 1e-9).ceil().max(0.0) as usize + 1;
        let nx = count(0);
        let ny = if dim == 1 { 1 } else { count(1) };
        let origin = lo;
        let pos = |ix: usize, iy: usize| [origin[0] + ix as f64 * h, origin[1] + iy as f64 * h];

        let mut lattice_to_unknown = vec![None; nx * ny];
        let mut unknown_lattice = Vec::new();
        let mut positions = Vec::new();
        for ix in 0..nx {
            for iy in 0..ny {
                let x = pos(ix, iy);
                if domain.contains(x) {
                    lattice_to_unknown[iy * nx + ix] = Some(unknown_lattice.len());
                    unknown_lattice.push((ix, iy));
                    positions.push(x);
                }
            }
        }
        let unknowns = positions.len();
        if dim == 2 && unknowns < 9 {
            return Err(GridError::TooCoarse(unknowns));
        }

        let unit: Vec<Point> = directions
            .iter()
            .map(|v| {
                let len = (v[0] as f64).hypot(v[1] as f64);
                [v[0] as f64 / len, v[1] as f64 / len]
            })
            .collect();

        let mut arms = Vec::with_capacity(unknowns * 2 * directions.len());
        let mut class = vec![NodeClass::Exterior; nx * ny];
        for (u, &(ix, iy)) in unknown_lattice.iter().enumerate() {
            let x = positions[u];
            let mut cut = false;
            for (d, v) in directions.iter().enumerate() {
                let step = h * (v[0] as f64).hypot(v[1] as f64);
                for s in [1i64, -1] {
                    let jx = ix as i64 + s * v[0] as i64;
                    let jy = iy as i64 + s * v[1] as i64;
                    let neighbor = if jx >= 0 && jy >= 0 && (jx as usize) < nx && (jy as usize) < ny {
                        lattice_to_unknown[jy as usize * nx + jx as usize]
                    } else {
                        None
                    };
                    let arm = match neighbor {
                        Some(n) => Arm {
                            neighbor: Some(n),
                            length: step,
                        },
                        None => {
                            cut = true;
                            let e = [s as f64 * unit[d][0], s as f64 * unit[d][1]];
                            let t = domain
                                .boundary_crossing(x, e, step * (1.0 + 1e-9))
                                .expect("unknown node lies inside the domain")
                                .map_or(step, |t| t.min(step));
                            Arm {
                                neighbor: None,
                                length: t,
                            }
                        }
                    };
                    arms.push(arm);
                }
            }
            class[iy * nx + ix] = if cut {
                NodeClass::BoundaryAdjacent
            } else {
                NodeClass::Interior
            };
        }

        let cell = h.powi(dim as i32);
        let weights = unknown_lattice
            .iter()
            .zip(&positions)
            .map(|(&(ix, iy), x)| match class[iy * nx + ix] {
                NodeClass::Interior => cell,
                _ => cell * clipped_fraction(domain, *x, h, dim),
            })
            .collect();
        let boundary_distance = positions
            .iter()
            .map(|x| domain.distance_to_boundary(*x))
            .collect();

        Ok(Grid {
            domain: domain.clone(),
            h,
            width,
            origin,
            nx,
            ny,
            class,
            lattice_to_unknown,
            unknown_lattice,
            positions,
            boundary_distance,
            weights,
            directions,
            pairs,
            arms,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Lattice extent `(nx, ny)`; `ny = 1` in one dimension.
    pub fn lattice_dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn lattice_position(&self, ix: usize, iy: usize) -> Point {
        [self.origin[0] + ix as f64 * self.h, self.origin[1] + iy as f64 * self.h]
    }

    pub fn class_at(&self, ix: usize, iy: usize) -> NodeClass {
        self.class[iy * self.nx + ix]
    }

    pub fn unknown_at(&self, ix: usize, iy: usize) -> Option<usize> {
        self.lattice_to_unknown[iy * self.nx + ix]
    }

    /// Number of non-exterior nodes.
    pub fn num_unknowns(&self) -> usize {
        self.positions.len()
    }

    pub fn lattice_index(&self, u: usize) -> (usize, usize) {
        self.unknown_lattice[u]
    }

    pub fn position(&self, u: usize) -> Point {
        self.positions[u]
    }

    pub fn class(&self, u: usize) -> NodeClass {
        let (ix, iy) = self.unknown_lattice[u];
        self.class_at(ix, iy)
    }

    pub fn is_full_stencil(&self, u: usize) -> bool {
        self.class(u) == NodeClass::Interior
    }

    pub fn boundary_distance(&self, u: usize) -> f64 {
        self.boundary_distance[u]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn directions(&self) -> &[[i32; 2]] {
        &self.directions
    }

    pub fn pairs(&self) -> &[[usize; 2]] {
        &self.pairs
    }

    pub fn num_directions(&self) -> usize {
        self.directions.len()
    }

    /// Unit vector of direction `d`.
    pub fn unit_direction(&self, d: usize) -> Point {
        let v = self.directions[d];
        let len = (v[0] as f64).hypot(v[1] as f64);
        [v[0] as f64 / len, v[1] as f64 / len]
    }

    /// Forward and backward arms of unknown `u` along direction `d`.
    #[inline]
    pub fn arms(&self, u: usize, d: usize) -> [Arm; 2] {
        let k = (u * self.directions.len() + d) * 2;
        [self.arms[k], self.arms[k + 1]]
    }

    /// Sum of quadrature weights, the discrete `|Ω|`.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn check_len(&self, field: &ScalarField) -> Result<(), GridError> {
        if field.len() != self.num_unknowns() {
            return Err(GridError::LengthMismatch {
                expected: self.num_unknowns(),
                got: field.len(),
            });
        }
        Ok(())
    }
}

/// Fraction of the cell `x ± h/2` inside the domain, sampled on a 4 (1D)
/// or 4×4 (2D) midpoint lattice.
fn clipped_fraction(domain: &Domain, x: Point, h: f64, dim: usize) -> f64 {
    const SUB: usize = 4;
    let off = |k: usize| ((k as f64 + 0.5) / SUB as f64 - 0.5) * h;
    let mut inside = 0usize;
    let mut total = 0usize;
    for i in 0..SUB {
        for j in 0..if dim == 1 { 1 } else { SUB } {
            let p = if dim == 1 {
                [x[0] + off(i), x[1]]
            } else {
                [x[0] + off(i), x[1] + off(j)]
            };
            total += 1;
            if domain.contains(p) {
                inside += 1;
            }
        }
    }
    inside as f64 / total as f64
}

/// Node values of a function on the unknowns of a [`Grid`]; the boundary
/// value is zero implicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            values: vec![0.0; grid.num_unknowns()],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(Point) -> f64) -> Self {
        ScalarField {
            values: (0..grid.num_unknowns()).map(|u| f(grid.position(u))).collect(),
        }
    }

    pub fn from_values(values: Vec<f64>) -> Self {
        ScalarField { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        ScalarField {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `sup |self - other|`.
    pub fn distance(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Copy rescaled to unit sup-norm (unchanged if identically zero).
    pub fn normalized(&self) -> Self {
        let s = self.sup_norm();
        if s > 0.0 {
            self.scaled(1.0 / s)
        } else {
            self.clone()
        }
    }
}

impl Index<usize> for ScalarField {
    type Output = f64;

    fn index(&self, u: usize) -> &f64 {
        &self.values[u]
    }
}

impl IndexMut<usize> for ScalarField {
    fn index_mut(&mut self, u: usize) -> &mut f64 {
        &mut self.values[u]
    }
}

/// Quadrature of `(-u)^p` over the domain.
pub fn integrate_power(grid: &Grid, field: &ScalarField, p: f64) -> Result<f64, GridError> {
    if p.is_nan() || p < 1.0 {
        return Err(GridError::BadExponent(p));
    }
    grid.check_len(field)?;
    Ok(grid
        .weights
        .iter()
        .zip(field.values())
        .map(|(w, v)| w * (-v).max(0.0).powf(p))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn interval_nodes() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        let g = Grid::build(&d, 0.125, 2).unwrap();
        assert_eq!(g.num_unknowns(), 7);
        for u in 0..7 {
            assert!((g.position(u)[0] - (u + 1) as f64 / 8.0).abs() < 1e-15);
        }
        assert_eq!(g.class(0), NodeClass::BoundaryAdjacent);
        assert_eq!(g.class(3), NodeClass::Interior);
        assert_eq!(g.arms(0, 0)[1].neighbor, None);
        assert!((g.arms(0, 0)[1].length - 0.125).abs() < 1e-15);
    }

    #[test]
    fn stencil_directions() {
        let (dirs, pairs) = stencil_pairs(1);
        assert_eq!(pairs.len(), 2);
        assert_eq!(dirs, vec![[1, 0], [0, 1], [1, 1], [-1, 1]]);
        assert_eq!(stencil_pairs(2).1.len(), 4);
        assert_eq!(stencil_pairs(3).1.len(), 8);
        assert_eq!(stencil_pairs(4).1.len(), 12);
        for (dirs, pairs) in (1..=4).map(stencil_pairs) {
            for [a, b] in pairs {
                assert_eq!(dirs[a][0] * dirs[b][0] + dirs[a][1] * dirs[b][1], 0);
            }
        }
    }

    /// Direct enumeration over the candidate lattice, independent of the
    /// arm bookkeeping in `Grid::build`.
    fn enumerate_disk(h: f64, width: usize) -> (usize, usize) {
        let (dirs, _) = stencil_pairs(width);
        let n = (2.0 / h).round() as i64;
        let inside = |x: f64, y: f64| x * x + y * y < 1.0;
        let (mut nodes, mut full) = (0, 0);
        for i in 0..=n {
            for j in 0..=n {
                let (x, y) = (-1.0 + i as f64 * h, -1.0 + j as f64 * h);
                if !inside(x, y) {
                    continue;
                }
                nodes += 1;
                let all = dirs.iter().all(|v| {
                    [1.0, -1.0].iter().all(|s| {
                        inside(x + s * v[0] as f64 * h, y + s * v[1] as f64 * h)
                    })
                });
                if all {
                    full += 1;
                }
            }
        }
        (nodes, full)
    }

    #[test]
    fn disk_classification_matches_enumeration() {
        let d = Domain::disk([0.0, 0.0], 1.0).unwrap();
        for (h, w) in [(0.25, 1), (0.25, 2), (0.125, 2), (0.125, 3)] {
            let g = Grid::build(&d, h, w).unwrap();
            let full = (0..g.num_unknowns()).filter(|&u| g.is_full_stencil(u)).count();
            assert_eq!((g.num_unknowns(), full), enumerate_disk(h, w), "h={h} W={w}");
        }
        // At h = 1/4 the lattice has 45 points with |x| < 1, 21 with the
        // W = 1 stencil fully inside.
        assert_eq!(enumerate_disk(0.25, 1), (45, 21));
    }

    #[test]
    fn cut_distances_in_range() {
        let d = Domain::polygon(vec![[0.0, 0.0], [1.0, 0.1], [0.4, 0.9]]).unwrap();
        let g = Grid::build(&d, 1.0 / 32.0, 2).unwrap();
        for u in 0..g.num_unknowns() {
            for dir in 0..g.num_directions() {
                let v = g.directions()[dir];
                let step = g.h() * (v[0] as f64).hypot(v[1] as f64);
                for arm in g.arms(u, dir) {
                    assert!(arm.length > 0.0 && arm.length <= step);
                    if arm.neighbor.is_some() {
                        assert_eq!(arm.length, step);
                    }
                }
            }
        }
    }

    #[test]
    fn area_band() {
        let sq = Domain::square([0.0, 0.0], 1.0).unwrap();
        let h = 0.125;
        let g = Grid::build(&sq, h, 1).unwrap();
        let total = g.total_weight();
        assert!((total - 1.0).abs() <= 2.0 * h * 4.0, "{total}");

        let disk = Domain::disk([0.0, 0.0], 1.0).unwrap();
        for h in [1.0 / 16.0, 1.0 / 64.0] {
            let g = Grid::build(&disk, h, 2).unwrap();
            assert!((g.total_weight() - PI).abs() <= 2.0 * h * 2.0 * PI);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let d = Domain::disk([0.0, 0.0], 1.0).unwrap();
        assert!(matches!(Grid::build(&d, 0.5, 2), Err(GridError::BadSpacing { .. })));
        assert!(matches!(Grid::build(&d, 0.1, 5), Err(GridError::BadWidth(5))));
        assert!(matches!(Grid::build(&d, -0.1, 2), Err(GridError::BadSpacing { .. })));
    }

    #[test]
    fn integrate_power_examples() {
        let iv = Domain::interval(0.0, 1.0).unwrap();
        let g = Grid::build(&iv, 1.0 / 256.0, 1).unwrap();
        assert_eq!(integrate_power(&g, &ScalarField::zeros(&g), 2.0).unwrap(), 0.0);
        let s = ScalarField::from_fn(&g, |x| -(PI * x[0]).sin());
        assert!((integrate_power(&g, &s, 2.0).unwrap() - 0.5).abs() < 1e-4);
        assert!(integrate_power(&g, &s, 0.5).is_err());

        let disk = Domain::disk([0.0, 0.0], 1.0).unwrap();
        let g = Grid::build(&disk, 1.0 / 128.0, 2).unwrap();
        let p = ScalarField::from_fn(&g, |x| 0.5 * (x[0] * x[0] + x[1] * x[1] - 1.0));
        // ∫ ((1 - r²)/2)³ over the unit disk = π/32.
        assert!((integrate_power(&g, &p, 3.0).unwrap() - PI / 32.0).abs() < 2e-3);
    }

    #[test]
    fn quadrature_of_constant_is_exact() {
        let d = Domain::polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.2, 0.8], [0.1, 1.0]]).unwrap();
        let g = Grid::build(&d, 1.0 / 40.0, 2).unwrap();
        let c = -0.7;
        let f = ScalarField::from_values(vec![c; g.num_unknowns()]);
        let exact = c.abs().powf(2.5) * g.total_weight();
        assert!((integrate_power(&g, &f, 2.5).unwrap() - exact).abs() <= 1e-13 * exact);
    }

    #[test]
    fn refinement_consistency() {
        // Lipschitz integrand on the square: successive differences shrink.
        let sq = Domain::square([0.0, 0.0], 1.0).unwrap();
        let vals: Vec<f64> = [8, 16, 32, 64]
            .iter()
            .map(|&n| {
                let g = Grid::build(&sq, 1.0 / n as f64, 1).unwrap();
                let f = ScalarField::from_fn(&g, |x| -(x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1])).sqrt());
                integrate_power(&g, &f, 2.0).unwrap()
            })
            .collect();
        let diffs: Vec<f64> = vals.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        for w in diffs.windows(2) {
            assert!(w[1] <= 0.75 * w[0], "{diffs:?}");
        }
    }
}
