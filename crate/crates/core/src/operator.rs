//! Monotone wide-stencil discretization of `det D²u`.
//!
//! Along a stencil direction `e` with arm lengths `l₊`, `l₋` the second
//! difference is
//!
//! ```text
//! Δ_e u = 2/(l₊ + l₋) · [(u₊ - u₀)/l₊ + (u₋ - u₀)/l₋] = B · (T - u₀)
//! ```
//!
//! where `T` is the arm-weighted mean of the two end values and `B > 0`
//! depends only on the arm lengths. Cut arms end on the boundary with value
//! zero. In two dimensions the operator is the minimum over orthogonal
//! direction pairs of `max(Δ_e₁ u, 0) · max(Δ_e₂ u, 0)`; in one dimension it
//! is `max(Δu, 0)`. Both are nondecreasing in every neighbour value and
//! nonincreasing in the centre value.

use crate::grid::{Grid, ScalarField};

/// `Δ_e u = curvature · (mean - u₀)` at one node and direction.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Directional {
    pub mean: f64,
    pub curvature: f64,
    /// `∂mean/∂(end value)` for the forward and backward arm.
    pub arm_weight: [f64; 2],
    pub neighbor: [Option<usize>; 2],
}

#[inline]
pub(crate) fn directional(grid: &Grid, values: &[f64], u: usize, d: usize) -> Directional {
    let [fw, bw] = grid.arms(u, d);
    let (inv_f, inv_b) = (1.0 / fw.length, 1.0 / bw.length);
    let vf = fw.neighbor.map_or(0.0, |n| values[n]);
    let vb = bw.neighbor.map_or(0.0, |n| values[n]);
    let s = inv_f + inv_b;
    Directional {
        mean: (vf * inv_f + vb * inv_b) / s,
        curvature: 2.0 * s / (fw.length + bw.length),
        arm_weight: [inv_f / s, inv_b / s],
        neighbor: [fw.neighbor, bw.neighbor],
    }
}

/// Second difference of `values` at unknown `u` along direction `d`.
#[inline]
pub fn second_difference(grid: &Grid, values: &[f64], u: usize, d: usize) -> f64 {
    let [fw, bw] = grid.arms(u, d);
    let vf = fw.neighbor.map_or(0.0, |n| values[n]);
    let vb = bw.neighbor.map_or(0.0, |n| values[n]);
    let u0 = values[u];
    2.0 / (fw.length + bw.length) * ((vf - u0) / fw.length + (vb - u0) / bw.length)
}

/// Discrete Monge-Ampère density at a single unknown.
pub fn ma_at(grid: &Grid, values: &[f64], u: usize) -> f64 {
    if grid.dim() == 1 {
        return second_difference(grid, values, u, 0).max(0.0);
    }
    grid.pairs()
        .iter()
        .map(|&[a, b]| {
            second_difference(grid, values, u, a).max(0.0)
                * second_difference(grid, values, u, b).max(0.0)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Discrete Monge-Ampère density at every unknown; nonnegative.
pub fn ma_operator(grid: &Grid, field: &ScalarField) -> Vec<f64> {
    let values = field.values();
    (0..grid.num_unknowns()).map(|u| ma_at(grid, values, u)).collect()
}

/// Largest negative part of any directional second difference; zero iff the
/// field is convex along every stencil direction.
pub fn check_convexity(grid: &Grid, field: &ScalarField) -> f64 {
    let values = field.values();
    let mut worst: f64 = 0.0;
    for u in 0..grid.num_unknowns() {
        for d in 0..grid.num_directions() {
            worst = worst.max(-second_difference(grid, values, u, d));
        }
    }
    worst
}

/// Admissibility of an iterate: nonpositive, directionally convex up to
/// `tol_convex`, and not identically zero.
pub fn is_admissible(grid: &Grid, field: &ScalarField, tol_convex: f64) -> bool {
    field.values().iter().all(|&v| v <= tol_convex)
        && field.sup_norm() > 0.0
        && check_convexity(grid, field) <= tol_convex
}

/// Centre value solving `MA_h = f` with the neighbours frozen.
///
/// Each pair product `B₁B₂(T₁ - u₀)(T₂ - u₀)` is decreasing in `u₀` below
/// `min(T₁, T₂)`, so the pair's root is available in closed form and the
/// operator's root is the smallest pair root. For `f = 0` this is the
/// smallest directional mean, the largest centre value keeping every
/// direction convex.
pub fn local_solve(grid: &Grid, values: &[f64], u: usize, f: f64) -> f64 {
    local_solve_impl(grid, values, u, f, None)
}

/// As [`local_solve`], also pushing `(neighbour, ∂value/∂neighbour)` onto
/// `deps`. The weights are nonnegative and sum to at most one.
pub(crate) fn local_solve_linearized(
    grid: &Grid,
    values: &[f64],
    u: usize,
    f: f64,
    deps: &mut Vec<(usize, f64)>,
) -> f64 {
    local_solve_impl(grid, values, u, f, Some(deps))
}

fn push_deps(deps: &mut Vec<(usize, f64)>, dir: &Directional, scale: f64) {
    if scale == 0.0 {
        return;
    }
    for k in 0..2 {
        if let Some(n) = dir.neighbor[k] {
            deps.push((n, scale * dir.arm_weight[k]));
        }
    }
}

fn local_solve_impl(
    grid: &Grid,
    values: &[f64],
    u: usize,
    f: f64,
    deps: Option<&mut Vec<(usize, f64)>>,
) -> f64 {
    if grid.dim() == 1 {
        let dir = directional(grid, values, u, 0);
        if let Some(deps) = deps {
            push_deps(deps, &dir, 1.0);
        }
        return dir.mean - f / dir.curvature;
    }

    // (value, low direction, high direction, ∂value/∂T_low)
    let mut best: Option<(f64, Directional, Directional, f64)> = None;
    for &[a, b] in grid.pairs() {
        let da = directional(grid, values, u, a);
        let db = directional(grid, values, u, b);
        let (lo, hi) = if da.mean <= db.mean { (da, db) } else { (db, da) };
        let gap = hi.mean - lo.mean;
        let g = f / (lo.curvature * hi.curvature);
        let (y, dy_dgap) = if g > 0.0 {
            let root = (gap * gap + 4.0 * g).sqrt();
            (2.0 * g / (gap + root), 0.5 * (gap / root - 1.0))
        } else {
            (0.0, 0.0)
        };
        let value = lo.mean - y;
        if best.as_ref().is_none_or(|b| value < b.0) {
            best = Some((value, lo, hi, 1.0 + dy_dgap));
        }
    }
    let (value, lo, hi, w_lo) = best.expect("two-dimensional grids have stencil pairs");
    if let Some(deps) = deps {
        push_deps(deps, &lo, w_lo);
        push_deps(deps, &hi, 1.0 - w_lo);
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn disk_grid(h: f64, w: usize) -> Grid {
        Grid::build(&Domain::disk([0.0, 0.0], 1.0).unwrap(), h, w).unwrap()
    }

    #[test]
    fn paraboloid_is_exact() {
        let g = disk_grid(1.0 / 32.0, 2);
        let p = ScalarField::from_fn(&g, |x| 0.5 * (x[0] * x[0] + x[1] * x[1] - 1.0));
        // The quadratic vanishes on the circle, so cut arms are exact too.
        for m in ma_operator(&g, &p) {
            assert!((m - 1.0).abs() < 1e-9, "{m}");
        }
        assert!(check_convexity(&g, &p) < 1e-9);
    }

    #[test]
    fn affine_patch_is_exact() {
        // ½|x|² + affine on full-stencil nodes of a disk (non-zero boundary
        // data only affects cut arms).
        let g = disk_grid(1.0 / 16.0, 2);
        let q = ScalarField::from_fn(&g, |x| 0.5 * (x[0] * x[0] + x[1] * x[1]) + 0.3 * x[0] - 0.7 * x[1] - 2.0);
        let m = ma_operator(&g, &q);
        for u in (0..g.num_unknowns()).filter(|&u| g.is_full_stencil(u)) {
            assert!((m[u] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_field() {
        let g = disk_grid(1.0 / 16.0, 2);
        let z = ScalarField::zeros(&g);
        assert!(ma_operator(&g, &z).iter().all(|&m| m == 0.0));
        assert_eq!(check_convexity(&g, &z), 0.0);
        assert!(!is_admissible(&g, &z, 1e-10));
    }

    #[test]
    fn sine_second_difference() {
        let iv = Domain::interval(0.0, 1.0).unwrap();
        let g = Grid::build(&iv, 1.0 / 256.0, 1).unwrap();
        let s = ScalarField::from_fn(&g, |x| -(PI * x[0]).sin());
        let m = ma_operator(&g, &s);
        // Node 127 sits at x = 1/2. Central difference of -sin(πx) there is
        // (4/h²) sin²(πh/2) = π²(1 - π²h²/12 + ...).
        assert!((g.position(127)[0] - 0.5).abs() < 1e-15);
        assert!((m[127] / (PI * PI) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn convexity_violation_at_kink() {
        // u = -|x - 1/2| - 1/2 + ... : concave kink at 1/2 with slopes ±1,
        // second difference there is (2·(-h))/h² = -2/h.
        let iv = Domain::interval(0.0, 1.0).unwrap();
        let h = 1.0 / 16.0;
        let g = Grid::build(&iv, h, 1).unwrap();
        let amp = 0.25;
        let u = ScalarField::from_fn(&g, |x| amp * (-(x[0] - 0.5).abs()) - 0.1);
        let v = check_convexity(&g, &u);
        // Interior kink: (u(½-h) + u(½+h) - 2u(½))/h² = -2·amp·h/h² = -2amp/h.
        // Boundary arms: cut ends at 0 are above the field, so convex there.
        assert!((v - 2.0 * amp / h).abs() < 1e-9, "{v}");
        assert!(!is_admissible(&g, &u, 1e-10));
    }

    #[test]
    fn local_solve_reproduces_target() {
        let g = disk_grid(1.0 / 16.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = ScalarField::from_fn(&g, |x| 0.5 * (x[0] * x[0] + x[1] * x[1] - 1.0));
        for _ in 0..200 {
            let u = rng.gen_range(0..g.num_unknowns());
            let f = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..3.0) };
            let mut vals = base.values().to_vec();
            vals[u] = local_solve(&g, &vals, u, f);
            let m = ma_at(&g, &vals, u);
            assert!((m - f).abs() <= 1e-10 * (1.0 + f), "f={f} m={m}");
            if f == 0.0 {
                // Every direction stays convex.
                for d in 0..g.num_directions() {
                    assert!(second_difference(&g, &vals, u, d) >= -1e-12);
                }
            }
        }
    }

    #[test]
    fn linearization_matches_finite_differences() {
        let g = disk_grid(1.0 / 16.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vals: Vec<f64> = (0..g.num_unknowns())
            .map(|u| {
                let x = g.position(u);
                0.5 * (1.3 * x[0] * x[0] + 0.7 * x[1] * x[1] - 1.0) + 0.01 * rng.gen_range(-1.0..1.0)
            })
            .collect();
        for u in (0..g.num_unknowns()).step_by(7) {
            let f = rng.gen_range(0.2..2.0);
            let mut deps = Vec::new();
            let g0 = local_solve_linearized(&g, &vals, u, f, &mut deps);
            let total: f64 = deps.iter().map(|d| d.1).sum();
            assert!(total <= 1.0 + 1e-12 && deps.iter().all(|d| d.1 >= 0.0));
            for &(n, w) in &deps {
                let eps = 1e-7;
                let mut p = vals.clone();
                p[n] += eps;
                let fd = (local_solve(&g, &p, u, f) - g0) / eps;
                assert!((fd - w).abs() < 1e-5, "fd={fd} w={w}");
            }
        }
    }

    #[test]
    fn degenerate_ellipticity_randomized() {
        let g = disk_grid(1.0 / 16.0, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let vals: Vec<f64> = (0..g.num_unknowns())
                .map(|u| {
                    let x = g.position(u);
                    0.5 * (x[0] * x[0] + x[1] * x[1] - 1.0) + 0.05 * rng.gen_range(-1.0..1.0)
                })
                .collect();
            let u = rng.gen_range(0..g.num_unknowns());
            let d = rng.gen_range(0..g.num_directions());
            let arm = g.arms(u, d)[rng.gen_range(0..2)];
            let Some(n) = arm.neighbor else { continue };
            let before = ma_at(&g, &vals, u);
            let mut bumped = vals.clone();
            bumped[n] += rng.gen_range(1e-6..0.1);
            assert!(ma_at(&g, &bumped, u) >= before - 1e-12);
        }
    }
}
