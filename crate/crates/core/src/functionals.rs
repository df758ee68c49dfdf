//! Discrete Monge-Ampère energy, Rayleigh quotient and diagnostics.
//!
//! The discrete measure is `dMu ≈ MA_h(u) · w`, with the same operator the
//! solver inverts and the same quadrature weights as [`integrate_power`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::grid::{integrate_power, Grid, ScalarField};
use crate::operator::ma_operator;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("field has zero L^(n+1) norm")]
    DegenerateField,
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

/// `I(u) = ∫ (-u) dMu`.
pub fn ma_energy(grid: &Grid, u: &ScalarField) -> f64 {
    energy_with(grid, u, &ma_operator(grid, u))
}

fn energy_with(grid: &Grid, u: &ScalarField, ma: &[f64]) -> f64 {
    grid.weights()
        .iter()
        .zip(u.values())
        .zip(ma)
        .map(|((w, v), m)| w * (-v).max(0.0) * m)
        .sum()
}

/// `R(u) = I(u) / ‖u‖ⁿ⁺¹_{Lⁿ⁺¹}`.
pub fn rayleigh_quotient(grid: &Grid, u: &ScalarField) -> Result<f64, FunctionalError> {
    let n = grid.dim() as f64;
    let denom = integrate_power(grid, u, n + 1.0)?;
    if denom == 0.0 {
        return Err(FunctionalError::DegenerateField);
    }
    Ok(ma_energy(grid, u) / denom)
}

/// `m(u) = R(u) · ‖u‖ⁿ_{Lⁿ⁺¹}`, nonincreasing along the inverse iteration.
pub fn monotone_quantity(grid: &Grid, u: &ScalarField) -> Result<f64, FunctionalError> {
    let n = grid.dim() as f64;
    let r = rayleigh_quotient(grid, u)?;
    let power = integrate_power(grid, u, n + 1.0)?;
    Ok(r * power.powf(n / (n + 1.0)))
}

/// Sampled `C^{0,1/n}` seminorm: all node pairs within `8h`, every node
/// against the boundary points its cut arms reach, and 1000 seeded random
/// long-range pairs.
pub fn holder_seminorm(grid: &Grid, u: &ScalarField) -> f64 {
    let alpha = 1.0 / grid.dim() as f64;
    let n = grid.num_unknowns();
    let vals = u.values();
    let quotient = |du: f64, dist: f64| du.abs() / dist.powf(alpha);
    let mut best: f64 = 0.0;

    let reach = 8i64;
    let (nx, ny) = grid.lattice_dims();
    for a in 0..n {
        let (ix, iy) = grid.lattice_index(a);
        let ylo = if ny == 1 { 0 } else { -reach };
        let yhi = if ny == 1 { 0 } else { reach };
        for dx in -reach..=reach {
            for dy in ylo..=yhi {
                if (dx, dy) <= (0, 0) || dx * dx + dy * dy > reach * reach {
                    continue;
                }
                let jx = ix as i64 + dx;
                let jy = iy as i64 + dy;
                if jx < 0 || jy < 0 || jx as usize >= nx || jy as usize >= ny {
                    continue;
                }
                if let Some(b) = grid.unknown_at(jx as usize, jy as usize) {
                    let dist = grid.h() * ((dx * dx + dy * dy) as f64).sqrt();
                    best = best.max(quotient(vals[a] - vals[b], dist));
                }
            }
        }
        for d in 0..grid.num_directions() {
            for arm in grid.arms(a, d) {
                if arm.neighbor.is_none() {
                    best = best.max(quotient(vals[a], arm.length));
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x4d41);
    for _ in 0..1000 {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        let (p, q) = (grid.position(a), grid.position(b));
        let dist = (p[0] - q[0]).hypot(p[1] - q[1]);
        best = best.max(quotient(vals[a] - vals[b], dist));
    }
    best
}

/// Largest `|slope| · min(dist(x, ∂Ω), dist(y, ∂Ω)) / sup|u|` over lattice
/// neighbours `x, y` along the axes. Convex functions vanishing on the
/// boundary keep this at most one.
pub fn gradient_ratio(grid: &Grid, u: &ScalarField) -> f64 {
    let sup = u.sup_norm();
    if sup == 0.0 {
        return 0.0;
    }
    let axes: &[usize] = if grid.dim() == 1 { &[0] } else { &[0, 1] };
    let vals = u.values();
    let mut best: f64 = 0.0;
    for a in 0..grid.num_unknowns() {
        for &d in axes {
            let [fw, _] = grid.arms(a, d);
            if let Some(b) = fw.neighbor {
                let slope = (vals[b] - vals[a]) / fw.length;
                let dist = grid.boundary_distance(a).min(grid.boundary_distance(b));
                best = best.max(slope.abs() * dist / sup);
            }
        }
    }
    best
}

/// Aleksandrov-type ratio `max_x |u(x)|ⁿ / (dist(x, ∂Ω) · diam^{n-1} · Σ w MA_h(u))`.
pub fn aleksandrov_ratio(grid: &Grid, u: &ScalarField) -> f64 {
    let n = grid.dim() as i32;
    let mass: f64 = grid
        .weights()
        .iter()
        .zip(ma_operator(grid, u))
        .map(|(w, m)| w * m)
        .sum();
    if mass == 0.0 {
        return 0.0;
    }
    let diam = grid.domain().diameter();
    (0..grid.num_unknowns())
        .map(|a| u[a].abs().powi(n) / (grid.boundary_distance(a) * diam.powi(n - 1) * mass))
        .fold(0.0, f64::max)
}

/// Lower and upper constants in `sup/(n+1) <= (∫(-u)^p/|Ω|)^{1/p} <= sup`:
/// returns `(average / sup, p)` pairs for `p ∈ {2, n+1}`.
pub fn norm_equivalence_ratios(grid: &Grid, u: &ScalarField) -> Vec<(f64, f64)> {
    let n = grid.dim() as f64;
    let sup = u.sup_norm();
    let area = grid.domain().measure();
    let mut ps = vec![2.0];
    if n + 1.0 != 2.0 {
        ps.push(n + 1.0);
    }
    ps.into_iter()
        .map(|p| {
            let avg = (integrate_power(grid, u, p).unwrap_or(0.0) / area).powf(1.0 / p);
            (p, if sup > 0.0 { avg / sup } else { 0.0 })
        })
        .collect()
}

/// Whether every ratio from [`norm_equivalence_ratios`] lies in
/// `[1/(n+1), 1 + 5h]`.
pub fn norm_equivalence_holds(grid: &Grid, u: &ScalarField) -> bool {
    let n = grid.dim() as f64;
    let hi = 1.0 + 5.0 * grid.h();
    norm_equivalence_ratios(grid, u)
        .iter()
        .all(|&(_, r)| r >= 1.0 / (n + 1.0) && r <= hi)
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalReport {
    pub rayleigh: f64,
    pub energy: f64,
    pub sup_norm: f64,
    pub lp_norm: f64,
    pub monotone_quantity: f64,
    pub holder_seminorm: f64,
    pub gradient_ratio_max: f64,
}

impl FunctionalReport {
    pub fn evaluate(grid: &Grid, u: &ScalarField) -> Result<Self, FunctionalError> {
        let n = grid.dim() as f64;
        let power = integrate_power(grid, u, n + 1.0)?;
        if power == 0.0 {
            return Err(FunctionalError::DegenerateField);
        }
        let energy = ma_energy(grid, u);
        let rayleigh = energy / power;
        let lp_norm = power.powf(1.0 / (n + 1.0));
        Ok(FunctionalReport {
            rayleigh,
            energy,
            sup_norm: u.sup_norm(),
            lp_norm,
            monotone_quantity: rayleigh * lp_norm.powf(n),
            holder_seminorm: holder_seminorm(grid, u),
            gradient_ratio_max: gradient_ratio(grid, u),
        })
    }
}
