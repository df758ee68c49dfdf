//! Reference values that do not go through the grid pipeline.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dimension {0} not supported (expected 1 or 2)")]
    Dimension(usize),
    #[error("ode step {0} must lie in (0, 1e-3]")]
    Step(f64),
    #[error("radial profile has no root before r = {0}")]
    NoRoot(f64),
    #[error("length must be positive (got {0})")]
    Length(f64),
}

/// First Dirichlet eigenpair of `u'' = λ(-u)` on `(0, L)`:
/// `λ = (π/L)²`, `u(x) = -sin(πx/L)`.
pub fn exact_1d_eigenpair(length: f64) -> Result<(f64, impl Fn(f64) -> f64), OracleError> {
    if length.is_nan() || length <= 0.0 {
        return Err(OracleError::Length(length));
    }
    let lambda = (PI / length).powi(2);
    Ok((lambda, move |x: f64| -(PI * x / length).sin()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialShootParams {
    pub ode_step: f64,
    pub r_max: f64,
}

impl Default for RadialShootParams {
    fn default() -> Self {
        RadialShootParams {
            ode_step: 1e-4,
            r_max: 10.0,
        }
    }
}

/// Radial profile right-hand side for `u'' (u'/r)^{n-1} = (-u)ⁿ`.
fn radial_rhs(n: usize, r: f64, y: [f64; 2]) -> [f64; 2] {
    let [u, du] = y;
    let source = (-u).max(0.0).powi(n as i32);
    let d2u = if n == 1 {
        source
    } else {
        source / (du / r).powi(n as i32 - 1)
    };
    [du, d2u]
}

fn rk4(n: usize, r: f64, y: [f64; 2], step: f64) -> [f64; 2] {
    let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    let k1 = radial_rhs(n, r, y);
    let k2 = radial_rhs(n, r + 0.5 * step, add(y, k1, 0.5 * step));
    let k3 = radial_rhs(n, r + 0.5 * step, add(y, k2, 0.5 * step));
    let k4 = radial_rhs(n, r + step, add(y, k3, step));
    [
        y[0] + step / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + step / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// First root `r*` of the radial profile with `u(0) = -1`, `u'(0) = 0`.
pub fn radial_root(n: usize, params: &RadialShootParams) -> Result<f64, OracleError> {
    if !(1..=2).contains(&n) {
        return Err(OracleError::Dimension(n));
    }
    let step = params.ode_step;
    if !(step > 0.0 && step <= 1e-3) {
        return Err(OracleError::Step(step));
    }
    // The series u = -1 + r²/2 + c r⁴ is forced at the origin: matching the
    // r² terms of u''(u'/r)^{n-1} and (-u)ⁿ gives c = -n / (16 + 8n).
    let c = -(n as f64) / (16.0 + 8.0 * n as f64);
    let mut r = 10.0 * step;
    let mut y = [-1.0 + 0.5 * r * r + c * r.powi(4), r + 4.0 * c * r.powi(3)];
    while r < params.r_max {
        let next = rk4(n, r, y, step);
        if next[0] >= 0.0 {
            // Bisect on the length of a single step from the last sample.
            let (mut lo, mut hi) = (0.0, step);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if rk4(n, r, y, mid)[0] >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(r + 0.5 * (lo + hi));
        }
        r += step;
        y = next;
    }
    Err(OracleError::NoRoot(params.r_max))
}

/// `λ_MA` of the unit ball in dimension `n`, `(r*)^{2n}` by scaling the
/// profile onto `B₁`.
pub fn radial_eigenvalue(n: usize, params: &RadialShootParams) -> Result<f64, OracleError> {
    let root = radial_root(n, params)?;
    Ok(root.powi(2 * n as i32))
}

/// `λ(tΩ) = t^{-2n} λ(Ω)`.
pub fn scale_eigenvalue(lambda: f64, t: f64, n: usize) -> f64 {
    lambda * t.powi(-2 * n as i32)
}

/// Twice-integrated `f` with zero values at `0` and `L`: the solution of
/// `u'' = f`, `u(0) = u(L) = 0`, by composite trapezoid quadrature.
#[derive(Debug, Clone)]
pub struct DirichletOracle1d {
    length: f64,
    spacing: f64,
    /// u at the quadrature nodes.
    u: Vec<f64>,
    /// u' at the quadrature nodes.
    du: Vec<f64>,
}

pub fn solve_1d_dirichlet_exact(f: impl Fn(f64) -> f64, length: f64, m: usize) -> DirichletOracle1d {
    let m = m.max(2);
    let dx = length / (m - 1) as f64;
    let fs: Vec<f64> = (0..m).map(|i| f(i as f64 * dx)).collect();
    let mut first = vec![0.0; m];
    let mut second = vec![0.0; m];
    for i in 1..m {
        first[i] = first[i - 1] + 0.5 * dx * (fs[i - 1] + fs[i]);
        second[i] = second[i - 1] + 0.5 * dx * (first[i - 1] + first[i]);
    }
    let slope = second[m - 1] / length;
    let u = (0..m).map(|i| second[i] - slope * i as f64 * dx).collect();
    let du = first.iter().map(|v| v - slope).collect();
    DirichletOracle1d {
        length,
        spacing: dx,
        u,
        du,
    }
}

impl DirichletOracle1d {
    /// Cubic Hermite interpolation between quadrature nodes.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, self.length);
        let last = self.u.len() - 1;
        let i = ((x / self.spacing) as usize).min(last - 1);
        let h = self.spacing;
        let t = (x - i as f64 * h) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.u[i]
            + (t3 - 2.0 * t2 + t) * h * self.du[i]
            + (-2.0 * t3 + 3.0 * t2) * self.u[i + 1]
            + (t3 - t2) * h * self.du[i + 1]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub lambda_unit_ball: f64,
}
