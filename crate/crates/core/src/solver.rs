//! Dirichlet solver for `MA_h(u) = f` in `Ω`, `u = 0` on `∂Ω`.
//!
//! Both methods are built on the per-node map `G` of
//! [`local_solve`](crate::operator::local_solve), which returns the centre
//! value solving the local equation with the neighbours frozen. `G` is
//! monotone and concave in the neighbour values, with row derivative sums
//! at most one and strictly less than one next to the boundary.
//!
//! * [`SolverMethod::GaussSeidel`]: alternating lexicographic sweeps
//!   `u_i ← (1 - ω) u_i + ω G_i(u)`.
//! * [`SolverMethod::Newton`]: Newton's method on `u - G(u) = 0`. The
//!   Jacobian `I - ∂G` is a weakly chained diagonally dominant M-matrix, and
//!   concavity of `G` makes every iterate after the first a supersolution,
//!   so the iteration converges monotonically from any start.

use faer::sparse::{SparseColMat, Triplet};
use faer::prelude::Solve;
use faer::Mat;
use thiserror::Error;

use crate::grid::{Grid, ScalarField};
use crate::operator::{local_solve, local_solve_linearized, ma_at, ma_operator};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("no convergence after {sweeps} sweeps: residual {residual:.3e} > tolerance {tolerance:.3e}")]
    NonConvergence {
        sweeps: usize,
        residual: f64,
        tolerance: f64,
    },
    #[error("right-hand side must be finite and nonnegative (node {0})")]
    InvalidRhs(usize),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("linear solve failed: {0}")]
    Linear(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    Newton,
    GaussSeidel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    /// Relative residual tolerance: the solve stops once
    /// `sup |MA_h(u)^{1/n} - f^{1/n}| <= tol_residual · max(f)^{1/n}`
    /// (or `<= tol_residual` when `f ≡ 0`). Newton also stops once its update
    /// falls below `1e-12 · sup|u|`.
    pub tol_residual: f64,
    /// Iteration cap; `None` picks the method default (100 Newton steps,
    /// or 200 sweeps per lattice node along the longer side).
    pub max_sweeps: Option<usize>,
    /// Damping factor in `(0, 1]`.
    pub relaxation: f64,
    pub method: SolverMethod,
    /// Evaluate the per-node maps in parallel. Results are identical to the
    /// serial mode.
    pub parallel: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            tol_residual: 1e-8,
            max_sweeps: None,
            relaxation: 1.0,
            method: SolverMethod::Newton,
            parallel: false,
        }
    }
}

impl SolverParams {
    /// Absolute residual tolerance for right-hand side `f`.
    pub fn tolerance(&self, grid: &Grid, f: &DiscreteRhs) -> f64 {
        let fmax = f.max();
        if fmax > 0.0 {
            self.tol_residual * fmax.powf(1.0 / grid.dim() as f64)
        } else {
            self.tol_residual
        }
    }

    pub fn sweep_limit(&self, grid: &Grid) -> usize {
        self.max_sweeps.unwrap_or_else(|| match self.method {
            SolverMethod::Newton => 100,
            SolverMethod::GaussSeidel => {
                let (nx, ny) = grid.lattice_dims();
                200 * nx.max(ny)
            }
        })
    }
}

/// Nonnegative density per unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteRhs {
    values: Vec<f64>,
}

impl DiscreteRhs {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self, SolverError> {
        if values.len() != grid.num_unknowns() {
            return Err(SolverError::LengthMismatch {
                expected: grid.num_unknowns(),
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(SolverError::InvalidRhs(bad));
        }
        Ok(DiscreteRhs { values })
    }

    pub fn constant(grid: &Grid, c: f64) -> Result<Self, SolverError> {
        DiscreteRhs::new(grid, vec![c; grid.num_unknowns()])
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(crate::geometry::Point) -> f64) -> Result<Self, SolverError> {
        DiscreteRhs::new(grid, (0..grid.num_unknowns()).map(|u| f(grid.position(u))).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Total discrete mass `Σ w f`.
    pub fn mass(&self, grid: &Grid) -> f64 {
        grid.weights().iter().zip(&self.values).map(|(w, f)| w * f).sum()
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub field: ScalarField,
    /// Newton steps or Gauss-Seidel passes performed.
    pub sweeps: usize,
    pub residual: f64,
    pub tolerance: f64,
}

/// `sup |MA_h(u)^{1/n} - f^{1/n}|` over all unknowns.
pub fn residual(grid: &Grid, field: &ScalarField, f: &DiscreteRhs) -> f64 {
    let inv = 1.0 / grid.dim() as f64;
    ma_operator(grid, field)
        .iter()
        .zip(f.values())
        .fold(0.0, |m, (a, b)| m.max((a.powf(inv) - b.powf(inv)).abs()))
}

fn residual_values(grid: &Grid, values: &[f64], f: &[f64], parallel: bool) -> f64 {
    let inv = 1.0 / grid.dim() as f64;
    let node = |u: usize| (ma_at(grid, values, u).powf(inv) - f[u].powf(inv)).abs();
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..values.len()).into_par_iter().map(node).reduce(|| 0.0, f64::max);
    }
    let _ = parallel;
    (0..values.len()).map(node).fold(0.0, f64::max)
}

pub fn solve_ma_dirichlet(
    grid: &Grid,
    f: &DiscreteRhs,
    params: &SolverParams,
    warm_start: Option<&ScalarField>,
) -> Result<SolveReport, SolverError> {
    let n = grid.num_unknowns();
    if f.values.len() != n {
        return Err(SolverError::LengthMismatch {
            expected: n,
            got: f.values.len(),
        });
    }
    let mut values = match warm_start {
        Some(w) if w.len() == n => w.values().to_vec(),
        Some(w) => {
            return Err(SolverError::LengthMismatch {
                expected: n,
                got: w.len(),
            })
        }
        None => vec![0.0; n],
    };
    let tolerance = params.tolerance(grid, f);
    let limit = params.sweep_limit(grid);
    let omega = params.relaxation.clamp(f64::MIN_POSITIVE, 1.0);

    let mut res = residual_values(grid, &values, &f.values, params.parallel);
    let mut sweeps = 0;
    while res > tolerance && sweeps < limit {
        match params.method {
            SolverMethod::GaussSeidel => {
                if sweeps % 2 == 0 {
                    for u in 0..n {
                        gs_update(grid, &mut values, &f.values, u, omega);
                    }
                } else {
                    for u in (0..n).rev() {
                        gs_update(grid, &mut values, &f.values, u, omega);
                    }
                }
            }
            SolverMethod::Newton => {
                let step = newton_step(grid, &values, &f.values, params.parallel)?;
                let mut moved = 0.0f64;
                for (v, s) in values.iter_mut().zip(&step) {
                    *v += omega * s;
                    moved = moved.max(s.abs());
                }
                let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if moved <= 1e-12 * scale {
                    // The n-th root amplifies round-off where f vanishes, so
                    // the residual can stall above tolerance; an update at
                    // round-off size certifies the fixed point instead.
                    sweeps += 1;
                    res = residual_values(grid, &values, &f.values, params.parallel);
                    return Ok(SolveReport {
                        field: ScalarField::from_values(values),
                        sweeps,
                        residual: res,
                        tolerance,
                    });
                }
            }
        }
        sweeps += 1;
        res = residual_values(grid, &values, &f.values, params.parallel);
    }
    if res <= tolerance {
        Ok(SolveReport {
            field: ScalarField::from_values(values),
            sweeps,
            residual: res,
            tolerance,
        })
    } else {
        Err(SolverError::NonConvergence {
            sweeps,
            residual: res,
            tolerance,
        })
    }
}

#[inline]
fn gs_update(grid: &Grid, values: &mut [f64], f: &[f64], u: usize, omega: f64) {
    let target = local_solve(grid, values, u, f[u]);
    values[u] += omega * (target - values[u]);
}

/// Solves `(I - ∂G(u)) δ = G(u) - u`.
fn newton_step(grid: &Grid, values: &[f64], f: &[f64], parallel: bool) -> Result<Vec<f64>, SolverError> {
    let n = values.len();
    let row = |u: usize| {
        let mut deps = Vec::with_capacity(4);
        let g = local_solve_linearized(grid, values, u, f[u], &mut deps);
        (g - values[u], deps)
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<(f64, Vec<(usize, f64)>)> = if parallel {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(row).collect()
    } else {
        (0..n).map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<(f64, Vec<(usize, f64)>)> = {
        let _ = parallel;
        (0..n).map(row).collect()
    };

    let mut triplets = Vec::with_capacity(n * 5);
    let mut rhs = Mat::<f64>::zeros(n, 1);
    for (u, (r, deps)) in rows.into_iter().enumerate() {
        rhs[(u, 0)] = r;
        triplets.push(Triplet::new(u, u, 1.0));
        for (col, w) in deps {
            if w != 0.0 {
                triplets.push(Triplet::new(u, col, -w));
            }
        }
    }
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| SolverError::Linear(format!("{e:?}")))?;
    let lu = a.sp_lu().map_err(|e| SolverError::Linear(format!("{e:?}")))?;
    let x = lu.solve(&rhs);
    Ok((0..n).map(|i| x[(i, 0)]).collect())
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComparisonError {
    #[error("precondition MA_h(u) <= MA_h(v) fails at node {node}: {mu:.6e} > {mv:.6e}")]
    Precondition { node: usize, mu: f64, mv: f64 },
}

/// Discrete comparison principle trial: given `MA_h(u) <= MA_h(v)` at every
/// node (to relative slack `tol`), reports whether `u >= v - tol`.
pub fn comparison_trial(
    grid: &Grid,
    u: &ScalarField,
    v: &ScalarField,
    tol: f64,
) -> Result<bool, ComparisonError> {
    let mu = ma_operator(grid, u);
    let mv = ma_operator(grid, v);
    for (node, (a, b)) in mu.iter().zip(&mv).enumerate() {
        if *a > b + tol * (1.0 + b.abs()) {
            return Err(ComparisonError::Precondition {
                node,
                mu: *a,
                mv: *b,
            });
        }
    }
    Ok(u.values().iter().zip(v.values()).all(|(a, b)| *a >= b - tol))
}
