//! Inverse iteration for the Monge-Ampère eigenproblem.
//!
//! Each step solves `MA_h(u_{k+1}) = R(u_k)(-u_k)ⁿ` with zero boundary
//! values. The step map is positively homogeneous of degree one, so the
//! driver may carry a rescaled copy `w_k = u_k / c_k` of every iterate and
//! track the scale `c_k` separately. History rows always describe the
//! unscaled iterates `u_k`.

use serde::Serialize;
use thiserror::Error;

use crate::functionals::{ma_energy, rayleigh_quotient, FunctionalError};
use crate::grid::{integrate_power, Grid, ScalarField};
use crate::operator::{check_convexity, ma_operator};
use crate::solver::{solve_ma_dirichlet, DiscreteRhs, SolverError, SolverParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IterationError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Functional(#[from] FunctionalError),
    #[error("initial function rejected: {0}")]
    InitialFunction(String),
    #[error("invalid iteration parameters: {0}")]
    Params(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationParams {
    /// Relative change of the Rayleigh quotient between steps.
    pub tol_rayleigh: f64,
    /// Sup-norm change of the unit-height iterates between steps.
    pub tol_field: f64,
    pub max_iter: usize,
    pub solver: SolverParams,
    pub renormalize_each_step: bool,
    /// Relative slack before an increase of the monotone quantity is flagged.
    pub monotone_slack: f64,
}

impl Default for IterationParams {
    fn default() -> Self {
        IterationParams {
            tol_rayleigh: 1e-8,
            tol_field: 1e-7,
            max_iter: 500,
            solver: SolverParams::default(),
            renormalize_each_step: true,
            monotone_slack: 1e-3,
        }
    }
}

impl IterationParams {
    pub fn validate(&self) -> Result<(), IterationError> {
        if self.tol_rayleigh.is_nan() || self.tol_rayleigh <= 0.0 {
            return Err(IterationError::Params("tol_rayleigh must be positive".into()));
        }
        if self.tol_field.is_nan() || self.tol_field <= 0.0 {
            return Err(IterationError::Params("tol_field must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(IterationError::Params("max_iter must be at least 1".into()));
        }
        if self.solver.tol_residual.is_nan() || self.solver.tol_residual <= 0.0 {
            return Err(IterationError::Params("solver tol_residual must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    pub rayleigh: f64,
    pub sup_norm: f64,
    /// `‖u_k‖_{Lⁿ⁺¹}`.
    pub lp_norm: f64,
    pub monotone_quantity: f64,
    /// `sup |û_k - û_{k-1}|`; undefined for `k = 0`.
    pub delta: Option<f64>,
    pub energy: f64,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct IterationHistory {
    pub dim: usize,
    pub records: Vec<IterationRecord>,
}

impl IterationHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// Steps `k >= 1` with `m_k > m_{k-1} (1 + slack)`.
    pub fn monotone_violations(&self, slack: f64) -> Vec<usize> {
        self.records
            .windows(2)
            .filter(|w| w[1].monotone_quantity > w[0].monotone_quantity * (1.0 + slack))
            .map(|w| w[1].k)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIterReached,
    SolverFailure,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterReached => "max_iter_reached",
            Status::SolverFailure => "solver_failure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub lambda_estimate: f64,
    /// Unit sup-norm eigenfunction estimate.
    pub eigenfunction: ScalarField,
    pub history: IterationHistory,
    pub status: Status,
    /// `sup |MA_h(û) - λ(-û)ⁿ|` over full-stencil nodes.
    pub fixed_point_residual: f64,
    /// Aitken extrapolation of the last three Rayleigh quotients, if available.
    pub extrapolated_lambda: Option<f64>,
    pub notes: Vec<String>,
}

/// `u₀ = ½(|x - x₀|² - R²)` on the enclosing ball inflated by `margin`.
pub fn build_initial_paraboloid(grid: &Grid, margin: f64) -> ScalarField {
    let ball = grid.domain().enclosing_ball(margin);
    let c = ball.center;
    let r2 = ball.radius * ball.radius;
    if grid.dim() == 1 {
        ScalarField::from_fn(grid, |x| 0.5 * ((x[0] - c[0]).powi(2) - r2))
    } else {
        ScalarField::from_fn(grid, |x| 0.5 * ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) - r2))
    }
}

/// Checks the discrete hypotheses on an initial function: nonpositive,
/// directionally convex, finite Rayleigh quotient, and `MA_h(u₀) >= 1` on
/// full-stencil nodes, each up to `tol`.
pub fn check_initial_function(grid: &Grid, u0: &ScalarField, tol: f64) -> Result<(), IterationError> {
    let height = u0.sup_norm();
    if height == 0.0 || u0.values().iter().any(|v| !v.is_finite()) {
        return Err(IterationError::InitialFunction("field is zero or non-finite".into()));
    }
    let scale = tol * height.max(1.0);
    if u0.values().iter().any(|&v| v > scale) {
        return Err(IterationError::InitialFunction("field is positive somewhere".into()));
    }
    let violation = check_convexity(grid, u0);
    if violation > scale / grid.h().powi(2) {
        return Err(IterationError::InitialFunction(format!("convexity violation {violation:.3e}")));
    }
    let r = rayleigh_quotient(grid, u0)?;
    if !r.is_finite() {
        return Err(IterationError::InitialFunction("Rayleigh quotient is not finite".into()));
    }
    let ma = ma_operator(grid, u0);
    if let Some(u) = (0..grid.num_unknowns()).find(|&u| grid.is_full_stencil(u) && ma[u] < 1.0 - 10.0 * tol) {
        return Err(IterationError::InitialFunction(format!(
            "MA_h(u0) = {:.6} < 1 at node {u}",
            ma[u]
        )));
    }
    Ok(())
}

/// Output of one inverse-iteration step.
#[derive(Debug, Clone)]
pub struct StepOutput {
    /// The new iterate, divided by its sup-norm when renormalizing.
    pub field: ScalarField,
    /// Sup-norm of the solution before any renormalization.
    pub raw_sup_norm: f64,
    pub sweeps: usize,
}

/// Solves `MA_h(u_{k+1}) = R(u_k)(-u_k)ⁿ`, warm-started from `u_k`.
pub fn iteration_step(grid: &Grid, u_k: &ScalarField, params: &IterationParams) -> Result<StepOutput, IterationError> {
    let n = grid.dim() as i32;
    let r = rayleigh_quotient(grid, u_k)?;
    let rhs: Vec<f64> = u_k.values().iter().map(|v| r * (-v).max(0.0).powi(n)).collect();
    let rhs = DiscreteRhs::new(grid, rhs)?;
    let report = solve_ma_dirichlet(grid, &rhs, &params.solver, Some(u_k))?;
    let raw_sup_norm = report.field.sup_norm();
    let field = if params.renormalize_each_step {
        report.field.normalized()
    } else {
        report.field
    };
    Ok(StepOutput {
        field,
        raw_sup_norm,
        sweeps: report.sweeps,
    })
}

fn record(grid: &Grid, k: usize, w: &ScalarField, scale: f64, delta: Option<f64>, sweeps: usize) -> Result<IterationRecord, IterationError> {
    let n = grid.dim() as f64;
    let power = integrate_power(grid, w, n + 1.0).map_err(FunctionalError::from)?;
    if power == 0.0 {
        return Err(FunctionalError::DegenerateField.into());
    }
    let energy_w = ma_energy(grid, w);
    let rayleigh = energy_w / power;
    let lp_norm = scale * power.powf(1.0 / (n + 1.0));
    Ok(IterationRecord {
        k,
        rayleigh,
        sup_norm: scale * w.sup_norm(),
        lp_norm,
        monotone_quantity: rayleigh * lp_norm.powf(n),
        delta,
        energy: scale.powf(n + 1.0) * energy_w,
        sweeps,
    })
}

/// `sup |MA_h(û) - λ(-û)ⁿ|` over full-stencil nodes.
pub fn fixed_point_residual(grid: &Grid, u: &ScalarField, lambda: f64) -> f64 {
    let n = grid.dim() as i32;
    let hat = u.normalized();
    let ma = ma_operator(grid, &hat);
    (0..grid.num_unknowns())
        .filter(|&i| grid.is_full_stencil(i))
        .map(|i| (ma[i] - lambda * (-hat[i]).max(0.0).powi(n)).abs())
        .fold(0.0, f64::max)
}

fn aitken(history: &IterationHistory) -> Option<f64> {
    let r = &history.records;
    if r.len() < 3 {
        return None;
    }
    let (a, b, c) = (r[r.len() - 3].rayleigh, r[r.len() - 2].rayleigh, r[r.len() - 1].rayleigh);
    let denom = c - 2.0 * b + a;
    if denom.abs() < 1e-300 {
        return Some(c);
    }
    Some(c - (c - b) * (c - b) / denom)
}

pub fn run_inverse_iteration(grid: &Grid, u0: &ScalarField, params: &IterationParams) -> Result<EigenResult, IterationError> {
    params.validate()?;
    check_initial_function(grid, u0, 1e-10)?;

    let (mut w, mut scale) = if params.renormalize_each_step {
        let s = u0.sup_norm();
        (u0.normalized(), s)
    } else {
        (u0.clone(), 1.0)
    };
    let mut history = IterationHistory {
        dim: grid.dim(),
        records: vec![record(grid, 0, &w, scale, None, 0)?],
    };
    let mut status = Status::MaxIterReached;
    let mut notes = Vec::new();
    let mut hat = w.normalized();

    for k in 1..=params.max_iter {
        let step = match iteration_step(grid, &w, params) {
            Ok(s) => s,
            Err(e) => {
                notes.push(format!("step {k}: {e}"));
                status = Status::SolverFailure;
                break;
            }
        };
        if params.renormalize_each_step {
            scale *= step.raw_sup_norm;
        }
        w = step.field;
        let next_hat = w.normalized();
        let delta = next_hat.distance(&hat);
        hat = next_hat;
        let rec = record(grid, k, &w, scale, Some(delta), step.sweeps)?;
        let prev = history.records.last().expect("history starts with k = 0");
        let converged = (rec.rayleigh - prev.rayleigh).abs() <= params.tol_rayleigh * prev.rayleigh
            && delta <= params.tol_field;
        history.records.push(rec);
        if converged {
            status = Status::Converged;
            break;
        }
    }

    for k in history.monotone_violations(params.monotone_slack) {
        notes.push(format!("monotone quantity increased beyond slack at step {k}"));
    }
    let lambda_estimate = rayleigh_quotient(grid, &hat)?;
    Ok(EigenResult {
        lambda_estimate,
        fixed_point_residual: fixed_point_residual(grid, &hat, lambda_estimate),
        eigenfunction: hat,
        extrapolated_lambda: aitken(&history),
        history,
        status,
        notes,
    })
}

/// `‖u_k‖_∞ >= 0.95 λ_ref^{-1/n}` for every recorded step.
pub fn nondegeneracy_check(history: &IterationHistory, lambda_ref: f64) -> bool {
    let n = history.dim.max(1) as f64;
    let bound = 0.95 * lambda_ref.powf(-1.0 / n);
    history.records.iter().all(|r| r.sup_norm >= bound)
}
