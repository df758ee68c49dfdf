//! Monge-Ampère eigenvalue of a bounded convex domain by inverse iteration.
//!
//! Starting from a convex `u₀ ≤ 0` with `det D²u₀ ≥ 1`, the iteration solves
//!
//! ```text
//! det D²u_{k+1} = R(u_k) (-u_k)ⁿ  in Ω,    u_{k+1} = 0 on ∂Ω,
//! ```
//!
//! where `R(u) = ∫(-u) det D²u / ∫(-u)ⁿ⁺¹` is the Rayleigh quotient. The
//! Rayleigh quotients converge to the eigenvalue `λ_MA` and the normalized
//! iterates to the eigenfunction of unit height.
//!
//! Modules, bottom up:
//!
//! * [`geometry`]: intervals, disks and convex polygons.
//! * [`grid`]: lattice, cut-cell arms, quadrature, [`ScalarField`].
//! * [`operator`]: monotone wide-stencil `MA_h`.
//! * [`solver`]: Dirichlet solver for `MA_h(u) = f`.
//! * [`functionals`]: energy, Rayleigh quotient, monotone quantity, diagnostics.
//! * [`iteration`]: the inverse iteration driver.
//! * [`oracles`]: independent reference values.
//! * [`config`], [`io`], [`check`]: run configuration, file formats and the
//!   invariant suite behind the command-line tool.

pub mod check;
pub mod config;
pub mod functionals;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod iteration;
pub mod operator;
pub mod oracles;
pub mod solver;

pub use geometry::{Ball, Domain, GeometryError, Point};
pub use grid::{integrate_power, Grid, GridError, NodeClass, ScalarField};
pub use iteration::{
    build_initial_paraboloid, iteration_step, nondegeneracy_check, run_inverse_iteration,
    EigenResult, IterationHistory, IterationParams, IterationRecord, Status,
};
pub use solver::{solve_ma_dirichlet, DiscreteRhs, SolveReport, SolverError, SolverMethod, SolverParams};
