//! Browser bindings. Every export takes plain numbers or a domain JSON
//! string and returns a JSON string, so the page needs no generated glue
//! beyond `wasm-bindgen`'s own.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use ma_eigen::geometry::Domain;
use ma_eigen::grid::{Grid, ScalarField};
use ma_eigen::io::to_json_string;
use ma_eigen::iteration::{build_initial_paraboloid, run_inverse_iteration, IterationParams};
use ma_eigen::oracles::{radial_eigenvalue, RadialShootParams};
use ma_eigen::solver::{solve_ma_dirichlet, DiscreteRhs, SolverParams};

const MARGIN: f64 = 0.05;

fn grid_from(domain_json: &str, h: f64, width: usize) -> Result<Grid, String> {
    let domain: Domain = serde_json::from_str(domain_json).map_err(|e| format!("domain: {e}"))?;
    Grid::build(&domain, h, width).map_err(|e| e.to_string())
}

/// Lattice image of a field: `values[iy * nx + ix]`, `null` outside the domain.
fn lattice_image(grid: &Grid, field: &ScalarField) -> Value {
    let (nx, ny) = grid.lattice_dims();
    let mut values = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            values.push(grid.unknown_at(ix, iy).map(|u| field[u]));
        }
    }
    let origin = grid.lattice_position(0, 0);
    json!({ "nx": nx, "ny": ny, "h": grid.h(), "origin": origin, "values": values })
}

fn error_json(message: String) -> String {
    to_json_string(&json!({ "error": message }))
}

pub fn eigen_json(domain_json: &str, h: f64, width: usize, max_iter: usize) -> String {
    let run = || -> Result<String, String> {
        let grid = grid_from(domain_json, h, width)?;
        let params = IterationParams {
            max_iter,
            ..IterationParams::default()
        };
        let u0 = build_initial_paraboloid(&grid, MARGIN);
        let r = run_inverse_iteration(&grid, &u0, &params).map_err(|e| e.to_string())?;
        let rayleigh: Vec<f64> = r.history.records.iter().map(|rec| rec.rayleigh).collect();
        let monotone: Vec<f64> = r.history.records.iter().map(|rec| rec.monotone_quantity).collect();
        Ok(to_json_string(&json!({
            "lambda": r.lambda_estimate,
            "status": r.status.as_str(),
            "iterations": r.history.len() - 1,
            "unknowns": grid.num_unknowns(),
            "rayleigh": rayleigh,
            "monotone_quantity": monotone,
            "field": lattice_image(&grid, &r.eigenfunction),
        })))
    };
    run().unwrap_or_else(error_json)
}

pub fn ma_solve_constant_json(domain_json: &str, h: f64, width: usize, value: f64) -> String {
    let run = || -> Result<String, String> {
        let grid = grid_from(domain_json, h, width)?;
        let f = DiscreteRhs::constant(&grid, value).map_err(|e| e.to_string())?;
        let report = solve_ma_dirichlet(&grid, &f, &SolverParams::default(), None).map_err(|e| e.to_string())?;
        Ok(to_json_string(&json!({
            "sweeps": report.sweeps,
            "residual": report.residual,
            "field": lattice_image(&grid, &report.field),
        })))
    };
    run().unwrap_or_else(error_json)
}

pub fn radial_oracle_json(n: usize) -> String {
    match radial_eigenvalue(n, &RadialShootParams::default()) {
        Ok(lambda) => to_json_string(&json!({ "n": n, "lambda_unit_ball": lambda })),
        Err(e) => error_json(e.to_string()),
    }
}

/// Inverse iteration on `domain_json`; returns λ, the Rayleigh history and
/// the unit-height eigenfunction on the lattice.
#[wasm_bindgen]
pub fn eigen(domain_json: &str, h: f64, width: usize, max_iter: usize) -> String {
    eigen_json(domain_json, h, width, max_iter)
}

/// Solves `MA_h(u) = value` with zero boundary data.
#[wasm_bindgen]
pub fn ma_solve_constant(domain_json: &str, h: f64, width: usize, value: f64) -> String {
    ma_solve_constant_json(domain_json, h, width, value)
}

/// Unit-ball eigenvalue from radial shooting.
#[wasm_bindgen]
pub fn radial_oracle(n: usize) -> String {
    radial_oracle_json(n)
}
