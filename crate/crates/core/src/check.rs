//! Self-contained invariant suite behind the `check` command.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::functionals::{gradient_ratio, norm_equivalence_ratios, rayleigh_quotient};
use crate::geometry::Domain;
use crate::grid::{Grid, ScalarField};
use crate::iteration::{build_initial_paraboloid, iteration_step, run_inverse_iteration, IterationParams};
use crate::operator::ma_at;
use crate::solver::{comparison_trial, solve_ma_dirichlet, DiscreteRhs, SolverParams};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckParams {
    pub seed: u64,
    /// Spacing of the unit-disk grid used by every 2D trial.
    pub h: f64,
    pub width: usize,
    /// Iterations of the short inverse-iteration runs.
    pub short_run: usize,
    pub parallel: bool,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            seed: 0,
            h: 1.0 / 32.0,
            width: 2,
            short_run: 8,
            parallel: false,
        }
    }
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

/// Runs every trial and returns one outcome per invariant.
pub fn run_check_suite(params: &CheckParams) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let solver = SolverParams {
        parallel: params.parallel,
        ..SolverParams::default()
    };
    let iter_params = IterationParams {
        max_iter: params.short_run,
        solver: solver.clone(),
        ..IterationParams::default()
    };
    let setup = || -> Result<(Grid, Grid), String> {
        let disk = Domain::disk([0.0, 0.0], 1.0).map_err(|e| e.to_string())?;
        let unit = Domain::interval(0.0, 1.0).map_err(|e| e.to_string())?;
        Ok((
            Grid::build(&disk, params.h, params.width).map_err(|e| e.to_string())?,
            Grid::build(&unit, params.h / 2.0, 1).map_err(|e| e.to_string())?,
        ))
    };
    let (grid, line) = match setup() {
        Ok(g) => g,
        Err(e) => return vec![outcome("setup", false, e)],
    };

    let mut out = Vec::new();
    // Every solver output is collected for the gradient estimate.
    let mut solutions: Vec<(&Grid, ScalarField)> = Vec::new();

    // Short runs: monotone quantity and norm equivalence on every iterate.
    let mut runs = Vec::new();
    for g in [&grid, &line] {
        let u0 = build_initial_paraboloid(g, 0.05);
        match run_inverse_iteration(g, &u0, &iter_params) {
            Ok(r) => runs.push((g, u0, r)),
            Err(e) => out.push(outcome("short_run", false, e.to_string())),
        }
    }
    let mut violations = Vec::new();
    for (g, _, r) in &runs {
        for k in r.history.monotone_violations(iter_params.monotone_slack) {
            violations.push(format!("n={} k={k}", g.dim()));
        }
    }
    out.push(outcome(
        "monotone_quantity",
        violations.is_empty() && runs.len() == 2,
        if violations.is_empty() {
            format!("m_k nonincreasing within slack {:e} on {} runs", iter_params.monotone_slack, runs.len())
        } else {
            format!("increases at {}", violations.join(", "))
        },
    ));

    // Norm equivalence is checked on the iterates re-generated step by step.
    let mut worst = (f64::INFINITY, f64::NEG_INFINITY);
    let mut norm_ok = runs.len() == 2;
    for (g, u0, r) in &runs {
        let mut u = u0.normalized();
        for k in 0..r.history.len() {
            if k > 0 {
                match iteration_step(g, &u, &iter_params) {
                    Ok(s) => {
                        solutions.push((g, s.field.clone()));
                        u = s.field;
                    }
                    Err(_) => {
                        norm_ok = false;
                        break;
                    }
                }
            }
            let n = g.dim() as f64;
            for (_, ratio) in norm_equivalence_ratios(g, &u) {
                worst.0 = worst.0.min(ratio);
                worst.1 = worst.1.max(ratio);
                if ratio < 1.0 / (n + 1.0) || ratio > 1.0 + 5.0 * g.h() {
                    norm_ok = false;
                }
            }
        }
    }
    out.push(outcome(
        "norm_equivalence",
        norm_ok,
        format!("average/sup ratios in [{:.6}, {:.6}]", worst.0, worst.1),
    ));

    // Scale invariance of the Rayleigh quotient.
    let mut scale_err: f64 = 0.0;
    let mut scale_ok = !runs.is_empty();
    for (g, u0, r) in &runs {
        for u in [u0, &r.eigenfunction] {
            let Ok(base) = rayleigh_quotient(g, u) else {
                scale_ok = false;
                continue;
            };
            for c in [0.1, 3.0, 10.0] {
                match rayleigh_quotient(g, &u.scaled(c)) {
                    Ok(rc) => {
                        let rel = (rc - base).abs() / base;
                        scale_err = scale_err.max(rel);
                        scale_ok &= rel <= 1e-12;
                    }
                    Err(_) => scale_ok = false,
                }
            }
        }
    }
    out.push(outcome(
        "scale_invariance",
        scale_ok,
        format!("max |R(cu) - R(u)| / R = {scale_err:.3e} for c in {{0.1, 3, 10}}"),
    ));

    // Degenerate ellipticity: raising a neighbour never lowers MA_h.
    let mut de_fail = 0;
    let mut de_trials = 0;
    while de_trials < 100 {
        let vals: Vec<f64> = (0..grid.num_unknowns())
            .map(|u| {
                let x = grid.position(u);
                0.5 * (x[0] * x[0] + x[1] * x[1] - 1.0) + 0.05 * rng.gen_range(-1.0..1.0)
            })
            .collect();
        let u = rng.gen_range(0..grid.num_unknowns());
        let d = rng.gen_range(0..grid.num_directions());
        let Some(nb) = grid.arms(u, d)[rng.gen_range(0..2)].neighbor else {
            continue;
        };
        de_trials += 1;
        let before = ma_at(&grid, &vals, u);
        let mut bumped = vals;
        bumped[nb] += rng.gen_range(1e-6..0.1);
        if ma_at(&grid, &bumped, u) < before - 1e-12 * before.abs().max(1.0) {
            de_fail += 1;
        }
    }
    out.push(outcome(
        "degenerate_ellipticity",
        de_fail == 0,
        format!("{de_fail} of {de_trials} perturbation trials lowered MA_h"),
    ));

    // Comparison principle: f_u <= f_v gives u >= v.
    let mut cmp_fail = Vec::new();
    for trial in 0..20 {
        let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let base = rng.gen_range(0.0..2.0);
        let gap = rng.gen_range(0.05..1.0);
        let fu: Vec<f64> = (0..grid.num_unknowns())
            .map(|i| {
                let x = grid.position(i);
                (base + a * x[0] + b * x[1]).max(0.0)
            })
            .collect();
        let fv: Vec<f64> = fu.iter().map(|v| v + gap).collect();
        let solve = |f: Vec<f64>| {
            DiscreteRhs::new(&grid, f)
                .map_err(|e| e.to_string())
                .and_then(|rhs| solve_ma_dirichlet(&grid, &rhs, &solver, None).map_err(|e| e.to_string()))
        };
        match (solve(fu), solve(fv)) {
            (Ok(u), Ok(v)) => {
                let tol = 1e-6;
                match comparison_trial(&grid, &u.field, &v.field, tol) {
                    Ok(true) => {}
                    Ok(false) => cmp_fail.push(format!("trial {trial}: u < v somewhere")),
                    Err(e) => cmp_fail.push(format!("trial {trial}: {e}")),
                }
                solutions.push((&grid, u.field));
                solutions.push((&grid, v.field));
            }
            (Err(e), _) | (_, Err(e)) => cmp_fail.push(format!("trial {trial}: {e}")),
        }
    }
    out.push(outcome(
        "comparison_principle",
        cmp_fail.is_empty(),
        if cmp_fail.is_empty() {
            "20 randomized solve pairs ordered".to_string()
        } else {
            cmp_fail.join("; ")
        },
    ));

    // Gradient estimate on every solver output.
    let mut grad_worst: f64 = 0.0;
    let mut grad_ok = !solutions.is_empty();
    for (g, u) in &solutions {
        let r = gradient_ratio(g, u);
        grad_worst = grad_worst.max(r);
        grad_ok &= r <= 1.0 + 5.0 * g.h();
    }
    out.push(outcome(
        "gradient_estimate",
        grad_ok,
        format!("max ratio {grad_worst:.6} over {} solver outputs", solutions.len()),
    ));

    // Homogeneity of the unnormalized step map.
    let raw = IterationParams {
        renormalize_each_step: false,
        ..iter_params.clone()
    };
    let mut hom_ok = true;
    let mut hom_err: f64 = 0.0;
    for g in [&grid, &line] {
        let u = build_initial_paraboloid(g, 0.05);
        match (iteration_step(g, &u, &raw), iteration_step(g, &u.scaled(2.0), &raw)) {
            (Ok(one), Ok(two)) => {
                let doubled = one.field.scaled(2.0);
                let rel = two.field.distance(&doubled) / doubled.sup_norm();
                hom_err = hom_err.max(rel);
                hom_ok &= rel <= 10.0 * solver.tol_residual;
            }
            _ => hom_ok = false,
        }
    }
    out.push(outcome(
        "step_homogeneity",
        hom_ok,
        format!(
            "sup |step(2u) - 2 step(u)| / sup |2 step(u)| = {hom_err:.3e} (limit {:e})",
            10.0 * solver.tol_residual
        ),
    ));

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_coarse_grid() {
        let params = CheckParams {
            h: 1.0 / 16.0,
            short_run: 4,
            ..CheckParams::default()
        };
        let outcomes = run_check_suite(&params);
        assert_eq!(outcomes.len(), 7);
        for o in &outcomes {
            assert!(o.passed, "{o}");
        }
    }

    #[test]
    fn display_tags() {
        let o = outcome("x", false, "bad".into());
        assert_eq!(o.to_string(), "FAIL x: bad");
    }
}
