//! JSON run configuration.
//!
//! ```json
//! {
//!   "domain": {"kind": "disk", "center": [0, 0], "radius": 1},
//!   "h": 0.0078125,
//!   "W": 2,
//!   "margin": 0.05,
//!   "iteration": {"tol_rayleigh": 1e-8, "tol_field": 1e-7, "max_iter": 500,
//!                 "renormalize_each_step": true, "monotone_slack": 1e-3},
//!   "solver": {"tol_residual": 1e-8, "max_sweeps": 100, "relaxation": 1.0,
//!              "method": "newton"},
//!   "out": "out",
//!   "seed": 0,
//!   "parallel": false
//! }
//! ```
//!
//! Only `domain` and `h` are required. `W` is ignored for intervals.
//! `solver.tol_residual` is relative to `max(f)^{1/n}`.

use std::path::PathBuf;

use serde::Deserialize;
use thiserror::Error;

use crate::geometry::Domain;
use crate::iteration::IterationParams;
use crate::solver::{SolverMethod, SolverParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config key `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    domain: Domain,
    h: f64,
    #[serde(rename = "W")]
    width: Option<usize>,
    margin: Option<f64>,
    iteration: Option<RawIteration>,
    solver: Option<RawSolver>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    parallel: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIteration {
    tol_rayleigh: Option<f64>,
    tol_field: Option<f64>,
    max_iter: Option<usize>,
    renormalize_each_step: Option<bool>,
    monotone_slack: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    tol_residual: Option<f64>,
    max_sweeps: Option<usize>,
    relaxation: Option<f64>,
    method: Option<SolverMethod>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub domain: Domain,
    pub h: f64,
    pub width: usize,
    pub margin: f64,
    pub iteration: IterationParams,
    pub out: PathBuf,
    pub seed: u64,
    pub parallel: bool,
}

pub const DEFAULT_WIDTH: usize = 2;
pub const DEFAULT_MARGIN: f64 = 0.05;

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.inner().to_string();
        // Unknown and missing fields are reported against the parent path;
        // name the field itself.
        let field = message.split('`').nth(1).filter(|_| {
            message.starts_with("unknown field") || message.starts_with("missing field")
        });
        let key = match (path.as_str(), field) {
            (p, Some(f)) if p == f || p.ends_with(&format!(".{f}")) => p.to_string(),
            (".", Some(f)) => f.to_string(),
            (".", None) => "<root>".to_string(),
            (p, Some(f)) => format!("{p}.{f}"),
            (p, None) => p.to_string(),
        };
        invalid(&key, message)
    })?;

    if !(raw.h > 0.0 && raw.h.is_finite()) {
        return Err(invalid("h", format!("must be positive, got {}", raw.h)));
    }
    let max_h = raw.domain.diameter() / 8.0;
    if raw.h > max_h * (1.0 + 1e-12) {
        return Err(invalid("h", format!("must be at most diam/8 = {max_h}")));
    }
    let width = raw.width.unwrap_or(DEFAULT_WIDTH);
    if raw.domain.dim() == 2 && !(1..=4).contains(&width) {
        return Err(invalid("W", format!("must lie in [1, 4], got {width}")));
    }
    let margin = raw.margin.unwrap_or(DEFAULT_MARGIN);
    if !(margin > 0.0 && margin.is_finite()) {
        return Err(invalid("margin", "must be positive so that u0 < 0 on the closed domain"));
    }

    let defaults = IterationParams::default();
    let it = raw.iteration.unwrap_or_default();
    let sv = raw.solver.unwrap_or_default();
    let solver = SolverParams {
        tol_residual: sv.tol_residual.unwrap_or(defaults.solver.tol_residual),
        max_sweeps: sv.max_sweeps,
        relaxation: sv.relaxation.unwrap_or(defaults.solver.relaxation),
        method: sv.method.unwrap_or(defaults.solver.method),
        parallel: raw.parallel.unwrap_or(false),
    };
    let iteration = IterationParams {
        tol_rayleigh: it.tol_rayleigh.unwrap_or(defaults.tol_rayleigh),
        tol_field: it.tol_field.unwrap_or(defaults.tol_field),
        max_iter: it.max_iter.unwrap_or(defaults.max_iter),
        solver,
        renormalize_each_step: it.renormalize_each_step.unwrap_or(defaults.renormalize_each_step),
        monotone_slack: it.monotone_slack.unwrap_or(defaults.monotone_slack),
    };

    let positive = |key: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(invalid(key, format!("must be positive, got {v}")))
        }
    };
    positive("iteration.tol_rayleigh", iteration.tol_rayleigh)?;
    positive("iteration.tol_field", iteration.tol_field)?;
    if iteration.monotone_slack < 0.0 || !iteration.monotone_slack.is_finite() {
        return Err(invalid("iteration.monotone_slack", "must be nonnegative"));
    }
    if iteration.max_iter == 0 {
        return Err(invalid("iteration.max_iter", "must be at least 1"));
    }
    positive("solver.tol_residual", iteration.solver.tol_residual)?;
    if iteration.solver.max_sweeps == Some(0) {
        return Err(invalid("solver.max_sweeps", "must be at least 1"));
    }
    let omega = iteration.solver.relaxation;
    if !(omega > 0.0 && omega <= 1.0) {
        return Err(invalid("solver.relaxation", format!("must lie in (0, 1], got {omega}")));
    }

    Ok(RunConfig {
        domain: raw.domain,
        h: raw.h,
        width,
        margin,
        iteration,
        out: raw.out.unwrap_or_else(|| PathBuf::from("out")),
        seed: raw.seed.unwrap_or(0),
        parallel: raw.parallel.unwrap_or(false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(text: &str) -> String {
        match parse_config(text) {
            Err(ConfigError::Invalid { key, .. }) => key,
            Ok(_) => panic!("accepted {text}"),
        }
    }

    #[test]
    fn minimal_interval() {
        let c = parse_config(r#"{"domain":{"kind":"interval","a":0,"b":1},"h":0.00390625}"#).unwrap();
        assert_eq!(c.domain, Domain::interval(0.0, 1.0).unwrap());
        assert_eq!(c.h, 1.0 / 256.0);
        assert_eq!(c.iteration, IterationParams::default());
        assert_eq!(c.margin, DEFAULT_MARGIN);
    }

    #[test]
    fn disk_with_width() {
        let c = parse_config(r#"{"domain":{"kind":"disk","center":[0,0],"radius":1},"h":0.0078125,"W":2}"#).unwrap();
        assert_eq!(c.width, 2);
        let c = parse_config(
            r#"{"domain":{"kind":"disk","center":[0,0],"radius":1},"h":0.05,
                "solver":{"method":"gauss_seidel","max_sweeps":10},"iteration":{"max_iter":3},"parallel":true}"#,
        )
        .unwrap();
        assert_eq!(c.iteration.solver.method, SolverMethod::GaussSeidel);
        assert_eq!(c.iteration.solver.max_sweeps, Some(10));
        assert_eq!(c.iteration.max_iter, 3);
        assert!(c.iteration.solver.parallel);
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_of(r#"{"domain":{"kind":"interval","a":0,"b":1},"h":-1}"#), "h");
        assert_eq!(key_of(r#"{"domain":{"kind":"interval","a":0,"b":1},"h":0.5}"#), "h");
        assert_eq!(key_of(r#"{"domain":{"kind":"interval","a":0,"b":1},"h":"x"}"#), "h");
        assert_eq!(key_of(r#"{"domain":{"kind":"disk","center":[0,0],"radius":1},"h":0.1,"W":7}"#), "W");
        assert_eq!(
            key_of(r#"{"domain":{"kind":"interval","a":0,"b":1},"h":0.1,"iteration":{"max_iter":0}}"#),
            "iteration.max_iter"
        );
        assert_eq!(
            key_of(r#"{"domain":{"kind":"interval","a":0,"b":1},"h":0.1,"solver":{"relaxation":1.5}}"#),
            "solver.relaxation"
        );
        assert_eq!(key_of(r#"{"domain":{"kind":"interval","a":0,"b":1},"h":0.1,"bogus":1}"#), "bogus");
        assert_eq!(
            key_of(r#"{"domain":{"kind":"interval","a":0,"b":1},"h":0.1,"solver":{"tol":1}}"#),
            "solver.tol"
        );
        assert_eq!(key_of(r#"{"domain":{"kind":"disk","center":[0,0],"radius":-1},"h":0.1}"#), "domain");
        assert_eq!(key_of(r#"{"h":0.1}"#), "domain");
    }
}
