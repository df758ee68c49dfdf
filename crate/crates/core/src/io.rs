//! CSV and JSON file formats.
//!
//! * Field dump: `ix,iy,x,y,class,value` (2D) or `ix,x,class,value` (1D),
//!   one row per lattice node, `ix` major. Exterior nodes carry value 0.
//! * History: `k,rayleigh,sup_norm,lp_norm,monotone_quantity,delta,energy,sweeps`,
//!   one row per iterate starting at `k = 0` (whose `delta` is `NaN`).
//! * Result: `{"lambda", "status", "iterations", "grid_h", "domain", ...}`.
//!
//! Reals are written with 17 significant digits so that output is
//! byte-reproducible and round-trips exactly.

use std::io::{self, BufRead, Write};

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::geometry::Domain;
use crate::grid::{Grid, ScalarField};
use crate::iteration::{EigenResult, IterationHistory};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub const HISTORY_HEADER: &str = "k,rayleigh,sup_norm,lp_norm,monotone_quantity,delta,energy,sweeps";
pub const FIELD_HEADER_2D: &str = "ix,iy,x,y,class,value";
pub const FIELD_HEADER_1D: &str = "ix,x,class,value";

/// Real number with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NaN".to_string()
    }
}

pub fn write_field_csv<W: Write>(grid: &Grid, field: &ScalarField, mut out: W) -> io::Result<()> {
    let (nx, ny) = grid.lattice_dims();
    let two_d = grid.dim() == 2;
    writeln!(out, "{}", if two_d { FIELD_HEADER_2D } else { FIELD_HEADER_1D })?;
    for ix in 0..nx {
        for iy in 0..ny {
            let x = grid.lattice_position(ix, iy);
            let class = grid.class_at(ix, iy).as_str();
            let value = grid.unknown_at(ix, iy).map_or(0.0, |u| field[u]);
            if two_d {
                writeln!(out, "{ix},{iy},{},{},{class},{}", fmt_real(x[0]), fmt_real(x[1]), fmt_real(value))?;
            } else {
                writeln!(out, "{ix},{},{class},{}", fmt_real(x[0]), fmt_real(value))?;
            }
        }
    }
    Ok(())
}

/// Reads the `value` column of a field dump for the unknowns of `grid`.
/// Rows for exterior nodes are ignored; every unknown must appear.
pub fn read_field_csv<R: BufRead>(grid: &Grid, input: R) -> Result<ScalarField, IoError> {
    let two_d = grid.dim() == 2;
    let mut values = vec![f64::NAN; grid.num_unknowns()];
    let mut lines = input.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    let expected = if two_d { FIELD_HEADER_2D } else { FIELD_HEADER_1D };
    if header.trim() != expected {
        return Err(IoError::Parse {
            line: 1,
            message: format!("expected header `{expected}`"),
        });
    }
    let (nx, ny) = grid.lattice_dims();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = |message: &str| IoError::Parse {
            line: lineno,
            message: message.to_string(),
        };
        let want = if two_d { 6 } else { 4 };
        if cols.len() != want {
            return Err(bad("wrong number of columns"));
        }
        let ix: usize = cols[0].parse().map_err(|_| bad("bad ix"))?;
        let iy: usize = if two_d { cols[1].parse().map_err(|_| bad("bad iy"))? } else { 0 };
        let value: f64 = cols[want - 1].parse().map_err(|_| bad("bad value"))?;
        if ix >= nx || iy >= ny {
            return Err(bad("lattice index out of range"));
        }
        if let Some(u) = grid.unknown_at(ix, iy) {
            values[u] = value;
        }
    }
    if let Some(u) = values.iter().position(|v| v.is_nan()) {
        let (ix, iy) = grid.lattice_index(u);
        return Err(IoError::Parse {
            line: 0,
            message: format!("no value for node ({ix}, {iy})"),
        });
    }
    Ok(ScalarField::from_values(values))
}

pub fn write_history_csv<W: Write>(history: &IterationHistory, mut out: W) -> io::Result<()> {
    writeln!(out, "{HISTORY_HEADER}")?;
    for r in &history.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.k,
            fmt_real(r.rayleigh),
            fmt_real(r.sup_norm),
            fmt_real(r.lp_norm),
            fmt_real(r.monotone_quantity),
            fmt_real(r.delta.unwrap_or(f64::NAN)),
            fmt_real(r.energy),
            r.sweeps
        )?;
    }
    Ok(())
}

pub fn result_json(result: &EigenResult, domain: &Domain, h: f64) -> serde_json::Value {
    json!({
        "lambda": result.lambda_estimate,
        "status": result.status.as_str(),
        "iterations": result.history.len().saturating_sub(1),
        "grid_h": h,
        "domain": domain,
        "fixed_point_residual": result.fixed_point_residual,
        "extrapolated_lambda": result.extrapolated_lambda,
        "notes": result.notes,
    })
}

/// Compact JSON with every float written to 17 significant digits.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SeventeenDigits);
    value
        .serialize(&mut ser)
        .expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}
