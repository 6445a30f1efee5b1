//! JSON exchange format for square complex matrices:
//! `{"dim": N, "re": [[...]], "im": [[...]]}`, row-major.
//!
//! Numbers are written with 17 significant digits so that every `f64`
//! round-trips exactly.

use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::CMatrix;
use crate::C64;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    dim: usize,
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

fn push_number(out: &mut String, x: f64) {
    if x == 0.0 {
        // Keeps "-0" out of the output.
        out.push('0');
    } else {
        write!(out, "{x:.16e}").expect("writing to a String cannot fail");
    }
}

fn push_rows(out: &mut String, m: &CMatrix, part: impl Fn(C64) -> f64) {
    out.push('[');
    for i in 0..m.nrows() {
        if i > 0 {
            out.push(',');
        }
        out.push('[');
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            push_number(out, part(m[(i, j)]));
        }
        out.push(']');
    }
    out.push(']');
}

/// Serializes a square matrix.
pub fn to_json(m: &CMatrix) -> String {
    let mut out = String::new();
    write!(out, "{{\"dim\":{},\"re\":", m.nrows()).expect("infallible");
    push_rows(&mut out, m, |z| z.re);
    out.push_str(",\"im\":");
    push_rows(&mut out, m, |z| z.im);
    out.push('}');
    out
}

/// Parses a square matrix. `im` may be omitted for real matrices.
pub fn from_json(text: &str) -> Result<CMatrix> {
    let doc: MatrixDoc = serde_json::from_str(text)?;
    from_value(doc)
}

/// Parses a matrix from an already-decoded JSON value.
pub fn from_json_value(value: &serde_json::Value) -> Result<CMatrix> {
    let doc: MatrixDoc = serde_json::from_value(value.clone())?;
    from_value(doc)
}

fn from_value(doc: MatrixDoc) -> Result<CMatrix> {
    let n = doc.dim;
    let check = |rows: &Vec<Vec<f64>>, name: &str| -> Result<()> {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidConfig(format!(
                "matrix field `{name}` must be {n}x{n}"
            )));
        }
        Ok(())
    };
    check(&doc.re, "re")?;
    if let Some(im) = &doc.im {
        check(im, "im")?;
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let im = doc.im.as_ref().map_or(0.0, |m| m[i][j]);
        C64::new(doc.re[i][j], im)
    }))
}
