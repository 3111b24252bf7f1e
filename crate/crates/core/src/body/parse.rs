//! Text format for polytopes:
//!
//! ```text
//! # comment
//! dim 2
//! vertex 0 0
//! vertex 2 0
//! vertex 0 1/2
//! shift 1/3 0
//! ```

use num_bigint::BigInt;
use num_traits::Zero;

use super::lp::Q;
use super::{Polytope, ShiftedBody};
use crate::error::{Error, Result};

/// Parses `p` or `p/q` with integer `p`, `q` (`q != 0`).
pub fn parse_rational(tok: &str) -> std::result::Result<Q, String> {
    let (n, d) = match tok.split_once('/') {
        Some((n, d)) => (n, d),
        None => (tok, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| format!("'{tok}' is not an exact rational"))?;
    let d: BigInt = d.parse().map_err(|_| format!("'{tok}' is not an exact rational"))?;
    if d.is_zero() {
        return Err(format!("'{tok}' has a zero denominator"));
    }
    Ok(Q::new(n, d))
}

pub fn parse_polytope(text: &str) -> Result<ShiftedBody> {
    let mut dim: Option<usize> = None;
    let mut vertices = Vec::new();
    let mut shift = None;
    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let err = |msg: String| Error::Parse { line, msg };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let key = toks.next().unwrap_or_default();
        let rest: Vec<&str> = toks.collect();
        match key {
            "dim" => {
                if dim.is_some() {
                    return Err(err("dimension given twice".into()));
                }
                let [d] = rest.as_slice() else {
                    return Err(err("expected 'dim <d>'".into()));
                };
                let d: usize = d.parse().map_err(|_| err(format!("bad dimension '{d}'")))?;
                if d == 0 {
                    return Err(err("dimension must be at least 1".into()));
                }
                dim = Some(d);
            }
            "vertex" | "shift" => {
                let d = dim.ok_or_else(|| err("'dim' must come first".into()))?;
                if rest.len() != d {
                    return Err(err(format!("expected {d} coordinates, found {}", rest.len())));
                }
                let v = rest.iter().map(|t| parse_rational(t).map_err(&err)).collect::<Result<Vec<Q>>>()?;
                if key == "vertex" {
                    vertices.push(v);
                } else if shift.replace(v).is_some() {
                    return Err(err("shift given twice".into()));
                }
            }
            other => return Err(err(format!("unknown keyword '{other}'"))),
        }
    }
    let d = dim.ok_or(Error::Parse { line: 0, msg: "missing 'dim'".into() })?;
    if vertices.is_empty() {
        return Err(Error::Parse { line: 0, msg: "no vertices".into() });
    }
    let base = Polytope::new(vertices)?;
    ShiftedBody::new(base, shift.unwrap_or_else(|| vec![Q::zero(); d]))
}
