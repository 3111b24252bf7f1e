//! `gamma_2` factorization certificates for progression families.

pub mod cert;
mod construct;
pub mod sparse;
mod spectral;

use serde::Serialize;

use crate::apgen::BoxSpec;
use crate::error::{Error, Result};

pub use cert::{
    check, degree_bound_cert, disjoint_support_cert, flatten, project_columns, select_rows, size_bound_cert,
    triangle_cert, union_cert, validate, Certificate, FlatNode, Op, RowPair, TriangleMode,
};
pub use construct::{
    ap_cert, ap_cert_auto, ap_cert_guarded, ap_cert_right_only, decay_factor, map_cert, map_cert_body,
    map_cert_for_system, map_cert_guarded, map_summary, ApCert, DecayCheck, MapCert, MapSummary,
};
pub use sparse::SparseMatrix;
pub use spectral::{spectral_lower_bounds, SpectralBounds};

/// `f(N) = max over I ⊆ [d] of (prod_{i in I} N_i)^{1/(2|I|+2)}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FBoundResult {
    pub sides: Vec<u64>,
    pub value: f64,
    /// Coordinates (0-based) of the maximizing subset; empty when the empty product wins.
    pub argmax_subset: Vec<usize>,
}

pub fn f_of_n(bx: &BoxSpec) -> Result<FBoundResult> {
    let d = bx.dim();
    if d > 20 {
        return Err(Error::Resource { what: "subsets of coordinates", count: 1u128 << d, limit: 1 << 20 });
    }
    let logs: Vec<f64> = bx.sides().iter().map(|&n| (n as f64).ln()).collect();
    let mut best = (0.0f64, 0usize);
    for mask in 1usize..1 << d {
        let k = mask.count_ones() as f64;
        let s: f64 = (0..d).filter(|i| mask >> i & 1 == 1).map(|i| logs[i]).sum();
        let v = s / (2.0 * k + 2.0);
        if v > best.0 + 1e-15 {
            best = (v, mask);
        }
    }
    Ok(FBoundResult {
        sides: bx.sides().to_vec(),
        value: best.0.exp(),
        argmax_subset: (0..d).filter(|i| best.1 >> i & 1 == 1).collect(),
    })
}

#[cfg(test)]
mod tests;
