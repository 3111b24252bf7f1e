//! Singular-value lower bounds for incidence matrices.

use serde::Serialize;

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};
use crate::system::SetSystem;

/// Dense SVD size limit (`m * n`).
pub const SPECTRAL_LIMIT: u128 = 4_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralBounds {
    pub rows: usize,
    pub cols: usize,
    /// `||A||_* / sqrt(mn)`, a lower bound on `gamma_2(A)`.
    pub nuclear_over_sqrt_mn: f64,
    /// `sigma_min(A) sqrt(n / m)`, a lower bound on the discrepancy of every coloring.
    pub sigma_min_disc_lb: f64,
}

pub fn spectral_lower_bounds(sys: &SetSystem) -> Result<SpectralBounds> {
    let (m, n) = (sys.len(), sys.n_points());
    let cells = m as u128 * n as u128;
    if cells > SPECTRAL_LIMIT {
        return Err(Error::Resource { what: "dense matrix entries", count: cells, limit: SPECTRAL_LIMIT });
    }
    if m == 0 || n == 0 {
        return Ok(SpectralBounds { rows: m, cols: n, nuclear_over_sqrt_mn: 0.0, sigma_min_disc_lb: 0.0 });
    }
    let sv = SparseMatrix::incidence(sys).to_dense().singular_values();
    let nuclear: f64 = sv.iter().sum();
    // with fewer rows than columns A has a kernel and sigma_min is 0
    let sigma_min = if m >= n { sv.iter().copied().fold(f64::INFINITY, f64::min) } else { 0.0 };
    Ok(SpectralBounds {
        rows: m,
        cols: n,
        nuclear_over_sqrt_mn: nuclear / ((m as f64) * (n as f64)).sqrt(),
        sigma_min_disc_lb: sigma_min * (n as f64 / m as f64).sqrt(),
    })
}
