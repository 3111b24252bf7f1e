//! Gram–Schmidt walk colorings, a random baseline, and exact brute-force optima.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::apgen::{count_all_aps, enumerate_maximal_aps, BoxSpec};
use crate::error::{structural, Error, Result};
use crate::gamma2::{Certificate, SparseMatrix};
use crate::system::{disc_eval, subinterval_max_disc, Coloring, OrderingSigma, Provenance, SetSystem};

/// Coordinates this close to ±1 are frozen to the exact sign.
pub const CLAMP_TOL: f64 = 1e-12;
/// Largest universe accepted by [`brute_force_min_disc`].
pub const BRUTE_DISC_LIMIT: usize = 26;
/// Largest universe accepted by [`brute_force_min_pdisc`].
pub const BRUTE_PDISC_LIMIT: usize = 22;

/// One step of a walk, as logged by [`GsWalk::run_traced`].
#[derive(Clone, Debug, Serialize)]
pub struct WalkStep {
    pub pivot: usize,
    pub alive: usize,
    pub delta_plus: f64,
    pub delta_minus: f64,
    /// Probability of moving by `+delta_plus`.
    pub p_plus: f64,
    pub went_plus: bool,
    pub frozen: Vec<usize>,
}

impl WalkStep {
    /// Expected displacement along the direction; zero for a martingale step.
    pub fn expected_delta(&self) -> f64 {
        self.p_plus * self.delta_plus - (1.0 - self.p_plus) * self.delta_minus
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WalkTrace {
    pub x: Vec<i8>,
    pub steps: Vec<WalkStep>,
}

/// Gram–Schmidt walk over the columns of a fixed matrix, kept as its Gram matrix.
#[derive(Clone, Debug)]
pub struct GsWalk {
    n: usize,
    gram: Vec<f64>,
    /// Inverse of the full Gram matrix when it is well conditioned.
    initial_inverse: Option<Vec<f64>>,
}

impl GsWalk {
    /// Columns must have norm at most one.
    pub fn from_sparse(r: &SparseMatrix) -> Result<Self> {
        if !r.is_finite() {
            return Err(structural("walk input has non-finite entries"));
        }
        Self::from_gram(r.n_cols(), r.gram())
    }

    pub fn from_dense(r: &DMatrix<f64>) -> Result<Self> {
        if r.iter().any(|v| !v.is_finite()) {
            return Err(structural("walk input has non-finite entries"));
        }
        let g = r.transpose() * r;
        let n = r.ncols();
        Self::from_gram(n, (0..n * n).map(|k| g[(k / n, k % n)]).collect())
    }

    /// Row-major `n x n` Gram matrix of the columns.
    pub fn from_gram(n: usize, gram: Vec<f64>) -> Result<Self> {
        if gram.len() != n * n {
            return Err(structural(format!("Gram matrix has {} entries, expected {}", gram.len(), n * n)));
        }
        if gram.iter().any(|v| !v.is_finite()) {
            return Err(structural("walk input has non-finite entries"));
        }
        let limit = (1.0 + 1e-9) * (1.0 + 1e-9);
        if let Some(i) = (0..n).find(|&i| gram[i * n + i] > limit) {
            return Err(Error::Precondition(format!("column {i} has norm {:.12} > 1", gram[i * n + i].sqrt())));
        }
        let all: Vec<usize> = (0..n).collect();
        let initial_inverse = invert_principal(&gram, n, &all);
        Ok(GsWalk { n, gram, initial_inverse })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn run(&self, seed: u64) -> Vec<i8> {
        self.walk(seed, None)
    }

    pub fn run_traced(&self, seed: u64) -> WalkTrace {
        let mut steps = Vec::new();
        let x = self.walk(seed, Some(&mut steps));
        WalkTrace { x, steps }
    }

    fn walk(&self, seed: u64, mut trace: Option<&mut Vec<WalkStep>>) -> Vec<i8> {
        let n = self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = vec![0.0f64; n];
        let mut state = AliveState::new(self, (0..n).collect());
        let mut u = Vec::new();
        while let Some(&pivot) = state.alive.iter().max() {
            let p = state.alive.iter().position(|&i| i == pivot).expect("pivot is alive");
            state.direction(self, p, &mut u);
            let (mut dp, mut dm) = (f64::INFINITY, f64::INFINITY);
            let (mut arg_p, mut arg_m) = (p, p);
            for (k, &i) in state.alive.iter().enumerate() {
                let ui = u[k];
                if ui == 0.0 {
                    continue;
                }
                let (up, down) = ((1.0 - x[i]) / ui.abs(), (1.0 + x[i]) / ui.abs());
                let (tp, tm) = if ui > 0.0 { (up, down) } else { (down, up) };
                if tp < dp {
                    dp = tp;
                    arg_p = k;
                }
                if tm < dm {
                    dm = tm;
                    arg_m = k;
                }
            }
            assert!(dp > 0.0 && dm > 0.0 && dp.is_finite() && dm.is_finite(), "alive pivot yields a proper step");
            let p_plus = dm / (dp + dm);
            let went_plus = rng.gen::<f64>() < p_plus;
            let (delta, arg) = if went_plus { (dp, arg_p) } else { (-dm, arg_m) };
            let mut frozen_pos = Vec::new();
            for (k, &i) in state.alive.iter().enumerate() {
                x[i] += delta * u[k];
                if k == arg {
                    x[i] = if delta * u[k] > 0.0 { 1.0 } else { -1.0 };
                }
                if (1.0 - x[i].abs()) <= CLAMP_TOL {
                    x[i] = x[i].signum();
                    frozen_pos.push(k);
                }
            }
            let frozen: Vec<usize> = frozen_pos.iter().map(|&k| state.alive[k]).collect();
            if let Some(t) = trace.as_deref_mut() {
                t.push(WalkStep {
                    pivot,
                    alive: state.alive.len(),
                    delta_plus: dp,
                    delta_minus: dm,
                    p_plus,
                    went_plus,
                    frozen: frozen.clone(),
                });
            }
            state.remove(self, &frozen_pos);
        }
        x.iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect()
    }
}

/// Alive coordinates and, when available, the inverse of their principal Gram block.
struct AliveState {
    alive: Vec<usize>,
    /// Row-major inverse with stride `stride`, valid on the leading `alive.len()` block.
    inv: Option<Vec<f64>>,
    stride: usize,
}

impl AliveState {
    fn new(w: &GsWalk, alive: Vec<usize>) -> Self {
        let stride = alive.len();
        AliveState { alive, inv: w.initial_inverse.clone(), stride }
    }

    /// Least-squares direction on the alive set with unit weight on position `p`.
    fn direction(&mut self, w: &GsWalk, p: usize, u: &mut Vec<f64>) {
        let s = self.alive.len();
        u.clear();
        if self.inv.is_none() {
            self.refactor(w);
        }
        match &self.inv {
            Some(h) => {
                let hpp = h[p * self.stride + p];
                u.extend((0..s).map(|k| h[k * self.stride + p] / hpp));
            }
            None => u.extend(eigen_direction(&w.gram, w.n, &self.alive, p)),
        }
        u[p] = 1.0;
    }

    fn refactor(&mut self, w: &GsWalk) {
        self.inv = invert_principal(&w.gram, w.n, &self.alive);
        self.stride = self.alive.len();
    }

    /// Drops the given positions (ascending) from the alive set.
    fn remove(&mut self, w: &GsWalk, positions: &[usize]) {
        let mut ok = true;
        for &k in positions.iter().rev() {
            let s = self.alive.len();
            if let Some(h) = self.inv.as_mut() {
                ok &= downdate_remove(h, self.stride, s, k);
            }
            self.alive.swap_remove(k);
        }
        if !ok || (self.inv.is_some() && self.alive.len() * 2 <= self.stride) {
            self.inv = None;
            if !self.alive.is_empty() {
                self.refactor(w);
            }
        }
    }
}

/// Removes position `k` from an inverse by a rank-one downdate, moving the last position
/// into its slot. Returns false when the pivot entry is too small to trust.
fn downdate_remove(h: &mut [f64], stride: usize, s: usize, k: usize) -> bool {
    let hkk = h[k * stride + k];
    if hkk <= 1e-300 || !hkk.is_finite() {
        return false;
    }
    let col: Vec<f64> = (0..s).map(|i| h[i * stride + k]).collect();
    for i in 0..s {
        let ci = col[i] / hkk;
        if ci == 0.0 {
            continue;
        }
        let row = &mut h[i * stride..i * stride + s];
        for (v, &cj) in row.iter_mut().zip(&col) {
            *v -= ci * cj;
        }
    }
    let last = s - 1;
    if k != last {
        for i in 0..s {
            h[i * stride + k] = h[i * stride + last];
        }
        for j in 0..s {
            h[k * stride + j] = h[last * stride + j];
        }
    }
    true
}

fn principal(gram: &[f64], n: usize, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| gram[idx[a] * n + idx[b]])
}

/// Inverse of a principal block when Cholesky succeeds with a sane condition estimate.
fn invert_principal(gram: &[f64], n: usize, idx: &[usize]) -> Option<Vec<f64>> {
    let s = idx.len();
    if s == 0 {
        return Some(Vec::new());
    }
    let g = principal(gram, n, idx);
    let chol = g.cholesky()?;
    let l = chol.l_dirty();
    let diag: Vec<f64> = (0..s).map(|i| l[(i, i)] * l[(i, i)]).collect();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &d| (a.min(d), b.max(d)));
    if lo.is_nan() || lo <= 1e-10 * hi {
        return None;
    }
    let inv = chol.inverse();
    Some((0..s * s).map(|k| inv[(k / s, k % s)]).collect())
}

/// Minimizer of `u^T G u` with `u_p = 1` through an eigendecomposition (singular blocks).
fn eigen_direction(gram: &[f64], n: usize, idx: &[usize], p: usize) -> Vec<f64> {
    let s = idx.len();
    let eig = SymmetricEigen::new(principal(gram, n, idx));
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, &l| a.max(l.abs()));
    let tol = 1e-10 * top.max(1e-300);
    let q = &eig.eigenvectors;
    let null: Vec<usize> = (0..s).filter(|&i| eig.eigenvalues[i] <= tol).collect();
    let wp: f64 = null.iter().map(|&i| q[(p, i)] * q[(p, i)]).sum();
    let mut u = vec![0.0; s];
    if wp > 1e-9 {
        for &i in &null {
            let c = q[(p, i)] / wp;
            for (k, v) in u.iter_mut().enumerate() {
                *v += c * q[(k, i)];
            }
        }
    } else {
        let mut norm = 0.0;
        for i in (0..s).filter(|&i| eig.eigenvalues[i] > tol) {
            let c = q[(p, i)] / eig.eigenvalues[i];
            norm += c * q[(p, i)];
            for (k, v) in u.iter_mut().enumerate() {
                *v += c * q[(k, i)];
            }
        }
        u.iter_mut().for_each(|v| *v /= norm);
    }
    u
}

/// Walk on a sparse right factor with columns of norm at most one.
pub fn gs_walk(r: &SparseMatrix, seed: u64) -> Result<Vec<i8>> {
    Ok(GsWalk::from_sparse(r)?.run(seed))
}

/// Outcome of coloring a set system.
#[derive(Clone, Debug, Serialize)]
pub struct ColoringReport {
    pub coloring: Coloring,
    pub disc: i64,
    /// Number of sets.
    pub m: u64,
    pub cert_value: f64,
    /// `sqrt(ln 2m) * cert_value`.
    pub bound: f64,
    pub ratio: f64,
    pub seed: u64,
}

impl ColoringReport {
    fn new(coloring: Coloring, disc: i64, m: u64, cert_value: f64, seed: u64) -> Self {
        let bound = (2.0 * m.max(1) as f64).ln().sqrt() * cert_value;
        let ratio = if bound > 0.0 { disc as f64 / bound } else { f64::INFINITY };
        ColoringReport { coloring, disc, m, cert_value, bound, ratio, seed }
    }
}

/// Walk prepared from a certificate's right factor, normalized to unit column norm.
pub fn walk_for(cert: &Certificate) -> Result<GsWalk> {
    let rn = cert.r_norm();
    let r = if rn > 0.0 { cert.r().clone().scaled(1.0 / rn) } else { cert.r().clone() };
    GsWalk::from_sparse(&r)
}

/// Colors `sys` with the walk on the certificate's right factor.
pub fn gamma2_coloring(sys: &SetSystem, cert: &Certificate, seed: u64) -> Result<ColoringReport> {
    check_target(sys.n_points(), sys.len(), cert)?;
    gamma2_coloring_with(&walk_for(cert)?, sys, cert.value(), seed)
}

/// Same as [`gamma2_coloring`] with a walk reused across seeds.
pub fn gamma2_coloring_with(w: &GsWalk, sys: &SetSystem, cert_value: f64, seed: u64) -> Result<ColoringReport> {
    if w.n() != sys.n_points() {
        return Err(structural(format!("walk has {} columns, universe has {} points", w.n(), sys.n_points())));
    }
    let chi = Coloring::new(w.run(seed), Provenance::Gswalk, Some(seed))?;
    let disc = disc_eval(sys, &chi)?;
    Ok(ColoringReport::new(chi, disc, sys.len() as u64, cert_value, seed))
}

/// Walk coloring of all progressions of a box. The discrepancy is read off the maximal
/// progressions in lexicographic order, which covers every progression as a slice.
pub fn color_box(bx: &BoxSpec, cert: &Certificate, seed: u64) -> Result<ColoringReport> {
    let m = count_all_aps(bx).sets as u64;
    check_target(bx.size() as usize, m as usize, cert)?;
    BoxColorer::new(bx, cert)?.color(seed)
}

/// Reusable box coloring pipeline: walk plus maximal family for evaluation.
pub struct BoxColorer {
    walk: GsWalk,
    maximal: SetSystem,
    m: u64,
    cert_value: f64,
}

impl BoxColorer {
    pub fn new(bx: &BoxSpec, cert: &Certificate) -> Result<Self> {
        let m = count_all_aps(bx).sets as u64;
        check_target(bx.size() as usize, m as usize, cert)?;
        Ok(BoxColorer { walk: walk_for(cert)?, maximal: enumerate_maximal_aps(bx)?, m, cert_value: cert.value() })
    }

    pub fn color(&self, seed: u64) -> Result<ColoringReport> {
        let chi = Coloring::new(self.walk.run(seed), Provenance::Gswalk, Some(seed))?;
        let disc = subinterval_max_disc(&self.maximal, &chi)?;
        Ok(ColoringReport::new(chi, disc, self.m, self.cert_value, seed))
    }

    /// Uniform random coloring evaluated the same way.
    pub fn random(&self, seed: u64) -> Result<ColoringReport> {
        let chi = Coloring::random(self.walk.n(), seed);
        let disc = subinterval_max_disc(&self.maximal, &chi)?;
        Ok(ColoringReport::new(chi, disc, self.m, self.cert_value, seed))
    }
}

fn check_target(n_points: usize, n_sets: usize, cert: &Certificate) -> Result<()> {
    if cert.n_cols() != n_points || cert.n_rows() != n_sets {
        return Err(structural(format!(
            "certificate is {}x{}, set system is {}x{}",
            cert.n_rows(),
            cert.n_cols(),
            n_sets,
            n_points
        )));
    }
    Ok(())
}

/// Uniform random coloring and its discrepancy.
pub fn random_coloring(sys: &SetSystem, seed: u64) -> Result<(Coloring, i64)> {
    let chi = Coloring::random(sys.n_points(), seed);
    let d = disc_eval(sys, &chi)?;
    Ok((chi, d))
}

#[derive(Clone, Debug, Serialize)]
pub struct BruteForceResult {
    pub min_disc: i64,
    pub witness: Coloring,
    /// Colorings examined: half the space, by sign symmetry.
    pub evaluated: u64,
}

/// Exact discrepancy by Gray-code enumeration with incremental set sums.
pub fn brute_force_min_disc(sys: &SetSystem) -> Result<BruteForceResult> {
    let n = sys.n_points();
    guard(n, BRUTE_DISC_LIMIT)?;
    let sets: Vec<&[u32]> = sys.iter().collect();
    Ok(gray_min(n, &sets))
}

/// Exact prefix discrepancy: every sigma-prefix of every set counts as a set.
pub fn brute_force_min_pdisc(sys: &SetSystem, sigma: &OrderingSigma) -> Result<BruteForceResult> {
    let n = sys.n_points();
    guard(n, BRUTE_PDISC_LIMIT)?;
    if sigma.len() != n {
        return Err(structural(format!("ordering has {} entries, universe has {n}", sigma.len())));
    }
    let mut prefixes: Vec<Vec<u32>> = Vec::new();
    for s in sys.iter() {
        let mut sorted = s.to_vec();
        sorted.sort_unstable_by_key(|&i| sigma.rank(i as usize));
        prefixes.extend((1..=sorted.len()).map(|k| sorted[..k].to_vec()));
    }
    let refs: Vec<&[u32]> = prefixes.iter().map(|v| v.as_slice()).collect();
    Ok(gray_min(n, &refs))
}

fn guard(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::Resource { what: "brute-force universe", count: n as u128, limit: limit as u128 });
    }
    Ok(())
}

/// Point 0 stays at +1; the remaining points run through a Gray code, one flip per step.
fn gray_min(n: usize, sets: &[&[u32]]) -> BruteForceResult {
    let mut member: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (j, s) in sets.iter().enumerate() {
        for &i in s.iter() {
            member[i as usize].push(j as u32);
        }
    }
    let mut sums: Vec<i64> = sets.iter().map(|s| s.len() as i64).collect();
    let width = sets.iter().map(|s| s.len()).max().unwrap_or(0);
    let mut counts = vec![0u64; width + 1];
    for s in &sums {
        counts[s.unsigned_abs() as usize] += 1;
    }
    let mut cur = width as i64;
    while cur > 0 && counts[cur as usize] == 0 {
        cur -= 1;
    }
    let mut x = vec![1i8; n];
    let (mut best, mut best_code) = (cur, 0u64);
    let total: u64 = if n <= 1 { 1 } else { 1u64 << (n - 1) };
    for g in 1..total {
        let e = g.trailing_zeros() as usize + 1;
        x[e] = -x[e];
        let d = 2 * x[e] as i64;
        for &j in &member[e] {
            let j = j as usize;
            counts[sums[j].unsigned_abs() as usize] -= 1;
            sums[j] += d;
            let a = sums[j].unsigned_abs() as usize;
            counts[a] += 1;
            cur = cur.max(a as i64);
        }
        while cur > 0 && counts[cur as usize] == 0 {
            cur -= 1;
        }
        if cur < best {
            best = cur;
            best_code = g;
        }
    }
    let code = best_code ^ (best_code >> 1);
    let values: Vec<i8> = (0..n).map(|i| if i > 0 && (code >> (i - 1)) & 1 == 1 { -1 } else { 1 }).collect();
    let witness = Coloring::new(values, Provenance::Bruteforce, None).expect("±1 by construction");
    BruteForceResult { min_disc: best, witness, evaluated: total }
}

#[cfg(test)]
mod tests;
