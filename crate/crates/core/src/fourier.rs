//! Comb convolutions, two-route Parseval checks, and the certified counting lower bound on
//! the discrepancy of progressions in a convex body.

use std::collections::BTreeSet;

use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rustfft::FftPlanner;
use serde::Serialize;

use crate::body::lp::q;
use crate::body::{
    difference_body, enumerate_maximal_aps_in_body, f_k, integer_points, Polytope, ShiftedBody, ZetaTable,
};
use crate::error::{domain, structural, Result};
use crate::lattice::{LatticePoint, Universe};
use crate::system::{subinterval_max_disc, Coloring};

type Q = BigRational;

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

fn ser_opt_q<S: serde::Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

/// Indicator of `{0, b, ..., (ell-1) b}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CombFunction {
    pub b: LatticePoint,
    pub ell: u64,
}

impl CombFunction {
    pub fn new(b: LatticePoint, ell: u64) -> Result<Self> {
        if ell == 0 {
            return Err(domain("comb length must be at least 1"));
        }
        if b.is_zero() && ell > 1 {
            return Err(domain("comb step must be nonzero"));
        }
        Ok(CombFunction { b, ell })
    }

    pub fn support(&self) -> Vec<LatticePoint> {
        (0..self.ell as i64).map(|t| self.b.scale(t)).collect()
    }
}

fn value_at(u: &Universe, chi: &Coloring, x: &LatticePoint) -> i64 {
    u.index_of(x).map(|i| chi.values()[i] as i64).unwrap_or(0)
}

/// `(g ⋆ chi)(x) = sum_{t < ell} chi(x - t b)`, with `chi` zero off the universe.
pub fn comb_convolve(u: &Universe, chi: &Coloring, g: &CombFunction, x: &LatticePoint) -> Result<i64> {
    check(u, chi, g)?;
    Ok((0..g.ell as i64).map(|t| value_at(u, chi, &x.offset(&g.b, -t))).sum())
}

fn check(u: &Universe, chi: &Coloring, g: &CombFunction) -> Result<()> {
    if chi.len() != u.len() {
        return Err(structural(format!("coloring has {} entries, universe has {}", chi.len(), u.len())));
    }
    if g.b.dim() != u.dim() {
        return Err(structural("comb and universe differ in dimension"));
    }
    Ok(())
}

/// Points where the convolution can be nonzero: `Ω + {0, b, ..., (ell-1) b}`, sorted.
pub fn convolution_support(u: &Universe, g: &CombFunction) -> Vec<LatticePoint> {
    let mut set = BTreeSet::new();
    for p in u.points() {
        for t in 0..g.ell as i64 {
            set.insert(p.offset(&g.b, t).0);
        }
    }
    set.into_iter().map(LatticePoint).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvolutionReport {
    pub points_checked: usize,
    /// Points where the two sides differ, with both values.
    pub mismatches: Vec<(LatticePoint, i64, i64)>,
    pub holds: bool,
}

/// Compares the convolution with the coloring sum over `Ω ∩ {x - t b : t < ell}`, the
/// latter computed by testing each point of `Ω` for membership in the progression.
pub fn convolution_identity_check(
    u: &Universe,
    chi: &Coloring,
    b: &LatticePoint,
    ell: u64,
) -> Result<ConvolutionReport> {
    let g = CombFunction::new(b.clone(), ell)?;
    check(u, chi, &g)?;
    let support = convolution_support(u, &g);
    let mut mismatches = Vec::new();
    for x in &support {
        let lhs = comb_convolve(u, chi, &g, x)?;
        let rhs: i64 = u
            .points()
            .iter()
            .zip(chi.values())
            .filter(|(p, _)| on_progression(x, b, ell, p))
            .map(|(_, &c)| c as i64)
            .sum();
        if lhs != rhs {
            mismatches.push((x.clone(), lhs, rhs));
        }
    }
    Ok(ConvolutionReport { points_checked: support.len(), holds: mismatches.is_empty(), mismatches })
}

/// Whether `p = x - t b` for some `0 <= t < ell`.
fn on_progression(x: &LatticePoint, b: &LatticePoint, ell: u64, p: &LatticePoint) -> bool {
    let diff = x.sub(p);
    if b.is_zero() {
        return diff.is_zero();
    }
    let lead = b.leading_index().expect("nonzero step");
    let (num, den) = (diff.coords()[lead], b.coords()[lead]);
    if num % den != 0 {
        return false;
    }
    let t = num / den;
    t >= 0 && (t as u64) < ell && b.scale(t) == diff
}

#[derive(Clone, Debug, Serialize)]
pub struct ParsevalReport {
    /// Exact `sum_x |g ⋆ chi(x)|^2`.
    pub direct: i64,
    /// The same sum through discrete transforms on a cyclic group.
    pub transform: f64,
    pub rel_err: f64,
    pub modulus: Vec<usize>,
    /// Modulus doublings needed to rule out wrap-around.
    pub retries: u32,
}

/// Two-route evaluation of `sum_x |g ⋆ chi(x)|^2`.
pub fn parseval_check(u: &Universe, chi: &Coloring, g: &CombFunction) -> Result<ParsevalReport> {
    check(u, chi, g)?;
    let direct: i64 =
        convolution_support(u, g).iter().map(|x| comb_convolve(u, chi, g, x).map(|v| v * v)).sum::<Result<i64>>()?;
    if u.is_empty() {
        return Ok(ParsevalReport { direct, transform: 0.0, rel_err: 0.0, modulus: vec![], retries: 0 });
    }
    let d = u.dim();
    let lo_chi: Vec<i64> = (0..d).map(|i| u.points().iter().map(|p| p.coords()[i]).min().expect("nonempty")).collect();
    let hi_chi: Vec<i64> = (0..d).map(|i| u.points().iter().map(|p| p.coords()[i]).max().expect("nonempty")).collect();
    let reach: Vec<i64> = (0..d).map(|i| (g.ell as i64 - 1) * g.b.coords()[i]).collect();
    let lo_g: Vec<i64> = reach.iter().map(|&r| r.min(0)).collect();
    let need: Vec<usize> = (0..d).map(|i| (hi_chi[i] - lo_chi[i] + reach[i].abs() + 1) as usize).collect();
    let mut modulus: Vec<usize> = (0..d).map(|i| ((hi_chi[i] - lo_chi[i] + 1) as usize).next_power_of_two()).collect();
    let mut retries = 0;
    while modulus.iter().zip(&need).any(|(m, n)| m < n) {
        for (m, n) in modulus.iter_mut().zip(&need) {
            if *m < *n {
                *m *= 2;
            }
        }
        retries += 1;
    }
    let total: usize = modulus.iter().product();
    let flat = |c: &[i64], lo: &[i64]| -> usize {
        c.iter().zip(lo).zip(&modulus).fold(0usize, |acc, ((&v, &l), &m)| acc * m + (v - l) as usize)
    };
    let mut a = vec![Complex::new(0.0, 0.0); total];
    for (p, &c) in u.points().iter().zip(chi.values()) {
        a[flat(p.coords(), &lo_chi)] = Complex::new(c as f64, 0.0);
    }
    let mut h = vec![Complex::new(0.0, 0.0); total];
    for t in g.support() {
        h[flat(t.coords(), &lo_g)] += Complex::new(1.0, 0.0);
    }
    let mut planner = FftPlanner::new();
    fft_nd(&mut planner, &mut a, &modulus, false);
    fft_nd(&mut planner, &mut h, &modulus, false);
    for (x, y) in a.iter_mut().zip(&h) {
        *x *= y;
    }
    fft_nd(&mut planner, &mut a, &modulus, true);
    let scale = 1.0 / total as f64;
    let transform: f64 = a.iter().map(|z| (z * scale).norm_sqr()).sum();
    let rel_err = if direct == 0 { transform.abs() } else { (transform - direct as f64).abs() / direct as f64 };
    Ok(ParsevalReport { direct, transform, rel_err, modulus, retries })
}

/// In-place multidimensional transform over a row-major array (unnormalized).
fn fft_nd(planner: &mut FftPlanner<f64>, data: &mut [Complex<f64>], dims: &[usize], inverse: bool) {
    let total = data.len();
    let mut stride = total;
    let mut line = Vec::new();
    for &len in dims {
        stride /= len;
        let fft = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
        // lines along this axis: base offsets with this axis index at zero
        for outer in 0..total / (len * stride) {
            for inner in 0..stride {
                let base = outer * len * stride + inner;
                line.clear();
                line.extend((0..len).map(|k| data[base + k * stride]));
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }
}

/// Parameters of the counting lower bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourierLBParams {
    pub ell: u64,
    #[serde(serialize_with = "ser_q")]
    pub m: Q,
    /// `1 / (zeta(m/2) - 1)`; absent when `zeta(m/2) = 1`.
    #[serde(serialize_with = "ser_opt_q")]
    pub epsilon: Option<Q>,
    pub zeta_half_m: u64,
    /// `f(K)^2` the parameters were derived from.
    #[serde(serialize_with = "ser_q")]
    pub f_squared: Q,
}

impl FourierLBParams {
    /// Validity condition `ell <= 5/6 + zeta(m/2)/6`, exactly.
    pub fn is_valid(&self) -> bool {
        q(6 * self.ell as i64) <= q(5 + self.zeta_half_m as i64)
    }
}

fn ell_bound_holds(ell: u64, zeta_half_m: u64) -> bool {
    6 * ell <= 5 + zeta_half_m
}

/// `ell = max(1, floor(f^2 / 12))`, `m = 4 / f^2`, with `ell` lowered until the validity
/// condition holds.
pub fn choose_lb_params(k: &Polytope) -> Result<FourierLBParams> {
    let fk = f_k(k)?;
    let s = fk.s_star;
    if !s.is_positive() {
        return Err(domain("f(K) must be positive"));
    }
    let m = q(4) / &s;
    let dk = difference_body(k);
    let half = &m / q(2);
    let zeta_half_m = ZetaTable::new(&dk, &half)?.count(&half);
    let mut ell = (&s / q(12)).floor().to_integer().to_u64().unwrap_or(0).max(1);
    while ell > 1 && !ell_bound_holds(ell, zeta_half_m) {
        ell -= 1;
    }
    let epsilon = (zeta_half_m > 1).then(|| Q::one() / q(zeta_half_m as i64 - 1));
    Ok(FourierLBParams { ell, m, epsilon, zeta_half_m, f_squared: s })
}

/// `sqrt(ell^2 |Ω| / (4 zeta(1 + 2 m ell) zeta(m)))`, valid for every coloring.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertifiedLowerBound {
    pub value: f64,
    pub params: FourierLBParams,
    pub zeta_big: u64,
    pub zeta_m: u64,
    pub omega: u64,
    #[serde(serialize_with = "ser_q_vec")]
    pub shift: Vec<Q>,
}

impl CertifiedLowerBound {
    /// Exact test of `value <= k`: `ell^2 |Ω| <= 4 zeta(1 + 2 m ell) zeta(m) k^2`.
    pub fn at_most(&self, k: i64) -> bool {
        if k < 0 {
            return self.omega == 0;
        }
        let ell = self.params.ell as u128;
        ell * ell * self.omega as u128 <= 4 * self.zeta_big as u128 * self.zeta_m as u128 * (k as u128) * (k as u128)
    }
}

fn ser_q_vec<S: serde::Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

pub fn certified_lower_bound(body: &ShiftedBody, params: &FourierLBParams) -> Result<CertifiedLowerBound> {
    if !params.is_valid() || !params.m.is_positive() || params.ell == 0 {
        return Err(domain("lower-bound parameters violate the length condition"));
    }
    let dk = difference_body(&body.base);
    let t_big = Q::one() + q(2) * &params.m * q(params.ell as i64);
    let table = ZetaTable::new(&dk, &t_big.clone().max(params.m.clone()))?;
    let (zeta_big, zeta_m) = (table.count(&t_big), table.count(&params.m));
    let omega = integer_points(body)?.len() as u64;
    let ell = params.ell as f64;
    let value = (ell * ell * omega as f64 / (4.0 * zeta_big as f64 * zeta_m as f64)).sqrt();
    Ok(CertifiedLowerBound { value, params: params.clone(), zeta_big, zeta_m, omega, shift: body.shift.clone() })
}

/// Best bound over shifts `v` on the grid `{0, 1/den, ..., (den-1)/den}^d`; the shift only
/// changes `|Ω|`, so the search maximizes the point count.
pub fn lower_bound_search(k: &Polytope, den: u64) -> Result<CertifiedLowerBound> {
    if den == 0 {
        return Err(domain("grid denominator must be positive"));
    }
    let params = choose_lb_params(k)?;
    let d = k.dim();
    let mut best: Option<(usize, Vec<Q>)> = None;
    let total = (den as u128).pow(d as u32);
    for code in 0..total {
        let mut c = code;
        let shift: Vec<Q> = (0..d)
            .map(|_| {
                let v = (c % den as u128) as i64;
                c /= den as u128;
                Q::new(v.into(), (den as i64).into())
            })
            .collect();
        let n = integer_points(&ShiftedBody::new(k.clone(), shift.clone())?)?.len();
        if best.as_ref().is_none_or(|(b, _)| n > *b) {
            best = Some((n, shift));
        }
    }
    let (_, shift) = best.expect("grid is nonempty");
    certified_lower_bound(&ShiftedBody::new(k.clone(), shift)?, &params)
}

/// `P + c (P - P)` from all vertex combinations.
pub fn minkowski_expand(p: &Polytope, c: &Q) -> Result<Polytope> {
    let dk = difference_body(p);
    let mut set = BTreeSet::new();
    for u in p.vertices() {
        for w in dk.vertices() {
            set.insert(u.iter().zip(w).map(|(a, b)| a + c * b).collect::<Vec<Q>>());
        }
    }
    Polytope::new(set.into_iter().collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscInequalityReport {
    pub energy: i64,
    pub disc: i64,
    /// `|Z^d ∩ (v + K + m ell (K - K))|`.
    pub expanded_count: u64,
    pub holds: bool,
}

/// Checks `sum_x |g_b ⋆ chi(x)|^2 <= disc(chi)^2 |Z^d ∩ (v + K~)|` for a step `b` of gauge at
/// most `m` in `K - K`.
pub fn disc_inequality_audit(
    body: &ShiftedBody,
    chi: &Coloring,
    b: &LatticePoint,
    ell: u64,
    m: &Q,
) -> Result<DiscInequalityReport> {
    let dk = difference_body(&body.base);
    let table = ZetaTable::new(&dk, m)?;
    let in_range = b.is_zero() || table.points().iter().any(|(z, g)| z.as_slice() == b.coords() && g <= m);
    if !in_range {
        return Err(domain(format!("step {b} lies outside m (K - K)")));
    }
    let u = integer_points(body)?;
    let g = CombFunction::new(b.clone(), ell)?;
    let energy: i64 = convolution_support(&u, &g)
        .iter()
        .map(|x| comb_convolve(&u, chi, &g, x).map(|v| v * v))
        .sum::<Result<i64>>()?;
    let disc = subinterval_max_disc(&enumerate_maximal_aps_in_body(body)?, chi)?;
    let expanded = ShiftedBody::new(minkowski_expand(&body.base, &(m * q(ell as i64)))?, body.shift.clone())?;
    let expanded_count = integer_points(&expanded)?.len() as u64;
    Ok(DiscInequalityReport {
        energy,
        disc,
        expanded_count,
        holds: (energy as i128) <= (disc as i128) * (disc as i128) * expanded_count as i128,
    })
}

#[cfg(test)]
mod tests;
