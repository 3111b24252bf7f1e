//! Certificates for maximal progressions (threshold split into small sets and large steps) and
//! for all progressions (halving recursion over prefix-maximal progressions).

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use super::cert::{
    degree_bound_cert, degree_bound_right_only, disjoint_support_cert, select_rows, size_bound_cert,
    size_bound_right_only, triangle_cert, triangle_right_only, union_cert, unit_cert, Certificate, RowPair,
    TriangleMode,
};
use super::f_of_n;
use crate::apgen::{
    canonical_steps, count_all_aps, enumerate_all_aps_guarded, enumerate_maximal_aps_all_steps,
    enumerate_maximal_aps_guarded, enumerate_prefix_maximal_guarded, for_each_line, large_step_set, max_len_for_step,
    BoxSpec, Guard,
};
use crate::body::{enumerate_maximal_aps_in_body_guarded, f_k, q_to_f64, ShiftedBody};
use crate::error::{structural, Error, Result};
use crate::lattice::LatticePoint;
use crate::system::{SetSystem, ZERO_STEP};

/// Certificate for a maximal-progression family.
#[derive(Clone, Debug)]
pub struct MapCert {
    pub cert: Certificate,
    pub target: Option<SetSystem>,
    /// Threshold `s = f^2`.
    pub s: f64,
    pub f: f64,
    /// Largest set of size `<= s`.
    pub small_max: usize,
    pub large_sets: usize,
    /// Steps with a maximal progression longer than `s`.
    pub large_steps: usize,
}

/// Split by set size at `s`: size bound on the small sets, degree bound on the large ones.
pub fn map_cert_for_system(sys: &SetSystem, s: f64) -> Result<Certificate> {
    let (small, large): (Vec<usize>, Vec<usize>) = (0..sys.len()).partition(|&i| sys.set(i).len() as f64 <= s);
    let u = union_cert(&size_bound_cert(&sys.select(&small)), &degree_bound_cert(&sys.select(&large)))?;
    let mut pos = vec![0usize; sys.len()];
    for (k, &r) in small.iter().chain(&large).enumerate() {
        pos[r] = k;
    }
    select_rows(&u, &pos)
}

fn split_stats(sys: &SetSystem, s: f64) -> (usize, usize) {
    let small_max = sys.iter().map(|x| x.len()).filter(|&l| l as f64 <= s).max().unwrap_or(0);
    let large = sys.iter().filter(|x| x.len() as f64 > s).count();
    (small_max, large)
}

pub fn map_cert(bx: &BoxSpec) -> Result<MapCert> {
    map_cert_guarded(bx, Guard::default())
}

pub fn map_cert_guarded(bx: &BoxSpec, guard: Guard) -> Result<MapCert> {
    let f = f_of_n(bx)?.value;
    let s = f * f;
    let target = enumerate_maximal_aps_guarded(bx, guard)?;
    let cert = map_cert_for_system(&target, s)?;
    let (small_max, large_sets) = split_stats(&target, s);
    let large_steps = large_step_set(bx, s)?.len();
    Ok(MapCert { cert, target: Some(target), s, f, small_max, large_sets, large_steps })
}

/// The same construction for the lattice points of a body, with `s = f(K)^2`.
pub fn map_cert_body(body: &ShiftedBody) -> Result<MapCert> {
    let fk = f_k(&body.base)?;
    let s = q_to_f64(&fk.s_star);
    let target = enumerate_maximal_aps_in_body_guarded(body, Guard::default())?;
    let cert = map_cert_for_system(&target, s)?;
    let (small_max, large_sets) = split_stats(&target, s);
    let labels = target.labels().unwrap_or(&[]);
    let mut steps: Vec<u32> =
        labels.iter().filter(|l| l.step != ZERO_STEP && l.len as f64 > s).map(|l| l.step).collect();
    steps.sort_unstable();
    steps.dedup();
    Ok(MapCert { cert, target: Some(target), s, f: fk.f, small_max, large_sets, large_steps: steps.len() })
}

/// `prod_i max(0, N_i - k |c_i|)`: points `x` with `x + k c` still in the box.
fn overlap(c: &LatticePoint, bx: &BoxSpec, k: u64) -> u64 {
    c.coords().iter().zip(bx.sides()).map(|(&ci, &n)| n.saturating_sub(ci.unsigned_abs() * k)).product()
}

/// Number of lines of step `b` with length at least `k >= 1`.
fn lines_at_least(b: &LatticePoint, bx: &BoxSpec, k: u64) -> u64 {
    overlap(b, bx, k - 1) - overlap(b, bx, k)
}

/// Largest line length `<= s` occurring for some in-range step (0 if none).
fn small_max_closed_form(bx: &BoxSpec, steps: &[LatticePoint], s: f64) -> usize {
    let cap = s.floor() as u64;
    let mut best = 0u64;
    for b in steps {
        let top = max_len_for_step(b, bx).min(cap);
        for k in (best + 1..=top).rev() {
            if lines_at_least(b, bx, k) > lines_at_least(b, bx, k + 1) {
                best = k;
                break;
            }
        }
        if best == cap {
            break;
        }
    }
    best as usize
}

/// Closed-form value of the maximal-family certificate, without building matrices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapSummary {
    pub sides: Vec<u64>,
    pub f: f64,
    pub s: f64,
    pub small_max: usize,
    pub max_degree: u64,
    pub large_steps: usize,
    /// `sqrt(small_max + max_degree)`.
    pub value: f64,
}

pub fn map_summary(bx: &BoxSpec) -> Result<MapSummary> {
    let f = f_of_n(bx)?.value;
    let s = f * f;
    let steps = canonical_steps(bx);
    let small_max = if bx.size() == 1 { 1 } else { small_max_closed_form(bx, &steps, s) };
    let large: Vec<&LatticePoint> = steps.iter().filter(|b| max_len_for_step(b, bx) as f64 > s).collect();
    let d = bx.dim();
    let sides = bx.sides();
    let mut degree = vec![0u32; bx.size() as usize];
    for b in &large {
        let bc = b.coords();
        for (idx, deg) in degree.iter_mut().enumerate() {
            let x = bx.point_at(idx);
            let (mut back, mut fwd) = (u64::MAX, u64::MAX);
            for i in 0..d {
                let (xi, n, bi) = (x.coords()[i] as u64, sides[i], bc[i]);
                if bi == 0 {
                    continue;
                }
                let (below, above) = (xi - 1, n - xi);
                let step = bi.unsigned_abs();
                let (bk, fw) = if bi > 0 { (below / step, above / step) } else { (above / step, below / step) };
                back = back.min(bk);
                fwd = fwd.min(fw);
            }
            if (back + fwd + 1) as f64 > s {
                *deg += 1;
            }
        }
    }
    let max_degree = degree.into_iter().max().unwrap_or(0) as u64;
    Ok(MapSummary {
        sides: sides.to_vec(),
        f,
        s,
        small_max,
        max_degree,
        large_steps: large.len(),
        value: ((small_max as u64 + max_degree) as f64).sqrt(),
    })
}

/// `f(N') <= 2^{-1/((2d+2)(2d+4))} f(N)` at one halving step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayCheck {
    pub parent: Vec<u64>,
    pub child: Vec<u64>,
    pub f_parent: f64,
    pub f_child: f64,
    pub factor: f64,
    pub holds: bool,
}

pub fn decay_factor(d: usize) -> f64 {
    2f64.powf(-1.0 / ((2 * d + 2) * (2 * d + 4)) as f64)
}

/// Certificate for all progressions of a box.
#[derive(Clone, Debug)]
pub struct ApCert {
    pub cert: Certificate,
    pub target: Option<SetSystem>,
    pub f: f64,
    pub prefix_value: f64,
    pub decay: Vec<DecayCheck>,
}

impl ApCert {
    pub fn ratio(&self) -> f64 {
        self.cert.value() / self.f
    }
}

type Key = (u32, u32, Vec<i64>);

fn key_of(sys: &SetSystem, i: usize) -> Key {
    let l = sys.label(i).expect("progression families carry labels");
    (l.start, l.len, sys.step_of(&l).0)
}

fn index_family(sys: &SetSystem) -> HashMap<Key, u32> {
    (0..sys.len()).map(|i| (key_of(sys, i), i as u32)).collect()
}

struct FamilyCert {
    cert: Certificate,
    index: Option<HashMap<Key, u32>>,
}

impl FamilyCert {
    fn row(&self, start: usize, len: usize, step: &LatticePoint) -> Result<u32> {
        let key =
            if len == 1 { (start as u32, 1, vec![0; step.dim()]) } else { (start as u32, len as u32, step.0.clone()) };
        self.index
            .as_ref()
            .and_then(|ix| ix.get(&key).copied())
            .ok_or_else(|| structural(format!("no set with start {start}, length {len}, step {step}")))
    }
}

struct Recursion {
    full: bool,
    guard: Guard,
    pa: HashMap<Vec<u64>, Arc<FamilyCert>>,
    maps: HashMap<Vec<u64>, Arc<FamilyCert>>,
    decay: Vec<DecayCheck>,
}

impl Recursion {
    /// Maximal progressions over all steps (every singleton included).
    fn map_all(&mut self, bx: &BoxSpec) -> Result<Arc<FamilyCert>> {
        if let Some(c) = self.maps.get(bx.sides()) {
            return Ok(c.clone());
        }
        let f = f_of_n(bx)?.value;
        let s = f * f;
        let fc = if self.full {
            let sys = enumerate_maximal_aps_all_steps(bx, self.guard)?;
            FamilyCert { cert: map_cert_for_system(&sys, s)?, index: Some(index_family(&sys)) }
        } else {
            FamilyCert { cert: map_all_right_only(bx, s)?, index: None }
        };
        let fc = Arc::new(fc);
        self.maps.insert(bx.sides().to_vec(), fc.clone());
        Ok(fc)
    }

    /// Prefix-maximal progressions of a box with power-of-two sides.
    fn prefix(&mut self, bx: &BoxSpec) -> Result<Arc<FamilyCert>> {
        if let Some(c) = self.pa.get(bx.sides()) {
            return Ok(c.clone());
        }
        let fc = if bx.size() == 1 {
            let cert = if self.full { unit_cert() } else { unit_cert().right_only() };
            let index = self.full.then(|| HashMap::from([((0, 1, vec![0; bx.dim()]), 0)]));
            FamilyCert { cert, index }
        } else {
            self.split(bx)?
        };
        let fc = Arc::new(fc);
        self.pa.insert(bx.sides().to_vec(), fc.clone());
        Ok(fc)
    }

    fn split(&mut self, bx: &BoxSpec) -> Result<FamilyCert> {
        let sides = bx.sides();
        let max = *sides.iter().max().expect("nonempty box");
        let k = sides.iter().position(|&n| n == max).expect("max exists");
        // lower half takes the extra layer when the side is odd
        let h = max.div_ceil(2);
        let half = |n: u64| {
            let mut c = sides.to_vec();
            c[k] = n;
            BoxSpec::new(c)
        };
        let (lo, hi) = (half(h)?, half(max - h)?);

        let (f_parent, f_child) = (f_of_n(bx)?.value, f_of_n(&lo)?.value);
        let factor = decay_factor(bx.dim());
        self.decay.push(DecayCheck {
            parent: sides.to_vec(),
            child: lo.sides().to_vec(),
            f_parent,
            f_child,
            factor,
            holds: f_child <= factor * f_parent + 1e-12,
        });

        let (pa_lo, pa_hi) = (self.prefix(&lo)?, self.prefix(&hi)?);
        let (m_lo, m_hi) = (self.map_all(&lo)?, self.map_all(&hi)?);
        let n = bx.size() as usize;
        let embed = |c: &BoxSpec, shift: i64| -> Vec<u32> {
            (0..c.size() as usize)
                .map(|i| {
                    let mut q = c.point_at(i).0;
                    q[k] += shift;
                    bx.index_of(&LatticePoint(q)).expect("point of a half") as u32
                })
                .collect()
        };
        let (map1, map2) = (embed(&lo, 0), embed(&hi, h as i64));
        let c_pa = disjoint_support_cert(&pa_lo.cert, &map1, &pa_hi.cert, &map2, n)?;
        let c_m = disjoint_support_cert(&m_lo.cert, &map1, &m_hi.cert, &map2, n)?;

        if !self.full {
            let rows = prefix_count(bx);
            return Ok(FamilyCert { cert: triangle_right_only(&c_pa, &c_m, rows, TriangleMode::Sum)?, index: None });
        }

        let target = enumerate_prefix_maximal_guarded(bx, self.guard)?;
        let upper = |p: &LatticePoint| p.coords()[k] > h as i64;
        let local = |p: &LatticePoint| {
            let mut q = p.0.clone();
            if q[k] > h as i64 {
                q[k] -= h as i64;
                hi.index_of(&LatticePoint(q)).expect("point of the upper half")
            } else {
                lo.index_of(&LatticePoint(q)).expect("point of the lower half")
            }
        };
        let pa_row = |side: bool, i: usize, len: usize, b: &LatticePoint| -> Result<u32> {
            Ok(if side { pa_lo.cert.n_rows() as u32 + pa_hi.row(i, len, b)? } else { pa_lo.row(i, len, b)? })
        };
        let m_row = |side: bool, i: usize, len: usize, b: &LatticePoint| -> Result<u32> {
            Ok(if side { m_lo.cert.n_rows() as u32 + m_hi.row(i, len, b)? } else { m_lo.row(i, len, b)? })
        };
        let mut align: Vec<RowPair> = Vec::with_capacity(target.len());
        for i in 0..target.len() {
            let l = target.label(i).expect("labelled");
            let a = bx.point_at(l.start as usize);
            let b = target.step_of(&l);
            let len = l.len as usize;
            let side = upper(&a);
            let j = (0..len).take_while(|&t| upper(&a.offset(&b, t as i64)) == side).count();
            if j == len {
                align.push((Some(pa_row(side, local(&a), len, &b)?), None));
            } else {
                let c = a.offset(&b, j as i64);
                align.push((Some(pa_row(upper(&c), local(&c), len - j, &b)?), Some(m_row(side, local(&a), j, &b)?)));
            }
        }
        let cert = triangle_cert(&c_pa, &c_m, &align, TriangleMode::Sum)?;
        Ok(FamilyCert { cert, index: Some(index_family(&target)) })
    }
}

/// Number of prefix-maximal progressions (singletons included).
fn prefix_count(bx: &BoxSpec) -> usize {
    let mut total = bx.size();
    for b in canonical_steps(bx) {
        for ell in 2..=max_len_for_step(&b, bx) {
            total += lines_at_least(&b, bx, ell);
        }
    }
    total as usize
}

/// Right factor `[sqrt(t) I; A_large]` for maximal progressions over all steps.
fn map_all_right_only(bx: &BoxSpec, s: f64) -> Result<Certificate> {
    let n = bx.size() as usize;
    let steps = canonical_steps(bx);
    let small_max = small_max_closed_form(bx, &steps, s).max(1);
    let cap = s.floor() as u64;
    let mut builder = SetSystem::builder(bx.universe());
    let mut small_rows = n;
    let mut buf = Vec::new();
    for b in &steps {
        let long = lines_at_least(b, bx, 2);
        let big = lines_at_least(b, bx, cap + 1);
        small_rows += (long - big) as usize;
        if big == 0 {
            continue;
        }
        let delta = bx.index_delta(b);
        for_each_line(bx, b, |start, len| {
            if len as f64 > s {
                buf.clear();
                buf.extend((0..len as i64).map(|i| (start as i64 + i * delta) as u32));
                builder.push_trusted(&buf, None);
            }
        });
    }
    let large = builder.build();
    union_cert(&size_bound_right_only(n, small_rows, small_max), &degree_bound_right_only(&large))
}

pub fn ap_cert(bx: &BoxSpec) -> Result<ApCert> {
    ap_cert_impl(bx, true, Guard::default())
}

pub fn ap_cert_guarded(bx: &BoxSpec, guard: Guard) -> Result<ApCert> {
    ap_cert_impl(bx, true, guard)
}

/// Same recursion keeping only right factors; the value uses proven bounds on `L`.
pub fn ap_cert_right_only(bx: &BoxSpec) -> Result<ApCert> {
    ap_cert_impl(bx, false, Guard::default())
}

/// Full certificate when the progression family fits the guard, right-only otherwise.
pub fn ap_cert_auto(bx: &BoxSpec, guard: Guard) -> Result<ApCert> {
    let count = count_all_aps(bx);
    if count.sets <= guard.max_sets as u128 && count.incidences <= guard.max_incidences as u128 {
        match ap_cert_impl(bx, true, guard) {
            Err(Error::Resource { .. }) => {}
            other => return other,
        }
    }
    ap_cert_impl(bx, false, guard)
}

fn ap_cert_impl(bx: &BoxSpec, full: bool, guard: Guard) -> Result<ApCert> {
    // boxes with sides <= 2 have no progression that needs a subtraction; use the exact path
    let exact = full || bx.sides().iter().all(|&n| n <= 2);
    let mut rec = Recursion { full: exact, guard, pa: HashMap::new(), maps: HashMap::new(), decay: Vec::new() };
    let pa = rec.prefix(bx)?;
    let prefix_value = pa.cert.value();
    let f = f_of_n(bx)?.value;

    if !exact {
        let rows = count_all_aps(bx).sets as usize;
        let cert = triangle_right_only(&pa.cert, &pa.cert, rows, TriangleMode::Difference)?;
        return Ok(ApCert { cert, target: None, f, prefix_value, decay: rec.decay });
    }
    let target = enumerate_all_aps_guarded(bx, guard)?;
    let mut align: Vec<RowPair> = Vec::with_capacity(target.len());
    for i in 0..target.len() {
        let l = target.label(i).expect("labelled");
        if l.len == 1 {
            align.push((Some(pa.row(l.start as usize, 1, &LatticePoint::zero(bx.dim()))?), None));
            continue;
        }
        let a = bx.point_at(l.start as usize);
        let b = target.step_of(&l);
        let mut m = 0usize;
        while bx.contains(&a.offset(&b, -(m as i64) - 1)) {
            m += 1;
        }
        let x0 = a.offset(&b, -(m as i64));
        let x0i = bx.index_of(&x0).expect("inside");
        let p1 = pa.row(x0i, m + l.len as usize, &b)?;
        let p2 = if m == 0 { None } else { Some(pa.row(x0i, m, &b)?) };
        align.push((Some(p1), p2));
    }
    let cert = if align.iter().all(|(_, q)| q.is_none()) {
        let rows: Vec<usize> = align.iter().map(|(p, _)| p.expect("present") as usize).collect();
        select_rows(&pa.cert, &rows)?
    } else {
        triangle_cert(&pa.cert, &pa.cert, &align, TriangleMode::Difference)?
    };
    let (cert, target) = if full { (cert, Some(target)) } else { (cert.right_only(), None) };
    Ok(ApCert { cert, target, f, prefix_value, decay: rec.decay })
}
