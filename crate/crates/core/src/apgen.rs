//! Arithmetic progressions in integer boxes `[N_1] x ... x [N_d]`.
//!
//! Every generated family lives on the lexicographically ordered universe of the box, so a
//! progression with a canonical step (first nonzero coordinate positive) lists its points in
//! increasing index order. Families:
//!
//! * maximal progressions: one residue line of a canonical step intersected with the box,
//! * all progressions: contiguous slices of maximal ones, plus every singleton,
//! * prefix-maximal progressions: slices that start at the beginning of their line.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, structural, Error, Result};
use crate::lattice::{LatticePoint, Universe};
use crate::system::{ApLabel, OrderingSigma, SetSystem, ZERO_STEP};

/// Default desk-scale guard for materialized families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Guard {
    pub max_sets: u64,
    pub max_incidences: u64,
}

impl Default for Guard {
    fn default() -> Self {
        Guard { max_sets: 20_000_000, max_incidences: 100_000_000 }
    }
}

impl Guard {
    fn check(&self, what: &'static str, sets: u128, incidences: u128) -> Result<()> {
        if sets > self.max_sets as u128 {
            return Err(Error::Resource { what, count: sets, limit: self.max_sets as u128 });
        }
        if incidences > self.max_incidences as u128 {
            return Err(Error::Resource { what: "incidences", count: incidences, limit: self.max_incidences as u128 });
        }
        Ok(())
    }
}

/// Side lengths of the box `[N_1] x ... x [N_d]`, coordinates running from 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxSpec {
    sides: Vec<u64>,
}

impl BoxSpec {
    pub fn new(sides: Vec<u64>) -> Result<Self> {
        if sides.is_empty() {
            return Err(structural("box needs at least one side"));
        }
        if sides.contains(&0) {
            return Err(domain("box sides must be at least 1"));
        }
        let mut size: u64 = 1;
        for &n in &sides {
            size = size.checked_mul(n).ok_or_else(|| domain("box size does not fit in 64 bits"))?;
        }
        Ok(BoxSpec { sides })
    }

    /// Parses `"16,16"`.
    pub fn parse(s: &str) -> Result<Self> {
        let sides = s
            .split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|_| Error::Parse { line: 1, msg: format!("bad box side '{t}'") }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(sides)
    }

    pub fn sides(&self) -> &[u64] {
        &self.sides
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn size(&self) -> u64 {
        self.sides.iter().product()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        p.dim() == self.dim() && p.coords().iter().zip(&self.sides).all(|(&c, &n)| c >= 1 && c <= n as i64)
    }

    /// Lexicographic rank (0-based) of a point of the box.
    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let mut idx = 0usize;
        for (&c, &n) in p.coords().iter().zip(&self.sides) {
            idx = idx * n as usize + (c - 1) as usize;
        }
        Some(idx)
    }

    pub fn point_at(&self, mut idx: usize) -> LatticePoint {
        let mut coords = vec![0i64; self.dim()];
        for i in (0..self.dim()).rev() {
            let n = self.sides[i] as usize;
            coords[i] = (idx % n) as i64 + 1;
            idx /= n;
        }
        LatticePoint(coords)
    }

    /// Index offset produced by moving along `step` (valid while both ends stay in the box).
    pub(crate) fn index_delta(&self, step: &LatticePoint) -> i64 {
        let mut delta = 0i64;
        for (&b, &n) in step.coords().iter().zip(&self.sides) {
            delta = delta * n as i64 + b;
        }
        delta
    }

    pub fn universe(&self) -> Arc<Universe> {
        let pts = (0..self.size() as usize).map(|i| self.point_at(i)).collect();
        Arc::new(Universe::new(self.dim(), pts).expect("box points are distinct"))
    }
}

/// Progression `{a + i b : 0 <= i < ell}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ApDescriptor {
    pub a: LatticePoint,
    pub b: LatticePoint,
    pub ell: u64,
}

impl ApDescriptor {
    pub fn new(a: LatticePoint, b: LatticePoint, ell: u64) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(structural("start and step dimensions differ"));
        }
        if ell == 0 {
            return Err(domain("progression length must be at least 1"));
        }
        if ell >= 2 && b.is_zero() {
            return Err(domain("progressions of length >= 2 need a nonzero step"));
        }
        Ok(ApDescriptor { a, b, ell })
    }

    pub fn last(&self) -> LatticePoint {
        self.a.offset(&self.b, self.ell as i64 - 1)
    }

    /// Canonical form: singletons get step 0; otherwise the step's first nonzero coordinate
    /// is made positive by walking the progression from its other end.
    pub fn canonical(&self) -> CanonicalAp {
        let descriptor = if self.ell == 1 {
            ApDescriptor { a: self.a.clone(), b: LatticePoint::zero(self.a.dim()), ell: 1 }
        } else if self.b.is_canonical_direction() {
            self.clone()
        } else {
            ApDescriptor { a: self.last(), b: self.b.neg(), ell: self.ell }
        };
        CanonicalAp { descriptor }
    }
}

/// A progression in canonical form. Two canonical progressions are equal iff their point sets are.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CanonicalAp {
    pub descriptor: ApDescriptor,
}

impl CanonicalAp {
    pub fn points(&self) -> Vec<LatticePoint> {
        ap_points(&self.descriptor)
    }

    pub fn len(&self) -> u64 {
        self.descriptor.ell
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn pointset_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.points().hash(&mut h);
        h.finish()
    }
}

pub fn ap_points(ap: &ApDescriptor) -> Vec<LatticePoint> {
    (0..ap.ell as i64).map(|i| ap.a.offset(&ap.b, i)).collect()
}

/// The maximal progression of step `b` through `a`, clipped to the box.
pub fn maximal_ap(a: &LatticePoint, b: &LatticePoint, bx: &BoxSpec) -> Result<CanonicalAp> {
    if !bx.contains(a) {
        return Err(domain(format!("{a} is outside the box")));
    }
    if b.dim() != bx.dim() {
        return Err(structural("step dimension does not match the box"));
    }
    if b.is_zero() {
        return Err(domain("maximal progressions need a nonzero step"));
    }
    maximal_ap_by(a, b, |p| bx.contains(p))
}

/// Maximal progression through `a` under an arbitrary convex membership test.
pub(crate) fn maximal_ap_by(
    a: &LatticePoint,
    b: &LatticePoint,
    inside: impl Fn(&LatticePoint) -> bool,
) -> Result<CanonicalAp> {
    let mut back = 0i64;
    while inside(&a.offset(b, -(back + 1))) {
        back += 1;
    }
    let mut fwd = 0i64;
    while inside(&a.offset(b, fwd + 1)) {
        fwd += 1;
    }
    let start = a.offset(b, -back);
    let ap = ApDescriptor::new(start, b.clone(), (back + fwd + 1) as u64)?;
    Ok(ap.canonical())
}

/// Canonical nonzero steps with `|b_i| <= N_i - 1`, in lexicographic order.
pub fn canonical_steps(bx: &BoxSpec) -> Vec<LatticePoint> {
    let ranges: Vec<(i64, i64)> = bx.sides().iter().map(|&n| (-(n as i64 - 1), n as i64 - 1)).collect();
    let mut out = Vec::new();
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        let p = LatticePoint(cur.clone());
        if p.is_canonical_direction() {
            out.push(p);
        }
        let mut i = cur.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < ranges[i].1 {
                cur[i] += 1;
                for (j, c) in cur.iter_mut().enumerate().skip(i + 1) {
                    *c = ranges[j].0;
                }
                break;
            }
        }
    }
}

/// Length of the longest maximal progression of step `b` in the box (closed form).
pub fn max_len_for_step(b: &LatticePoint, bx: &BoxSpec) -> u64 {
    b.coords()
        .iter()
        .zip(bx.sides())
        .filter(|(&c, _)| c != 0)
        .map(|(&c, &n)| 1 + (n - 1) / c.unsigned_abs())
        .min()
        .unwrap_or(0)
}

/// Number of points `x` of the box with `x + c` also in the box.
fn shifted_overlap(c: &LatticePoint, bx: &BoxSpec, k: u64) -> u128 {
    c.coords().iter().zip(bx.sides()).map(|(&ci, &n)| n.saturating_sub(ci.unsigned_abs() * k) as u128).product()
}

/// Sizes of the families before materializing them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyCount {
    pub sets: u128,
    pub incidences: u128,
}

/// Exact count of distinct progressions in the box (singletons included).
pub fn count_all_aps(bx: &BoxSpec) -> FamilyCount {
    let n = bx.size() as u128;
    let (mut sets, mut inc) = (n, n);
    for b in canonical_steps(bx) {
        let lmax = max_len_for_step(&b, bx);
        for ell in 2..=lmax {
            let c = shifted_overlap(&b, bx, ell - 1);
            sets += c;
            inc += c * ell as u128;
        }
    }
    FamilyCount { sets, incidences: inc }
}

/// Walks every residue line of `step`: calls `f(start_index, len)` for each line of the box.
pub(crate) fn for_each_line(bx: &BoxSpec, step: &LatticePoint, mut f: impl FnMut(usize, usize)) {
    let n = bx.size() as usize;
    let neg = step.neg();
    for idx in 0..n {
        let x = bx.point_at(idx);
        if bx.contains(&x.add(&neg)) {
            continue;
        }
        let mut len = 1usize;
        let mut y = x.add(step);
        while bx.contains(&y) {
            len += 1;
            y = y.add(step);
        }
        f(idx, len);
    }
}

/// Maximal progressions of the box. Singletons come only from steps in range and are kept once.
pub fn enumerate_maximal_aps(bx: &BoxSpec) -> Result<SetSystem> {
    maximal_family(bx, false, Guard::default())
}

pub fn enumerate_maximal_aps_guarded(bx: &BoxSpec, guard: Guard) -> Result<SetSystem> {
    maximal_family(bx, false, guard)
}

/// Maximal progressions over all steps in the integer lattice: the in-range family plus
/// every singleton (far steps make each point its own maximal progression).
pub fn enumerate_maximal_aps_all_steps(bx: &BoxSpec, guard: Guard) -> Result<SetSystem> {
    maximal_family(bx, true, guard)
}

fn maximal_family(bx: &BoxSpec, all_singletons: bool, guard: Guard) -> Result<SetSystem> {
    let steps = canonical_steps(bx);
    let n = bx.size() as usize;
    let mut sets = if all_singletons || n == 1 { n as u128 } else { 0 };
    let mut inc = sets;
    for b in &steps {
        let long = shifted_overlap(b, bx, 1) - shifted_overlap(b, bx, 2);
        sets += long;
        inc += 2 * long + shifted_overlap(b, bx, 2);
    }
    guard.check("maximal progressions", sets, inc)?;

    let universe = bx.universe();
    let mut builder = SetSystem::builder(universe);
    let mut seen_single = vec![false; n];
    let mut buf = Vec::new();
    if all_singletons {
        for (i, seen) in seen_single.iter_mut().enumerate() {
            builder.push_trusted(&[i as u32], Some(ApLabel { start: i as u32, step: ZERO_STEP, len: 1 }));
            *seen = true;
        }
    }
    if n == 1 && !all_singletons {
        // no step fits: the lone point is its own maximal progression
        builder.push_trusted(&[0], Some(ApLabel { start: 0, step: ZERO_STEP, len: 1 }));
    }
    for b in steps {
        let delta = bx.index_delta(&b);
        let id = builder.add_step(b.clone());
        for_each_line(bx, &b, |start, len| {
            if len == 1 {
                if !seen_single[start] {
                    seen_single[start] = true;
                    builder
                        .push_trusted(&[start as u32], Some(ApLabel { start: start as u32, step: ZERO_STEP, len: 1 }));
                }
                return;
            }
            buf.clear();
            buf.extend((0..len as i64).map(|i| (start as i64 + i * delta) as u32));
            builder.push_trusted(&buf, Some(ApLabel { start: start as u32, step: id, len: len as u32 }));
        });
    }
    Ok(builder.build())
}

/// All distinct nonempty progressions of the box.
pub fn enumerate_all_aps(bx: &BoxSpec) -> Result<SetSystem> {
    enumerate_all_aps_guarded(bx, Guard::default())
}

pub fn enumerate_all_aps_guarded(bx: &BoxSpec, guard: Guard) -> Result<SetSystem> {
    let c = count_all_aps(bx);
    guard.check("progressions", c.sets, c.incidences)?;
    slices_family(bx, false)
}

/// Progressions that cannot be extended backwards (`a - b` outside the box), canonical steps,
/// plus every singleton.
pub fn enumerate_prefix_maximal(bx: &BoxSpec) -> Result<SetSystem> {
    enumerate_prefix_maximal_guarded(bx, Guard::default())
}

pub fn enumerate_prefix_maximal_guarded(bx: &BoxSpec, guard: Guard) -> Result<SetSystem> {
    let n = bx.size() as u128;
    let (mut sets, mut inc) = (n, n);
    for b in canonical_steps(bx) {
        let mut k = 0u128;
        let mut kinc = 0u128;
        for ell in 2..=max_len_for_step(&b, bx) {
            // starts x with x - b outside and x + (ell-1) b inside
            let c = shifted_overlap(&b, bx, ell - 1) - shifted_overlap(&b, bx, ell);
            k += c;
            kinc += c * ell as u128;
        }
        sets += k;
        inc += kinc;
    }
    guard.check("prefix-maximal progressions", sets, inc)?;
    slices_family(bx, true)
}

fn slices_family(bx: &BoxSpec, prefixes_only: bool) -> Result<SetSystem> {
    let n = bx.size() as usize;
    let mut builder = SetSystem::builder(bx.universe());
    for i in 0..n {
        builder.push_trusted(&[i as u32], Some(ApLabel { start: i as u32, step: ZERO_STEP, len: 1 }));
    }
    let mut buf = Vec::new();
    for b in canonical_steps(bx) {
        let delta = bx.index_delta(&b);
        let id = builder.add_step(b.clone());
        for_each_line(bx, &b, |start, len| {
            let first_starts = if prefixes_only { 1 } else { len };
            for i in 0..first_starts.min(len) {
                let s = start as i64 + i as i64 * delta;
                for l in 2..=(len - i) {
                    buf.clear();
                    buf.extend((0..l as i64).map(|k| (s + k * delta) as u32));
                    builder.push_trusted(&buf, Some(ApLabel { start: s as u32, step: id, len: l as u32 }));
                }
            }
        });
    }
    Ok(builder.build())
}

/// `sigma(x)` = 1-based rank of `x` in lexicographic order.
pub fn lex_order(universe: &Universe) -> OrderingSigma {
    let mut order: Vec<usize> = (0..universe.len()).collect();
    order.sort_by(|&i, &j| universe.point(i).cmp(universe.point(j)));
    let mut rank = vec![0u32; universe.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r as u32 + 1;
    }
    OrderingSigma::new(rank).expect("sorting yields a permutation")
}

/// Endpoints `x, y` with `AP = line(a, b) ∩ [x, y]_lex`. The progression must lie in the box
/// and be in canonical form.
pub fn lex_interval_repr(ap: &CanonicalAp, bx: &BoxSpec) -> Result<(LatticePoint, LatticePoint)> {
    let d = &ap.descriptor;
    if d.ell >= 2 && !d.b.is_canonical_direction() {
        return Err(domain("progression is not canonical"));
    }
    if d.ell == 1 && !d.b.is_zero() {
        return Err(domain("singleton must use step 0"));
    }
    if !bx.contains(&d.a) || !bx.contains(&d.last()) {
        return Err(domain("progression leaves the box"));
    }
    Ok((d.a.clone(), d.last()))
}

/// Points of the residue line through `through` with step `b` inside the box whose lex rank lies
/// between `x` and `y` (inclusive). A zero step yields the single point when it is in range.
pub fn line_lex_slice(
    through: &LatticePoint,
    b: &LatticePoint,
    x: &LatticePoint,
    y: &LatticePoint,
    bx: &BoxSpec,
) -> Vec<LatticePoint> {
    if b.is_zero() {
        return if x <= through && through <= y && bx.contains(through) { vec![through.clone()] } else { vec![] };
    }
    let mut start = through.clone();
    while bx.contains(&start.sub(b)) {
        start = start.sub(b);
    }
    let mut out = Vec::new();
    let mut p = start;
    while bx.contains(&p) {
        if x <= &p && &p <= y {
            out.push(p.clone());
        }
        p = p.add(b);
    }
    out.sort();
    out
}

/// Canonical steps whose longest maximal progression is longer than `s`.
#[derive(Clone, Debug, Serialize)]
pub struct LargeStepSet {
    pub threshold: f64,
    pub steps: Vec<LatticePoint>,
    /// `prod (4 N_i / s + 1)` evaluated at the integer `s`.
    pub lemma_bound: f64,
}

impl LargeStepSet {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Steps with longest maximal progression strictly above `s` (real threshold allowed).
pub fn large_step_set(bx: &BoxSpec, s: f64) -> Result<LargeStepSet> {
    if s.is_nan() || s < 1.0 {
        return Err(domain("threshold must be at least 1"));
    }
    let steps = canonical_steps(bx).into_iter().filter(|b| max_len_for_step(b, bx) as f64 > s).collect();
    let lemma_bound = bx.sides().iter().map(|&n| 4.0 * n as f64 / s + 1.0).product();
    Ok(LargeStepSet { threshold: s, steps, lemma_bound })
}

/// Count of all nonzero steps (both signs) with some maximal progression of length `>= s`,
/// together with the exact comparison against `prod(4 N_i / s + 1)`.
#[derive(Clone, Debug, Serialize)]
pub struct LargeStepCount {
    pub s: u64,
    pub count: u64,
    pub bound: f64,
    pub holds: bool,
}

pub fn large_step_count(bx: &BoxSpec, s: u64) -> Result<LargeStepCount> {
    if s < 2 {
        return Err(domain("counting threshold must be at least 2"));
    }
    let count = 2 * canonical_steps(bx).iter().filter(|b| max_len_for_step(b, bx) >= s).count() as u64;
    // count <= prod (4 N_i + s) / s^d, compared in integers
    let mut rhs: u128 = 1;
    let mut den: u128 = 1;
    for &n in bx.sides() {
        rhs *= 4 * n as u128 + s as u128;
        den *= s as u128;
    }
    let holds = count as u128 * den <= rhs;
    let bound = bx.sides().iter().map(|&n| 4.0 * n as f64 / s as f64 + 1.0).product();
    Ok(LargeStepCount { s, count, bound, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn p(v: &[i64]) -> LatticePoint {
        LatticePoint(v.to_vec())
    }

    fn sets_as_points(s: &SetSystem) -> BTreeSet<Vec<LatticePoint>> {
        (0..s.len()).map(|i| s.points_of(i)).collect()
    }

    #[test]
    fn ap_points_examples() {
        let ap = ApDescriptor::new(p(&[1]), p(&[2]), 3).unwrap();
        assert_eq!(ap_points(&ap), vec![p(&[1]), p(&[3]), p(&[5])]);
        let ap = ApDescriptor::new(p(&[1, 1]), p(&[1, 2]), 2).unwrap();
        assert_eq!(ap_points(&ap), vec![p(&[1, 1]), p(&[2, 3])]);
        let ap = ApDescriptor::new(p(&[4]), p(&[0]), 1).unwrap();
        assert_eq!(ap_points(&ap), vec![p(&[4])]);
        assert!(ApDescriptor::new(p(&[4]), p(&[0]), 2).is_err());
        assert!(ApDescriptor::new(p(&[4]), p(&[1]), 0).is_err());
    }

    #[test]
    fn maximal_ap_examples() {
        let b4 = BoxSpec::new(vec![4]).unwrap();
        assert_eq!(maximal_ap(&p(&[1]), &p(&[2]), &b4).unwrap().points(), vec![p(&[1]), p(&[3])]);
        let b3 = BoxSpec::new(vec![3]).unwrap();
        let m = maximal_ap(&p(&[2]), &p(&[2]), &b3).unwrap();
        assert_eq!(m.points(), vec![p(&[2])]);
        assert!(m.descriptor.b.is_zero());
        let b44 = BoxSpec::new(vec![4, 4]).unwrap();
        assert_eq!(maximal_ap(&p(&[1, 1]), &p(&[1, 2]), &b44).unwrap().points(), vec![p(&[1, 1]), p(&[2, 3])]);
        // independent of the representative
        assert_eq!(
            maximal_ap(&p(&[2, 3]), &p(&[-1, -2]), &b44).unwrap(),
            maximal_ap(&p(&[1, 1]), &p(&[1, 2]), &b44).unwrap()
        );
        assert!(maximal_ap(&p(&[5]), &p(&[1]), &b4).is_err());
        assert!(maximal_ap(&p(&[1]), &p(&[0]), &b4).is_err());
    }

    #[test]
    fn maximal_family_examples() {
        let s = enumerate_maximal_aps(&BoxSpec::new(vec![3]).unwrap()).unwrap();
        let expect: BTreeSet<_> =
            [vec![p(&[1]), p(&[2]), p(&[3])], vec![p(&[1]), p(&[3])], vec![p(&[2])]].into_iter().collect();
        assert_eq!(sets_as_points(&s), expect);
        assert_eq!(s.len(), 3);

        let s = enumerate_maximal_aps(&BoxSpec::new(vec![2]).unwrap()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.points_of(0), vec![p(&[1]), p(&[2])]);

        let s = enumerate_maximal_aps(&BoxSpec::new(vec![1, 1]).unwrap()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.points_of(0), vec![p(&[1, 1])]);

        let s = enumerate_maximal_aps(&BoxSpec::new(vec![2, 1]).unwrap()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.points_of(0), vec![p(&[1, 1]), p(&[2, 1])]);
    }

    #[test]
    fn all_aps_examples() {
        assert_eq!(enumerate_all_aps(&BoxSpec::new(vec![2]).unwrap()).unwrap().len(), 3);
        assert_eq!(enumerate_all_aps(&BoxSpec::new(vec![3]).unwrap()).unwrap().len(), 7);
        assert_eq!(enumerate_all_aps(&BoxSpec::new(vec![1, 1]).unwrap()).unwrap().len(), 1);
    }

    #[test]
    fn all_aps_count_matches_enumeration() {
        for sides in [vec![5], vec![4, 3], vec![3, 2, 2], vec![7, 1]] {
            let bx = BoxSpec::new(sides).unwrap();
            let s = enumerate_all_aps(&bx).unwrap();
            let c = count_all_aps(&bx);
            assert_eq!(c.sets, s.len() as u128);
            assert_eq!(c.incidences, s.nnz() as u128);
            let distinct = sets_as_points(&s);
            assert_eq!(distinct.len(), s.len());
        }
    }

    #[test]
    fn prefix_maximal_examples() {
        let s = enumerate_prefix_maximal(&BoxSpec::new(vec![2]).unwrap()).unwrap();
        let expect: BTreeSet<_> = [vec![p(&[1])], vec![p(&[2])], vec![p(&[1]), p(&[2])]].into_iter().collect();
        assert_eq!(sets_as_points(&s), expect);
        let s = enumerate_prefix_maximal(&BoxSpec::new(vec![3]).unwrap()).unwrap();
        let got = sets_as_points(&s);
        assert!(got.contains(&vec![p(&[1]), p(&[3])]));
        assert!(got.contains(&vec![p(&[2])]));
        // every maximal progression is prefix-maximal
        for bx in [vec![4], vec![3, 3], vec![2, 3, 2]] {
            let bx = BoxSpec::new(bx).unwrap();
            let pa = sets_as_points(&enumerate_prefix_maximal(&bx).unwrap());
            for m in sets_as_points(&enumerate_maximal_aps(&bx).unwrap()) {
                assert!(pa.contains(&m));
            }
        }
    }

    #[test]
    fn lex_order_examples() {
        let bx = BoxSpec::new(vec![2, 2]).unwrap();
        let u = bx.universe();
        let sigma = lex_order(&u);
        assert_eq!(sigma.ranks(), &[1, 2, 3, 4]);
        assert_eq!(u.point(1), &p(&[1, 2]));
        assert_eq!(u.point(2), &p(&[2, 1]));
    }

    #[test]
    fn lex_interval_examples() {
        let bx = BoxSpec::new(vec![3, 3]).unwrap();
        let ap = ApDescriptor::new(p(&[1, 3]), p(&[1, -1]), 3).unwrap().canonical();
        let (x, y) = lex_interval_repr(&ap, &bx).unwrap();
        assert_eq!((x.clone(), y.clone()), (p(&[1, 3]), p(&[3, 1])));
        assert_eq!(line_lex_slice(&p(&[2, 2]), &p(&[1, -1]), &x, &y, &bx), ap.points());

        let rev = ApDescriptor::new(p(&[3, 1]), p(&[-1, 1]), 3).unwrap().canonical();
        assert_eq!(rev, ap);

        let bx4 = BoxSpec::new(vec![4]).unwrap();
        let ap = ApDescriptor::new(p(&[2]), p(&[1]), 2).unwrap().canonical();
        assert_eq!(lex_interval_repr(&ap, &bx4).unwrap(), (p(&[2]), p(&[3])));

        let bad = CanonicalAp { descriptor: ApDescriptor::new(p(&[3, 1]), p(&[-1, 1]), 3).unwrap() };
        assert!(lex_interval_repr(&bad, &bx).is_err());
    }

    #[test]
    fn large_step_examples() {
        let b16 = BoxSpec::new(vec![16]).unwrap();
        assert_eq!(large_step_set(&b16, 4.0).unwrap().len(), 3);
        let b44 = BoxSpec::new(vec![4, 4]).unwrap();
        let b = large_step_set(&b44, 2.0).unwrap();
        let expect = vec![p(&[0, 1]), p(&[1, -1]), p(&[1, 0]), p(&[1, 1])];
        assert_eq!(b.steps, expect);
        assert!(large_step_set(&b44, 5.0).unwrap().is_empty());
    }

    #[test]
    fn closed_form_length_matches_scan() {
        for sides in [vec![7], vec![5, 3], vec![4, 4, 2]] {
            let bx = BoxSpec::new(sides).unwrap();
            for b in canonical_steps(&bx) {
                let mut best = 0;
                for_each_line(&bx, &b, |_, len| best = best.max(len as u64));
                assert_eq!(best, max_len_for_step(&b, &bx), "step {b}");
            }
        }
    }

    #[test]
    fn box_index_roundtrip() {
        let bx = BoxSpec::new(vec![3, 4, 2]).unwrap();
        for i in 0..bx.size() as usize {
            assert_eq!(bx.index_of(&bx.point_at(i)), Some(i));
        }
        assert!(bx.universe().is_lex_sorted());
    }
}
