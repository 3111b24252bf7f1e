//! Rational polytopes, their lattice points, difference bodies and the counting function
//! `zeta_{K-K}(t) = |Z^d ∩ t(K-K)|`.
//!
//! Membership and gauges are decided by exact simplex runs. Optimal bases are cached and
//! re-validated exactly for later right-hand sides, so scans over many lattice points only pay
//! for a full LP when the cached bases do not apply.

pub mod lp;
mod parse;

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::apgen::{maximal_ap_by, BoxSpec, CanonicalAp, Guard};
use crate::error::{domain, structural, Error, Result};
use crate::lattice::{LatticePoint, Universe};
use crate::system::{ApLabel, SetSystem, ZERO_STEP};

use lp::{invert, row_structure, simplex, IntInverse, LpResult, Q};

pub use parse::{parse_polytope, parse_rational};

/// Convex hull of finitely many rational points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vec<Q>>,
}

impl Polytope {
    pub fn new(vertices: Vec<Vec<Q>>) -> Result<Self> {
        let dim = vertices.first().map(|v| v.len()).ok_or_else(|| structural("polytope needs a vertex"))?;
        if dim == 0 {
            return Err(structural("dimension must be at least 1"));
        }
        if vertices.iter().any(|v| v.len() != dim) {
            return Err(structural("vertices have mixed dimensions"));
        }
        Ok(Polytope { dim, vertices })
    }

    pub fn from_integer(vertices: &[Vec<i64>]) -> Result<Self> {
        Self::new(vertices.iter().map(|v| v.iter().map(|&x| lp::q(x)).collect()).collect())
    }

    /// The box `[1, N_1] x ... x [1, N_d]`.
    pub fn box_body(bx: &BoxSpec) -> Self {
        let d = bx.dim();
        let vertices = (0..1usize << d)
            .map(|mask| {
                (0..d).map(|i| lp::q(if mask >> (d - 1 - i) & 1 == 1 { bx.sides()[i] as i64 } else { 1 })).collect()
            })
            .collect();
        Polytope { dim: d, vertices }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<Q>] {
        &self.vertices
    }

    pub fn scaled(&self, r: &Q) -> Self {
        Polytope { dim: self.dim, vertices: self.vertices.iter().map(|v| v.iter().map(|x| x * r).collect()).collect() }
    }

    pub fn translated(&self, v: &[Q]) -> Self {
        Polytope {
            dim: self.dim,
            vertices: self.vertices.iter().map(|p| p.iter().zip(v).map(|(a, b)| a + b).collect()).collect(),
        }
    }

    /// True when the vertex set is closed under negation.
    pub fn is_symmetric(&self) -> bool {
        let set: HashSet<&Vec<Q>> = self.vertices.iter().collect();
        self.vertices.iter().all(|v| set.contains(&v.iter().map(|x| -x).collect::<Vec<_>>()))
    }

    /// Componentwise extremes of the vertices.
    pub fn bounds(&self) -> (Vec<Q>, Vec<Q>) {
        let mut lo = self.vertices[0].clone();
        let mut hi = lo.clone();
        for v in &self.vertices[1..] {
            for i in 0..self.dim {
                if v[i] < lo[i] {
                    lo[i] = v[i].clone();
                }
                if v[i] > hi[i] {
                    hi[i] = v[i].clone();
                }
            }
        }
        (lo, hi)
    }
}

/// `shift + base`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftedBody {
    pub base: Polytope,
    pub shift: Vec<Q>,
}

impl ShiftedBody {
    pub fn new(base: Polytope, shift: Vec<Q>) -> Result<Self> {
        if shift.len() != base.dim() {
            return Err(structural("shift dimension does not match the polytope"));
        }
        Ok(ShiftedBody { base, shift })
    }

    pub fn unshifted(base: Polytope) -> Self {
        let shift = vec![Q::zero(); base.dim()];
        ShiftedBody { base, shift }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// The body as a plain polytope with the shift applied to every vertex.
    pub fn absolute(&self) -> Polytope {
        self.base.translated(&self.shift)
    }
}

impl From<Polytope> for ShiftedBody {
    fn from(p: Polytope) -> Self {
        ShiftedBody::unshifted(p)
    }
}

/// Linear system `A y = w` with `A` reduced to independent rows and the consistency conditions.
struct ReducedSystem {
    a: Vec<Vec<Q>>,
    rows: Vec<usize>,
    null: Vec<Vec<Q>>,
    cache: Vec<(Vec<usize>, IntInverse)>,
}

impl ReducedSystem {
    fn new(full: Vec<Vec<Q>>) -> Self {
        let (rows, null) = row_structure(&full);
        let a = rows.iter().map(|&i| full[i].clone()).collect();
        ReducedSystem { a, rows, null, cache: Vec::new() }
    }

    fn consistent(&self, w: &[Q]) -> bool {
        self.null.iter().all(|y| y.iter().zip(w).fold(Q::zero(), |acc, (a, b)| acc + a * b).is_zero())
    }

    fn consistent_int(&self, w: &[i128]) -> bool {
        self.null.iter().all(|y| {
            y.iter().zip(w).fold(Q::zero(), |acc, (a, &b)| acc + a * Q::from_integer(BigInt::from(b))).is_zero()
        })
    }

    /// A cached basis with `B^{-1} w >= 0`, returning the numerators and denominator.
    fn cached(&self, w: &[i128]) -> Option<(Vec<i128>, i128)> {
        let wr: Vec<i128> = self.rows.iter().map(|&i| w[i]).collect();
        self.cache.iter().find_map(|(_, inv)| {
            let y = inv.apply(&wr)?;
            y.iter().all(|&v| v >= 0).then_some((y, inv.den))
        })
    }

    fn remember(&mut self, basis: Vec<usize>) {
        if self.cache.iter().any(|(b, _)| *b == basis) {
            return;
        }
        let m: Vec<Vec<Q>> = self.a.iter().map(|r| basis.iter().map(|&j| r[j].clone()).collect()).collect();
        if let Some(inv) = invert(&m).and_then(|inv| IntInverse::from_rational(&inv)) {
            self.cache.push((basis, inv));
        }
    }

    fn reduce(&self, w: &[Q]) -> Vec<Q> {
        self.rows.iter().map(|&i| w[i].clone()).collect()
    }
}

/// Exact membership oracle for a shifted body.
pub struct MembershipOracle {
    dim: usize,
    sys: ReducedSystem,
}

impl MembershipOracle {
    pub fn new(body: &ShiftedBody) -> Self {
        let verts = body.absolute().vertices;
        let d = body.dim();
        // rows: coordinates, then the convex-combination constraint
        let mut full: Vec<Vec<Q>> = (0..d).map(|i| verts.iter().map(|v| v[i].clone()).collect()).collect();
        full.push(vec![Q::one(); verts.len()]);
        MembershipOracle { dim: d, sys: ReducedSystem::new(full) }
    }

    pub fn contains(&mut self, x: &[Q]) -> Result<bool> {
        if x.len() != self.dim {
            return Err(structural("point dimension does not match the body"));
        }
        let mut w = x.to_vec();
        w.push(Q::one());
        if !self.sys.consistent(&w) {
            return Ok(false);
        }
        if x.iter().all(|v| v.is_integer()) {
            let wi: Option<Vec<i128>> = w.iter().map(|v| v.to_integer().to_i128()).collect();
            if let Some(wi) = wi {
                if self.sys.cached(&wi).is_some() {
                    return Ok(true);
                }
            }
        }
        match simplex(&self.sys.a, &self.sys.reduce(&w), None) {
            LpResult::Optimal { basis, .. } => {
                self.sys.remember(basis);
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    pub fn contains_lattice(&mut self, x: &LatticePoint) -> Result<bool> {
        let xq: Vec<Q> = x.coords().iter().map(|&c| lp::q(c)).collect();
        self.contains(&xq)
    }
}

pub fn contains(body: &ShiftedBody, x: &[Q]) -> Result<bool> {
    MembershipOracle::new(body).contains(x)
}

fn ceil_i64(x: &Q) -> i64 {
    x.ceil().to_integer().to_i64().expect("coordinate fits in i64")
}

fn floor_i64(x: &Q) -> i64 {
    x.floor().to_integer().to_i64().expect("coordinate fits in i64")
}

/// Lattice points of the axis box `[lo, hi]` in lexicographic order.
fn lattice_box(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return;
    }
    let mut cur = lo.to_vec();
    loop {
        f(&cur);
        let mut i = cur.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if cur[i] < hi[i] {
                cur[i] += 1;
                cur[i + 1..].copy_from_slice(&lo[i + 1..]);
                break;
            }
        }
    }
}

/// `Ω_B`: lattice points of the body in lexicographic order.
pub fn integer_points(body: &ShiftedBody) -> Result<Arc<Universe>> {
    integer_points_guarded(body, Guard::default())
}

pub fn integer_points_guarded(body: &ShiftedBody, guard: Guard) -> Result<Arc<Universe>> {
    let (lo, hi) = body.absolute().bounds();
    let lo: Vec<i64> = lo.iter().map(ceil_i64).collect();
    let hi: Vec<i64> = hi.iter().map(floor_i64).collect();
    let scan: u128 = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1).max(0) as u128).product();
    if scan > guard.max_sets as u128 {
        return Err(Error::Resource { what: "bounding-box points", count: scan, limit: guard.max_sets as u128 });
    }
    let mut oracle = MembershipOracle::new(body);
    let mut pts = Vec::new();
    let mut err = None;
    lattice_box(&lo, &hi, |c| {
        let xq: Vec<Q> = c.iter().map(|&v| lp::q(v)).collect();
        match oracle.contains(&xq) {
            Ok(true) => pts.push(LatticePoint(c.to_vec())),
            Ok(false) => {}
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(Arc::new(Universe::new(body.dim(), pts)?))
}

/// `K - K`, generated by all pairwise vertex differences.
pub fn difference_body(p: &Polytope) -> Polytope {
    let mut set = BTreeSet::new();
    for u in &p.vertices {
        for v in &p.vertices {
            set.insert(u.iter().zip(v).map(|(a, b)| a - b).collect::<Vec<Q>>());
        }
    }
    Polytope { dim: p.dim, vertices: set.into_iter().collect() }
}

/// Gauge `tau(z) = min{t >= 0 : z ∈ tP}` of a symmetric polytope, evaluated on lattice points.
pub struct GaugeOracle {
    dim: usize,
    sys: Option<ReducedSystem>,
    extent: Vec<Q>,
    ones: Vec<Q>,
}

impl GaugeOracle {
    pub fn new(p: &Polytope) -> Result<Self> {
        if !p.is_symmetric() {
            return Err(domain("gauge needs a centrally symmetric polytope"));
        }
        let gens: Vec<&Vec<Q>> = p.vertices.iter().filter(|v| v.iter().any(|x| !x.is_zero())).collect();
        let extent = (0..p.dim).map(|i| gens.iter().map(|g| g[i].abs()).max().unwrap_or_else(Q::zero)).collect();
        let sys = (!gens.is_empty())
            .then(|| ReducedSystem::new((0..p.dim).map(|i| gens.iter().map(|g| g[i].clone()).collect()).collect()));
        Ok(GaugeOracle { dim: p.dim, sys, extent, ones: vec![Q::one(); gens.len()] })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `None` when `z` is outside the linear span (infinite gauge).
    pub fn gauge(&mut self, z: &[i64]) -> Option<Q> {
        let Some(sys) = self.sys.as_mut() else {
            return z.iter().all(|&c| c == 0).then(Q::zero);
        };
        let zi: Vec<i128> = z.iter().map(|&c| c as i128).collect();
        if !sys.consistent_int(&zi) {
            return None;
        }
        if let Some((num, den)) = sys.cached(&zi) {
            let s: i128 = num.iter().sum();
            return Some(Q::new(BigInt::from(s), BigInt::from(den)));
        }
        let w: Vec<Q> = z.iter().map(|&c| lp::q(c)).collect();
        match simplex(&sys.a, &sys.reduce(&w), Some(&self.ones)) {
            LpResult::Optimal { value, basis, .. } => {
                sys.remember(basis);
                Some(value)
            }
            _ => unreachable!("gauge program of a symmetric polytope is feasible and bounded on its span"),
        }
    }

    /// Integer half-widths of the bounding box of `t P`.
    pub fn scan_radius(&self, t: &Q) -> Vec<i64> {
        self.extent.iter().map(|e| floor_i64(&(e * t))).collect()
    }
}

/// Gauges of every lattice point of `t_max P`, sorted, for repeated zeta queries.
pub struct ZetaTable {
    t_max: Q,
    gauges: Vec<Q>,
    points: Vec<(Vec<i64>, Q)>,
}

impl ZetaTable {
    pub fn new(p: &Polytope, t_max: &Q) -> Result<Self> {
        let mut oracle = GaugeOracle::new(p)?;
        Self::from_oracle(&mut oracle, t_max)
    }

    pub fn from_oracle(oracle: &mut GaugeOracle, t_max: &Q) -> Result<Self> {
        if t_max.is_negative() {
            return Err(domain("zeta needs t >= 0"));
        }
        let r = oracle.scan_radius(t_max);
        let lo: Vec<i64> = r.iter().map(|x| -x).collect();
        let mut points = Vec::new();
        lattice_box(&lo, &r, |z| {
            if let Some(g) = oracle.gauge(z) {
                if &g <= t_max {
                    points.push((z.to_vec(), g));
                }
            }
        });
        let mut gauges: Vec<Q> = points.iter().map(|(_, g)| g.clone()).collect();
        gauges.sort();
        Ok(ZetaTable { t_max: t_max.clone(), gauges, points })
    }

    pub fn t_max(&self) -> &Q {
        &self.t_max
    }

    /// `zeta(t)` for `0 <= t <= t_max`.
    pub fn count(&self, t: &Q) -> u64 {
        assert!(t <= &self.t_max, "zeta query beyond the tabulated range");
        self.gauges.partition_point(|g| g <= t) as u64
    }

    /// Sorted gauges of all tabulated points (the origin contributes 0).
    pub fn gauges(&self) -> &[Q] {
        &self.gauges
    }

    /// Tabulated points with their gauges, in lexicographic order.
    pub fn points(&self) -> &[(Vec<i64>, Q)] {
        &self.points
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZetaEvaluation {
    #[serde(serialize_with = "ser_q")]
    pub t: Q,
    pub count: u64,
}

pub(crate) fn ser_q<S: serde::Serializer>(q: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

/// `|Z^d ∩ t P|` for a symmetric polytope `P`.
pub fn zeta(p_diff: &Polytope, t: &Q) -> Result<ZetaEvaluation> {
    let table = ZetaTable::new(p_diff, t)?;
    Ok(ZetaEvaluation { t: t.clone(), count: table.count(t) })
}

/// `zeta_{K-K}(t) = prod (1 + 2 floor(t (N_i - 1)))` for the box `[1, N]`.
pub fn box_zeta_formula(bx: &BoxSpec, t: &Q) -> u64 {
    bx.sides().iter().map(|&n| 1 + 2 * floor_i64(&(t * lp::q(n as i64 - 1))) as u64).product()
}

/// `s* = inf{s : s >= zeta_{K-K}(1/s)}` with a two-sided certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FkResult {
    #[serde(serialize_with = "ser_q")]
    pub s_star: Q,
    pub f: f64,
    /// A value where the condition fails (`s_lo < zeta(1/s_lo)`).
    #[serde(serialize_with = "ser_q")]
    pub s_lo: Q,
    /// A value where the condition holds (`s_hi >= zeta(1/s_hi)`).
    #[serde(serialize_with = "ser_q")]
    pub s_hi: Q,
    /// Whether the condition holds at `s*` itself.
    pub attained: bool,
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `f(K)`. Only lattice points of `K - K` matter since `s* >= 1`.
pub fn f_k(p: &Polytope) -> Result<FkResult> {
    let dk = difference_body(p);
    let table = ZetaTable::new(&dk, &Q::one())?;
    Ok(f_from_gauges(table.gauges()))
}

/// Scans the step function `g(s) = #{z : tau(z) <= 1/s}`, given the sorted gauges of all points
/// with gauge at most 1 (origin included).
pub fn f_from_gauges(gauges: &[Q]) -> FkResult {
    // distinct nonzero gauges with cumulative counts
    let mut groups: Vec<(Q, u64)> = Vec::new();
    let mut seen = 0u64;
    for (i, g) in gauges.iter().enumerate() {
        seen += 1;
        if g.is_zero() {
            continue;
        }
        if gauges.get(i + 1) != Some(g) {
            groups.push((g.clone(), seen));
        }
    }
    let zero_count = gauges.iter().take_while(|g| g.is_zero()).count() as u64;
    let one = Q::one();
    // interval j covers s in (beta_{j+1}, beta_j] with g = count of points with gauge <= tau_j
    let mut best: Option<(Q, bool, usize)> = None;
    let mut j = 0usize;
    loop {
        let upper = if j == 0 { None } else { Some(groups[j - 1].0.recip()) };
        let g_val = lp::q(if j == 0 { zero_count } else { groups[j - 1].1 } as i64);
        if let Some(u) = &upper {
            if &g_val > u {
                break;
            }
        }
        if j == groups.len() {
            // the last known interval reaches below s = 1 and g >= 1 there
            best = Some((g_val, true, j));
            break;
        }
        let lower = groups[j].0.recip();
        if g_val > lower {
            best = Some((g_val, true, j));
        } else {
            best = Some((lower, false, j));
        }
        j += 1;
    }
    let (s_star, attained, jj) = best.expect("the top interval always meets the condition");
    let (s_lo, s_hi) = if attained {
        let lower = groups.get(jj).map(|g| g.0.recip()).unwrap_or_else(|| &s_star / lp::q(2));
        ((&s_star + &lower) / lp::q(2), s_star.clone())
    } else {
        let upper = if jj == 0 { &s_star + &one } else { (&s_star + groups[jj - 1].0.recip()) / lp::q(2) };
        (s_star.clone(), upper)
    };
    FkResult { f: q_to_f64(&s_star).sqrt(), s_star, s_lo, s_hi, attained }
}

/// `g(s) = zeta_{K-K}(1/s)`, evaluated directly (for certificates and tests).
pub fn zeta_inverse(p: &Polytope, s: &Q) -> Result<u64> {
    if !s.is_positive() {
        return Err(domain("s must be positive"));
    }
    Ok(zeta(&difference_body(p), &s.recip())?.count)
}

/// Maximal progression of step `b` through `a` inside the body.
pub fn maximal_ap_in_body(a: &LatticePoint, b: &LatticePoint, body: &ShiftedBody) -> Result<CanonicalAp> {
    if a.dim() != body.dim() || b.dim() != body.dim() {
        return Err(structural("dimension mismatch"));
    }
    if b.is_zero() {
        return Err(domain("maximal progressions need a nonzero step"));
    }
    let mut oracle = MembershipOracle::new(body);
    if !oracle.contains_lattice(a)? {
        return Err(domain(format!("{a} is outside the body")));
    }
    let oracle = std::cell::RefCell::new(oracle);
    maximal_ap_by(a, b, |p| oracle.borrow_mut().contains_lattice(p).unwrap_or(false))
}

/// Canonical steps realised by two lattice points of the universe, in lexicographic order.
fn difference_steps(u: &Universe) -> Vec<LatticePoint> {
    let mut set = BTreeSet::new();
    for (i, x) in u.points().iter().enumerate() {
        for y in &u.points()[i + 1..] {
            set.insert(y.sub(x));
        }
    }
    set.into_iter().collect()
}

fn guard_points(n: usize, guard: Guard) -> Result<()> {
    let pairs = (n as u128) * (n as u128) / 2;
    if pairs > guard.max_incidences as u128 {
        return Err(Error::Resource { what: "point pairs", count: pairs, limit: guard.max_incidences as u128 });
    }
    Ok(())
}

/// Residue lines of every realised step: `(step id, start index, len)`.
fn body_lines(u: &Universe, steps: &[LatticePoint]) -> Vec<Vec<(usize, usize)>> {
    steps
        .iter()
        .map(|b| {
            let mut lines = Vec::new();
            for (idx, x) in u.points().iter().enumerate() {
                if u.contains(&x.sub(b)) {
                    continue;
                }
                let mut len = 1;
                let mut y = x.add(b);
                while u.contains(&y) {
                    len += 1;
                    y = y.add(b);
                }
                lines.push((idx, len));
            }
            lines
        })
        .collect()
}

/// `M_K`: maximal progressions of the body's lattice points; singletons kept once.
pub fn enumerate_maximal_aps_in_body(body: &ShiftedBody) -> Result<SetSystem> {
    enumerate_maximal_aps_in_body_guarded(body, Guard::default())
}

pub fn enumerate_maximal_aps_in_body_guarded(body: &ShiftedBody, guard: Guard) -> Result<SetSystem> {
    let u = integer_points_guarded(body, guard)?;
    guard_points(u.len(), guard)?;
    Ok(maximal_family_on(&u, false))
}

/// Maximal progressions on an arbitrary convex lattice set, with all singletons when requested.
pub(crate) fn maximal_family_on(u: &Arc<Universe>, all_singletons: bool) -> SetSystem {
    let steps = difference_steps(u);
    let lines = body_lines(u, &steps);
    let mut builder = SetSystem::builder(u.clone());
    let mut seen = vec![false; u.len()];
    if all_singletons || u.len() == 1 {
        for (i, s) in seen.iter_mut().enumerate() {
            builder.push_trusted(&[i as u32], Some(ApLabel { start: i as u32, step: ZERO_STEP, len: 1 }));
            *s = true;
        }
    }
    for (b, ls) in steps.into_iter().zip(lines) {
        let id = builder.add_step(b.clone());
        for (start, len) in ls {
            if len == 1 {
                if !seen[start] {
                    seen[start] = true;
                    builder
                        .push_trusted(&[start as u32], Some(ApLabel { start: start as u32, step: ZERO_STEP, len: 1 }));
                }
                continue;
            }
            let set = line_indices(u, start, &b, len);
            builder.push_trusted(&set, Some(ApLabel { start: start as u32, step: id, len: len as u32 }));
        }
    }
    builder.build()
}

fn line_indices(u: &Universe, start: usize, b: &LatticePoint, len: usize) -> Vec<u32> {
    let x = u.point(start);
    (0..len as i64).map(|i| u.index_of(&x.offset(b, i)).expect("line stays in the body") as u32).collect()
}

/// `A_K`: every nonempty progression inside the body.
pub fn enumerate_all_aps_in_body(body: &ShiftedBody) -> Result<SetSystem> {
    enumerate_all_aps_in_body_guarded(body, Guard::default())
}

pub fn enumerate_all_aps_in_body_guarded(body: &ShiftedBody, guard: Guard) -> Result<SetSystem> {
    let u = integer_points_guarded(body, guard)?;
    all_aps_on(&u, guard)
}

pub(crate) fn all_aps_on(u: &Arc<Universe>, guard: Guard) -> Result<SetSystem> {
    guard_points(u.len(), guard)?;
    let steps = difference_steps(u);
    let lines = body_lines(u, &steps);
    let mut sets = u.len() as u128;
    let mut inc = sets;
    for ls in &lines {
        for &(_, len) in ls {
            let l = len as u128;
            sets += l * (l - 1) / 2;
            inc += (l - 1) * l * (l + 1) / 6 + l * (l - 1) / 2;
        }
    }
    if sets > guard.max_sets as u128 {
        return Err(Error::Resource { what: "progressions", count: sets, limit: guard.max_sets as u128 });
    }
    if inc > guard.max_incidences as u128 {
        return Err(Error::Resource { what: "incidences", count: inc, limit: guard.max_incidences as u128 });
    }
    let mut builder = SetSystem::builder(u.clone());
    for i in 0..u.len() {
        builder.push_trusted(&[i as u32], Some(ApLabel { start: i as u32, step: ZERO_STEP, len: 1 }));
    }
    for (b, ls) in steps.into_iter().zip(lines) {
        let id = builder.add_step(b.clone());
        for (start, len) in ls {
            let full = line_indices(u, start, &b, len);
            for i in 0..len {
                for j in i + 2..=len {
                    builder.push_trusted(&full[i..j], Some(ApLabel { start: full[i], step: id, len: (j - i) as u32 }));
                }
            }
        }
    }
    Ok(builder.build())
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxShiftEntry {
    pub shift: Vec<String>,
    pub points: u64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxShiftReport {
    pub zeta_one: u64,
    pub entries: Vec<MaxShiftEntry>,
    pub all_hold: bool,
    /// `zeta(1) / max_v |Ω_{v+K}|`, reported only.
    pub ratio: f64,
}

/// `|Z^d ∩ (v + K)| <= zeta_{K-K}(1)` for each sampled shift.
pub fn check_zeta_maxshift(p: &Polytope, shifts: &[Vec<Q>]) -> Result<MaxShiftReport> {
    let zeta_one = zeta(&difference_body(p), &Q::one())?.count;
    let mut entries = Vec::new();
    for v in shifts {
        let body = ShiftedBody::new(p.clone(), v.clone())?;
        let points = integer_points(&body)?.len() as u64;
        entries.push(MaxShiftEntry {
            shift: v.iter().map(|x| x.to_string()).collect(),
            points,
            holds: points <= zeta_one,
        });
    }
    let max_pts = entries.iter().map(|e| e.points).max().unwrap_or(0);
    Ok(MaxShiftReport {
        zeta_one,
        all_hold: entries.iter().all(|e| e.holds),
        ratio: if max_pts == 0 { f64::INFINITY } else { zeta_one as f64 / max_pts as f64 },
        entries,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    #[serde(serialize_with = "ser_q")]
    pub t: Q,
    pub zeta_one: u64,
    pub zeta_t: u64,
    /// `(4t + 1)^d zeta(1)`.
    #[serde(serialize_with = "ser_q")]
    pub bound: Q,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

/// `zeta(1) <= zeta(t) <= (4t + 1)^d zeta(1)` for a symmetric polytope and `t >= 1`.
pub fn check_zeta_scaling(p_sym: &Polytope, t: &Q) -> Result<ScalingReport> {
    if !p_sym.is_symmetric() {
        return Err(domain("scaling check needs a centrally symmetric polytope"));
    }
    if t < &Q::one() {
        return Err(domain("scaling check needs t >= 1"));
    }
    let mut oracle = GaugeOracle::new(p_sym)?;
    let table = ZetaTable::from_oracle(&mut oracle, t)?;
    let zeta_one = table.count(&Q::one());
    let zeta_t = table.count(t);
    let factor = lp::q(4) * t + Q::one();
    let mut bound = lp::q(zeta_one as i64);
    for _ in 0..p_sym.dim() {
        bound *= &factor;
    }
    Ok(ScalingReport {
        t: t.clone(),
        zeta_one,
        zeta_t,
        lower_holds: zeta_one <= zeta_t,
        upper_holds: lp::q(zeta_t as i64) <= bound,
        bound,
    })
}

/// Least common multiple of all vertex and shift denominators.
pub fn common_denominator(body: &ShiftedBody) -> BigInt {
    body.base.vertices.iter().flatten().chain(&body.shift).fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
