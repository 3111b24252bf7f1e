//! Exact checks of the structural identities and inequalities, with serializable outcomes.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::apgen::{
    ap_points, canonical_steps, count_all_aps, enumerate_all_aps, enumerate_maximal_aps, for_each_line,
    large_step_count, lex_interval_repr, lex_order, line_lex_slice, maximal_ap, ApDescriptor, BoxSpec, LargeStepCount,
};
use crate::body::{
    box_zeta_formula, check_zeta_maxshift, check_zeta_scaling, difference_body, enumerate_all_aps_in_body, rational,
    Polytope, ShiftedBody, ZetaTable,
};
use crate::error::Result;
use crate::fourier::{
    certified_lower_bound, choose_lb_params, convolution_identity_check, parseval_check, CombFunction,
};
use crate::gamma2::cert::Node;
use crate::gamma2::{ap_cert, ap_cert_right_only, flatten, map_cert, validate, Op};
use crate::lattice::LatticePoint;
use crate::system::{disc_eval, pdisc_eval, Coloring};
use crate::walk::brute_force_min_disc;

/// Result of one named check on one instance.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub check: String,
    pub instance: String,
    /// Number of individual facts covered.
    pub cases: u64,
    pub passed: bool,
    /// Largest measured quantity (residual, ratio, slack), when meaningful.
    pub measured: Option<f64>,
    pub counterexample: Option<String>,
}

impl CheckOutcome {
    fn new(check: &str, instance: impl Into<String>) -> Self {
        CheckOutcome {
            check: check.into(),
            instance: instance.into(),
            cases: 0,
            passed: true,
            measured: None,
            counterexample: None,
        }
    }

    fn fail(&mut self, what: impl Into<String>) {
        if self.passed {
            self.passed = false;
            self.counterexample = Some(what.into());
        }
    }

    fn measure(&mut self, v: f64) {
        self.measured = Some(self.measured.map_or(v, |m| m.max(v)));
    }
}

fn name(bx: &BoxSpec) -> String {
    format!("box {:?}", bx.sides())
}

/// Lex-interval representation for every progression of the box, via lines: the flat index
/// is verified to be the lex rank and affine in the coordinates, so along a line of step `b`
/// the rank moves by a constant; a positive constant for every step makes each progression
/// exactly the line slice between its endpoints.
pub fn lex_repr_lines(bx: &BoxSpec) -> CheckOutcome {
    let mut out = CheckOutcome::new("lex-repr", name(bx));
    let n = bx.size() as usize;
    let d = bx.dim();
    let mut strides = vec![1i64; d];
    for i in (0..d.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * bx.sides()[i + 1] as i64;
    }
    let mut prev: Option<LatticePoint> = None;
    for idx in 0..n {
        let p = bx.point_at(idx);
        let affine: i64 = p.coords().iter().zip(&strides).map(|(&c, &s)| (c - 1) * s).sum();
        if affine != idx as i64 || bx.index_of(&p) != Some(idx) {
            out.fail(format!("index of {p} is not affine"));
        }
        if let Some(q) = &prev {
            if q >= &p {
                out.fail(format!("{q} precedes {p} in index order but not in lex order"));
            }
        }
        prev = Some(p);
    }
    for b in canonical_steps(bx) {
        let delta: i64 = b.coords().iter().zip(&strides).map(|(&c, &s)| c * s).sum();
        if delta <= 0 {
            out.fail(format!("lex rank decreases along step {b}"));
        }
    }
    out.cases = count_all_aps(bx).sets as u64;
    out
}

/// The same identity checked progression by progression.
pub fn lex_repr_direct(bx: &BoxSpec) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("lex-repr-direct", name(bx));
    let sys = enumerate_all_aps(bx)?;
    for i in 0..sys.len() {
        let label = sys.label(i).expect("labelled");
        let pts = sys.points_of(i);
        let ap = ApDescriptor::new(pts[0].clone(), sys.step_of(&label), label.len as u64)?;
        if !slice_matches(&ap, bx)? {
            out.fail(format!("{ap:?}"));
        }
        out.cases += 1;
    }
    Ok(out)
}

fn slice_matches(ap: &ApDescriptor, bx: &BoxSpec) -> Result<bool> {
    let (x, y) = lex_interval_repr(&ap.canonical(), bx)?;
    let mut slice = line_lex_slice(&ap.a, &ap.b, &x, &y, bx);
    let mut pts = ap_points(ap);
    slice.sort();
    pts.sort();
    Ok(slice == pts)
}

/// Random progressions in random boxes with more than `min_size` points, checked directly.
pub fn lex_repr_sampled(count: usize, max_side: u64, max_dim: usize, min_size: u64, seed: u64) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("lex-repr-sampled", format!("{count} random progressions"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while (out.cases as usize) < count {
        let d = rng.gen_range(1..=max_dim);
        let sides: Vec<u64> = (0..d).map(|_| rng.gen_range(1..=max_side)).collect();
        let bx = BoxSpec::new(sides)?;
        if bx.size() <= min_size {
            continue;
        }
        let a = bx.point_at(rng.gen_range(0..bx.size() as usize));
        let mut b: Vec<i64> = bx.sides().iter().map(|&n| rng.gen_range(-(n as i64 - 1)..=n as i64 - 1)).collect();
        if let Some(lead) = b.iter().position(|&v| v != 0) {
            if b[lead] < 0 {
                b.iter_mut().for_each(|v| *v = -*v);
            }
        }
        let b = LatticePoint(b);
        let ap = if b.is_zero() {
            ApDescriptor::new(a, b, 1)?
        } else {
            let line = maximal_ap(&a, &b, &bx)?.points();
            let i = rng.gen_range(0..line.len());
            let j = rng.gen_range(i..line.len());
            ApDescriptor::new(line[i].clone(), b, (j - i + 1) as u64)?
        };
        if !slice_matches(&ap, &bx)? {
            out.fail(format!("{ap:?} in {:?}", bx.sides()));
        }
        out.cases += 1;
    }
    Ok(out)
}

/// `disc(A_N, chi) <= 2 pdisc(M_N, lex, chi)` for random colorings.
pub fn reduction(bx: &BoxSpec, colorings: usize, seed: u64) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("reduction", name(bx));
    let all = enumerate_all_aps(bx)?;
    let maximal = enumerate_maximal_aps(bx)?;
    let sigma = lex_order(&bx.universe());
    for k in 0..colorings {
        let chi = Coloring::random(bx.size() as usize, seed.wrapping_add(k as u64));
        let d = disc_eval(&all, &chi)?;
        let p = pdisc_eval(&maximal, &sigma, &chi)?;
        if d > 2 * p {
            out.fail(format!("seed {}: disc {d} > 2 * pdisc {p}", chi.seed.unwrap_or(0)));
        }
        if p > 0 {
            out.measure(d as f64 / p as f64);
        }
        out.cases += 1;
    }
    Ok(out)
}

/// For each step, the maximal progressions partition the box and cannot be extended.
pub fn partition(bx: &BoxSpec) -> CheckOutcome {
    let mut out = CheckOutcome::new("partition", name(bx));
    let n = bx.size() as usize;
    let mut cover = vec![0u32; n];
    for b in canonical_steps(bx) {
        cover.iter_mut().for_each(|c| *c = 0);
        let mut bad: Option<String> = None;
        for_each_line(bx, &b, |start, len| {
            let first = bx.point_at(start);
            for t in 0..len {
                match bx.index_of(&first.offset(&b, t as i64)) {
                    Some(i) => cover[i] += 1,
                    None => {
                        bad.get_or_insert(format!("line from {first} with step {b} leaves the box"));
                    }
                }
            }
            let last = first.offset(&b, len as i64 - 1);
            if bx.contains(&first.offset(&b, -1)) || bx.contains(&last.offset(&b, 1)) {
                bad.get_or_insert(format!("line from {first} with step {b} is extendable"));
            }
        });
        if let Some(i) = cover.iter().position(|&c| c != 1) {
            bad.get_or_insert(format!("point {} covered {} times by step {b}", bx.point_at(i), cover[i]));
        }
        if let Some(msg) = bad {
            out.fail(msg);
        }
        out.cases += n as u64;
    }
    out
}

/// Validity of the maximal-progression certificate and `value^2 <= s + |B|`; measured is
/// the slack `value / (sqrt(2) f) - 1`.
pub fn map_cert_check(bx: &BoxSpec, tol: f64) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("map-cert", name(bx));
    let m = map_cert(bx)?;
    let residual = validate(&m.cert, m.target.as_ref().expect("full certificate"))?;
    if residual > tol {
        out.fail(format!("residual {residual:e}"));
    }
    let v = m.cert.value();
    if v * v > m.s + m.large_steps as f64 + 1e-9 {
        out.fail(format!("value^2 {} > s + |B| = {}", v * v, m.s + m.large_steps as f64));
    }
    let rules = composition_rules(m.cert.node(), 1e-9);
    if !rules.passed {
        out.fail(rules.counterexample.unwrap_or_default());
    }
    out.measure(v / (2f64.sqrt() * m.f) - 1.0);
    out.cases = m.cert.n_rows() as u64;
    Ok(out)
}

/// Validation of a deliberately corrupted maximal-progression certificate; a passing
/// outcome would mean the validator missed the fault.
pub fn fault_injection(bx: &BoxSpec, delta: f64, tol: f64) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("fault-injection", name(bx));
    let m = map_cert(bx)?;
    let residual = validate(&m.cert.tampered(delta), m.target.as_ref().expect("full certificate"))?;
    out.measure(residual);
    out.cases = 1;
    if residual > tol {
        out.fail(format!("max |LR - A| = {residual:e} exceeds {tol:e}"));
    }
    Ok(out)
}

/// Validity of the progression certificate and the decay inequality at every split;
/// measured is `value / f`.
pub fn ap_cert_check(bx: &BoxSpec, tol: f64) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("ap-cert", name(bx));
    let a = ap_cert(bx)?;
    let residual = validate(&a.cert, a.target.as_ref().expect("full certificate"))?;
    if residual > tol {
        out.fail(format!("residual {residual:e}"));
    }
    if let Some(d) = a.decay.iter().find(|d| !d.holds) {
        out.fail(format!("decay fails from {:?} to {:?}", d.parent, d.child));
    }
    let rules = composition_rules(a.cert.node(), 1e-9);
    if !rules.passed {
        out.fail(rules.counterexample.unwrap_or_default());
    }
    out.measure(a.ratio());
    out.cases = a.cert.n_rows() as u64;
    Ok(out)
}

/// Value rules along a construction tree: unions satisfy `v <= sqrt(v1^2 + v2^2)`,
/// triangles `v <= v1 + v2`, disjoint supports `v <= max(v1, v2)`, selections and
/// projections `v <= v1`; leaves match their size or degree bound.
pub fn composition_rules(root: &Arc<Node>, tol: f64) -> CheckOutcome {
    let mut out = CheckOutcome::new("composition", format!("tree of {} rows", root.rows));
    let flat = flatten(root);
    for n in &flat {
        let kids: Vec<f64> = n.children.iter().map(|&c| flat[c].value).collect();
        let rule = match &n.op {
            Op::Unit => 1.0,
            Op::Size { max_size } => (*max_size as f64).sqrt(),
            Op::Degree { max_degree } => (*max_degree as f64).sqrt(),
            Op::Union => kids.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Op::Triangle { .. } => kids.iter().sum(),
            Op::Disjoint | Op::SelectRows | Op::ProjectColumns => kids.iter().copied().fold(0.0, f64::max),
        };
        let excess = n.value - rule;
        out.measure(excess);
        if excess > tol * rule.max(1.0) {
            out.fail(format!("node {} ({:?}): value {} exceeds rule {rule}", n.id, n.op, n.value));
        }
        out.cases += 1;
    }
    out
}

/// Large-step count against its bound for every threshold `2 <= s <= max N_i`.
pub fn large_sets(bx: &BoxSpec) -> Result<(CheckOutcome, Vec<LargeStepCount>)> {
    let mut out = CheckOutcome::new("large-sets", name(bx));
    let top = bx.sides().iter().copied().max().unwrap_or(1);
    let mut rows = Vec::new();
    for s in 2..=top.max(2) {
        let r = large_step_count(bx, s)?;
        if !r.holds {
            out.fail(format!("s = {s}: {} > {}", r.count, r.bound));
        }
        out.cases += 1;
        rows.push(r);
    }
    Ok((out, rows))
}

/// Closed-form box zeta against lattice counting for random rational `t`.
pub fn box_zeta(bx: &BoxSpec, samples: usize, seed: u64) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("box-zeta", name(bx));
    let dk = difference_body(&Polytope::box_body(bx));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ts: Vec<_> = (0..samples)
        .map(|_| {
            let den = rng.gen_range(1..=20);
            rational(rng.gen_range(0..=4 * den), den)
        })
        .collect();
    let Some(t_max) = ts.iter().max() else {
        return Ok(out);
    };
    let table = ZetaTable::new(&dk, t_max)?;
    for t in &ts {
        let counted = table.count(t);
        let formula = box_zeta_formula(bx, t);
        if counted != formula {
            out.fail(format!("t = {t}: counted {counted}, formula {formula}"));
        }
        out.cases += 1;
    }
    Ok(out)
}

/// `|Z^d ∩ (v + K)| <= zeta_{K-K}(1)` over random rational shifts.
pub fn zeta_maxshift(p: &Polytope, shifts: usize, seed: u64) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("zeta-maxshift", format!("polytope {:?}", vertex_strings(p)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vs: Vec<Vec<_>> =
        (0..shifts).map(|_| (0..p.dim()).map(|_| rational(rng.gen_range(0..12), 12)).collect()).collect();
    let r = check_zeta_maxshift(p, &vs)?;
    if let Some(e) = r.entries.iter().find(|e| !e.holds) {
        out.fail(format!("shift {:?}: {} > {}", e.shift, e.points, r.zeta_one));
    }
    out.cases = r.entries.len() as u64;
    out.measure(r.ratio);
    Ok(out)
}

/// `zeta(1) <= zeta(t) <= (4t + 1)^d zeta(1)` on `K - K`.
pub fn zeta_scaling(p: &Polytope, ts: &[(i64, i64)]) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("zeta-scaling", format!("polytope {:?}", vertex_strings(p)));
    let dk = difference_body(p);
    for &(a, b) in ts {
        let r = check_zeta_scaling(&dk, &rational(a, b))?;
        if !(r.lower_holds && r.upper_holds) {
            out.fail(format!("t = {}: zeta(t) = {}, zeta(1) = {}", r.t, r.zeta_t, r.zeta_one));
        }
        out.cases += 1;
    }
    Ok(out)
}

fn vertex_strings(p: &Polytope) -> Vec<Vec<String>> {
    p.vertices().iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect()
}

/// Certified lower bound against the exact optimum; measured is the bound.
pub fn lower_bound_soundness(body: &ShiftedBody) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new(
        "lower-bound",
        format!(
            "polytope {:?} + {:?}",
            vertex_strings(&body.base),
            body.shift.iter().map(|x| x.to_string()).collect::<Vec<_>>()
        ),
    );
    let lb = certified_lower_bound(body, &choose_lb_params(&body.base)?)?;
    let opt = brute_force_min_disc(&enumerate_all_aps_in_body(body)?)?.min_disc;
    if !lb.at_most(opt) {
        out.fail(format!("bound {} exceeds optimum {opt}", lb.value));
    }
    out.measure(lb.value);
    out.cases = 1;
    Ok(out)
}

/// Two-route Parseval agreement on random colorings, boxes and combs; measured is the
/// largest relative error.
pub fn parseval_random(count: usize, seed: u64, tol: f64) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("parseval", format!("{count} random instances"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let (bx, chi, b, ell) = random_comb_instance(&mut rng)?;
        let r = parseval_check(&bx.universe(), &chi, &CombFunction::new(b.clone(), ell)?)?;
        if r.rel_err > tol {
            out.fail(format!("{:?} b = {b} ell = {ell}: {} vs {}", bx.sides(), r.direct, r.transform));
        }
        out.measure(r.rel_err);
        out.cases += 1;
    }
    Ok(out)
}

/// Convolution identity on random tuples; each tuple covers every reachable point.
pub fn convolution_random(count: usize, seed: u64) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("convolution", format!("{count} random tuples"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let (bx, chi, b, ell) = random_comb_instance(&mut rng)?;
        let r = convolution_identity_check(&bx.universe(), &chi, &b, ell)?;
        if let Some((x, l, rr)) = r.mismatches.first() {
            out.fail(format!("{:?} b = {b} ell = {ell} at {x}: {l} vs {rr}", bx.sides()));
        }
        out.cases += 1;
    }
    Ok(out)
}

fn random_comb_instance(rng: &mut ChaCha8Rng) -> Result<(BoxSpec, Coloring, LatticePoint, u64)> {
    let d = rng.gen_range(1..=3usize);
    let sides: Vec<u64> = (0..d).map(|_| rng.gen_range(1..=if d == 1 { 12 } else { 5 })).collect();
    let bx = BoxSpec::new(sides)?;
    let chi = Coloring::random(bx.size() as usize, rng.gen());
    let b = LatticePoint((0..d).map(|_| rng.gen_range(-3..=3)).collect());
    let ell = if b.is_zero() { 1 } else { rng.gen_range(1..=6) };
    Ok((bx, chi, b, ell))
}

/// `f(N)` decay at every halving of the largest side down to the unit box.
pub fn decay_chain(bx: &BoxSpec) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("decay", name(bx));
    let a = ap_cert_right_only(bx)?;
    for d in &a.decay {
        if !d.holds {
            out.fail(format!("{:?} -> {:?}: {} > {} * {}", d.parent, d.child, d.f_child, d.factor, d.f_parent));
        }
        out.measure(d.f_child / d.f_parent);
        out.cases += 1;
    }
    Ok(out)
}

/// Scale of the aggregated suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Quick,
    Full,
}

/// Every check at the given scale, in a fixed order.
pub fn run_suite(scale: Scale, seed: u64) -> Result<Vec<CheckOutcome>> {
    let full = scale == Scale::Full;
    let bx = |s: &[u64]| BoxSpec::new(s.to_vec());
    let mut out = Vec::new();
    let lex_boxes: Vec<Vec<u64>> = if full {
        vec![vec![512], vec![16, 32], vec![8, 8, 8], vec![7, 9, 5]]
    } else {
        vec![vec![64], vec![8, 8], vec![4, 4, 4]]
    };
    for s in &lex_boxes {
        out.push(lex_repr_lines(&bx(s)?));
    }
    out.push(lex_repr_direct(&bx(&[6, 5])?)?);
    out.push(lex_repr_sampled(if full { 1000 } else { 100 }, 40, 3, 0, seed)?);
    for s in [vec![16u64], vec![4, 4], if full { vec![16, 16] } else { vec![6, 6] }] {
        out.push(reduction(&bx(&s)?, if full { 200 } else { 20 }, seed)?);
    }
    for s in [vec![12u64, 12], if full { vec![12, 12, 4] } else { vec![4, 4, 4] }] {
        out.push(partition(&bx(&s)?));
    }
    for s in [vec![16u64], vec![8, 8], if full { vec![32, 32] } else { vec![4, 4, 4] }] {
        out.push(map_cert_check(&bx(&s)?, 1e-9)?);
    }
    for s in [vec![16u64], if full { vec![16, 16] } else { vec![4, 4] }] {
        out.push(ap_cert_check(&bx(&s)?, 1e-9)?);
    }
    for s in [vec![64u64], vec![16, 16], vec![8, 4, 4]] {
        out.push(decay_chain(&bx(&s)?)?);
    }
    for s in [vec![16u64, 16], if full { vec![16, 16, 4] } else { vec![4, 4, 4] }] {
        out.push(large_sets(&bx(&s)?)?.0);
    }
    for s in [vec![9u64], vec![4, 6]] {
        out.push(box_zeta(&bx(&s)?, if full { 50 } else { 10 }, seed)?);
    }
    let tri = Polytope::from_integer(&[vec![0, 0], vec![6, 0], vec![0, 4]])?;
    out.push(zeta_maxshift(&tri, if full { 20 } else { 5 }, seed)?);
    out.push(zeta_scaling(&tri, &[(1, 1), (3, 2), (5, 2)])?);
    for n in [3i64, 5, 8] {
        out.push(lower_bound_soundness(&ShiftedBody::unshifted(Polytope::from_integer(&[vec![1], vec![n]])?))?);
    }
    out.push(parseval_random(if full { 1000 } else { 100 }, seed, 1e-6)?);
    out.push(convolution_random(if full { 10_000 } else { 500 }, seed)?);
    Ok(out)
}
