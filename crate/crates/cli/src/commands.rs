//! Subcommand bodies; each returns the report records.

use apdisc::apgen::{enumerate_all_aps_guarded, BoxSpec, Guard};
use apdisc::body::{
    box_zeta_formula, difference_body, enumerate_all_aps_in_body_guarded, f_k, integer_points_guarded, parse_polytope,
    parse_rational, rational, Polytope, ShiftedBody, ZetaTable,
};
use apdisc::fourier::{certified_lower_bound, choose_lb_params, lower_bound_search, CertifiedLowerBound};
use apdisc::gamma2::{
    ap_cert_auto, ap_cert_guarded, ap_cert_right_only, f_of_n, flatten, map_cert_body, map_cert_for_system,
    map_cert_guarded, validate, ApCert,
};
use apdisc::verify::{
    ap_cert_check, box_zeta, decay_chain, fault_injection, large_sets, lex_repr_lines, map_cert_check, partition,
    reduction, run_suite, CheckOutcome, Scale,
};
use apdisc::walk::{brute_force_min_disc, gamma2_coloring, random_coloring, BoxColorer};
use apdisc::SetSystem;
use serde_json::{json, Value};

use crate::report::{record, Record};
use crate::{CertKind, Check, Common, DomainArgs, Failure};

const TOL: f64 = 1e-9;
/// Rows of the zeta table shown by `bound`.
const ZETA_ROWS: u64 = 64;

pub enum Domain {
    Box(BoxSpec),
    Body(ShiftedBody),
}

impl Domain {
    fn body(&self) -> ShiftedBody {
        match self {
            Domain::Box(b) => ShiftedBody::unshifted(Polytope::box_body(b)),
            Domain::Body(b) => b.clone(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_shift(s: &str) -> Result<Vec<apdisc::body::lp::Q>, Failure> {
    s.split(',').map(|t| parse_rational(t.trim()).map_err(usage)).collect()
}

fn resolve(d: &DomainArgs) -> Result<Option<Domain>, Failure> {
    match (&d.box_sides, &d.polytope) {
        (Some(_), Some(_)) => Err(usage("give exactly one of --box or --polytope")),
        (Some(_), None) if d.shift.is_some() => Err(usage("--shift applies to --polytope only")),
        (Some(s), None) => Ok(Some(Domain::Box(BoxSpec::parse(s)?))),
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            let mut body = parse_polytope(&text)?;
            if let Some(s) = &d.shift {
                body = ShiftedBody::new(body.base, parse_shift(s)?)?;
            }
            Ok(Some(Domain::Body(body)))
        }
        (None, None) if d.shift.is_some() => Err(usage("--shift needs --polytope")),
        (None, None) => Ok(None),
    }
}

fn required(d: &DomainArgs) -> Result<Domain, Failure> {
    resolve(d)?.ok_or_else(|| usage("give exactly one of --box or --polytope"))
}

fn guard(c: &Common) -> Guard {
    let g = Guard::default();
    let scale = |x: u64| (x as f64 * c.scale).round().clamp(1.0, u64::MAX as f64) as u64;
    Guard { max_sets: scale(g.max_sets), max_incidences: scale(g.max_incidences) }
}

fn domain_json(d: &DomainArgs) -> Value {
    match (&d.box_sides, &d.polytope) {
        (Some(b), _) => json!({ "box": b }),
        (_, Some(p)) => json!({ "polytope": p.display().to_string(), "shift": d.shift }),
        _ => Value::Null,
    }
}

/// Replayable configuration; output location and format are left out.
pub fn config(task: &str, d: &DomainArgs, c: &Common, extra: Value) -> Result<Value, Failure> {
    required(d)?;
    config_optional(task, d, c, extra)
}

pub fn config_optional(task: &str, d: &DomainArgs, c: &Common, extra: Value) -> Result<Value, Failure> {
    resolve(d)?;
    Ok(json!({ "task": task, "domain": domain_json(d), "seed": c.seed, "guard_scale": c.scale, "options": extra }))
}

fn q_str(q: &apdisc::body::lp::Q) -> String {
    q.to_string()
}

fn shift_json(b: &ShiftedBody) -> Value {
    json!(b.shift.iter().map(q_str).collect::<Vec<_>>())
}

pub fn bound(d: &DomainArgs, _c: &Common) -> Result<Vec<Record>, Failure> {
    let mut out = Vec::new();
    match required(d)? {
        Domain::Box(bx) => {
            let f = f_of_n(&bx)?;
            out.push(record(
                "f_of_n",
                None,
                json!({ "sides": bx.sides(), "f": f.value, "s": f.value * f.value, "argmax_subset": f.argmax_subset }),
            ));
            let top = ((f.value * f.value).ceil() as u64 + 1).min(ZETA_ROWS);
            for s in 1..=top {
                let count = box_zeta_formula(&bx, &rational(1, s as i64));
                out.push(record(
                    "zeta",
                    None,
                    json!({ "s": s, "t": format!("1/{s}"), "zeta": count, "s_ge_zeta": s >= count }),
                ));
            }
        }
        Domain::Body(body) => {
            let fk = f_k(&body.base)?;
            out.push(record(
                "f_k",
                None,
                json!({
                    "dim": body.dim(),
                    "f": fk.f,
                    "s_star": q_str(&fk.s_star),
                    "s_lo": q_str(&fk.s_lo),
                    "s_hi": q_str(&fk.s_hi),
                    "attained": fk.attained,
                }),
            ));
            let table = ZetaTable::new(&difference_body(&body.base), &rational(1, 1))?;
            let top = (apdisc::body::q_to_f64(&fk.s_star).ceil() as u64 + 1).min(ZETA_ROWS);
            for s in 1..=top {
                let count = table.count(&rational(1, s as i64));
                out.push(record(
                    "zeta",
                    None,
                    json!({ "s": s, "t": format!("1/{s}"), "zeta": count, "s_ge_zeta": s >= count }),
                ));
            }
        }
    }
    Ok(out)
}

fn build_ap_cert(bx: &BoxSpec, kind: CertKind, g: Guard) -> Result<ApCert, Failure> {
    Ok(match kind {
        CertKind::Auto => ap_cert_auto(bx, g)?,
        CertKind::Full => ap_cert_guarded(bx, g)?,
        CertKind::RightOnly => ap_cert_right_only(bx)?,
        CertKind::Maximal => return Err(usage("--kind maximal certifies maximal progressions only; use `cert`")),
    })
}

fn residual_fields(residual: Option<f64>) -> Value {
    json!({ "residual": residual, "tolerance": TOL, "passed": residual.is_none_or(|r| r <= TOL) })
}

fn merge(mut r: Record, extra: Value) -> Record {
    if let Value::Object(m) = extra {
        r.extend(m);
    }
    r
}

pub fn cert(d: &DomainArgs, c: &Common, kind: CertKind, tree: bool) -> Result<Vec<Record>, Failure> {
    let g = guard(c);
    let mut out = Vec::new();
    let map_record = |m: apdisc::gamma2::MapCert, label: Value| -> Result<Record, Failure> {
        let residual = validate(&m.cert, m.target.as_ref().expect("full certificate"))?;
        let v = m.cert.value();
        let bound = m.s + m.large_steps as f64;
        let mut r = record(
            "map_cert",
            None,
            json!({
                "domain": label,
                "value": v,
                "f": m.f,
                "s": m.s,
                "small_max": m.small_max,
                "large_sets": m.large_sets,
                "large_steps": m.large_steps,
                "value_sq_bound": bound,
                "value_sq_within_bound": v * v <= bound + TOL,
                "rows": m.cert.n_rows(),
                "cols": m.cert.n_cols(),
                "inner_dim": m.cert.inner_dim(),
            }),
        );
        r = merge(r, residual_fields(Some(residual)));
        if v * v > bound + TOL {
            r.insert("passed".into(), Value::Bool(false));
        }
        if tree {
            r.insert("tree".into(), serde_json::to_value(flatten(m.cert.node())).expect("tree serializes"));
        }
        Ok(r)
    };
    match required(d)? {
        Domain::Box(bx) if kind == CertKind::Maximal => {
            out.push(map_record(map_cert_guarded(&bx, g)?, json!(bx.sides()))?)
        }
        Domain::Box(bx) => {
            let a = build_ap_cert(&bx, kind, g)?;
            let residual = a.target.as_ref().map(|t| validate(&a.cert, t)).transpose()?;
            let mut r = record(
                "ap_cert",
                None,
                json!({
                    "domain": bx.sides(),
                    "kind": if a.cert.is_full() { "full" } else { "right-only" },
                    "value": a.cert.value(),
                    "f": a.f,
                    "ratio": a.ratio(),
                    "prefix_value": a.prefix_value,
                    "rows": a.cert.n_rows(),
                    "cols": a.cert.n_cols(),
                    "inner_dim": a.cert.inner_dim(),
                }),
            );
            r = merge(r, residual_fields(residual));
            if tree {
                r.insert("tree".into(), serde_json::to_value(flatten(a.cert.node())).expect("tree serializes"));
            }
            out.push(r);
            for dc in &a.decay {
                out.push(record(
                    "decay_check",
                    None,
                    json!({
                        "parent": dc.parent,
                        "child": dc.child,
                        "f_parent": dc.f_parent,
                        "f_child": dc.f_child,
                        "factor": dc.factor,
                        "passed": dc.holds,
                    }),
                ));
            }
        }
        Domain::Body(body) => {
            if !matches!(kind, CertKind::Auto | CertKind::Maximal) {
                return Err(usage("polytope certificates cover maximal progressions; use --kind maximal"));
            }
            out.push(map_record(map_cert_body(&body)?, json!({ "shift": shift_json(&body) }))?);
        }
    }
    Ok(out)
}

fn coloring_record(rep: &apdisc::walk::ColoringReport, op: &str, n: usize, kind: &str, with_coloring: bool) -> Record {
    let mut r = record(
        op,
        Some(rep.seed),
        json!({
            "n": n,
            "certificate": kind,
            "disc": rep.disc,
            "m": rep.m,
            "cert_value": rep.cert_value,
            "bound": rep.bound,
            "ratio": rep.ratio,
        }),
    );
    if with_coloring {
        r.insert("coloring".into(), json!(rep.coloring.values()));
    }
    r
}

pub fn color(
    d: &DomainArgs,
    c: &Common,
    kind: CertKind,
    runs: u64,
    baseline: bool,
    with_coloring: bool,
) -> Result<Vec<Record>, Failure> {
    if runs == 0 {
        return Err(usage("--runs must be at least 1"));
    }
    let g = guard(c);
    let mut out = Vec::new();
    match required(d)? {
        Domain::Box(bx) => {
            let a = build_ap_cert(&bx, kind, g)?;
            let label = if a.cert.is_full() { "full" } else { "right-only" };
            let colorer = BoxColorer::new(&bx, &a.cert)?;
            for i in 0..runs {
                let seed = c.seed.wrapping_add(i);
                out.push(coloring_record(
                    &colorer.color(seed)?,
                    "gamma2_coloring",
                    bx.size() as usize,
                    label,
                    with_coloring,
                ));
                if baseline {
                    out.push(coloring_record(
                        &colorer.random(seed)?,
                        "random_coloring",
                        bx.size() as usize,
                        label,
                        with_coloring,
                    ));
                }
            }
        }
        Domain::Body(body) => {
            if !matches!(kind, CertKind::Auto | CertKind::Maximal) {
                return Err(usage("polytope colorings use the size/degree split certificate; omit --kind"));
            }
            let sys = enumerate_all_aps_in_body_guarded(&body, g)?;
            let s = apdisc::body::q_to_f64(&f_k(&body.base)?.s_star);
            let cert = map_cert_for_system(&sys, s)?;
            for i in 0..runs {
                let seed = c.seed.wrapping_add(i);
                let rep = gamma2_coloring(&sys, &cert, seed)?;
                out.push(coloring_record(&rep, "gamma2_coloring", sys.n_points(), "size-degree-split", with_coloring));
                if baseline {
                    let (chi, disc) = random_coloring(&sys, seed)?;
                    let mut r = record(
                        "random_coloring",
                        Some(seed),
                        json!({ "n": sys.n_points(), "disc": disc, "m": sys.len() }),
                    );
                    if with_coloring {
                        r.insert("coloring".into(), json!(chi.values()));
                    }
                    out.push(r);
                }
            }
        }
    }
    Ok(out)
}

fn family(dom: &Domain, g: Guard) -> Result<SetSystem, Failure> {
    Ok(match dom {
        Domain::Box(bx) => enumerate_all_aps_guarded(bx, g)?,
        Domain::Body(b) => enumerate_all_aps_in_body_guarded(b, g)?,
    })
}

pub fn brute(d: &DomainArgs, c: &Common, witness: bool) -> Result<Vec<Record>, Failure> {
    let sys = family(&required(d)?, guard(c))?;
    let r = brute_force_min_disc(&sys)?;
    let mut rec = record(
        "brute_force_min_disc",
        None,
        json!({ "n": sys.n_points(), "m": sys.len(), "min_disc": r.min_disc, "evaluated": r.evaluated }),
    );
    if witness {
        rec.insert("witness".into(), json!(r.witness.values()));
    }
    Ok(vec![rec])
}

fn lb_fields(lb: &CertifiedLowerBound) -> Value {
    let f = apdisc::body::q_to_f64(&lb.params.f_squared).sqrt();
    json!({
        "value": lb.value,
        "omega": lb.omega,
        "shift": lb.shift.iter().map(q_str).collect::<Vec<_>>(),
        "ell": lb.params.ell,
        "m": q_str(&lb.params.m),
        "epsilon": lb.params.epsilon.as_ref().map(q_str),
        "zeta_half_m": lb.params.zeta_half_m,
        "zeta_big": lb.zeta_big,
        "zeta_m": lb.zeta_m,
        "f_k": f,
        "f_over_bound": if lb.value > 0.0 { Some(f / lb.value) } else { None },
    })
}

pub fn lowerbound(d: &DomainArgs, c: &Common, search: Option<u64>, check: bool) -> Result<Vec<Record>, Failure> {
    let dom = required(d)?;
    let body = dom.body();
    let lb = match search {
        Some(den) => lower_bound_search(&body.base, den)?,
        None => certified_lower_bound(&body, &choose_lb_params(&body.base)?)?,
    };
    let mut out = vec![record("certified_lower_bound", None, lb_fields(&lb))];
    if check {
        let target = ShiftedBody::new(body.base.clone(), lb.shift.clone())?;
        let sys = enumerate_all_aps_in_body_guarded(&target, guard(c))?;
        let opt = brute_force_min_disc(&sys)?.min_disc;
        out.push(record(
            "lower_bound_check",
            None,
            json!({ "bound": lb.value, "min_disc": opt, "passed": lb.at_most(opt) }),
        ));
    }
    Ok(out)
}

fn outcome_record(o: &CheckOutcome, seed: Option<u64>) -> Record {
    record(
        &o.check,
        seed,
        json!({
            "instance": o.instance,
            "cases": o.cases,
            "passed": o.passed,
            "measured": o.measured,
            "counterexample": o.counterexample,
        }),
    )
}

pub fn verify(
    d: &DomainArgs,
    c: &Common,
    lemma: Option<Check>,
    full: bool,
    inject_fault: bool,
) -> Result<Vec<Record>, Failure> {
    let dom = resolve(d)?;
    let bx = match &dom {
        Some(Domain::Box(b)) => Some(b.clone()),
        Some(Domain::Body(_)) => return Err(usage("verify takes --box only")),
        None => None,
    };
    if inject_fault {
        let bx = bx.unwrap_or(BoxSpec::new(vec![8, 8])?);
        return Ok(vec![outcome_record(&fault_injection(&bx, 0.25, TOL)?, None)]);
    }
    let Some(lemma) = lemma else {
        if bx.is_some() {
            return Err(usage("--box needs --lemma"));
        }
        let scale = if full { Scale::Full } else { Scale::Quick };
        return Ok(run_suite(scale, c.seed)?.iter().map(|o| outcome_record(o, Some(c.seed))).collect());
    };
    let bx = bx.ok_or_else(|| usage("--lemma needs --box"))?;
    let mut out = Vec::new();
    match lemma {
        Check::LargeSets => {
            let (o, rows) = large_sets(&bx)?;
            out.push(outcome_record(&o, None));
            for r in rows {
                out.push(record(
                    "large_step_count",
                    None,
                    json!({ "s": r.s, "count": r.count, "bound": r.bound, "passed": r.holds }),
                ));
            }
        }
        Check::Lex => out.push(outcome_record(&lex_repr_lines(&bx), None)),
        Check::Reduction => out.push(outcome_record(&reduction(&bx, 200, c.seed)?, Some(c.seed))),
        Check::Partition => out.push(outcome_record(&partition(&bx), None)),
        Check::MapCert => out.push(outcome_record(&map_cert_check(&bx, TOL)?, None)),
        Check::ApCert => out.push(outcome_record(&ap_cert_check(&bx, TOL)?, None)),
        Check::Decay => out.push(outcome_record(&decay_chain(&bx)?, None)),
        Check::BoxZeta => out.push(outcome_record(&box_zeta(&bx, 50, c.seed)?, Some(c.seed))),
    }
    Ok(out)
}

/// Least-squares slope; `None` with fewer than two distinct abscissae.
fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if points.len() < 2 || sxx <= 1e-12 {
        return None;
    }
    Some(points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

pub fn sweep(d: &DomainArgs, c: &Common, scales: &str, color_max: u64, lb_max: u64) -> Result<Vec<Record>, Failure> {
    let dom = required(d)?;
    let g = guard(c);
    let rs = parse_shift(scales)?;
    if rs.is_empty() || rs.iter().any(|r| r <= &rational(0, 1)) {
        return Err(usage("--scales must be positive"));
    }
    let mut out = Vec::new();
    let mut points = Vec::new();
    let mut dim = 0;
    for r in &rs {
        let rf = apdisc::body::q_to_f64(r);
        let (f, n, disc, lb) = match &dom {
            Domain::Box(base) => {
                if !r.is_integer() {
                    return Err(usage("box scales must be integers"));
                }
                let k = r.to_integer().to_string().parse::<u64>().map_err(|_| usage("scale out of range"))?;
                let bx = BoxSpec::new(base.sides().iter().map(|&x| x * k).collect())?;
                dim = bx.dim();
                let n = bx.size();
                let disc = if n <= color_max {
                    let a = ap_cert_auto(&bx, g)?;
                    Some(BoxColorer::new(&bx, &a.cert)?.color(c.seed)?.disc)
                } else {
                    None
                };
                let body = ShiftedBody::unshifted(Polytope::box_body(&bx));
                let lb = if n <= lb_max {
                    Some(certified_lower_bound(&body, &choose_lb_params(&body.base)?)?.value)
                } else {
                    None
                };
                (f_of_n(&bx)?.value, n, disc, lb)
            }
            Domain::Body(base) => {
                let body = ShiftedBody::new(base.base.scaled(r), base.shift.clone())?;
                dim = body.dim();
                let n = integer_points_guarded(&body, g)?.len() as u64;
                let disc = if n <= color_max && n > 0 {
                    let sys = enumerate_all_aps_in_body_guarded(&body, g)?;
                    let s = apdisc::body::q_to_f64(&f_k(&body.base)?.s_star);
                    Some(gamma2_coloring(&sys, &map_cert_for_system(&sys, s)?, c.seed)?.disc)
                } else {
                    None
                };
                let lb = if n <= lb_max {
                    Some(certified_lower_bound(&body, &choose_lb_params(&body.base)?)?.value)
                } else {
                    None
                };
                (f_k(&body.base)?.f, n, disc, lb)
            }
        };
        points.push((rf.ln(), f.ln()));
        out.push(record(
            "sweep_point",
            Some(c.seed),
            json!({ "r": q_str(r), "n": n, "f": f, "disc": disc, "lower_bound": lb }),
        ));
    }
    let slope = fit_slope(&points);
    let expected = dim as f64 / (2.0 * (dim as f64 + 1.0));
    out.push(record(
        "slope_fit",
        None,
        json!({
            "points": points.len(),
            "degenerate": slope.is_none(),
            "slope": slope,
            "expected": expected,
            "deviation": slope.map(|s| (s - expected).abs()),
        }),
    ));
    Ok(out)
}
