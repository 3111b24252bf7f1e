//! Property tests over randomly drawn boxes, bodies, colorings and matrices.

use std::collections::HashSet;

use apdisc::apgen::{enumerate_all_aps, enumerate_maximal_aps, lex_order, BoxSpec};
use apdisc::body::{
    box_zeta_formula, difference_body, enumerate_all_aps_in_body, f_k, integer_points, rational, MembershipOracle,
    Polytope, ShiftedBody, ZetaTable,
};
use apdisc::fourier::{
    certified_lower_bound, choose_lb_params, comb_convolve, convolution_identity_check, disc_inequality_audit,
    CombFunction,
};
use apdisc::gamma2::{ap_cert, f_of_n, map_cert, spectral_lower_bounds, validate};
use apdisc::system::{disc_eval, pdisc_eval, subinterval_max_disc};
use apdisc::verify::{composition_rules, partition};
use apdisc::walk::{brute_force_min_disc, brute_force_min_pdisc, color_box, GsWalk};
use apdisc::{Coloring, LatticePoint};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Boxes of dimension 1..=3 with at most `max` points.
fn small_box(max: u64) -> impl Strategy<Value = BoxSpec> {
    prop::collection::vec(1u64..=8, 1..=3)
        .prop_filter("size", move |s| s.iter().product::<u64>() <= max)
        .prop_map(|s| BoxSpec::new(s).unwrap())
}

fn triangle() -> impl Strategy<Value = Polytope> {
    prop::collection::vec((-4i64..=4, -4i64..=4), 3)
        .prop_filter("nondegenerate", |v| {
            let (a, b, c) = (v[0], v[1], v[2]);
            (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0) != 0
        })
        .prop_map(|v| Polytope::from_integer(&v.iter().map(|&(x, y)| vec![x, y]).collect::<Vec<_>>()).unwrap())
}

fn sorted_sets(sys: &apdisc::SetSystem) -> Vec<Vec<u32>> {
    sys.iter().map(|s| s.to_vec()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn full_discrepancy_at_most_twice_prefix_discrepancy(bx in small_box(64), seed in any::<u64>()) {
        let chi = Coloring::random(bx.size() as usize, seed);
        let d = disc_eval(&enumerate_all_aps(&bx).unwrap(), &chi).unwrap();
        let p = pdisc_eval(&enumerate_maximal_aps(&bx).unwrap(), &lex_order(&bx.universe()), &chi).unwrap();
        prop_assert!(d <= 2 * p, "disc {} pdisc {}", d, p);
    }

    #[test]
    fn subinterval_scan_equals_full_family(bx in small_box(64), seed in any::<u64>()) {
        let chi = Coloring::random(bx.size() as usize, seed);
        let full = disc_eval(&enumerate_all_aps(&bx).unwrap(), &chi).unwrap();
        let scan = subinterval_max_disc(&enumerate_maximal_aps(&bx).unwrap(), &chi).unwrap();
        prop_assert_eq!(full, scan);
    }

    #[test]
    fn maximal_progressions_partition_per_step(bx in small_box(1000)) {
        let o = partition(&bx);
        prop_assert!(o.passed, "{:?}", o.counterexample);
    }

    #[test]
    fn enumerated_families_have_distinct_sets(bx in small_box(64)) {
        for sys in [enumerate_all_aps(&bx).unwrap(), enumerate_maximal_aps(&bx).unwrap()] {
            let sets = sorted_sets(&sys);
            let unique: HashSet<&Vec<u32>> = sets.iter().collect();
            prop_assert_eq!(unique.len(), sets.len());
        }
    }

    #[test]
    fn box_zeta_matches_product_formula(sides in prop::collection::vec(1u64..=8, 1..=3), num in 1i64..=40, den in 1i64..=20) {
        prop_assume!(sides.len() < 3 || sides[2] <= 4);
        let bx = BoxSpec::new(sides).unwrap();
        let t = rational(num.min(2 * den), den);
        let table = ZetaTable::new(&difference_body(&Polytope::box_body(&bx)), &t).unwrap();
        let count = table.count(&t);
        prop_assert_eq!(count, box_zeta_formula(&bx, &t));
        prop_assert_eq!(count % 2, 1);
    }

    #[test]
    fn body_and_box_parameters_agree_within_factor_four(bx in small_box(400)) {
        let fk = f_k(&Polytope::box_body(&bx)).unwrap().f;
        let fn_ = f_of_n(&bx).unwrap().value;
        let r = (fk * fk) / (fn_ * fn_);
        prop_assert!((0.25..=4.0).contains(&r), "f(K)^2 / f(N)^2 = {}", r);
    }

    #[test]
    fn zeta_of_polytope_is_odd(p in triangle(), num in 0i64..=12, den in 1i64..=4) {
        let dk = difference_body(&p);
        let t = rational(num, den);
        prop_assert_eq!(ZetaTable::new(&dk, &t).unwrap().count(&t) % 2, 1);
    }

    #[test]
    fn lines_meet_convex_bodies_in_intervals(p in triangle(), a in (-5i64..=5, -5i64..=5), b in (-3i64..=3, -3i64..=3)) {
        prop_assume!(b != (0, 0));
        let body = ShiftedBody::unshifted(p);
        let mut oracle = MembershipOracle::new(&body);
        let hits: Vec<i64> = (-30i64..=30)
            .filter(|&i| oracle.contains_lattice(&LatticePoint::new(vec![a.0 + i * b.0, a.1 + i * b.1])).unwrap())
            .collect();
        if let (Some(lo), Some(hi)) = (hits.first(), hits.last()) {
            prop_assert_eq!(hits.len() as i64, hi - lo + 1);
        }
    }

    #[test]
    fn progression_certificates_are_valid(bx in small_box(96)) {
        let a = ap_cert(&bx).unwrap();
        let res = validate(&a.cert, a.target.as_ref().unwrap()).unwrap();
        prop_assert!(res <= 1e-9, "residual {}", res);
        prop_assert!(a.decay.iter().all(|d| d.holds));
        let rules = composition_rules(a.cert.node(), 1e-9);
        prop_assert!(rules.passed, "{:?}", rules.counterexample);
        let spectral = spectral_lower_bounds(a.target.as_ref().unwrap()).unwrap();
        prop_assert!(spectral.nuclear_over_sqrt_mn <= a.cert.value() + 1e-9);
    }

    #[test]
    fn maximal_certificate_value_within_threshold_bound(bx in small_box(400)) {
        let m = map_cert(&bx).unwrap();
        let v = m.cert.value();
        prop_assert!(validate(&m.cert, m.target.as_ref().unwrap()).unwrap() <= 1e-9);
        prop_assert!(v * v <= m.s + m.large_steps as f64 + 1e-9);
        if m.large_steps as f64 <= m.s {
            prop_assert!(v * v <= 2.0 * m.f * m.f + 1e-9);
        }
    }

    #[test]
    fn walk_outputs_signs(n in 1usize..=24, k in 1usize..=24, seed in any::<u64>(), entries in prop::collection::vec(-1.0f64..1.0, 576)) {
        let mut r = DMatrix::from_iterator(k, n, entries.into_iter().take(n * k));
        for mut c in r.column_iter_mut() {
            let norm = c.norm();
            if norm > 1.0 {
                c /= norm;
            }
        }
        let x = GsWalk::from_dense(&r).unwrap().run(seed);
        prop_assert_eq!(x.len(), n);
        prop_assert!(x.iter().all(|&v| v == 1 || v == -1));
    }

    #[test]
    fn convolution_identity_on_random_colorings(bx in small_box(48), seed in any::<u64>(), b in (0i64..=2, -2i64..=2), ell in 1u64..=4) {
        prop_assume!(bx.dim() == 2 && b != (0, 0));
        let u = bx.universe();
        let chi = Coloring::random(u.len(), seed);
        let r = convolution_identity_check(&u, &chi, &LatticePoint::new(vec![b.0, b.1]), ell).unwrap();
        prop_assert!(r.holds, "{:?}", r);
        let g = CombFunction::new(LatticePoint::new(vec![b.0, b.1]), ell).unwrap();
        let origin = comb_convolve(&u, &chi, &g, &LatticePoint::new(vec![0, 0])).unwrap();
        prop_assert!(origin.unsigned_abs() <= ell);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    #[test]
    fn optimum_at_most_walk(bx in small_box(16), seed in any::<u64>()) {
        let opt = brute_force_min_disc(&enumerate_all_aps(&bx).unwrap()).unwrap().min_disc;
        let walk = color_box(&bx, &ap_cert(&bx).unwrap().cert, seed).unwrap().disc;
        prop_assert!(opt <= walk);
    }

    #[test]
    fn optimum_at_most_twice_prefix_optimum(bx in small_box(14)) {
        let opt = brute_force_min_disc(&enumerate_all_aps(&bx).unwrap()).unwrap().min_disc;
        let popt = brute_force_min_pdisc(&enumerate_maximal_aps(&bx).unwrap(), &lex_order(&bx.universe())).unwrap().min_disc;
        prop_assert!(opt <= 2 * popt);
    }

    #[test]
    fn lower_bound_never_exceeds_optimum(p in triangle()) {
        let body = ShiftedBody::unshifted(p);
        prop_assume!(integer_points(&body).unwrap().len() <= 20);
        let lb = certified_lower_bound(&body, &choose_lb_params(&body.base).unwrap()).unwrap();
        let opt = brute_force_min_disc(&enumerate_all_aps_in_body(&body).unwrap()).unwrap().min_disc;
        prop_assert!(lb.at_most(opt), "bound {} optimum {}", lb.value, opt);
    }

    #[test]
    fn energy_bounded_by_discrepancy(p in triangle(), seed in any::<u64>(), b in (0i64..=1, -1i64..=1)) {
        prop_assume!(b != (0, 0));
        let body = ShiftedBody::unshifted(p);
        let u = integer_points(&body).unwrap();
        prop_assume!(!u.is_empty());
        let chi = Coloring::random(u.len(), seed);
        match disc_inequality_audit(&body, &chi, &LatticePoint::new(vec![b.0, b.1]), 2, &rational(1, 1)) {
            Ok(r) => prop_assert!(r.holds, "{:?}", r),
            Err(apdisc::Error::Domain(_)) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}
