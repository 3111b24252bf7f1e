use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::apgen::{enumerate_all_aps, BoxSpec};
use crate::body::rational;
use crate::walk::brute_force_min_disc;

fn pts(v: &[&[i64]]) -> Arc<Universe> {
    let d = v[0].len();
    Arc::new(Universe::new(d, v.iter().map(|p| LatticePoint(p.to_vec())).collect()).unwrap())
}

fn pm(v: &[i8]) -> Coloring {
    Coloring::external(v.to_vec()).unwrap()
}

fn lp(v: &[i64]) -> LatticePoint {
    LatticePoint(v.to_vec())
}

fn interval(a: i64, b: i64) -> Polytope {
    Polytope::from_integer(&[vec![a], vec![b]]).unwrap()
}

#[test]
fn comb_examples() {
    let u = pts(&[&[0], &[1]]);
    let chi = pm(&[1, -1]);
    let g = CombFunction::new(lp(&[1]), 2).unwrap();
    let vals: Vec<i64> = (0..3).map(|x| comb_convolve(&u, &chi, &g, &lp(&[x])).unwrap()).collect();
    assert_eq!(vals, vec![1, 0, -1]);
    let id = CombFunction::new(lp(&[1]), 1).unwrap();
    for x in -2..4 {
        let expect = u.index_of(&lp(&[x])).map(|i| chi.values()[i] as i64).unwrap_or(0);
        assert_eq!(comb_convolve(&u, &chi, &id, &lp(&[x])).unwrap(), expect);
    }
    assert_eq!(comb_convolve(&u, &chi, &g, &lp(&[10])).unwrap(), 0);
    assert!(CombFunction::new(lp(&[1]), 0).is_err());
}

#[test]
fn convolution_identity_examples() {
    let b4 = BoxSpec::new(vec![4]).unwrap();
    let u = b4.universe();
    let chi = Coloring::random(4, 5);
    let r = convolution_identity_check(&u, &chi, &lp(&[1]), 2).unwrap();
    assert!(r.holds);
    assert_eq!(r.points_checked, 5);
    assert!(convolution_identity_check(&u, &chi, &lp(&[1]), 1).unwrap().holds);
    assert!(convolution_identity_check(&u, &chi, &lp(&[9]), 6).unwrap().holds);
}

#[test]
fn convolution_identity_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..300 {
        let d = rng.gen_range(1..=3usize);
        let sides: Vec<u64> = (0..d).map(|_| rng.gen_range(1..=4)).collect();
        let u = BoxSpec::new(sides).unwrap().universe();
        let chi = Coloring::random(u.len(), rng.gen());
        let b = lp(&(0..d).map(|_| rng.gen_range(-3..=3)).collect::<Vec<_>>());
        let ell = if b.is_zero() { 1 } else { rng.gen_range(1..=5) };
        assert!(convolution_identity_check(&u, &chi, &b, ell).unwrap().holds);
    }
}

#[test]
fn parseval_examples() {
    let u = pts(&[&[0], &[1]]);
    let g = CombFunction::new(lp(&[1]), 2).unwrap();
    let r = parseval_check(&u, &pm(&[1, -1]), &g).unwrap();
    assert_eq!(r.direct, 2);
    assert!((r.transform - 2.0).abs() < 1e-9);
    let r = parseval_check(&u, &pm(&[1, 1]), &g).unwrap();
    assert_eq!(r.direct, 6);
    assert!(r.rel_err < 1e-9);
    let bx = BoxSpec::new(vec![3, 5]).unwrap().universe();
    let delta = CombFunction::new(lp(&[0, 0]), 1).unwrap();
    let r = parseval_check(&bx, &Coloring::random(15, 2), &delta).unwrap();
    assert_eq!(r.direct, 15);
    assert!(r.rel_err < 1e-9);
}

#[test]
fn parseval_random_with_retries() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut retried = false;
    for _ in 0..100 {
        let d = rng.gen_range(1..=3usize);
        let sides: Vec<u64> = (0..d).map(|_| rng.gen_range(1..=5)).collect();
        let u = BoxSpec::new(sides).unwrap().universe();
        let b = lp(&(0..d).map(|_| rng.gen_range(-3..=3)).collect::<Vec<_>>());
        let ell = if b.is_zero() { 1 } else { rng.gen_range(1..=6) };
        let r = parseval_check(&u, &Coloring::random(u.len(), rng.gen()), &CombFunction::new(b, ell).unwrap()).unwrap();
        assert!(r.rel_err <= 1e-6, "{r:?}");
        retried |= r.retries > 0;
    }
    assert!(retried);
}

#[test]
fn lb_params_examples() {
    let p = choose_lb_params(&interval(1, 4)).unwrap();
    assert_eq!(p.ell, 1);
    assert_eq!(p.m, rational(4, 3));
    assert_eq!(p.zeta_half_m, 5);
    assert_eq!(p.epsilon, Some(rational(1, 4)));
    assert!(p.is_valid());
    let p = choose_lb_params(&interval(1, 16)).unwrap();
    assert_eq!((p.ell, p.m.clone()), (1, rational(4, 5)));
    let big =
        choose_lb_params(&Polytope::from_integer(&[vec![1, 1], vec![600, 1], vec![1, 600], vec![600, 600]]).unwrap())
            .unwrap();
    assert!(big.f_squared >= rational(24, 1));
    assert!(big.ell >= 2);
    assert!(big.is_valid());
}

#[test]
fn certified_bound_example() {
    let k = interval(1, 4);
    let p = choose_lb_params(&k).unwrap();
    let lb = certified_lower_bound(&ShiftedBody::unshifted(k), &p).unwrap();
    assert_eq!((lb.zeta_big, lb.zeta_m, lb.omega), (23, 9, 4));
    assert!((lb.value - (4.0f64 / (4.0 * 23.0 * 9.0)).sqrt()).abs() < 1e-12);
    assert!((lb.value - 0.0695).abs() < 1e-4);

    let narrow = Polytope::new(vec![vec![rational(1, 3)], vec![rational(2, 3)]]).unwrap();
    let pn = FourierLBParams { ell: 1, m: rational(1, 1), epsilon: None, zeta_half_m: 1, f_squared: rational(1, 1) };
    let lb = certified_lower_bound(&ShiftedBody::unshifted(narrow), &pn).unwrap();
    assert_eq!(lb.omega, 0);
    assert_eq!(lb.value, 0.0);

    let bad = FourierLBParams { ell: 5, ..pn };
    assert!(certified_lower_bound(&ShiftedBody::unshifted(interval(1, 4)), &bad).is_err());
}

#[test]
fn bound_below_brute_force() {
    for n in 1..=8u64 {
        let bx = BoxSpec::new(vec![n]).unwrap();
        let k = interval(1, n as i64);
        let lb = certified_lower_bound(&ShiftedBody::unshifted(k.clone()), &choose_lb_params(&k).unwrap()).unwrap();
        let opt = brute_force_min_disc(&enumerate_all_aps(&bx).unwrap()).unwrap().min_disc;
        assert!(lb.value <= opt as f64, "{n}");
    }
}

#[test]
fn disc_inequality_audit_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let tri = Polytope::from_integer(&[vec![0, 0], vec![5, 0], vec![0, 4]]).unwrap();
    for (k, m) in [(interval(1, 9), rational(1, 2)), (tri, rational(1, 2))] {
        let body = ShiftedBody::unshifted(k.clone());
        let n = integer_points(&body).unwrap().len();
        let dk = difference_body(&k);
        let steps: Vec<Vec<i64>> = ZetaTable::new(&dk, &m).unwrap().points().iter().map(|(z, _)| z.clone()).collect();
        for _ in 0..10 {
            let b = lp(&steps[rng.gen_range(0..steps.len())]);
            let ell = if b.is_zero() { 1 } else { rng.gen_range(1..=3) };
            let r = disc_inequality_audit(&body, &Coloring::random(n, rng.gen()), &b, ell, &m).unwrap();
            assert!(r.holds, "{r:?}");
        }
    }
}

#[test]
fn shift_search_is_at_least_unshifted() {
    let k = Polytope::new(vec![vec![rational(1, 2)], vec![rational(7, 2)]]).unwrap();
    let searched = lower_bound_search(&k, 2).unwrap();
    assert_eq!(searched.omega, 4);
    let plain = certified_lower_bound(&ShiftedBody::unshifted(k.clone()), &choose_lb_params(&k).unwrap()).unwrap();
    assert_eq!(plain.omega, 3);
    assert!(searched.value >= plain.value);
}
