use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::apgen::{enumerate_all_aps, enumerate_maximal_aps, lex_order};
use crate::gamma2::{ap_cert, size_bound_cert};
use crate::lattice::{LatticePoint, Universe};

fn bx(s: &[u64]) -> BoxSpec {
    BoxSpec::new(s.to_vec()).unwrap()
}

fn line(n: usize) -> Arc<Universe> {
    Arc::new(Universe::new(1, (1..=n as i64).map(|i| LatticePoint(vec![i])).collect()).unwrap())
}

fn random_unit_columns(k: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = DMatrix::from_fn(k, n, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
    for mut c in r.column_iter_mut() {
        let norm = c.norm();
        c /= norm;
    }
    r
}

#[test]
fn single_column_is_fair() {
    let w = GsWalk::from_dense(&DMatrix::from_element(3, 1, 0.5)).unwrap();
    let runs = 4000;
    let plus = (0..runs).filter(|&s| w.run(s)[0] == 1).count() as f64;
    let sigma = (runs as f64 * 0.25).sqrt();
    assert!((plus - runs as f64 / 2.0).abs() <= 5.0 * sigma, "{plus}");
}

#[test]
fn orthonormal_columns_give_fair_marginals() {
    let n = 8;
    let w = GsWalk::from_dense(&DMatrix::identity(n, n)).unwrap();
    let runs = 10_000u64;
    let mut plus = vec![0.0; n];
    let mut mean = vec![0.0; n];
    for s in 0..runs {
        for (i, &v) in w.run(s).iter().enumerate() {
            if v == 1 {
                plus[i] += 1.0;
            }
            mean[i] += v as f64 / runs as f64;
        }
    }
    let sigma = (runs as f64 * 0.25).sqrt();
    for p in plus {
        assert!((p - runs as f64 / 2.0).abs() <= 5.0 * sigma);
    }
    let norm = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(norm <= 5.0 / (runs as f64).sqrt() * (n as f64).sqrt(), "{norm}");
}

#[test]
fn deterministic_and_signed() {
    let r = random_unit_columns(6, 20, 1);
    let w = GsWalk::from_dense(&r).unwrap();
    for s in 0..20 {
        let x = w.run(s);
        assert_eq!(x, w.run(s));
        assert!(x.iter().all(|&v| v == 1 || v == -1));
    }
}

#[test]
fn martingale_steps() {
    for (k, n) in [(4, 12), (12, 12), (30, 10)] {
        let w = GsWalk::from_dense(&random_unit_columns(k, n, 7)).unwrap();
        for s in 0..20 {
            let t = w.run_traced(s);
            assert!(!t.steps.is_empty());
            let mut frozen = 0;
            for st in &t.steps {
                assert!(st.delta_plus > 0.0 && st.delta_minus > 0.0);
                let scale = st.delta_plus.max(st.delta_minus);
                assert!(st.expected_delta().abs() <= 1e-12 * scale);
                assert!(!st.frozen.is_empty());
                frozen += st.frozen.len();
            }
            assert_eq!(frozen, n);
        }
    }
}

#[test]
fn subgaussian_proxy() {
    for (k, n) in [(8, 64), (64, 64), (64, 16), (16, 40)] {
        let r = random_unit_columns(k, n, 3);
        let w = GsWalk::from_dense(&r).unwrap();
        let runs = 100;
        let good = (0..runs)
            .filter(|&s| {
                let x = DMatrix::from_iterator(n, 1, w.run(s).iter().map(|&v| v as f64));
                (&r * x).norm() <= 4.0 * (k as f64).sqrt()
            })
            .count();
        assert!(good >= 95, "{k}x{n}: {good}");
    }
}

#[test]
fn column_norm_precondition() {
    let err = GsWalk::from_dense(&DMatrix::from_element(2, 1, 1.0)).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
    let err = GsWalk::from_dense(&DMatrix::from_element(1, 1, f64::NAN)).unwrap_err();
    assert!(matches!(err, Error::Structural(_)));
}

#[test]
fn downdate_matches_fresh_inverse() {
    let r = random_unit_columns(9, 7, 5);
    let n = 7;
    let g = r.transpose() * &r;
    let gram: Vec<f64> = (0..n * n).map(|k| g[(k / n, k % n)]).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut h = invert_principal(&gram, n, &idx).unwrap();
    for k in [2, 0, 3] {
        assert!(downdate_remove(&mut h, n, idx.len(), k));
        idx.swap_remove(k);
        let fresh = invert_principal(&gram, n, &idx).unwrap();
        let s = idx.len();
        for a in 0..s {
            for b in 0..s {
                assert!((h[a * n + b] - fresh[a * s + b]).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn singular_direction_has_zero_energy() {
    let r = random_unit_columns(2, 5, 9);
    let n = 5;
    let g = r.transpose() * &r;
    let gram: Vec<f64> = (0..n * n).map(|k| g[(k / n, k % n)]).collect();
    let idx: Vec<usize> = (0..n).collect();
    let u = eigen_direction(&gram, n, &idx, 4);
    assert!((u[4] - 1.0).abs() < 1e-9);
    let uv = DMatrix::from_column_slice(n, 1, &u);
    assert!((&r * uv).norm() < 1e-8);
}

#[test]
fn forced_singleton() {
    let sys = SetSystem::from_sets(line(1), &[vec![0]]).unwrap();
    let cert = size_bound_cert(&sys);
    let rep = gamma2_coloring(&sys, &cert, 0).unwrap();
    assert_eq!(rep.disc, 1);
    assert!(rep.ratio.is_finite());
}

#[test]
fn box_coloring_matches_direct_evaluation() {
    for s in [vec![8u64], vec![4, 3]] {
        let b = bx(&s);
        let a = ap_cert(&b).unwrap();
        let target = a.target.unwrap();
        let via_box = color_box(&b, &a.cert, 11).unwrap();
        let direct = gamma2_coloring(&target, &a.cert, 11).unwrap();
        assert_eq!(via_box.coloring, direct.coloring);
        assert_eq!(via_box.disc, direct.disc);
        assert_eq!(via_box.m, target.len() as u64);
    }
}

#[test]
fn brute_force_examples() {
    let r = brute_force_min_disc(&enumerate_all_aps(&bx(&[2])).unwrap()).unwrap();
    assert_eq!(r.min_disc, 1);
    assert_eq!(r.evaluated, 2);
    let a4 = enumerate_all_aps(&bx(&[4])).unwrap();
    let r = brute_force_min_disc(&a4).unwrap();
    assert_eq!(r.min_disc, 2);
    assert_eq!(r.evaluated, 8);
    assert_eq!(disc_eval(&a4, &r.witness).unwrap(), 2);
    assert_eq!(brute_force_min_disc(&enumerate_all_aps(&bx(&[1, 1])).unwrap()).unwrap().min_disc, 1);

    let pair = SetSystem::from_sets(line(2), &[vec![0, 1]]).unwrap();
    assert_eq!(brute_force_min_pdisc(&pair, &OrderingSigma::identity(2)).unwrap().min_disc, 1);
    let empty = SetSystem::from_sets(line(3), &[]).unwrap();
    assert_eq!(brute_force_min_disc(&empty).unwrap().min_disc, 0);
    assert_eq!(brute_force_min_pdisc(&empty, &OrderingSigma::identity(3)).unwrap().min_disc, 0);

    let m4 = enumerate_maximal_aps(&bx(&[4])).unwrap();
    let p = brute_force_min_pdisc(&m4, &lex_order(&bx(&[4]).universe())).unwrap();
    assert!(2 * p.min_disc >= 2);
}

#[test]
fn brute_force_guard() {
    let big = SetSystem::from_sets(line(27), &[]).unwrap();
    assert!(matches!(brute_force_min_disc(&big), Err(Error::Resource { .. })));
    let mid = SetSystem::from_sets(line(23), &[]).unwrap();
    assert!(matches!(brute_force_min_pdisc(&mid, &OrderingSigma::identity(23)), Err(Error::Resource { .. })));
}

#[test]
fn brute_force_agrees_with_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let n = rng.gen_range(1..=9usize);
        let sets: Vec<Vec<u32>> =
            (0..rng.gen_range(0..8)).map(|_| (0..n as u32).filter(|_| rng.gen_bool(0.5)).collect()).collect();
        let sys = SetSystem::from_sets(line(n), &sets).unwrap();
        let mut best = i64::MAX;
        for code in 0..1u32 << n {
            let chi = Coloring::external((0..n).map(|i| if code >> i & 1 == 1 { -1 } else { 1 }).collect()).unwrap();
            best = best.min(disc_eval(&sys, &chi).unwrap());
        }
        let r = brute_force_min_disc(&sys).unwrap();
        assert_eq!(r.min_disc, best);
        assert_eq!(disc_eval(&sys, &r.witness).unwrap(), best);
    }
}

#[test]
fn ordering_and_reduction_chain() {
    for s in [vec![3u64], vec![6], vec![9], vec![2, 2], vec![3, 3], vec![2, 2, 2]] {
        let b = bx(&s);
        let a = ap_cert(&b).unwrap();
        let target = a.target.as_ref().unwrap();
        let opt = brute_force_min_disc(target).unwrap().min_disc;
        for seed in 0..5 {
            assert!(opt <= color_box(&b, &a.cert, seed).unwrap().disc);
        }
        let p = brute_force_min_pdisc(&enumerate_maximal_aps(&b).unwrap(), &lex_order(&b.universe())).unwrap();
        assert!(opt <= 2 * p.min_disc, "{s:?}");
    }
}
