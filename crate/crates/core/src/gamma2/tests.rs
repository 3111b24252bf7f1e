use super::*;
use crate::apgen::{enumerate_all_aps, enumerate_maximal_aps, large_step_set};
use crate::body::{Polytope, ShiftedBody};
use crate::lattice::{LatticePoint, Universe};
use crate::system::SetSystem;
use std::sync::Arc;

fn bx(s: &[u64]) -> BoxSpec {
    BoxSpec::new(s.to_vec()).unwrap()
}

#[test]
fn f_of_n_examples() {
    let r = f_of_n(&bx(&[16])).unwrap();
    assert!((r.value - 2.0).abs() < 1e-12);
    assert_eq!(r.argmax_subset, vec![0]);
    let r = f_of_n(&bx(&[16, 16])).unwrap();
    assert!((r.value - 2f64.powf(4.0 / 3.0)).abs() < 1e-12);
    assert_eq!(r.argmax_subset, vec![0, 1]);
    let r = f_of_n(&bx(&[1, 1, 1])).unwrap();
    assert_eq!(r.value, 1.0);
    assert!(r.argmax_subset.is_empty());
    assert!(f_of_n(&BoxSpec::new(vec![1; 21]).unwrap()).is_err());
}

#[test]
fn map_cert_examples() {
    let m = map_cert(&bx(&[16])).unwrap();
    assert!((m.s - 4.0).abs() < 1e-12);
    assert_eq!(m.large_steps, 3);
    assert!(m.cert.value() <= 7f64.sqrt() + 1e-9);
    assert!(check(&m.cert, m.target.as_ref().unwrap(), 1e-9).is_ok());

    let m = map_cert(&bx(&[2])).unwrap();
    assert!(check(&m.cert, m.target.as_ref().unwrap(), 1e-9).is_ok());
    assert!((m.cert.value() - 1.0).abs() < 1e-12);

    let m = map_cert(&bx(&[1])).unwrap();
    assert_eq!(m.target.as_ref().unwrap().len(), 1);
    assert!((m.cert.value() - 1.0).abs() < 1e-12);
}

#[test]
fn map_cert_valid_and_bounded() {
    for s in [vec![5], vec![9], vec![4, 4], vec![6, 3], vec![3, 3, 3], vec![8, 2, 2]] {
        let b = bx(&s);
        let m = map_cert(&b).unwrap();
        let target = m.target.as_ref().unwrap();
        assert!(validate(&m.cert, target).unwrap() <= 1e-9, "{s:?}");
        let v2 = m.cert.value().powi(2);
        assert!(v2 <= m.s + m.large_steps as f64 + 1e-9, "{s:?}: {v2} vs {} + {}", m.s, m.large_steps);
        let sum = map_summary(&b).unwrap();
        assert!((sum.value - m.cert.value()).abs() < 1e-9, "{s:?}: summary {} vs {}", sum.value, m.cert.value());
        assert_eq!(sum.large_steps, large_step_set(&b, m.s).unwrap().len());
    }
}

#[test]
fn ap_cert_examples() {
    let a = ap_cert(&bx(&[1])).unwrap();
    assert!((a.cert.value() - 1.0).abs() < 1e-12);
    for s in
        [vec![2], vec![3], vec![4], vec![5], vec![8], vec![2, 2], vec![3, 2], vec![4, 4], vec![2, 2, 2], vec![3, 2, 3]]
    {
        let b = bx(&s);
        let a = ap_cert(&b).unwrap();
        let target = a.target.as_ref().unwrap();
        assert_eq!(target.len(), enumerate_all_aps(&b).unwrap().len());
        assert!(validate(&a.cert, target).unwrap() <= 1e-9, "{s:?}");
        assert!(a.decay.iter().all(|d| d.holds), "{s:?}");
        let r = ap_cert_right_only(&b).unwrap();
        assert!(a.cert.value() <= r.cert.value() + 1e-9, "{s:?}");
        assert_eq!(r.cert.n_rows(), target.len());
    }
}

#[test]
fn ap_cert_sixteen_ratio() {
    let a = ap_cert(&bx(&[16])).unwrap();
    assert!(validate(&a.cert, a.target.as_ref().unwrap()).unwrap() <= 1e-9);
    assert!(a.ratio() < 20.0);
}

#[test]
fn map_cert_body_matches_box() {
    let b = bx(&[6, 4]);
    let body: ShiftedBody = Polytope::box_body(&b).into();
    let m = map_cert_body(&body).unwrap();
    assert!(validate(&m.cert, m.target.as_ref().unwrap()).unwrap() <= 1e-9);
    let tri: ShiftedBody = Polytope::from_integer(&[vec![0, 0], vec![6, 0], vec![0, 4]]).unwrap().into();
    let m = map_cert_body(&tri).unwrap();
    assert!(validate(&m.cert, m.target.as_ref().unwrap()).unwrap() <= 1e-9);
}

#[test]
fn spectral_examples() {
    let u = Arc::new(Universe::new(1, (1..=4).map(|i| LatticePoint(vec![i])).collect()).unwrap());
    let id = SetSystem::from_sets(u.clone(), &(0..4).map(|i| vec![i]).collect::<Vec<_>>()).unwrap();
    let s = spectral_lower_bounds(&id).unwrap();
    assert!((s.nuclear_over_sqrt_mn - 1.0).abs() < 1e-12);
    assert!((s.sigma_min_disc_lb - 1.0).abs() < 1e-12);
    let ones = SetSystem::from_sets(u, &[vec![0, 1, 2, 3]]).unwrap();
    let s = spectral_lower_bounds(&ones).unwrap();
    assert!((s.nuclear_over_sqrt_mn - 1.0).abs() < 1e-12);
    assert_eq!(s.sigma_min_disc_lb, 0.0);
    let b = bx(&[8]);
    let a = enumerate_all_aps(&b).unwrap();
    let sp = spectral_lower_bounds(&a).unwrap();
    assert!(sp.nuclear_over_sqrt_mn <= ap_cert(&b).unwrap().cert.value() + 1e-9);
    let m = enumerate_maximal_aps(&b).unwrap();
    assert!(spectral_lower_bounds(&m).unwrap().nuclear_over_sqrt_mn <= map_cert(&b).unwrap().cert.value() + 1e-9);
}
