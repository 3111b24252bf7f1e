//! Fixed instances shared by the criterion benches.

use apdisc::body::Polytope;
use apdisc::BoxSpec;

pub fn boxes(sides: &[&[u64]]) -> Vec<BoxSpec> {
    sides.iter().map(|s| BoxSpec::new(s.to_vec()).expect("valid box")).collect()
}

/// Right triangle with legs `r`.
pub fn triangle(r: i64) -> Polytope {
    Polytope::from_integer(&[vec![0, 0], vec![r, 0], vec![0, r]]).expect("triangle")
}
