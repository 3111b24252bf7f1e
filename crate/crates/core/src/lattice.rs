//! Integer points and ordered ground sets.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{structural, Result};

/// A point of the integer lattice. The derived `Ord` is the lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticePoint(coords)
    }

    pub fn zero(dim: usize) -> Self {
        LatticePoint(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i64) -> LatticePoint {
        LatticePoint(self.0.iter().map(|a| a * k).collect())
    }

    /// `self + k * step`.
    pub fn offset(&self, step: &LatticePoint, k: i64) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&step.0).map(|(a, b)| a + k * b).collect())
    }

    pub fn neg(&self) -> LatticePoint {
        self.scale(-1)
    }

    /// Index of the first nonzero coordinate.
    pub fn leading_index(&self) -> Option<usize> {
        self.0.iter().position(|&c| c != 0)
    }

    /// True when the first nonzero coordinate is positive.
    pub fn is_canonical_direction(&self) -> bool {
        matches!(self.leading_index(), Some(i) if self.0[i] > 0)
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint(v)
    }
}

impl<const D: usize> From<[i64; D]> for LatticePoint {
    fn from(v: [i64; D]) -> Self {
        LatticePoint(v.to_vec())
    }
}

/// Ordered list of distinct lattice points with a reverse index.
#[derive(Clone, Debug)]
pub struct Universe {
    dim: usize,
    points: Vec<LatticePoint>,
    index: HashMap<LatticePoint, usize>,
}

impl PartialEq for Universe {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points == other.points
    }
}

impl Universe {
    /// Builds a universe keeping the given order. Points must be distinct and share one dimension.
    pub fn new(dim: usize, points: Vec<LatticePoint>) -> Result<Self> {
        if dim == 0 {
            return Err(structural("dimension must be at least 1"));
        }
        let mut index = HashMap::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if p.dim() != dim {
                return Err(structural(format!("point {p} has dimension {}, expected {dim}", p.dim())));
            }
            if index.insert(p.clone(), i).is_some() {
                return Err(structural(format!("duplicate point {p}")));
            }
        }
        Ok(Universe { dim, points, index })
    }

    /// Builds a universe ordered lexicographically.
    pub fn lex(dim: usize, mut points: Vec<LatticePoint>) -> Result<Self> {
        points.sort();
        Self::new(dim, points)
    }

    pub fn empty(dim: usize) -> Self {
        Universe { dim, points: Vec::new(), index: HashMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &LatticePoint {
        &self.points[i]
    }

    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.index.contains_key(p)
    }

    /// True when the stored order is the lexicographic order.
    pub fn is_lex_sorted(&self) -> bool {
        self.points.windows(2).all(|w| w[0] < w[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lex_compare_first_coordinate_decides() {
        assert!(LatticePoint::from([1, 3]) < LatticePoint::from([2, 1]));
        assert!(LatticePoint::from([2, 1]) < LatticePoint::from([2, 2]));
    }

    #[test]
    fn universe_rejects_duplicates_and_bad_dimension() {
        let pts = vec![LatticePoint::from([1, 1]), LatticePoint::from([1, 1])];
        assert!(Universe::new(2, pts).is_err());
        assert!(Universe::new(2, vec![LatticePoint::from([1])]).is_err());
        assert!(Universe::new(0, vec![]).is_err());
    }

    #[test]
    fn universe_index_is_inverse_of_points() {
        let pts = vec![LatticePoint::from([2, 1]), LatticePoint::from([1, 2]), LatticePoint::from([1, 1])];
        let u = Universe::lex(2, pts).unwrap();
        assert!(u.is_lex_sorted());
        for (i, p) in u.points().iter().enumerate() {
            assert_eq!(u.index_of(p), Some(i));
        }
    }

    #[test]
    fn canonical_direction() {
        assert!(LatticePoint::from([0, 2, -1]).is_canonical_direction());
        assert!(!LatticePoint::from([0, -2, 1]).is_canonical_direction());
        assert!(!LatticePoint::from([0, 0]).is_canonical_direction());
    }
}
