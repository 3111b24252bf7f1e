//! Set systems over a fixed universe and exact evaluation of (prefix) discrepancy.
//!
//! Sets are stored in compressed row form: one flat index array plus offsets. All
//! discrepancy values are exact integers.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{structural, Result};
use crate::lattice::{LatticePoint, Universe};

/// Step index used in [`ApLabel`] for singletons (step zero).
pub const ZERO_STEP: u32 = u32::MAX;

/// Compact provenance of a set generated from an arithmetic progression:
/// start point (universe index), step (index into the system's step table) and length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ApLabel {
    pub start: u32,
    pub step: u32,
    pub len: u32,
}

#[derive(Clone, Debug)]
pub struct SetSystem {
    universe: Arc<Universe>,
    offsets: Vec<usize>,
    indices: Vec<u32>,
    labels: Option<Vec<ApLabel>>,
    steps: Vec<LatticePoint>,
}

impl SetSystem {
    pub fn builder(universe: Arc<Universe>) -> SetSystemBuilder {
        SetSystemBuilder {
            sys: SetSystem { universe, offsets: vec![0], indices: Vec::new(), labels: None, steps: Vec::new() },
        }
    }

    /// Builds a system from explicit index lists; each list is sorted and deduplicated.
    pub fn from_sets(universe: Arc<Universe>, sets: &[Vec<u32>]) -> Result<Self> {
        let mut b = Self::builder(universe);
        for s in sets {
            b.push_unsorted(s.clone())?;
        }
        Ok(b.build())
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn n_points(&self) -> usize {
        self.universe.len()
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn set(&self, i: usize) -> &[u32] {
        &self.indices[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.len()).map(move |i| self.set(i))
    }

    /// Total number of incidences.
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn max_set_size(&self) -> usize {
        self.iter().map(|s| s.len()).max().unwrap_or(0)
    }

    /// Number of sets containing each universe element.
    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n_points()];
        for &i in &self.indices {
            deg[i as usize] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn label(&self, i: usize) -> Option<ApLabel> {
        self.labels.as_ref().map(|l| l[i])
    }

    pub fn labels(&self) -> Option<&[ApLabel]> {
        self.labels.as_deref()
    }

    pub fn steps(&self) -> &[LatticePoint] {
        &self.steps
    }

    /// Step vector of a label (zero vector for singletons).
    pub fn step_of(&self, label: &ApLabel) -> LatticePoint {
        if label.step == ZERO_STEP {
            LatticePoint::zero(self.universe.dim())
        } else {
            self.steps[label.step as usize].clone()
        }
    }

    /// Points of set `i`.
    pub fn points_of(&self, i: usize) -> Vec<LatticePoint> {
        self.set(i).iter().map(|&j| self.universe.point(j as usize).clone()).collect()
    }

    /// Dense 0/1 incidence matrix, rows are sets.
    pub fn incidence_dense(&self) -> Vec<Vec<u8>> {
        let n = self.n_points();
        self.iter()
            .map(|s| {
                let mut row = vec![0u8; n];
                for &j in s {
                    row[j as usize] = 1;
                }
                row
            })
            .collect()
    }

    /// Sub-family with the selected sets, in the given order.
    pub fn select(&self, rows: &[usize]) -> SetSystem {
        let mut b = SetSystem::builder(self.universe.clone());
        b.sys.steps = self.steps.clone();
        for &r in rows {
            b.push_trusted(self.set(r), self.label(r));
        }
        b.build()
    }

    /// Restriction to a sub-universe: `keep[j]` is the new index of old element `j`.
    /// Sets that become empty are dropped; `row_map` receives the old row of each kept set.
    pub fn restrict(&self, new_universe: Arc<Universe>, keep: &[Option<u32>]) -> (SetSystem, Vec<usize>) {
        let mut b = SetSystem::builder(new_universe);
        let mut row_map = Vec::new();
        for (r, s) in self.iter().enumerate() {
            let mapped: Vec<u32> = s.iter().filter_map(|&j| keep[j as usize]).collect();
            if !mapped.is_empty() {
                b.push_unsorted(mapped).expect("restricted indices are in range");
                row_map.push(r);
            }
        }
        (b.build(), row_map)
    }
}

pub struct SetSystemBuilder {
    sys: SetSystem,
}

impl SetSystemBuilder {
    /// Pushes a strictly increasing index list.
    pub fn push(&mut self, set: &[u32]) -> Result<()> {
        self.check(set)?;
        self.push_trusted(set, None);
        Ok(())
    }

    pub fn push_labeled(&mut self, set: &[u32], label: ApLabel) -> Result<()> {
        self.check(set)?;
        self.push_trusted(set, Some(label));
        Ok(())
    }

    pub fn push_unsorted(&mut self, mut set: Vec<u32>) -> Result<()> {
        set.sort_unstable();
        set.dedup();
        self.push(&set)
    }

    /// Registers a step vector and returns its id for labels.
    pub fn add_step(&mut self, step: LatticePoint) -> u32 {
        self.sys.steps.push(step);
        (self.sys.steps.len() - 1) as u32
    }

    fn check(&self, set: &[u32]) -> Result<()> {
        let n = self.sys.universe.len();
        if let Some(&last) = set.last() {
            if last as usize >= n {
                return Err(structural(format!("index {last} out of range for universe of size {n}")));
            }
        }
        if set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(structural("set indices must be strictly increasing"));
        }
        Ok(())
    }

    pub(crate) fn push_trusted(&mut self, set: &[u32], label: Option<ApLabel>) {
        let n_sets = self.sys.offsets.len() - 1;
        match (&mut self.sys.labels, label) {
            (Some(l), Some(lab)) => l.push(lab),
            (None, Some(lab)) if n_sets == 0 => self.sys.labels = Some(vec![lab]),
            (Some(_), None) | (None, Some(_)) => {
                // mixed labelled/unlabelled input: drop labels
                self.sys.labels = None;
            }
            (None, None) => {}
        }
        self.sys.indices.extend_from_slice(set);
        self.sys.offsets.push(self.sys.indices.len());
    }

    pub fn len(&self) -> usize {
        self.sys.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn build(self) -> SetSystem {
        self.sys
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Random,
    Gswalk,
    Bruteforce,
    External,
}

/// A ±1 assignment over a universe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    values: Vec<i8>,
    pub seed: Option<u64>,
    pub provenance: Provenance,
}

impl Coloring {
    pub fn new(values: Vec<i8>, provenance: Provenance, seed: Option<u64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|&&v| v != 1 && v != -1) {
            return Err(structural(format!("coloring entry {bad} is not ±1")));
        }
        Ok(Coloring { values, seed, provenance })
    }

    pub fn external(values: Vec<i8>) -> Result<Self> {
        Self::new(values, Provenance::External, None)
    }

    pub fn random(n: usize, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        Coloring { values, seed: Some(seed), provenance: Provenance::Random }
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Bijection from universe index to rank `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderingSigma {
    rank: Vec<u32>,
}

impl OrderingSigma {
    pub fn new(rank: Vec<u32>) -> Result<Self> {
        let n = rank.len();
        let mut seen = vec![false; n];
        for &r in &rank {
            if r == 0 || r as usize > n || std::mem::replace(&mut seen[r as usize - 1], true) {
                return Err(structural("ranks must be a permutation of 1..=n"));
            }
        }
        Ok(OrderingSigma { rank })
    }

    pub fn identity(n: usize) -> Self {
        OrderingSigma { rank: (1..=n as u32).collect() }
    }

    pub fn rank(&self, i: usize) -> u32 {
        self.rank[i]
    }

    pub fn ranks(&self) -> &[u32] {
        &self.rank
    }

    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }
}

/// Exact sum of the coloring over one set.
pub fn chi_sum(set: &[u32], chi: &Coloring) -> Result<i64> {
    let v = chi.values();
    let mut acc = 0i64;
    for &i in set {
        let x = v
            .get(i as usize)
            .ok_or_else(|| structural(format!("index {i} out of range for coloring of size {}", v.len())))?;
        acc += *x as i64;
    }
    Ok(acc)
}

fn check_universe(sys: &SetSystem, chi: &Coloring) -> Result<()> {
    if chi.len() != sys.n_points() {
        return Err(structural(format!("coloring has {} entries, universe has {}", chi.len(), sys.n_points())));
    }
    Ok(())
}

/// `max_T |chi(T)|`; zero for an empty family.
pub fn disc_eval(sys: &SetSystem, chi: &Coloring) -> Result<i64> {
    check_universe(sys, chi)?;
    let v = chi.values();
    Ok(sys.iter().map(|s| s.iter().map(|&i| v[i as usize] as i64).sum::<i64>().abs()).max().unwrap_or(0))
}

/// Maximum over sets and over sigma-prefixes of each set of the absolute prefix sum.
pub fn pdisc_eval(sys: &SetSystem, sigma: &OrderingSigma, chi: &Coloring) -> Result<i64> {
    check_universe(sys, chi)?;
    if sigma.len() != sys.n_points() {
        return Err(structural("ordering does not match the universe"));
    }
    let v = chi.values();
    let mut best = 0i64;
    let mut buf: Vec<u32> = Vec::new();
    for s in sys.iter() {
        buf.clear();
        buf.extend_from_slice(s);
        buf.sort_unstable_by_key(|&i| sigma.rank(i as usize));
        let mut acc = 0i64;
        for &i in &buf {
            acc += v[i as usize] as i64;
            best = best.max(acc.abs());
        }
    }
    Ok(best)
}

/// Largest |sum| of a contiguous run within one ordered sequence: max prefix minus min prefix,
/// counting the empty prefix.
fn max_slice_abs(values: &[i8], seq: impl Iterator<Item = u32>) -> i64 {
    let (mut acc, mut hi, mut lo) = (0i64, 0i64, 0i64);
    for i in seq {
        acc += values[i as usize] as i64;
        hi = hi.max(acc);
        lo = lo.min(acc);
    }
    hi - lo
}

/// Maximum |chi|-sum over all contiguous slices of every set, slices taken in stored
/// (index) order. Over a lexicographically ordered universe and the maximal progressions,
/// this equals the discrepancy of the full progression family.
pub fn subinterval_max_disc(sys: &SetSystem, chi: &Coloring) -> Result<i64> {
    check_universe(sys, chi)?;
    let v = chi.values();
    Ok(sys.iter().map(|s| max_slice_abs(v, s.iter().copied())).max().unwrap_or(0))
}

/// Same as [`subinterval_max_disc`] with slices taken in sigma order.
pub fn subinterval_max_disc_by(sys: &SetSystem, sigma: &OrderingSigma, chi: &Coloring) -> Result<i64> {
    check_universe(sys, chi)?;
    let v = chi.values();
    let mut best = 0;
    let mut buf: Vec<u32> = Vec::new();
    for s in sys.iter() {
        buf.clear();
        buf.extend_from_slice(s);
        buf.sort_unstable_by_key(|&i| sigma.rank(i as usize));
        best = best.max(max_slice_abs(v, buf.iter().copied()));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Arc<Universe> {
        let pts = (1..=n as i64).map(|i| LatticePoint::from([i])).collect();
        Arc::new(Universe::lex(1, pts).unwrap())
    }

    fn chi(v: &[i8]) -> Coloring {
        Coloring::external(v.to_vec()).unwrap()
    }

    #[test]
    fn chi_sum_examples() {
        assert_eq!(chi_sum(&[0, 1], &chi(&[1, -1])).unwrap(), 0);
        assert_eq!(chi_sum(&[], &chi(&[1, -1])).unwrap(), 0);
        assert_eq!(chi_sum(&[0, 1, 2], &chi(&[1, 1, -1])).unwrap(), 1);
        assert!(chi_sum(&[5], &chi(&[1])).is_err());
    }

    #[test]
    fn disc_eval_examples() {
        let s = SetSystem::from_sets(line(3), &[vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(disc_eval(&s, &chi(&[1, -1, 1])).unwrap(), 0);
        assert_eq!(disc_eval(&s, &chi(&[1, 1, -1])).unwrap(), 2);
        let empty = SetSystem::builder(line(3)).build();
        assert_eq!(disc_eval(&empty, &chi(&[1, 1, 1])).unwrap(), 0);
        assert!(disc_eval(&s, &chi(&[1, 1])).is_err());
    }

    #[test]
    fn pdisc_eval_examples() {
        let u = line(3);
        let s = SetSystem::from_sets(u.clone(), &[vec![0, 1]]).unwrap();
        assert_eq!(pdisc_eval(&s, &OrderingSigma::identity(3), &chi(&[1, -1, 1])).unwrap(), 1);
        let s = SetSystem::from_sets(u, &[vec![0, 1, 2]]).unwrap();
        assert_eq!(pdisc_eval(&s, &OrderingSigma::identity(3), &chi(&[1, 1, 1])).unwrap(), 3);
    }

    #[test]
    fn pdisc_respects_sigma() {
        let s = SetSystem::from_sets(line(3), &[vec![0, 1, 2]]).unwrap();
        // order 2,0,1 : prefix sums -1, 0, 1
        let sigma = OrderingSigma::new(vec![2, 3, 1]).unwrap();
        assert_eq!(pdisc_eval(&s, &sigma, &chi(&[1, 1, -1])).unwrap(), 1);
        assert_eq!(pdisc_eval(&s, &OrderingSigma::identity(3), &chi(&[1, 1, -1])).unwrap(), 2);
    }

    #[test]
    fn subinterval_examples() {
        let u = line(4);
        let s = SetSystem::from_sets(u.clone(), &[vec![0, 1, 2]]).unwrap();
        assert_eq!(subinterval_max_disc(&s, &chi(&[1, 1, -1, 1])).unwrap(), 2);
        let s = SetSystem::from_sets(u, &[vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(subinterval_max_disc(&s, &chi(&[1, -1, 1, -1])).unwrap(), 1);
    }

    #[test]
    fn sigma_must_be_permutation() {
        assert!(OrderingSigma::new(vec![1, 1]).is_err());
        assert!(OrderingSigma::new(vec![0, 1]).is_err());
        assert!(OrderingSigma::new(vec![2, 1]).is_ok());
    }

    #[test]
    fn coloring_rejects_non_signs() {
        assert!(Coloring::external(vec![1, 0]).is_err());
        let c = Coloring::random(100, 3);
        assert!(c.values().iter().all(|&v| v == 1 || v == -1));
        assert_eq!(c, Coloring::random(100, 3));
    }

    #[test]
    fn builder_rejects_unsorted_and_out_of_range() {
        let mut b = SetSystem::builder(line(3));
        assert!(b.push(&[1, 0]).is_err());
        assert!(b.push(&[3]).is_err());
        assert!(b.push(&[0, 2]).is_ok());
    }
}
