//! Exact two-phase simplex over rationals (Bland's rule), plus a warm-start cache of
//! bases for repeated right-hand sides.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpResult {
    Infeasible,
    Unbounded,
    Optimal {
        value: Q,
        x: Vec<Q>,
        /// Basic structural column per remaining row.
        basis: Vec<usize>,
    },
}

struct Tableau {
    rows: Vec<Vec<Q>>, // each row: n_cols entries followed by rhs
    basis: Vec<usize>,
    n_cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [Q]) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = &*v / &p;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        if !obj[c].is_zero() {
            let f = obj[c].clone();
            for (v, pv) in obj.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes the objective row (reduced costs, last entry = -value). Columns `>= allowed`
    /// never enter. Returns false when unbounded.
    fn optimize(&mut self, obj: &mut [Q], allowed: usize) -> bool {
        let rhs = self.n_cols;
        loop {
            let Some(c) = (0..allowed).find(|&j| obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[rhs] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c, obj),
            }
        }
    }
}

/// Minimizes `c·x` subject to `A x = b`, `x >= 0`. With `c = None` only feasibility is decided
/// (value 0). Redundant equality rows are dropped.
pub fn simplex(a: &[Vec<Q>], b: &[Q], c: Option<&[Q]>) -> LpResult {
    let m = a.len();
    let n = a.first().map_or(c.map_or(0, |c| c.len()), |r| r.len());
    let n_cols = n + m;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let neg = b[i].is_negative();
        let mut row = Vec::with_capacity(n_cols + 1);
        for x in &a[i][..n] {
            row.push(if neg { -x.clone() } else { x.clone() });
        }
        for k in 0..m {
            row.push(if k == i { Q::one() } else { Q::zero() });
        }
        row.push(if neg { -b[i].clone() } else { b[i].clone() });
        rows.push(row);
    }
    let mut t = Tableau { rows, basis: (n..n_cols).collect(), n_cols };

    // phase 1: minimize the sum of artificials
    let mut obj = vec![Q::zero(); n_cols + 1];
    for row in &t.rows {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[n_cols] -= &row[n_cols];
    }
    t.optimize(&mut obj, n);
    if !obj[n_cols].is_zero() {
        return LpResult::Infeasible;
    }
    // drive artificials out; rows where that is impossible are redundant
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            if let Some(cidx) = (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, cidx, &mut obj);
            } else {
                t.rows.remove(r);
                t.basis.remove(r);
                continue;
            }
        }
        r += 1;
    }

    let mut obj = vec![Q::zero(); n_cols + 1];
    if let Some(c) = c {
        obj[..n].clone_from_slice(&c[..n]);
        for (i, row) in t.rows.iter().enumerate() {
            let cb = c[t.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for (v, rv) in obj.iter_mut().zip(row) {
                *v -= &cb * rv;
            }
        }
        if !t.optimize(&mut obj, n) {
            return LpResult::Unbounded;
        }
    }
    let mut x = vec![Q::zero(); n];
    for (i, &bj) in t.basis.iter().enumerate() {
        x[bj] = t.rows[i][n_cols].clone();
    }
    let value = -obj[n_cols].clone();
    LpResult::Optimal { value, x, basis: t.basis }
}

/// Rank, pivot rows and a basis of the left null space of `a` (vectors `y` with `y^T a = 0`).
pub fn row_structure(a: &[Vec<Q>]) -> (Vec<usize>, Vec<Vec<Q>>) {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    // eliminate on [A | I] to track row combinations
    let mut rows: Vec<Vec<Q>> = (0..m)
        .map(|i| {
            let mut r = a[i].clone();
            r.extend((0..m).map(|k| if k == i { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let mut lead = 0;
    for col in 0..n {
        let Some(p) = (lead..m).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(lead, p);
        let pv = rows[lead][col].clone();
        let prow: Vec<Q> = rows[lead].iter().map(|v| v / &pv).collect();
        for (i, row) in rows.iter_mut().enumerate().take(m) {
            if i != lead && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= &f * pv;
                }
            }
        }
        rows[lead] = prow;
        lead += 1;
    }
    // rows below `lead` vanish in the A part; their tracked combinations span the left null space
    let null = rows[lead..].iter().map(|r| r[n..].to_vec()).collect();
    (greedy_independent_rows(a), null)
}

fn greedy_independent_rows(a: &[Vec<Q>]) -> Vec<usize> {
    let mut basis: Vec<Vec<Q>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut chosen = Vec::new();
    for (i, row) in a.iter().enumerate() {
        let mut r = row.clone();
        for (b, &pc) in basis.iter().zip(&pivots) {
            if !r[pc].is_zero() {
                let f = &r[pc] / &b[pc];
                for (v, bv) in r.iter_mut().zip(b) {
                    *v -= &f * bv;
                }
            }
        }
        if let Some(pc) = r.iter().position(|v| !v.is_zero()) {
            basis.push(r);
            pivots.push(pc);
            chosen.push(i);
        }
    }
    chosen
}

/// Inverse of a square rational matrix, or `None` when singular.
pub fn invert(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let k = m.len();
    let mut aug: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..k).map(|j| if j == i { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..k {
        let p = (col..k).find(|&i| !aug[i][col].is_zero())?;
        aug.swap(col, p);
        let pv = aug[col][col].clone();
        for v in aug[col].iter_mut() {
            *v = &*v / &pv;
        }
        let prow = aug[col].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= &f * pv;
                }
            }
        }
    }
    Some(aug.into_iter().map(|r| r[k..].to_vec()).collect())
}

/// `M / den` with integer `M`, used for fast exact evaluation of `B^{-1} z`.
#[derive(Clone, Debug)]
pub(crate) struct IntInverse {
    pub m: Vec<Vec<i128>>,
    pub den: i128,
}

impl IntInverse {
    pub fn from_rational(inv: &[Vec<Q>]) -> Option<Self> {
        let mut den = BigInt::one();
        for v in inv.iter().flatten() {
            den = num_integer::Integer::lcm(&den, v.denom());
        }
        let limit = BigInt::from(1i128 << 62);
        if den > limit {
            return None;
        }
        let m = inv
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| {
                        let x = v.numer() * (&den / v.denom());
                        if x.abs() > limit {
                            None
                        } else {
                            x.to_i128()
                        }
                    })
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>()?;
        Some(IntInverse { m, den: den.to_i128()? })
    }

    /// Numerators of `M z` (checked), so the true vector is the result over `den`.
    pub fn apply(&self, z: &[i128]) -> Option<Vec<i128>> {
        self.m
            .iter()
            .map(|r| r.iter().zip(z).try_fold(0i128, |acc, (&a, &b)| acc.checked_add(a.checked_mul(b)?)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qv(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn small_lp() {
        // min x + y  s.t. x - y = 1, x, y >= 0  -> 1 at (1, 0)
        let a = vec![qv(&[1, -1])];
        match simplex(&a, &qv(&[1]), Some(&qv(&[1, 1]))) {
            LpResult::Optimal { value, x, .. } => {
                assert_eq!(value, q(1));
                assert_eq!(x, qv(&[1, 0]));
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn infeasible_and_redundant() {
        let a = vec![qv(&[1, 1]), qv(&[1, 1])];
        assert_eq!(simplex(&a, &qv(&[1, 2]), None), LpResult::Infeasible);
        match simplex(&a, &qv(&[1, 1]), None) {
            LpResult::Optimal { basis, .. } => assert_eq!(basis.len(), 1),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn unbounded() {
        let a = vec![qv(&[1, -1])];
        assert_eq!(simplex(&a, &qv(&[0]), Some(&qv(&[0, -1]))), LpResult::Unbounded);
    }

    #[test]
    fn structure_and_inverse() {
        let a = vec![qv(&[1, 2]), qv(&[2, 4]), qv(&[0, 1])];
        let (rows, null) = row_structure(&a);
        assert_eq!(rows, vec![0, 2]);
        assert_eq!(null.len(), 1);
        let inv = invert(&[qv(&[2, 0]), qv(&[0, 4])]).unwrap();
        let ii = IntInverse::from_rational(&inv).unwrap();
        assert_eq!(ii.den, 4);
        assert_eq!(ii.apply(&[2, 4]).unwrap(), vec![4, 4]);
        assert!(invert(&[qv(&[1, 1]), qv(&[1, 1])]).is_none());
    }
}
