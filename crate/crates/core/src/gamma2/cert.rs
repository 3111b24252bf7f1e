//! Factorization certificates `A = L R` and the composition rules for the bound
//! `gamma_2(A) <= ||L||_{2->inf} ||R||_{1->2}`.
//!
//! A certificate either stores both factors, or only `R` together with a proven upper bound on
//! the row norms of `L`. The second form is what large instances use: the walk only needs `R`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use super::sparse::SparseMatrix;
use crate::error::{structural, Error, Result};
use crate::system::SetSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TriangleMode {
    Sum,
    Difference,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    Unit,
    Size { max_size: usize },
    Degree { max_degree: u32 },
    Union,
    Triangle { mode: TriangleMode },
    Disjoint,
    SelectRows,
    ProjectColumns,
}

/// Construction tree; subtrees are shared when a certificate is reused.
#[derive(Debug)]
pub struct Node {
    pub op: Op,
    pub value: f64,
    pub rows: usize,
    pub cols: usize,
    pub children: Vec<Arc<Node>>,
}

#[derive(Clone, Debug)]
pub struct Certificate {
    l: Option<SparseMatrix>,
    r: SparseMatrix,
    l_norm: f64,
    r_norm: f64,
    n_rows: usize,
    node: Arc<Node>,
}

impl Certificate {
    fn with_node(
        l: Option<SparseMatrix>,
        r: SparseMatrix,
        l_norm: f64,
        n_rows: usize,
        op: Op,
        children: Vec<Arc<Node>>,
    ) -> Self {
        let r_norm = r.max_col_norm();
        let node = Arc::new(Node { op, value: l_norm * r_norm, rows: n_rows, cols: r.n_cols(), children });
        Certificate { l, r, l_norm, r_norm, n_rows, node }
    }

    /// `||L||_{2->inf} ||R||_{1->2}` (with the stored bound on `L` when `L` is not kept).
    pub fn value(&self) -> f64 {
        self.l_norm * self.r_norm
    }

    pub fn l(&self) -> Option<&SparseMatrix> {
        self.l.as_ref()
    }

    pub fn r(&self) -> &SparseMatrix {
        &self.r
    }

    pub fn l_norm(&self) -> f64 {
        self.l_norm
    }

    pub fn r_norm(&self) -> f64 {
        self.r_norm
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.r.n_cols()
    }

    pub fn inner_dim(&self) -> usize {
        self.r.n_rows()
    }

    pub fn is_full(&self) -> bool {
        self.l.is_some()
    }

    pub fn node(&self) -> &Arc<Node> {
        &self.node
    }

    /// Copy whose right factor has its first stored entry shifted by `delta`; the value and
    /// construction tree are kept, so only validation can tell.
    pub fn tampered(&self, delta: f64) -> Self {
        let mut out = self.clone();
        out.r = self.r.with_entry_shifted(0, delta);
        out
    }

    /// Forgets `L`, keeping its norm as the bound.
    pub fn right_only(mut self) -> Self {
        self.l = None;
        self
    }

    /// Moves a scalar between the factors so both norms equal `sqrt(value)`.
    pub fn balanced(mut self) -> Self {
        if self.l_norm > 0.0 && self.r_norm > 0.0 {
            let c = (self.l_norm / self.r_norm).sqrt();
            if let Some(l) = self.l.as_mut() {
                l.scale(1.0 / c);
            }
            self.r.scale(c);
            let v = (self.l_norm * self.r_norm).sqrt();
            self.l_norm = v;
            self.r_norm = v;
        }
        self
    }

    fn actual_l_norm(l: &Option<SparseMatrix>, bound: f64) -> f64 {
        l.as_ref().map_or(bound, |l| l.max_row_norm())
    }
}

/// `1 x 1` certificate for a single singleton.
pub fn unit_cert() -> Certificate {
    let mut l = SparseMatrix::empty(1);
    l.push_row([(0, 1.0)]);
    Certificate::with_node(Some(l), SparseMatrix::identity(1), 1.0, 1, Op::Unit, vec![])
}

/// `L = A`, `R = I`: value `sqrt(max set size)`.
pub fn size_bound_cert(sys: &SetSystem) -> Certificate {
    let l = SparseMatrix::incidence(sys);
    let max_size = sys.max_set_size();
    Certificate::with_node(
        Some(l),
        SparseMatrix::identity(sys.n_points()),
        (max_size as f64).sqrt(),
        sys.len(),
        Op::Size { max_size },
        vec![],
    )
}

/// Size bound with `L` left implicit.
pub fn size_bound_right_only(n_points: usize, n_rows: usize, max_size: usize) -> Certificate {
    Certificate::with_node(
        None,
        SparseMatrix::identity(n_points),
        (max_size as f64).sqrt(),
        n_rows,
        Op::Size { max_size },
        vec![],
    )
}

/// `L = I`, `R = A`: value `sqrt(max degree)`.
pub fn degree_bound_cert(sys: &SetSystem) -> Certificate {
    let m = sys.len();
    let r = SparseMatrix::incidence(sys);
    let max_degree = sys.max_degree();
    let l_norm = if m > 0 { 1.0 } else { 0.0 };
    Certificate::with_node(Some(SparseMatrix::identity(m)), r, l_norm, m, Op::Degree { max_degree }, vec![])
}

pub fn degree_bound_right_only(sys: &SetSystem) -> Certificate {
    degree_bound_cert(sys).right_only()
}

fn block_diag(a: &SparseMatrix, b: &SparseMatrix) -> SparseMatrix {
    let ka = a.n_cols() as u32;
    let map_a: Vec<u32> = (0..ka).collect();
    let map_b: Vec<u32> = (ka..ka + b.n_cols() as u32).collect();
    a.stack_mapped(&map_a, b, &map_b, a.n_cols() + b.n_cols())
}

/// Rows of `f1` then rows of `f2` on a shared universe: value `sqrt(v1^2 + v2^2)`.
pub fn union_cert(f1: &Certificate, f2: &Certificate) -> Result<Certificate> {
    if f1.n_cols() != f2.n_cols() {
        return Err(structural("union needs certificates on the same universe"));
    }
    if f1.is_full() != f2.is_full() {
        return Err(structural("cannot mix full and right-only certificates"));
    }
    let children = vec![f1.node.clone(), f2.node.clone()];
    let parts: Vec<&Certificate> = [f1, f2].into_iter().filter(|f| f.n_rows > 0).collect();
    let n_rows = f1.n_rows + f2.n_rows;
    if parts.len() < 2 {
        let only = parts.first().copied().unwrap_or(f1);
        return Ok(Certificate::with_node(only.l.clone(), only.r.clone(), only.l_norm, n_rows, Op::Union, children));
    }
    // rows of L scaled to norm <= 1, R absorbs the factor
    let norm = |f: &Certificate| {
        let c = if f.l_norm > 0.0 { f.l_norm } else { 1.0 };
        (f.l.as_ref().map(|l| l.clone().scaled(1.0 / c)), f.r.clone().scaled(c))
    };
    let (l1, r1) = norm(f1);
    let (l2, r2) = norm(f2);
    let l = match (l1, l2) {
        (Some(a), Some(b)) => Some(block_diag(&a, &b)),
        _ => None,
    };
    let l_norm = Certificate::actual_l_norm(&l, 1.0);
    Ok(Certificate::with_node(l, r1.vstack(&r2), l_norm, n_rows, Op::Union, children))
}

/// Row `t` of the result is `row a_t of f1 ± row b_t of f2` (either may be absent).
pub type RowPair = (Option<u32>, Option<u32>);

/// `L = [L1 | ±L2]` on aligned rows, `R = [R1; R2]`: value `<= v1 + v2`.
pub fn triangle_cert(f1: &Certificate, f2: &Certificate, align: &[RowPair], mode: TriangleMode) -> Result<Certificate> {
    triangle_impl(f1, f2, Some(align), align.len(), mode)
}

/// Right-only triangle rule: only the row count of the result is needed.
pub fn triangle_right_only(
    f1: &Certificate,
    f2: &Certificate,
    n_rows: usize,
    mode: TriangleMode,
) -> Result<Certificate> {
    triangle_impl(&f1.clone().right_only(), &f2.clone().right_only(), None, n_rows, mode)
}

fn triangle_impl(
    f1: &Certificate,
    f2: &Certificate,
    align: Option<&[RowPair]>,
    n_rows: usize,
    mode: TriangleMode,
) -> Result<Certificate> {
    if f1.n_cols() != f2.n_cols() {
        return Err(structural("triangle rule needs certificates on the same universe"));
    }
    let a = f1.clone().balanced();
    let b = f2.clone().balanced();
    let sign = match mode {
        TriangleMode::Sum => 1.0,
        TriangleMode::Difference => -1.0,
    };
    let l = match (&a.l, &b.l, align) {
        (Some(la), Some(lb), Some(align)) => {
            let k1 = la.n_cols() as u32;
            let mut l = SparseMatrix::empty(la.n_cols() + lb.n_cols());
            for &(p, q) in align {
                if p.is_some_and(|p| p as usize >= la.n_rows()) || q.is_some_and(|q| q as usize >= lb.n_rows()) {
                    return Err(structural("row alignment out of range"));
                }
                let mut entries = Vec::new();
                if let Some(p) = p {
                    let (idx, val) = la.row(p as usize);
                    entries.extend(idx.iter().zip(val).map(|(&c, &v)| (c, v)));
                }
                if let Some(q) = q {
                    let (idx, val) = lb.row(q as usize);
                    entries.extend(idx.iter().zip(val).map(|(&c, &v)| (c + k1, sign * v)));
                }
                l.push_row(entries);
            }
            Some(l)
        }
        (None, None, _) => None,
        _ => return Err(structural("full triangle rule needs both left factors and an alignment")),
    };
    let bound = (a.l_norm * a.l_norm + b.l_norm * b.l_norm).sqrt();
    let l_norm = Certificate::actual_l_norm(&l, bound);
    let children = vec![f1.node.clone(), f2.node.clone()];
    Ok(Certificate::with_node(l, a.r.vstack(&b.r), l_norm, n_rows, Op::Triangle { mode }, children))
}

/// Certificates on disjoint universes, placed into a combined universe of `n_cols` points via
/// `map1`/`map2`: value `max(v1, v2)`.
pub fn disjoint_support_cert(
    f1: &Certificate,
    map1: &[u32],
    f2: &Certificate,
    map2: &[u32],
    n_cols: usize,
) -> Result<Certificate> {
    if map1.len() != f1.n_cols() || map2.len() != f2.n_cols() {
        return Err(structural("column maps must cover each universe"));
    }
    let mut used = vec![false; n_cols];
    for &c in map1.iter().chain(map2) {
        let slot = used.get_mut(c as usize).ok_or_else(|| structural("column map out of range"))?;
        if *slot {
            return Err(structural("universes overlap"));
        }
        *slot = true;
    }
    if f1.is_full() != f2.is_full() {
        return Err(structural("cannot mix full and right-only certificates"));
    }
    let a = f1.clone().balanced();
    let b = f2.clone().balanced();
    let l = match (&a.l, &b.l) {
        (Some(la), Some(lb)) => Some(block_diag(la, lb)),
        _ => None,
    };
    let l_norm = Certificate::actual_l_norm(&l, a.l_norm.max(b.l_norm));
    let r = a.r.stack_mapped(map1, &b.r, map2, n_cols);
    let children = vec![f1.node.clone(), f2.node.clone()];
    Ok(Certificate::with_node(l, r, l_norm, f1.n_rows + f2.n_rows, Op::Disjoint, children))
}

/// Keeps the listed target rows, in the given order.
pub fn select_rows(f: &Certificate, rows: &[usize]) -> Result<Certificate> {
    if rows.iter().any(|&r| r >= f.n_rows) {
        return Err(structural("row selection out of range"));
    }
    let l = f.l.as_ref().map(|l| l.select_rows(rows));
    let l_norm = Certificate::actual_l_norm(&l, f.l_norm);
    Ok(Certificate::with_node(l, f.r.clone(), l_norm, rows.len(), Op::SelectRows, vec![f.node.clone()]))
}

/// Restricts the universe: column `c` goes to `keep[c]` or is deleted.
pub fn project_columns(f: &Certificate, keep: &[Option<u32>], n_cols: usize) -> Result<Certificate> {
    if keep.len() != f.n_cols() {
        return Err(structural("projection map must cover the universe"));
    }
    let r = f.r.remap_cols(keep, n_cols);
    Ok(Certificate::with_node(f.l.clone(), r, f.l_norm, f.n_rows, Op::ProjectColumns, vec![f.node.clone()]))
}

/// `max |LR - A|` against the incidence matrix of `target`.
pub fn validate(f: &Certificate, target: &SetSystem) -> Result<f64> {
    let l = f.l.as_ref().ok_or_else(|| structural("validation needs the left factor"))?;
    if target.len() != f.n_rows || target.n_points() != f.n_cols() {
        return Err(structural(format!(
            "certificate is {}x{}, target is {}x{}",
            f.n_rows,
            f.n_cols(),
            target.len(),
            target.n_points()
        )));
    }
    let n = f.n_cols();
    let mut acc = vec![0.0f64; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut residual = 0.0f64;
    for i in 0..f.n_rows {
        let (lidx, lval) = l.row(i);
        for (&k, &lv) in lidx.iter().zip(lval) {
            let (ridx, rval) = f.r.row(k as usize);
            for (&j, &rv) in ridx.iter().zip(rval) {
                if acc[j as usize] == 0.0 {
                    touched.push(j);
                }
                acc[j as usize] += lv * rv;
            }
        }
        for &j in target.set(i) {
            acc[j as usize] -= 1.0;
            touched.push(j);
        }
        for &j in &touched {
            residual = residual.max(acc[j as usize].abs());
            acc[j as usize] = 0.0;
        }
        touched.clear();
    }
    Ok(residual)
}

/// Validates and turns a residual above `tol` into a construction error.
pub fn check(f: &Certificate, target: &SetSystem, tol: f64) -> Result<f64> {
    let res = validate(f, target)?;
    if res > tol {
        return Err(Error::Construction(format!("max |LR - A| = {res:e} exceeds {tol:e}")));
    }
    Ok(res)
}

/// Construction tree as a flat node list (shared subtrees appear once), root last.
#[derive(Clone, Debug, Serialize)]
pub struct FlatNode {
    pub id: usize,
    #[serde(flatten)]
    pub op: Op,
    pub value: f64,
    pub rows: usize,
    pub cols: usize,
    pub children: Vec<usize>,
}

pub fn flatten(root: &Arc<Node>) -> Vec<FlatNode> {
    fn visit(n: &Arc<Node>, ids: &mut HashMap<*const Node, usize>, out: &mut Vec<FlatNode>) -> usize {
        if let Some(&id) = ids.get(&Arc::as_ptr(n)) {
            return id;
        }
        let children = n.children.iter().map(|c| visit(c, ids, out)).collect();
        let id = out.len();
        out.push(FlatNode { id, op: n.op.clone(), value: n.value, rows: n.rows, cols: n.cols, children });
        ids.insert(Arc::as_ptr(n), id);
        id
    }
    let mut out = Vec::new();
    visit(root, &mut HashMap::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticePoint, Universe};

    fn line(n: usize) -> Arc<Universe> {
        Arc::new(Universe::new(1, (1..=n as i64).map(|i| LatticePoint(vec![i])).collect()).unwrap())
    }

    fn sys(n: usize, sets: &[&[u32]]) -> SetSystem {
        SetSystem::from_sets(line(n), &sets.iter().map(|s| s.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn size_and_degree_examples() {
        let s = sys(2, &[&[0], &[1]]);
        assert_eq!(size_bound_cert(&s).value(), 1.0);
        let s = sys(3, &[&[0, 1, 2]]);
        let c = size_bound_cert(&s);
        assert!((c.value() - 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(validate(&c, &s).unwrap(), 0.0);
        assert_eq!(degree_bound_cert(&sys(3, &[&[0], &[1, 2]])).value(), 1.0);
        let s = sys(1, &[&[0], &[0]]);
        let c = degree_bound_cert(&s);
        assert!((c.value() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(validate(&c, &s).unwrap(), 0.0);
    }

    #[test]
    fn union_rule() {
        let a = sys(3, &[&[0, 1], &[2]]);
        let b = sys(3, &[&[0], &[0, 2], &[1, 2]]);
        let c = union_cert(&size_bound_cert(&a), &degree_bound_cert(&b)).unwrap();
        let both = sys(3, &[&[0, 1], &[2], &[0], &[0, 2], &[1, 2]]);
        assert!(validate(&c, &both).unwrap() < 1e-12);
        let (v1, v2) = (2f64.sqrt(), 2f64.sqrt());
        assert!(c.value() <= (v1 * v1 + v2 * v2).sqrt() + 1e-9);
        let empty = sys(3, &[]);
        let e = union_cert(&size_bound_cert(&a), &degree_bound_cert(&empty)).unwrap();
        assert!((e.value() - 2f64.sqrt()).abs() < 1e-12);
        assert!(validate(&e, &a).unwrap() < 1e-12);
        assert!(union_cert(&size_bound_cert(&a), &size_bound_cert(&sys(2, &[&[0]]))).is_err());
    }

    #[test]
    fn triangle_rule() {
        let pre = sys(3, &[&[0], &[0, 1], &[0, 1, 2]]);
        let f = size_bound_cert(&pre);
        // {1,2} = {0,1,2} \ {0}, {1} = {0,1} \ {0}, {0,1} = {0,1}
        let align = vec![(Some(2), Some(0)), (Some(1), Some(0)), (Some(1), None)];
        let c = triangle_cert(&f, &f, &align, TriangleMode::Difference).unwrap();
        let target = sys(3, &[&[1, 2], &[1], &[0, 1]]);
        assert!(validate(&c, &target).unwrap() < 1e-12);
        assert!(c.value() <= 2.0 * f.value() + 1e-9);
        let bad = triangle_cert(&f, &f, &[(Some(0), Some(1))], TriangleMode::Sum).unwrap();
        assert!(check(&bad, &sys(3, &[&[0]]), 1e-9).is_err());
        let r = triangle_right_only(&f, &f, 3, TriangleMode::Difference).unwrap();
        assert!((r.value() - 2.0 * f.value()).abs() < 1e-9);
    }

    #[test]
    fn disjoint_rule() {
        let a = sys(2, &[&[0, 1]]);
        let f = size_bound_cert(&a);
        let c = disjoint_support_cert(&f, &[0, 1], &f, &[2, 3], 4).unwrap();
        assert!((c.value() - f.value()).abs() < 1e-12);
        let target = SetSystem::from_sets(line(4), &[vec![0, 1], vec![2, 3]]).unwrap();
        assert!(validate(&c, &target).unwrap() < 1e-12);
        assert!(disjoint_support_cert(&f, &[0, 1], &f, &[1, 2], 4).is_err());
        let g = size_bound_cert(&sys(1, &[]));
        let c = disjoint_support_cert(&f, &[0, 1], &g, &[2], 3).unwrap();
        assert!((c.value() - f.value()).abs() < 1e-12);
    }

    #[test]
    fn projection_and_selection() {
        let a = sys(3, &[&[0, 1], &[1, 2], &[2]]);
        let f = size_bound_cert(&a);
        let p = project_columns(&f, &[Some(0), Some(1), None], 2).unwrap();
        let s = select_rows(&p, &[0]).unwrap();
        let target = SetSystem::from_sets(line(2), &[vec![0, 1]]).unwrap();
        assert!(validate(&s, &target).unwrap() < 1e-12);
        assert!(s.value() <= f.value() + 1e-12);
    }

    #[test]
    fn flatten_shares_nodes() {
        let f = size_bound_cert(&sys(2, &[&[0, 1]]));
        let c = disjoint_support_cert(&f, &[0, 1], &f, &[2, 3], 4).unwrap();
        let flat = flatten(c.node());
        assert_eq!(flat.len(), 2);
        assert_eq!(flat[1].children, vec![0, 0]);
    }
}
