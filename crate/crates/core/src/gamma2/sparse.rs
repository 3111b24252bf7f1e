//! Compressed sparse row matrices with `f64` entries.

use nalgebra::DMatrix;

use crate::system::SetSystem;

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    data: Vec<f64>,
}

impl SparseMatrix {
    pub fn empty(n_cols: usize) -> Self {
        SparseMatrix { n_cols, indptr: vec![0], indices: Vec::new(), data: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { n_cols: n, indptr: (0..=n).collect(), indices: (0..n as u32).collect(), data: vec![1.0; n] }
    }

    /// Incidence matrix: one row per set.
    pub fn incidence(sys: &SetSystem) -> Self {
        let mut m = SparseMatrix::empty(sys.n_points());
        for set in sys.iter() {
            m.indices.extend_from_slice(set);
            m.data.extend(std::iter::repeat_n(1.0, set.len()));
            m.indptr.push(m.indices.len());
        }
        m
    }

    /// Transposed incidence matrix: one row per point.
    pub fn incidence_transpose(sys: &SetSystem) -> Self {
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); sys.n_points()];
        for (i, set) in sys.iter().enumerate() {
            for &x in set {
                rows[x as usize].push(i as u32);
            }
        }
        let mut m = SparseMatrix::empty(sys.len());
        for r in rows {
            m.push_row(r.iter().map(|&c| (c, 1.0)));
        }
        m
    }

    pub fn push_row(&mut self, entries: impl IntoIterator<Item = (u32, f64)>) {
        for (c, v) in entries {
            debug_assert!((c as usize) < self.n_cols);
            if v != 0.0 {
                self.indices.push(c);
                self.data.push(v);
            }
        }
        self.indptr.push(self.indices.len());
    }

    /// Copy with the `k`-th stored entry shifted by `delta`.
    pub fn with_entry_shifted(&self, k: usize, delta: f64) -> Self {
        let mut out = self.clone();
        if let Some(x) = out.data.get_mut(k) {
            *x += delta;
        }
        out
    }

    pub fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.data[r])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `||M||_{2->inf}`: largest row norm.
    pub fn max_row_norm(&self) -> f64 {
        (0..self.n_rows()).map(|i| self.row(i).1.iter().map(|v| v * v).sum::<f64>()).fold(0.0, f64::max).sqrt()
    }

    pub fn col_norms_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for (&c, &v) in self.indices.iter().zip(&self.data) {
            out[c as usize] += v * v;
        }
        out
    }

    /// `||M||_{1->2}`: largest column norm.
    pub fn max_col_norm(&self) -> f64 {
        self.col_norms_sq().into_iter().fold(0.0, f64::max).sqrt()
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.scale(c);
        self
    }

    pub fn vstack(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.n_cols, other.n_cols, "vstack needs equal column counts");
        let mut m = self.clone();
        let base = m.indices.len();
        m.indices.extend_from_slice(&other.indices);
        m.data.extend_from_slice(&other.data);
        m.indptr.extend(other.indptr[1..].iter().map(|p| p + base));
        m
    }

    /// Rows of `self` then rows of `other`, with columns remapped into a shared space.
    pub fn stack_mapped(&self, map_a: &[u32], other: &SparseMatrix, map_b: &[u32], n_cols: usize) -> SparseMatrix {
        let mut m = SparseMatrix::empty(n_cols);
        for (src, map) in [(self, map_a), (other, map_b)] {
            for i in 0..src.n_rows() {
                let (idx, val) = src.row(i);
                m.push_row(idx.iter().zip(val).map(|(&c, &v)| (map[c as usize], v)));
            }
        }
        m
    }

    /// Drops columns mapped to `None` and renumbers the rest.
    pub fn remap_cols(&self, map: &[Option<u32>], n_cols: usize) -> SparseMatrix {
        let mut m = SparseMatrix::empty(n_cols);
        for i in 0..self.n_rows() {
            let (idx, val) = self.row(i);
            m.push_row(idx.iter().zip(val).filter_map(|(&c, &v)| map[c as usize].map(|nc| (nc, v))));
        }
        m
    }

    pub fn select_rows(&self, rows: &[usize]) -> SparseMatrix {
        let mut m = SparseMatrix::empty(self.n_cols);
        for &r in rows {
            let (idx, val) = self.row(r);
            m.push_row(idx.iter().copied().zip(val.iter().copied()));
        }
        m
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n_rows(), self.n_cols);
        for i in 0..self.n_rows() {
            let (idx, val) = self.row(i);
            for (&c, &v) in idx.iter().zip(val) {
                d[(i, c as usize)] += v;
            }
        }
        d
    }

    /// `M^T M` as a dense row-major `n_cols x n_cols` buffer.
    pub fn gram(&self) -> Vec<f64> {
        let n = self.n_cols;
        let mut g = vec![0.0; n * n];
        for i in 0..self.n_rows() {
            let (idx, val) = self.row(i);
            for (a, (&ca, &va)) in idx.iter().zip(val).enumerate() {
                let row = ca as usize * n;
                for (&cb, &vb) in idx[a..].iter().zip(&val[a..]) {
                    g[row + cb as usize] += va * vb;
                }
            }
        }
        // each off-diagonal pair landed in exactly one triangle
        for i in 0..n {
            for j in 0..i {
                let v = g[j * n + i] + g[i * n + j];
                g[j * n + i] = v;
                g[i * n + j] = v;
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_and_stacking() {
        let mut a = SparseMatrix::empty(3);
        a.push_row([(0, 3.0), (2, 4.0)]);
        a.push_row([(1, 1.0)]);
        assert_eq!(a.max_row_norm(), 5.0);
        assert_eq!(a.max_col_norm(), 4.0);
        let b = a.vstack(&SparseMatrix::identity(3));
        assert_eq!(b.n_rows(), 5);
        assert_eq!(b.col_norms_sq(), vec![10.0, 2.0, 17.0]);
        let c = a.remap_cols(&[Some(0), None, Some(1)], 2);
        assert_eq!(c.row(1).0.len(), 0);
        assert_eq!(c.row(0).0, &[0, 1]);
    }

    #[test]
    fn gram_matches_dense() {
        let mut a = SparseMatrix::empty(3);
        a.push_row([(0, 1.0), (2, 2.0)]);
        a.push_row([(0, -1.0), (1, 1.0), (2, 1.0)]);
        let d = a.to_dense();
        let g = d.transpose() * &d;
        let s = a.gram();
        for i in 0..3 {
            for j in 0..3 {
                assert!((g[(i, j)] - s[i * 3 + j]).abs() < 1e-12);
            }
        }
    }
}
