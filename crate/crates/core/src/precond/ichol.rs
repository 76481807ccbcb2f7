//! Threshold incomplete Cholesky, left-looking by columns.

use crate::error::{shape_err, Error, Result};
use crate::sparse::SparseMatrix;

/// Incomplete factor `L L^T ≈ A` stored by columns, diagonal first.
#[derive(Clone, Debug)]
pub struct IncompleteCholesky {
    n: usize,
    col_offsets: Vec<usize>,
    row_indices: Vec<usize>,
    values: Vec<f64>,
}

impl IncompleteCholesky {
    /// Fill entries are dropped when the updated value before scaling by the
    /// pivot satisfies `|w_i| < drop_tol * ||A(i,:)||_2`. Entries in the
    /// pattern of `A` are always kept, so `drop_tol = 0` keeps everything.
    pub fn new(a: &SparseMatrix, drop_tol: f64) -> Result<Self> {
        if !a.is_square() {
            return shape_err("incomplete Cholesky needs a square matrix");
        }
        if !(drop_tol >= 0.0) {
            return Err(Error::InvalidArgument(format!("drop tolerance {drop_tol} must be >= 0")));
        }
        let n = a.nrows();
        let row_norms = a.row_norms();
        let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
        let mut ptr = vec![0usize; n];
        let mut pending: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut w = vec![0.0; n];
        let mut mark = vec![false; n];
        let mut in_a = vec![usize::MAX; n];
        let mut pat: Vec<usize> = Vec::new();
        for j in 0..n {
            pat.clear();
            let (acols, avals) = a.row(j);
            for (&i, &v) in acols.iter().zip(avals) {
                if i >= j {
                    w[i] = v;
                    mark[i] = true;
                    pat.push(i);
                    in_a[i] = j;
                }
            }
            if !mark[j] {
                mark[j] = true;
                w[j] = 0.0;
                pat.push(j);
            }
            let work = std::mem::take(&mut pending[j]);
            for k in work {
                let col = &cols[k];
                let p = ptr[k];
                let ljk = col[p].1;
                for &(i, lik) in &col[p..] {
                    if !mark[i] {
                        mark[i] = true;
                        w[i] = 0.0;
                        pat.push(i);
                    }
                    w[i] -= ljk * lik;
                }
                ptr[k] += 1;
                if ptr[k] < col.len() {
                    pending[col[ptr[k]].0].push(k);
                }
            }
            let d = w[j];
            if !(d > 0.0) || !d.is_finite() {
                for &i in &pat {
                    mark[i] = false;
                }
                return Err(Error::Breakdown {
                    row: j,
                    reason: format!("non-positive pivot {d:e} in incomplete Cholesky"),
                });
            }
            let ljj = d.sqrt();
            pat.sort_unstable();
            let mut col = Vec::with_capacity(pat.len());
            col.push((j, ljj));
            for &i in &pat {
                mark[i] = false;
                if i == j {
                    continue;
                }
                let v = w[i];
                if in_a[i] == j || v.abs() >= drop_tol * row_norms[i] {
                    if v != 0.0 || in_a[i] == j {
                        col.push((i, v / ljj));
                    }
                }
            }
            ptr[j] = 1;
            if col.len() > 1 {
                pending[col[1].0].push(j);
            }
            cols.push(col);
        }
        let mut col_offsets = Vec::with_capacity(n + 1);
        col_offsets.push(0);
        let mut row_indices = Vec::new();
        let mut values = Vec::new();
        for col in cols {
            for (i, v) in col {
                row_indices.push(i);
                values.push(v);
            }
            col_offsets.push(row_indices.len());
        }
        Ok(Self {
            n,
            col_offsets,
            row_indices,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// The factor as a sparse lower-triangular matrix.
    pub fn factor(&self) -> SparseMatrix {
        let mut t = Vec::with_capacity(self.nnz());
        for j in 0..self.n {
            for k in self.col_offsets[j]..self.col_offsets[j + 1] {
                t.push((self.row_indices[k], j, self.values[k]));
            }
        }
        SparseMatrix::from_triplets(self.n, self.n, &t).expect("factor pattern is valid")
    }

    /// x = (L L^T)^{-1} b
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        if b.len() != self.n || x.len() != self.n {
            return shape_err("incomplete Cholesky apply dimension mismatch");
        }
        x.copy_from_slice(b);
        for j in 0..self.n {
            let (lo, hi) = (self.col_offsets[j], self.col_offsets[j + 1]);
            x[j] /= self.values[lo];
            let xj = x[j];
            for k in lo + 1..hi {
                x[self.row_indices[k]] -= self.values[k] * xj;
            }
        }
        for j in (0..self.n).rev() {
            let (lo, hi) = (self.col_offsets[j], self.col_offsets[j + 1]);
            let mut s = x[j];
            for k in lo + 1..hi {
                s -= self.values[k] * x[self.row_indices[k]];
            }
            x[j] = s / self.values[lo];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn two_by_two_factor() {
        let a = SparseMatrix::from_dense(&[vec![4.0, -1.0], vec![-1.0, 4.0]]).unwrap();
        let l = IncompleteCholesky::new(&a, 0.0).unwrap().factor();
        assert!((l.get(0, 0) - 2.0).abs() < 1e-15);
        assert!((l.get(1, 0) + 0.5).abs() < 1e-15);
        assert!((l.get(1, 1) - 3.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exact_on_tridiagonal() {
        let a = tridiag(30);
        let ic = IncompleteCholesky::new(&a, 0.1).unwrap();
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let b = a.spmv(&x).unwrap();
        let mut y = vec![0.0; 30];
        ic.solve_into(&b, &mut y).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn breakdown_names_row() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        match IncompleteCholesky::new(&a, 0.0) {
            Err(Error::Breakdown { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected breakdown, got {other:?}"),
        }
    }
}
