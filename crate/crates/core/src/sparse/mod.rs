//! Compressed sparse row matrices and the symmetric/skew-symmetric split.

mod mm;
mod split;

pub use mm::{read_matrix_market, read_vector_market, write_matrix_market, write_vector_market};
pub use split::{split, SplitOperator};

use crate::error::{shape_err, Error, Result};
use crate::operator::{check_dims, LinearOperator};

/// Real sparse matrix in CSR form. Column indices are strictly increasing
/// within each row; explicit zeros are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating them.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 {
            return Err(Error::Structure(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n_rows + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::Structure("row_offsets[0] must be 0".into()));
        }
        let nnz = *row_offsets.last().unwrap();
        if col_indices.len() != nnz || values.len() != nnz {
            return Err(Error::Structure(format!(
                "nnz mismatch: offsets say {}, {} indices, {} values",
                nnz,
                col_indices.len(),
                values.len()
            )));
        }
        for i in 0..n_rows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::Structure(format!("row_offsets decrease at row {i}")));
            }
            for k in lo..hi {
                if col_indices[k] >= n_cols {
                    return Err(Error::Structure(format!(
                        "column index {} out of range in row {i}",
                        col_indices[k]
                    )));
                }
                if k > lo && col_indices[k] <= col_indices[k - 1] {
                    return Err(Error::Structure(format!(
                        "column indices not strictly increasing in row {i}"
                    )));
                }
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Structure("non-finite value".into()));
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from (row, col, value) triplets; duplicates are summed
    /// in input order.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        for &(i, j, v) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::Structure(format!(
                    "triplet ({i}, {j}) outside {n_rows}x{n_cols}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Structure(format!("non-finite value at ({i}, {j})")));
            }
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &k in &order {
            let (i, j, v) = triplets[k];
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(j);
                values.push(v);
                row_offsets[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_offsets: vec![0; n_rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: d.to_vec(),
        }
    }

    /// Dense row-major input; exact zeros are dropped.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut t = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n_cols {
                return shape_err("ragged dense input");
            }
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n_rows, n_cols, &t)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[i][j] += v;
            }
        }
        d
    }

    pub fn nrows(&self) -> usize {
        self.n_rows
    }
    pub fn ncols(&self) -> usize {
        self.n_cols
    }
    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }
    pub fn nnz(&self) -> usize {
        self.values.len()
    }
    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }
    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }
    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Entry (i, j), zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let nnz = self.nnz();
        let mut counts = vec![0usize; self.n_cols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let row_offsets = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let k = next[j];
                col_indices[k] = i;
                values[k] = v;
                next[j] += 1;
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// y = A x
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n_cols || y.len() != self.n_rows {
            return shape_err(format!(
                "spmv: matrix is {}x{}, x has {}, y has {}",
                self.n_rows,
                self.n_cols,
                x.len(),
                y.len()
            ));
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            *yi = acc;
        }
        Ok(())
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// y = A^T x
    pub fn spmv_transpose_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.n_rows || y.len() != self.n_cols {
            return shape_err(format!(
                "spmv_transpose: matrix is {}x{}, x has {}, y has {}",
                self.n_rows,
                self.n_cols,
                x.len(),
                y.len()
            ));
        }
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n_rows {
            let xi = x[i];
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += v * xi;
            }
        }
        Ok(())
    }

    /// alpha * self + beta * other over the union pattern.
    pub fn add_scaled(&self, alpha: f64, other: &SparseMatrix, beta: f64) -> Result<Self> {
        if self.shape() != other.shape() {
            return shape_err(format!(
                "cannot add {}x{} and {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            ));
        }
        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n_rows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let ja = ca.get(p).copied().unwrap_or(usize::MAX);
                let jb = cb.get(q).copied().unwrap_or(usize::MAX);
                if ja == jb {
                    col_indices.push(ja);
                    values.push(alpha * va[p] + beta * vb[q]);
                    p += 1;
                    q += 1;
                } else if ja < jb {
                    col_indices.push(ja);
                    values.push(alpha * va[p]);
                    p += 1;
                } else {
                    col_indices.push(jb);
                    values.push(beta * vb[q]);
                    q += 1;
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn add(&self, other: &SparseMatrix) -> Result<Self> {
        if self.shape() != other.shape() {
            return shape_err("add: shape mismatch");
        }
        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.n_rows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let ja = ca.get(p).copied().unwrap_or(usize::MAX);
                let jb = cb.get(q).copied().unwrap_or(usize::MAX);
                if ja == jb {
                    col_indices.push(ja);
                    values.push(va[p] + vb[q]);
                    p += 1;
                    q += 1;
                } else if ja < jb {
                    col_indices.push(ja);
                    values.push(va[p]);
                    p += 1;
                } else {
                    col_indices.push(jb);
                    values.push(vb[q]);
                    q += 1;
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// Sparse product self * other.
    pub fn matmul(&self, other: &SparseMatrix) -> Result<Self> {
        if self.n_cols != other.n_rows {
            return shape_err(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            ));
        }
        let mut acc = vec![0.0; other.n_cols];
        let mut mark = vec![usize::MAX; other.n_cols];
        let mut row_offsets = vec![0usize];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        let mut pattern: Vec<usize> = Vec::new();
        for i in 0..self.n_rows {
            pattern.clear();
            let (ca, va) = self.row(i);
            for (&k, &a) in ca.iter().zip(va) {
                let (cb, vb) = other.row(k);
                for (&j, &b) in cb.iter().zip(vb) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        pattern.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                col_indices.push(j);
                values.push(acc[j]);
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Kronecker product self ⊗ other.
    pub fn kron(&self, other: &SparseMatrix) -> Self {
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for i in 0..self.n_rows {
            let (ca, va) = self.row(i);
            for (&j, &a) in ca.iter().zip(va) {
                for k in 0..other.n_rows {
                    let (cb, vb) = other.row(k);
                    for (&l, &b) in cb.iter().zip(vb) {
                        t.push((i * other.n_rows + k, j * other.n_cols + l, a * b));
                    }
                }
            }
        }
        Self::from_triplets(self.n_rows * other.n_rows, self.n_cols * other.n_cols, &t)
            .expect("kron indices are in range")
    }

    /// Assembles a block matrix. Every block row must contain at least one
    /// `Some` block fixing its height, and likewise for block columns.
    pub fn block(blocks: &[Vec<Option<&SparseMatrix>>]) -> Result<Self> {
        let br = blocks.len();
        let bc = blocks.first().map_or(0, |r| r.len());
        let mut heights = vec![None; br];
        let mut widths = vec![None; bc];
        for (p, row) in blocks.iter().enumerate() {
            if row.len() != bc {
                return shape_err("ragged block layout");
            }
            for (q, b) in row.iter().enumerate() {
                if let Some(m) = b {
                    for (slot, val) in [(&mut heights[p], m.n_rows), (&mut widths[q], m.n_cols)] {
                        match slot {
                            Some(v) if *v != val => return shape_err("inconsistent block sizes"),
                            _ => *slot = Some(val),
                        }
                    }
                }
            }
        }
        let heights: Vec<usize> = heights
            .into_iter()
            .map(|h| h.ok_or_else(|| Error::Shape("empty block row".into())))
            .collect::<Result<_>>()?;
        let widths: Vec<usize> = widths
            .into_iter()
            .map(|w| w.ok_or_else(|| Error::Shape("empty block column".into())))
            .collect::<Result<_>>()?;
        let roff: Vec<usize> = std::iter::once(0)
            .chain(heights.iter().scan(0, |s, h| {
                *s += h;
                Some(*s)
            }))
            .collect();
        let coff: Vec<usize> = std::iter::once(0)
            .chain(widths.iter().scan(0, |s, w| {
                *s += w;
                Some(*s)
            }))
            .collect();
        let mut t = Vec::new();
        for (p, row) in blocks.iter().enumerate() {
            for (q, b) in row.iter().enumerate() {
                if let Some(m) = b {
                    for i in 0..m.n_rows {
                        let (cols, vals) = m.row(i);
                        for (&j, &v) in cols.iter().zip(vals) {
                            t.push((roff[p] + i, coff[q] + j, v));
                        }
                    }
                }
            }
        }
        Self::from_triplets(roff[br], coff[bc], &t)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Euclidean norm of each row.
    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.n_rows)
            .map(|i| self.row(i).1.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    /// True when A(i,j) == A(j,i) bitwise for all stored entries.
    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.n_rows).all(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).all(|(&j, &v)| self.get(j, i) == v)
            })
    }

    /// True when A(i,j) == -A(j,i) bitwise for all stored entries.
    pub fn is_skew_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.n_rows).all(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).all(|(&j, &v)| self.get(j, i) == -v)
            })
    }

    /// Half bandwidth max |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n_rows)
            .flat_map(|i| self.row(i).0.iter().map(move |&j| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// Copy with entries of magnitude below `tol` removed.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if v.abs() > tol {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(self.n_rows, self.n_cols, &t).expect("pattern is valid")
    }
}

impl LinearOperator for SparseMatrix {
    fn nrows(&self) -> usize {
        self.n_rows
    }
    fn ncols(&self) -> usize {
        self.n_cols
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dims(self, x, y)?;
        self.spmv_into(x, y)
    }
    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.spmv_transpose_into(x, y)
    }
    fn has_adjoint(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SparseMatrix {
        SparseMatrix::from_dense(&[vec![2.0, 1.0, 0.0], vec![0.0, 3.0, -1.0], vec![4.0, 0.0, 5.0]]).unwrap()
    }

    #[test]
    fn triplets_sum_duplicates() {
        let m = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 2.0), (0, 1, 0.5)]).unwrap();
        assert_eq!(m.get(0, 1), 1.5);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn new_rejects_unsorted_columns() {
        let e = SparseMatrix::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]);
        assert!(matches!(e, Err(Error::Structure(_))));
    }

    #[test]
    fn spmv_and_transpose() {
        let m = small();
        let y = m.spmv(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(y, vec![4.0, 3.0, 19.0]);
        let mut z = vec![0.0; 3];
        m.spmv_transpose_into(&[1.0, 2.0, 3.0], &mut z).unwrap();
        assert_eq!(z, vec![14.0, 7.0, 13.0]);
        assert_eq!(m.transpose().transpose(), m);
    }

    #[test]
    fn spmv_shape_error() {
        assert!(matches!(small().spmv(&[1.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn matmul_matches_dense() {
        let m = small();
        let p = m.matmul(&m).unwrap().to_dense();
        let d = m.to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let e: f64 = (0..3).map(|k| d[i][k] * d[k][j]).sum();
                assert_eq!(p[i][j], e);
            }
        }
    }

    #[test]
    fn kron_of_identities() {
        let k = SparseMatrix::identity(2).kron(&small());
        assert_eq!(k.shape(), (6, 6));
        assert_eq!(k.get(4, 3), 0.0);
        assert_eq!(k.get(5, 3), 4.0);
        assert_eq!(k.get(3, 3), 2.0);
    }

    #[test]
    fn block_layout() {
        let a = SparseMatrix::identity(2);
        let b = SparseMatrix::from_dense(&[vec![1.0], vec![2.0]]).unwrap();
        let bt = b.transpose();
        let k = SparseMatrix::block(&[vec![Some(&a), Some(&b)], vec![Some(&bt), None]]).unwrap();
        assert_eq!(k.shape(), (3, 3));
        assert_eq!(k.get(2, 1), 2.0);
        assert_eq!(k.get(1, 2), 2.0);
        assert_eq!(k.get(2, 2), 0.0);
    }
}
