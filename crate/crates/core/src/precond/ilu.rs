//! Threshold incomplete LU (ILUT-style, no pivoting), row by row.

use std::collections::BTreeSet;

use crate::error::{shape_err, Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Clone, Debug)]
pub struct IncompleteLu {
    n: usize,
    // unit lower L, strictly lower part by rows
    l_offsets: Vec<usize>,
    l_cols: Vec<usize>,
    l_vals: Vec<f64>,
    // upper U by rows, diagonal first
    u_offsets: Vec<usize>,
    u_cols: Vec<usize>,
    u_vals: Vec<f64>,
}

impl IncompleteLu {
    /// Fill entries with `|w| < drop_tol * ||A(i,:)||_2` are dropped; entries
    /// in the pattern of `A` are kept.
    pub fn new(a: &SparseMatrix, drop_tol: f64) -> Result<Self> {
        if !a.is_square() {
            return shape_err("incomplete LU needs a square matrix");
        }
        if !(drop_tol >= 0.0) {
            return Err(Error::InvalidArgument(format!("drop tolerance {drop_tol} must be >= 0")));
        }
        let n = a.nrows();
        let row_norms = a.row_norms();
        let mut w = vec![0.0; n];
        let mut mark = vec![false; n];
        let mut in_a = vec![usize::MAX; n];
        let mut l_offsets = vec![0usize];
        let mut l_cols = Vec::new();
        let mut l_vals = Vec::new();
        let mut u_offsets = vec![0usize];
        let mut u_cols: Vec<usize> = Vec::new();
        let mut u_vals: Vec<f64> = Vec::new();
        let mut upper: Vec<usize> = Vec::new();
        for i in 0..n {
            let tol = drop_tol * row_norms[i];
            let mut lower = BTreeSet::new();
            upper.clear();
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                w[j] = v;
                mark[j] = true;
                in_a[j] = i;
                if j < i {
                    lower.insert(j);
                } else {
                    upper.push(j);
                }
            }
            if !mark[i] {
                mark[i] = true;
                w[i] = 0.0;
                upper.push(i);
            }
            let mut lrow: Vec<(usize, f64)> = Vec::new();
            while let Some(k) = lower.pop_first() {
                let (ulo, uhi) = (u_offsets[k], u_offsets[k + 1]);
                let lik = w[k] / u_vals[ulo];
                mark[k] = false;
                if in_a[k] != i && lik.abs() * u_vals[ulo].abs() < tol {
                    continue;
                }
                if lik == 0.0 {
                    continue;
                }
                lrow.push((k, lik));
                for p in ulo + 1..uhi {
                    let j = u_cols[p];
                    if !mark[j] {
                        mark[j] = true;
                        w[j] = 0.0;
                        if j < i {
                            lower.insert(j);
                        } else {
                            upper.push(j);
                        }
                    }
                    w[j] -= lik * u_vals[p];
                }
            }
            upper.sort_unstable();
            let d = w[i];
            if d == 0.0 || !d.is_finite() {
                return Err(Error::Breakdown {
                    row: i,
                    reason: "zero pivot in incomplete LU".into(),
                });
            }
            u_cols.push(i);
            u_vals.push(d);
            for &j in &upper {
                mark[j] = false;
                if j == i {
                    continue;
                }
                let v = w[j];
                if in_a[j] == i || (v != 0.0 && v.abs() >= tol) {
                    u_cols.push(j);
                    u_vals.push(v);
                }
            }
            u_offsets.push(u_cols.len());
            lrow.sort_unstable_by_key(|e| e.0);
            for (k, v) in lrow {
                l_cols.push(k);
                l_vals.push(v);
            }
            l_offsets.push(l_cols.len());
        }
        Ok(Self {
            n,
            l_offsets,
            l_cols,
            l_vals,
            u_offsets,
            u_cols,
            u_vals,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.l_vals.len() + self.u_vals.len()
    }

    /// x = (LU)^{-1} b
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        if b.len() != self.n || x.len() != self.n {
            return shape_err("incomplete LU apply dimension mismatch");
        }
        x.copy_from_slice(b);
        for i in 0..self.n {
            let mut s = x[i];
            for p in self.l_offsets[i]..self.l_offsets[i + 1] {
                s -= self.l_vals[p] * x[self.l_cols[p]];
            }
            x[i] = s;
        }
        for i in (0..self.n).rev() {
            let (lo, hi) = (self.u_offsets[i], self.u_offsets[i + 1]);
            let mut s = x[i];
            for p in lo + 1..hi {
                s -= self.u_vals[p] * x[self.u_cols[p]];
            }
            x[i] = s / self.u_vals[lo];
        }
        Ok(())
    }

    /// x = (LU)^{-T} b
    pub fn solve_transpose_into(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        if b.len() != self.n || x.len() != self.n {
            return shape_err("incomplete LU apply dimension mismatch");
        }
        x.copy_from_slice(b);
        for i in 0..self.n {
            let (lo, hi) = (self.u_offsets[i], self.u_offsets[i + 1]);
            x[i] /= self.u_vals[lo];
            let xi = x[i];
            for p in lo + 1..hi {
                x[self.u_cols[p]] -= self.u_vals[p] * xi;
            }
        }
        for i in (0..self.n).rev() {
            let xi = x[i];
            for p in self.l_offsets[i]..self.l_offsets[i + 1] {
                x[self.l_cols[p]] -= self.l_vals[p] * xi;
            }
        }
        Ok(())
    }
}
