//! Direct envelope (skyline) factorizations with reverse Cuthill-McKee
//! ordering.
//!
//! The LU factorization does not pivot. It is intended for matrices whose
//! symmetric part is positive definite, where every leading principal minor
//! is nonsingular.

use std::collections::VecDeque;

use crate::error::{shape_err, Error, Result};
use crate::operator::{check_dims, LinearOperator};
use crate::sparse::SparseMatrix;

/// Default cap on the number of stored envelope entries per factor.
pub const DEFAULT_ENVELOPE_LIMIT: usize = 40_000_000;

/// Reverse Cuthill-McKee ordering of the symmetrized pattern of `a`.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_ordering(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let at = a.transpose();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for m in [a, &at] {
            for &j in m.row(i).0 {
                if j != i {
                    adj[i].push(j);
                }
            }
        }
        adj[i].sort_unstable();
        adj[i].dedup();
    }
    let degree: Vec<usize> = adj.iter().map(|v| v.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs = |start: usize, visited: &mut Vec<bool>, out: &mut Vec<usize>| -> (usize, usize) {
        // returns (last node, number of levels)
        let mut queue = VecDeque::new();
        queue.push_back((start, 0usize));
        visited[start] = true;
        let mut last = (start, 0);
        while let Some((v, l)) = queue.pop_front() {
            out.push(v);
            last = (v, l);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                visited[w] = true;
                queue.push_back((w, l + 1));
            }
        }
        last
    };
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // pick a pseudo-peripheral start by repeated BFS from the min-degree node
        // of this component
        let mut comp = Vec::new();
        let mut tmp_visited = visited.clone();
        bfs(seed, &mut tmp_visited, &mut comp);
        let mut start = *comp.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
        let mut ecc = 0;
        for _ in 0..4 {
            let mut tv = visited.clone();
            let mut sink = Vec::new();
            let (far, levels) = bfs(start, &mut tv, &mut sink);
            if levels <= ecc {
                break;
            }
            ecc = levels;
            start = far;
        }
        bfs(start, &mut visited, &mut order);
    }
    order.reverse();
    order
}

fn permute(a: &SparseMatrix, perm: &[usize]) -> SparseMatrix {
    let n = a.nrows();
    let mut inv = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut t = Vec::with_capacity(a.nnz());
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            t.push((inv[i], inv[j], v));
        }
    }
    SparseMatrix::from_triplets(n, n, &t).expect("permutation preserves validity")
}

/// Row envelope: for each row i the first column j <= i holding an entry.
fn row_starts(a: &SparseMatrix) -> Vec<usize> {
    (0..a.nrows())
        .map(|i| a.row(i).0.first().map_or(i, |&j| j.min(i)))
        .collect()
}

fn offsets(starts: &[usize], limit: usize, what: &'static str) -> Result<Vec<usize>> {
    let mut off = Vec::with_capacity(starts.len() + 1);
    off.push(0usize);
    for (i, &s) in starts.iter().enumerate() {
        let next = off[i] + (i - s);
        if next > limit {
            let total: usize = starts.iter().enumerate().map(|(k, &s)| k - s).sum();
            return Err(Error::TooLarge {
                what,
                size: total,
                limit,
            });
        }
        off.push(next);
    }
    Ok(off)
}

/// Envelope LU factorization `P A P^T = L U` (unit lower L).
#[derive(Clone, Debug)]
pub struct EnvelopeLu {
    n: usize,
    perm: Vec<usize>,
    // L strictly lower, row-wise: row i covers columns lstart[i]..i
    lstart: Vec<usize>,
    loff: Vec<usize>,
    lval: Vec<f64>,
    // U strictly upper, column-wise: column j covers rows ustart[j]..j
    ustart: Vec<usize>,
    uoff: Vec<usize>,
    uval: Vec<f64>,
    diag: Vec<f64>,
}

impl EnvelopeLu {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        Self::with_limit(a, DEFAULT_ENVELOPE_LIMIT)
    }

    pub fn with_limit(a: &SparseMatrix, limit: usize) -> Result<Self> {
        if !a.is_square() {
            return shape_err(format!("LU needs a square matrix, got {}x{}", a.nrows(), a.ncols()));
        }
        let n = a.nrows();
        let perm = rcm_ordering(a);
        let pa = permute(a, &perm);
        let pat = pa.transpose();
        let lstart = row_starts(&pa);
        let ustart = row_starts(&pat);
        let loff = offsets(&lstart, limit, "envelope LU")?;
        let uoff = offsets(&ustart, limit, "envelope LU")?;
        let mut lval = vec![0.0; loff[n]];
        let mut uval = vec![0.0; uoff[n]];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let (cols, vals) = pa.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j < i {
                    lval[loff[i] + j - lstart[i]] = v;
                } else if j == i {
                    diag[i] = v;
                } else {
                    uval[uoff[j] + i - ustart[j]] = v;
                }
            }
        }
        for k in 0..n {
            // row k of L
            let ls = lstart[k];
            for j in ls..k {
                let m0 = ls.max(ustart[j]);
                let mut acc = lval[loff[k] + j - ls];
                if m0 < j {
                    let lrow = &lval[loff[k] + m0 - ls..loff[k] + j - ls];
                    let ucol = &uval[uoff[j] + m0 - ustart[j]..uoff[j] + j - ustart[j]];
                    acc -= lrow.iter().zip(ucol).map(|(a, b)| a * b).sum::<f64>();
                }
                lval[loff[k] + j - ls] = acc / diag[j];
            }
            // column k of U
            let us = ustart[k];
            for i in us..k {
                let m0 = us.max(lstart[i]);
                let mut acc = uval[uoff[k] + i - us];
                if m0 < i {
                    let lrow = &lval[loff[i] + m0 - lstart[i]..loff[i] + i - lstart[i]];
                    let ucol = &uval[uoff[k] + m0 - us..uoff[k] + i - us];
                    acc -= lrow.iter().zip(ucol).map(|(a, b)| a * b).sum::<f64>();
                }
                uval[uoff[k] + i - us] = acc;
            }
            let m0 = ls.max(us);
            let mut d = diag[k];
            if m0 < k {
                let lrow = &lval[loff[k] + m0 - ls..loff[k] + k - ls];
                let ucol = &uval[uoff[k] + m0 - us..uoff[k] + k - us];
                d -= lrow.iter().zip(ucol).map(|(a, b)| a * b).sum::<f64>();
            }
            if d == 0.0 || !d.is_finite() {
                return Err(Error::Singular(format!("zero pivot at row {}", perm[k])));
            }
            diag[k] = d;
        }
        Ok(Self {
            n,
            perm,
            lstart,
            loff,
            lval,
            ustart,
            uoff,
            uval,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves A x = b.
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        if b.len() != self.n || x.len() != self.n {
            return shape_err("LU solve dimension mismatch");
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..self.n {
            let ls = self.lstart[i];
            let row = &self.lval[self.loff[i]..self.loff[i + 1]];
            y[i] -= row.iter().zip(&y[ls..i]).map(|(a, b)| a * b).sum::<f64>();
        }
        for j in (0..self.n).rev() {
            y[j] /= self.diag[j];
            let yj = y[j];
            let us = self.ustart[j];
            let col = &self.uval[self.uoff[j]..self.uoff[j + 1]];
            for (yi, u) in y[us..j].iter_mut().zip(col) {
                *yi -= u * yj;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        Ok(())
    }

    /// Solves A^T x = b.
    pub fn solve_transpose_into(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        if b.len() != self.n || x.len() != self.n {
            return shape_err("LU solve dimension mismatch");
        }
        let mut z: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..self.n {
            let us = self.ustart[j];
            let col = &self.uval[self.uoff[j]..self.uoff[j + 1]];
            let s: f64 = col.iter().zip(&z[us..j]).map(|(a, b)| a * b).sum();
            z[j] = (z[j] - s) / self.diag[j];
        }
        for i in (0..self.n).rev() {
            let zi = z[i];
            let ls = self.lstart[i];
            let row = &self.lval[self.loff[i]..self.loff[i + 1]];
            for (zj, l) in z[ls..i].iter_mut().zip(row) {
                *zj -= l * zi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = z[new];
        }
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x)?;
        Ok(x)
    }

    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.n];
        self.solve_transpose_into(b, &mut x)?;
        Ok(x)
    }
}

impl LinearOperator for EnvelopeLu {
    fn nrows(&self) -> usize {
        self.n
    }
    fn ncols(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.solve_into(x, y)
    }
    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.solve_transpose_into(x, y)
    }
    fn has_adjoint(&self) -> bool {
        true
    }
}

/// Envelope Cholesky factorization `P A P^T = L L^T` of a symmetric positive
/// definite matrix.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    n: usize,
    perm: Vec<usize>,
    lstart: Vec<usize>,
    loff: Vec<usize>,
    lval: Vec<f64>,
    diag: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        Self::with_limit(a, DEFAULT_ENVELOPE_LIMIT)
    }

    pub fn with_limit(a: &SparseMatrix, limit: usize) -> Result<Self> {
        if !a.is_square() {
            return shape_err("Cholesky needs a square matrix");
        }
        let n = a.nrows();
        let perm = rcm_ordering(a);
        let pa = permute(a, &perm);
        let lstart = row_starts(&pa);
        let loff = offsets(&lstart, limit, "envelope Cholesky")?;
        let mut lval = vec![0.0; loff[n]];
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let (cols, vals) = pa.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j < i {
                    lval[loff[i] + j - lstart[i]] = v;
                } else if j == i {
                    diag[i] = v;
                }
            }
        }
        for k in 0..n {
            let ls = lstart[k];
            for j in ls..k {
                let m0 = ls.max(lstart[j]);
                let mut acc = lval[loff[k] + j - ls];
                if m0 < j {
                    let rk = &lval[loff[k] + m0 - ls..loff[k] + j - ls];
                    let rj = &lval[loff[j] + m0 - lstart[j]..loff[j] + j - lstart[j]];
                    acc -= rk.iter().zip(rj).map(|(a, b)| a * b).sum::<f64>();
                }
                lval[loff[k] + j - ls] = acc / diag[j];
            }
            let row = &lval[loff[k]..loff[k + 1]];
            let d = diag[k] - row.iter().map(|v| v * v).sum::<f64>();
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::Breakdown {
                    row: perm[k],
                    reason: format!("matrix not positive definite (pivot {d:e})"),
                });
            }
            diag[k] = d.sqrt();
        }
        Ok(Self {
            n,
            perm,
            lstart,
            loff,
            lval,
            diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        if b.len() != self.n || x.len() != self.n {
            return shape_err("Cholesky solve dimension mismatch");
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..self.n {
            let ls = self.lstart[i];
            let row = &self.lval[self.loff[i]..self.loff[i + 1]];
            let s: f64 = row.iter().zip(&y[ls..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / self.diag[i];
        }
        for i in (0..self.n).rev() {
            y[i] /= self.diag[i];
            let yi = y[i];
            let ls = self.lstart[i];
            let row = &self.lval[self.loff[i]..self.loff[i + 1]];
            for (yj, l) in y[ls..i].iter_mut().zip(row) {
                *yj -= l * yi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x)?;
        Ok(x)
    }
}

impl LinearOperator for EnvelopeCholesky {
    fn nrows(&self) -> usize {
        self.n
    }
    fn ncols(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dims(self, x, y)?;
        self.solve_into(x, y)
    }
    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.solve_into(x, y)
    }
    fn has_adjoint(&self) -> bool {
        true
    }
}
