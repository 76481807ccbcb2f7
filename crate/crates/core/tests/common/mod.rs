//! Random problem generators and dense reference computations shared by
//! the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use skewsplit::optctl::OcpProblem;
use skewsplit::rng::SplitMix64;
use skewsplit::{split, SparseMatrix, SplitOperator};

/// Random sparse matrix with about `per_row` entries per row.
pub fn random_sparse(rng: &mut SplitMix64, rows: usize, cols: usize, per_row: usize) -> SparseMatrix {
    let mut t = Vec::new();
    for i in 0..rows {
        for _ in 0..per_row {
            t.push((i, rng.next_below(cols), rng.next_signed()));
        }
    }
    SparseMatrix::from_triplets(rows, cols, &t).unwrap()
}

/// Positive real matrix: a diagonally dominant symmetric part with
/// diagonal in `[1, 5)` plus a random skew part of size `skew`.
pub fn random_positive_real(rng: &mut SplitMix64, n: usize, skew: f64) -> SplitOperator {
    let mut t = Vec::new();
    let mut diag: Vec<f64> = (0..n).map(|_| 1.0 + 4.0 * rng.next_f64()).collect();
    for i in 0..n {
        if n > 1 {
            let j = rng.next_below(n);
            if j != i {
                t.push((i, j, -0.3));
                t.push((j, i, -0.3));
                diag[i] += 0.3;
                diag[j] += 0.3;
            }
        }
        for _ in 0..3 {
            let j = rng.next_below(n);
            if j != i {
                let v = skew * rng.next_signed();
                t.push((i, j, v));
                t.push((j, i, -v));
            }
        }
    }
    for (i, d) in diag.into_iter().enumerate() {
        t.push((i, i, d));
    }
    split(&SparseMatrix::from_triplets(n, n, &t).unwrap()).unwrap()
}

/// Random optimal control problem with `m` controls and `q` observations.
pub fn random_ocp(rng: &mut SplitMix64, n: usize, m: usize, q: usize) -> OcpProblem {
    let a = random_positive_real(rng, n, 1.0);
    let b = random_sparse(rng, n, m, 2);
    let c = random_sparse(rng, q, n, 2);
    let lambda = 10f64.powf(-2.0 + 3.0 * rng.next_f64());
    OcpProblem::new(a, b, c, lambda, rng.vector(n), rng.vector(q), rng.vector(m)).unwrap()
}

pub fn dense(a: &SparseMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            d[(i, j)] += v;
        }
    }
    d
}

/// Dense LU solve.
pub fn dense_solve(a: &SparseMatrix, b: &[f64]) -> Vec<f64> {
    dense(a)
        .lu()
        .solve(&DVector::from_column_slice(b))
        .expect("nonsingular")
        .as_slice()
        .to_vec()
}

/// `sqrt(v^T M v)`.
pub fn m_norm(m: &DMatrix<f64>, v: &[f64]) -> f64 {
    let v = DVector::from_column_slice(v);
    v.dot(&(m * &v)).sqrt()
}

pub fn rel_err(x: &[f64], y: &[f64]) -> f64 {
    let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let n: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    d / if n > 0.0 { n } else { 1.0 }
}
