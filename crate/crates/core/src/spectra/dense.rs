use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operator::{check_dims, LinearOperator};
use crate::sparse::{SparseMatrix, SplitOperator};

/// Largest dimension handled by dense factorizations.
pub const DENSE_MAX_N: usize = 2000;

fn check_size(n: usize, what: &'static str) -> Result<()> {
    if n > DENSE_MAX_N {
        return Err(Error::TooLarge {
            what,
            size: n,
            limit: DENSE_MAX_N,
        });
    }
    Ok(())
}

pub fn to_dense(a: &SparseMatrix) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            m[(i, j)] += v;
        }
    }
    m
}

/// Forms the matrix of `op` column by column.
pub fn materialize(op: &dyn LinearOperator) -> Result<DMatrix<f64>> {
    check_size(op.nrows().max(op.ncols()), "dense materialization")?;
    let mut m = DMatrix::zeros(op.nrows(), op.ncols());
    let mut e = vec![0.0; op.ncols()];
    let mut col = vec![0.0; op.nrows()];
    for j in 0..op.ncols() {
        e[j] = 1.0;
        op.apply(&e, &mut col)?;
        e[j] = 0.0;
        m.column_mut(j).copy_from_slice(&col);
    }
    Ok(m)
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Dense spectral data of a sparse matrix.
#[derive(Clone, Debug)]
pub struct DenseSpectrum {
    /// Descending.
    pub singular_values: Vec<f64>,
    /// Ascending; present for symmetric input only.
    pub eigenvalues: Option<Vec<f64>>,
}

pub fn dense_eig_oracle(a: &SparseMatrix) -> Result<DenseSpectrum> {
    check_size(a.nrows().max(a.ncols()), "dense eigen oracle")?;
    let m = to_dense(a);
    let eigenvalues = a.is_symmetric().then(|| {
        let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    });
    Ok(DenseSpectrum {
        singular_values: singular_values(&m),
        eigenvalues,
    })
}

/// `λ = ||L^{-1} S L^{-T}||_2` with `H = L L^T`: the largest modulus of the
/// purely imaginary eigenvalues of `H^{-1} S`.
pub fn dense_spectral_width(split: &SplitOperator) -> Result<f64> {
    let n = split.dim();
    check_size(n, "dense spectral width")?;
    let chol = to_dense(&split.h)
        .cholesky()
        .ok_or_else(|| Error::Singular("H is not positive definite".into()))?;
    let l = chol.l();
    let s = to_dense(&split.s);
    let y = l
        .solve_lower_triangular(&s)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    let z = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    Ok(singular_values(&z).first().copied().unwrap_or(0.0))
}

/// Dense matrix as a [`LinearOperator`].
#[derive(Clone, Debug)]
pub struct DenseOperator(pub DMatrix<f64>);

impl LinearOperator for DenseOperator {
    fn nrows(&self) -> usize {
        self.0.nrows()
    }
    fn ncols(&self) -> usize {
        self.0.ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dims(self, x, y)?;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.0.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
        Ok(())
    }
    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.0.nrows() || y.len() != self.0.ncols() {
            return crate::error::shape_err("adjoint dimension mismatch");
        }
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = self.0.column(j).iter().zip(x).map(|(a, b)| a * b).sum();
        }
        Ok(())
    }
    fn has_adjoint(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_singular_values() {
        let a = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let s = dense_eig_oracle(&a).unwrap();
        assert!(s.singular_values.iter().all(|v| (v - 1.0).abs() < 1e-14));
        assert!(s.eigenvalues.is_none());
    }

    #[test]
    fn width_of_scaled_rotation() {
        let s = SparseMatrix::from_dense(&[vec![0.0, 2.0], vec![-2.0, 0.0]]).unwrap();
        let sp = SplitOperator::from_parts(SparseMatrix::identity(2).scaled(2.0), s).unwrap();
        assert!((dense_spectral_width(&sp).unwrap() - 1.0).abs() < 1e-14);
    }
}
