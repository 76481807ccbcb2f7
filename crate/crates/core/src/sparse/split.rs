use super::SparseMatrix;
use crate::error::{shape_err, Error, Result};
use crate::operator::{check_dims, LinearOperator};

/// A square matrix together with its symmetric part `h` and skew-symmetric
/// part `s`, so that `a = h + s`.
#[derive(Clone, Debug)]
pub struct SplitOperator {
    pub a: SparseMatrix,
    pub h: SparseMatrix,
    pub s: SparseMatrix,
}

/// Splits `a` into `h = (a + a^T)/2` and `s = (a - a^T)/2`.
///
/// `h` is symmetric and `s` skew-symmetric bitwise; `h` and `s` share the
/// symmetrized pattern of `a`.
pub fn split(a: &SparseMatrix) -> Result<SplitOperator> {
    if !a.is_square() {
        return shape_err(format!("split requires a square matrix, got {}x{}", a.nrows(), a.ncols()));
    }
    let at = a.transpose();
    let h = a.add_scaled(0.5, &at, 0.5)?;
    let s = a.add_scaled(0.5, &at, -0.5)?;
    Ok(SplitOperator { a: a.clone(), h, s })
}

impl SplitOperator {
    /// Builds a split operator from its parts; `a` is formed as `h + s`.
    pub fn from_parts(h: SparseMatrix, s: SparseMatrix) -> Result<Self> {
        if !h.is_square() || h.shape() != s.shape() {
            return shape_err("h and s must be square with equal shapes");
        }
        if !h.is_symmetric() {
            return Err(Error::Structure("h is not symmetric".into()));
        }
        if !s.is_skew_symmetric() {
            return Err(Error::Structure("s is not skew-symmetric".into()));
        }
        let a = h.add(&s)?;
        Ok(Self { a, h, s })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// Split of the transpose: `(h, -s)`.
    pub fn transposed(&self) -> Self {
        Self {
            a: self.a.transpose(),
            h: self.h.clone(),
            s: self.s.scaled(-1.0),
        }
    }

    /// Relative Frobenius defect of `h + s = a`.
    pub fn consistency_defect(&self) -> f64 {
        let d = self.h.add(&self.s).and_then(|hs| hs.add_scaled(1.0, &self.a, -1.0));
        match d {
            Ok(d) => {
                let na = self.a.frobenius_norm();
                if na > 0.0 {
                    d.frobenius_norm() / na
                } else {
                    d.frobenius_norm()
                }
            }
            Err(_) => f64::INFINITY,
        }
    }
}

impl LinearOperator for SplitOperator {
    fn nrows(&self) -> usize {
        self.a.nrows()
    }
    fn ncols(&self) -> usize {
        self.a.ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dims(self, x, y)?;
        self.a.spmv_into(x, y)
    }
    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.a.spmv_transpose_into(x, y)
    }
    fn has_adjoint(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_two_by_two() {
        let a = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![-1.0, 2.0]]).unwrap();
        let sp = split(&a).unwrap();
        assert_eq!(sp.h.to_dense(), vec![vec![2.0, 0.0], vec![0.0, 2.0]]);
        assert_eq!(sp.s.to_dense(), vec![vec![0.0, 1.0], vec![-1.0, 0.0]]);
    }

    #[test]
    fn split_symmetric_has_zero_skew() {
        let a = SparseMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let sp = split(&a).unwrap();
        assert_eq!(sp.h, a);
        assert!(sp.s.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn split_rejects_rectangular() {
        let a = SparseMatrix::zeros(2, 3);
        assert!(matches!(split(&a), Err(Error::Shape(_))));
    }

    #[test]
    fn from_parts_checks_symmetry() {
        let h = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let s = SparseMatrix::zeros(2, 2);
        assert!(SplitOperator::from_parts(h, s).is_err());
    }
}
