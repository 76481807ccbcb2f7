use super::BlockSystem;
use crate::error::Result;
use crate::krylov::{PreparedSolver, SolverConfig};
use crate::operator::{check_dims, LinearOperator};
use crate::sparse::SparseMatrix;

/// Matrix-free Schur complement `W = -A21 A11^{-1} A12`.
pub struct SchurOperator {
    a12: SparseMatrix,
    a21: SparseMatrix,
    inner: PreparedSolver,
    kernel: Option<Vec<f64>>,
}

pub fn schur_operator(blocks: &BlockSystem, inner: &SolverConfig) -> Result<SchurOperator> {
    let solver = PreparedSolver::new(&blocks.a11, inner, None)?;
    Ok(SchurOperator {
        a12: blocks.a12.clone(),
        a21: blocks.a21.clone(),
        inner: solver,
        kernel: blocks.kernel.clone(),
    })
}

impl SchurOperator {
    /// Unit vector spanning the known kernel, if the blocks declared one.
    pub fn kernel(&self) -> Option<&[f64]> {
        self.kernel.as_deref()
    }

    /// Krylov iterations spent in `A11` solves so far.
    pub fn inner_iterations(&self) -> usize {
        self.inner.total_iterations()
    }

    pub fn inner(&self) -> &PreparedSolver {
        &self.inner
    }
}

impl LinearOperator for SchurOperator {
    fn nrows(&self) -> usize {
        self.a21.nrows()
    }
    fn ncols(&self) -> usize {
        self.a12.ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dims(self, x, y)?;
        let t = self.inner.solve(&self.a12.spmv(x)?)?;
        self.a21.spmv_into(&t, y)?;
        y.iter_mut().for_each(|v| *v = -*v);
        Ok(())
    }
    fn has_adjoint(&self) -> bool {
        true
    }
    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let mut t = vec![0.0; self.a21.ncols()];
        self.a21.spmv_transpose_into(x, &mut t)?;
        let t = self.inner.solve_transpose(&t)?;
        self.a12.spmv_transpose_into(&t, y)?;
        y.iter_mut().for_each(|v| *v = -*v);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SplitOperator;

    #[test]
    fn toy_blocks() {
        let a11 = SparseMatrix::identity(2).scaled(2.0);
        let bs = BlockSystem {
            a11: SplitOperator::from_parts(a11, SparseMatrix::zeros(2, 2)).unwrap(),
            a12: SparseMatrix::from_dense(&[vec![1.0], vec![0.0]]).unwrap(),
            a21: SparseMatrix::from_dense(&[vec![-1.0, 0.0]]).unwrap(),
            mass_p: SparseMatrix::identity(1),
            h_grid: 1.0,
            kernel: None,
        };
        let w = schur_operator(&bs, &SolverConfig::direct()).unwrap();
        assert!((w.apply_vec(&[1.0]).unwrap()[0] - 0.5).abs() < 1e-15);
        assert!((w.apply_adjoint_vec(&[1.0]).unwrap()[0] - 0.5).abs() < 1e-15);
    }
}
