use crate::error::{Error, Result};
use crate::krylov::{self, SolverConfig};
use crate::sparse::{SparseMatrix, SplitOperator};

/// One implicit midpoint step `(I + dt/2 M) x+ = (I - dt/2 M) x`, solved with
/// the split `H = I + dt/2 M_H`, `S = dt/2 M_S`.
pub fn midpoint_step(m_split: &SplitOperator, dt: f64, x: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step {dt} must be positive")));
    }
    let n = m_split.dim();
    if x.len() != n {
        return crate::error::shape_err("state length does not match the operator");
    }
    let half = 0.5 * dt;
    let h = SparseMatrix::identity(n).add_scaled(1.0, &m_split.h, half)?;
    let s = m_split.s.scaled(half);
    let step = SplitOperator::from_parts(h, s)?;
    let mx = m_split.a.spmv(x)?;
    let rhs: Vec<f64> = x.iter().zip(&mx).map(|(xi, mi)| xi - half * mi).collect();
    let (xp, rep) = krylov::solve(&step, &rhs, cfg, None)?;
    if !rep.converged {
        return Err(Error::NotConverged {
            iterations: rep.iterations,
            residual: rep.final_residual(),
        });
    }
    Ok(xp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::Method;
    use crate::precond::PrecondSpec;

    #[test]
    fn trivial_steps() {
        let cfg = SolverConfig::new(Method::Widlund, PrecondSpec::ExactSym, 1e-13);
        let zero = SplitOperator::from_parts(SparseMatrix::zeros(2, 2), SparseMatrix::zeros(2, 2)).unwrap();
        assert_eq!(midpoint_step(&zero, 0.1, &[1.0, 2.0], &cfg).unwrap(), vec![1.0, 2.0]);
        let id = SplitOperator::from_parts(SparseMatrix::identity(2), SparseMatrix::zeros(2, 2)).unwrap();
        assert_eq!(midpoint_step(&id, 2.0, &[1.0, 2.0], &cfg).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn skew_step_is_isometry() {
        let s = SparseMatrix::from_dense(&[vec![0.0, 3.0], vec![-3.0, 0.0]]).unwrap();
        let m = SplitOperator::from_parts(SparseMatrix::zeros(2, 2), s).unwrap();
        let cfg = SolverConfig::new(Method::Widlund, PrecondSpec::ExactSym, 1e-14);
        let x = [0.3, -1.2];
        let xp = midpoint_step(&m, 0.7, &x, &cfg).unwrap();
        let n0 = crate::vecops::norm2(&x);
        assert!((crate::vecops::norm2(&xp) - n0).abs() < 1e-12 * n0);
    }
}
