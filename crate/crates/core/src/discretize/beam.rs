use super::{expect_kind, BlockSystem, ProblemKind, ProblemSpec};
use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, SplitOperator};

/// Damped beam on `[0, L]`: deflection at nodes `1..=N`, clamped (`w = 0`)
/// at the left end and free (mirror ghost `w_{N+1} = w_{N-1}`) at the right.
/// With `D2` the resulting second difference, `A11 = D2^T D2`, `A12 = D2^T`,
/// `A21 = -D2`.
pub fn assemble_beam(spec: &ProblemSpec) -> Result<BlockSystem> {
    expect_kind(spec, ProblemKind::Beam)?;
    let n = spec.cells_per_side;
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "beam needs at least 4 cells for the fourth-difference stencil, got {n}"
        )));
    }
    let h = spec.h();
    let d2 = second_difference(n, h);
    let a11 = d2.transpose().matmul(&d2)?;
    let a12 = d2.transpose();
    let a21 = d2.scaled(-1.0);
    Ok(BlockSystem {
        a11: SplitOperator::from_parts(a11, SparseMatrix::zeros(n, n))?,
        a12,
        a21,
        mass_p: SparseMatrix::identity(n),
        h_grid: h,
        kernel: None,
    })
}

fn second_difference(n: usize, h: f64) -> SparseMatrix {
    let c = 1.0 / (h * h);
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i + 1 == n {
            t.push((i, i - 1, 2.0 * c));
        } else {
            if i > 0 {
                t.push((i, i - 1, c));
            }
            t.push((i, i + 1, c));
        }
        t.push((i, i, -2.0 * c));
    }
    SparseMatrix::from_triplets(n, n, &t).expect("valid stencil")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quadratics() {
        // w = x^2 - 2x satisfies w(0) = 0, w'(1) = 0 and w'' = 2
        let n = 8;
        let h = 1.0 / n as f64;
        let w: Vec<f64> = (1..=n).map(|i| (i as f64 * h).powi(2) - 2.0 * i as f64 * h).collect();
        let d = second_difference(n, h).spmv(&w).unwrap();
        assert!(d.iter().all(|v| (v - 2.0).abs() < 1e-9));
    }

    #[test]
    fn blocks() {
        let bs = assemble_beam(&ProblemSpec::new(ProblemKind::Beam, 1, 6)).unwrap();
        assert!(bs.a11.h.is_symmetric());
        assert_eq!(bs.a21, bs.a12.transpose().scaled(-1.0));
        assert_eq!(bs.a11.s.nnz(), 0);
        let coarse = ProblemSpec::new(ProblemKind::Beam, 1, 3);
        assert!(assemble_beam(&coarse).is_err());
    }
}
