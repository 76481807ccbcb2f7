use super::{expect_kind, ProblemKind, ProblemSpec};
use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, SplitOperator};

/// First-order wave system on `[0, L]` with `N` cells: momentum `p` at cell
/// centres, strain `q` at interior nodes (`q = 0` at both ends).
/// `H = diag(ρ I, η I)`, `S = [[0, -Div], [Div^T, 0]]`.
pub fn assemble_wave(spec: &ProblemSpec) -> Result<SplitOperator> {
    expect_kind(spec, ProblemKind::Wave)?;
    let p = &spec.params;
    if p.rho == 0.0 || p.eta == 0.0 {
        return Err(Error::Singular(format!(
            "rho = {} and eta = {} must both be nonzero",
            p.rho, p.eta
        )));
    }
    let n = spec.cells_per_side;
    let h = spec.h();
    let div = divergence(n, h);
    let h_mat = SparseMatrix::block(&[
        vec![Some(&SparseMatrix::identity(n).scaled(p.rho)), None],
        vec![None, Some(&SparseMatrix::identity(n - 1).scaled(p.eta))],
    ])?;
    let mdiv = div.scaled(-1.0);
    let divt = div.transpose();
    let s = SparseMatrix::block(&[vec![None, Some(&mdiv)], vec![Some(&divt), None]])?;
    SplitOperator::from_parts(h_mat, s)
}

/// Cell-centred divergence of a nodal field vanishing at the ends.
fn divergence(n: usize, h: f64) -> SparseMatrix {
    let mut t = Vec::with_capacity(2 * n);
    for i in 0..n {
        // q_{i+1} - q_i with interior node k stored at k - 1
        if i + 1 < n {
            t.push((i, i, 1.0 / h));
        }
        if i > 0 {
            t.push((i, i - 1, -1.0 / h));
        }
    }
    SparseMatrix::from_triplets(n, n - 1, &t).expect("valid stencil")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure() {
        let sp = assemble_wave(&ProblemSpec::new(ProblemKind::Wave, 1, 4)).unwrap();
        assert_eq!(sp.dim(), 7);
        assert!(sp.s.is_skew_symmetric());
        assert_eq!(sp.h, SparseMatrix::identity(7));
        // Div applied to nodal q = (1, 1, 1): only the end cells see a jump
        let d = divergence(4, 0.25).spmv(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(d, vec![4.0, 0.0, 0.0, -4.0]);
    }

    #[test]
    fn rejects_zero_friction() {
        let mut spec = ProblemSpec::new(ProblemKind::Wave, 1, 4);
        spec.params.eta = 0.0;
        assert!(matches!(assemble_wave(&spec), Err(Error::Singular(_))));
    }
}
