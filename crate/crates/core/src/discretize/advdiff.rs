use super::{along_axis, central_difference_1d, expect_kind, laplacian_1d, ProblemKind, ProblemSpec};
use crate::error::Result;
use crate::sparse::{SparseMatrix, SplitOperator};

/// `-nu Δu + b·∇u + c u` with homogeneous Dirichlet data on a box in 1, 2
/// or 3 dimensions. `H` is `nu` times the 5/7-point Laplacian plus `c I`;
/// `S` is the centered difference approximation of `b·∇`.
pub fn assemble_advdiff(spec: &ProblemSpec) -> Result<SplitOperator> {
    expect_kind(spec, ProblemKind::AdvDiff)?;
    let n = spec.cells_per_side - 1;
    let dims = vec![n; spec.dim];
    let total: usize = dims.iter().product();
    let mut h = SparseMatrix::from_diagonal(&vec![spec.params.c; total]);
    let mut s = SparseMatrix::zeros(total, total);
    for axis in 0..spec.dim {
        let ha = spec.extent(axis) / spec.cells_per_side as f64;
        let lap = laplacian_1d(n, ha).scaled(spec.params.nu);
        h = h.add(&along_axis(&lap, axis, &dims))?;
        let b = spec.advection(axis);
        if b != 0.0 {
            let d = central_difference_1d(n, ha).scaled(b);
            s = s.add(&along_axis(&d, axis, &dims))?;
        }
    }
    SplitOperator::from_parts(h, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::Params;

    fn spec1d(b: f64, cells: usize) -> ProblemSpec {
        ProblemSpec::new(ProblemKind::AdvDiff, 1, cells).with_params(Params {
            b: vec![b],
            ..Params::default()
        })
    }

    #[test]
    fn pure_diffusion_h_quarter() {
        let sp = assemble_advdiff(&spec1d(0.0, 4)).unwrap();
        let d = sp.h.to_dense();
        assert_eq!(d, vec![vec![32.0, -16.0, 0.0], vec![-16.0, 32.0, -16.0], vec![0.0, -16.0, 32.0]]);
        assert!(sp.s.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn advection_stencil() {
        let sp = assemble_advdiff(&spec1d(1.0, 4)).unwrap();
        assert_eq!(sp.s.to_dense(), vec![vec![0.0, 2.0, 0.0], vec![-2.0, 0.0, 2.0], vec![0.0, -2.0, 0.0]]);
    }

    #[test]
    fn three_d_box() {
        let mut spec = ProblemSpec::new(ProblemKind::AdvDiff, 3, 4);
        spec.params = Params {
            nu: 1e-3,
            b: vec![0.5, 0.0, 0.0],
            ..Params::default()
        };
        spec.domain_box = vec![1.0, 5.0, 1.0];
        let sp = assemble_advdiff(&spec).unwrap();
        assert_eq!(sp.dim(), 27);
        assert!(sp.h.is_symmetric() && sp.s.is_skew_symmetric());
        // x-neighbour coupling carries b/(2h) = 0.5 * 4 / 2
        assert_eq!(sp.s.get(0, 1), 1.0);
        assert_eq!(sp.s.get(0, 3), 0.0);
    }

    #[test]
    fn rejects_bad_dim() {
        assert!(assemble_advdiff(&ProblemSpec::new(ProblemKind::AdvDiff, 4, 4)).is_err());
    }
}
