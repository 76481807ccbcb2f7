//! Staggered (marker-and-cell) grid on a rectangle with `N x N` cells.
//! Horizontal velocities sit on interior vertical faces, vertical velocities
//! on interior horizontal faces and pressures at cell centres. Velocities are
//! ordered `[u; v]`, each with x varying fastest.

use super::{along_axis, central_difference_1d, expect_kind, BlockSystem, ProblemKind, ProblemSpec};
use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, SplitOperator};

struct Mac {
    n: usize,
    hx: f64,
    hy: f64,
}

impl Mac {
    fn new(spec: &ProblemSpec) -> Self {
        let n = spec.cells_per_side;
        Self {
            n,
            hx: spec.extent(0) / n as f64,
            hy: spec.extent(1) / n as f64,
        }
    }
    fn nu(&self) -> usize {
        (self.n - 1) * self.n
    }
    fn nv(&self) -> usize {
        self.n * (self.n - 1)
    }
    fn np(&self) -> usize {
        self.n * self.n
    }
    /// u at x = i*hx, y = (j+1/2)*hy, interior for 0 < i < n.
    fn u(&self, i: usize, j: usize) -> Option<usize> {
        (i > 0 && i < self.n && j < self.n).then(|| (i - 1) + (self.n - 1) * j)
    }
    /// v at x = (i+1/2)*hx, y = j*hy, interior for 0 < j < n.
    fn v(&self, i: usize, j: usize) -> Option<usize> {
        (j > 0 && j < self.n && i < self.n).then(|| self.nu() + i + self.n * (j - 1))
    }
    fn p(&self, i: usize, j: usize) -> usize {
        i + self.n * j
    }

    /// Adds `weight * (d . x)^2` to the quadratic form.
    fn add_square(t: &mut Vec<(usize, usize, f64)>, weight: f64, d: &[(Option<usize>, f64)]) {
        for &(a, ca) in d {
            let Some(a) = a else { continue };
            for &(b, cb) in d {
                let Some(b) = b else { continue };
                t.push((a, b, weight * (ca * cb)));
            }
        }
    }

    /// Vertex (i, j) derivatives of the tangential velocities with the wall
    /// reflection `ghost = -interior`: returns (du/dy, dv/dx) stencils and the
    /// dual-cell weight.
    fn shear(&self, i: usize, j: usize) -> (Vec<(Option<usize>, f64)>, Vec<(Option<usize>, f64)>, f64) {
        let n = self.n;
        let dudy = if j == 0 {
            vec![(self.u(i, 0), 2.0 / self.hy)]
        } else if j == n {
            vec![(self.u(i, n - 1), -2.0 / self.hy)]
        } else {
            vec![(self.u(i, j), 1.0 / self.hy), (self.u(i, j - 1), -1.0 / self.hy)]
        };
        let dvdx = if i == 0 {
            vec![(self.v(0, j), 2.0 / self.hx)]
        } else if i == n {
            vec![(self.v(n - 1, j), -2.0 / self.hx)]
        } else {
            vec![(self.v(i, j), 1.0 / self.hx), (self.v(i - 1, j), -1.0 / self.hx)]
        };
        let mut w = 1.0;
        if i == 0 || i == n {
            w *= 0.5;
        }
        if j == 0 || j == n {
            w *= 0.5;
        }
        (dudy, dvdx, w)
    }

    /// Normal derivatives at cell centres: (du/dx, dv/dy).
    fn stretch(&self, i: usize, j: usize) -> (Vec<(Option<usize>, f64)>, Vec<(Option<usize>, f64)>) {
        (
            vec![(self.u(i + 1, j), 1.0 / self.hx), (self.u(i, j), -1.0 / self.hx)],
            vec![(self.v(i, j + 1), 1.0 / self.hy), (self.v(i, j), -1.0 / self.hy)],
        )
    }

    fn velocity_dofs(&self) -> usize {
        self.nu() + self.nv()
    }

    /// Componentwise vector Laplacian `-Δ` with no-slip walls.
    fn vector_laplacian(&self) -> SparseMatrix {
        let mut t = Vec::new();
        for j in 0..self.n {
            for i in 0..self.n {
                let (dudx, dvdy) = self.stretch(i, j);
                Self::add_square(&mut t, 1.0, &dudx);
                Self::add_square(&mut t, 1.0, &dvdy);
            }
        }
        for j in 0..=self.n {
            for i in 0..=self.n {
                let (dudy, dvdx, w) = self.shear(i, j);
                Self::add_square(&mut t, w, &dudy);
                Self::add_square(&mut t, w, &dvdx);
            }
        }
        let m = self.velocity_dofs();
        SparseMatrix::from_triplets(m, m, &t).expect("valid stencil")
    }

    /// `2 ε(u):ε(u)` form of `-div(∇u + ∇u^T)` with no-slip walls.
    fn strain_operator(&self) -> SparseMatrix {
        let mut t = Vec::new();
        for j in 0..self.n {
            for i in 0..self.n {
                let (dudx, dvdy) = self.stretch(i, j);
                Self::add_square(&mut t, 2.0, &dudx);
                Self::add_square(&mut t, 2.0, &dvdy);
            }
        }
        for j in 0..=self.n {
            for i in 0..=self.n {
                let (mut g, dvdx, w) = self.shear(i, j);
                g.extend(dvdx);
                Self::add_square(&mut t, w, &g);
            }
        }
        let m = self.velocity_dofs();
        SparseMatrix::from_triplets(m, m, &t).expect("valid stencil")
    }

    /// Discrete gradient: pressures to velocities.
    fn gradient(&self) -> SparseMatrix {
        let mut t = Vec::new();
        for j in 0..self.n {
            for i in 1..self.n {
                let r = self.u(i, j).unwrap();
                t.push((r, self.p(i, j), 1.0 / self.hx));
                t.push((r, self.p(i - 1, j), -1.0 / self.hx));
            }
        }
        for j in 1..self.n {
            for i in 0..self.n {
                let r = self.v(i, j).unwrap();
                t.push((r, self.p(i, j), 1.0 / self.hy));
                t.push((r, self.p(i, j - 1), -1.0 / self.hy));
            }
        }
        SparseMatrix::from_triplets(self.velocity_dofs(), self.np(), &t).expect("valid stencil")
    }

    /// Centered `b·∇` on both velocity grids; values outside are zero.
    fn advection(&self, b: (f64, f64)) -> Result<SparseMatrix> {
        let n = self.n;
        let grid = |nx: usize, ny: usize| -> Result<SparseMatrix> {
            let dims = [nx, ny];
            let dx = along_axis(&central_difference_1d(nx, self.hx).scaled(b.0), 0, &dims);
            let dy = along_axis(&central_difference_1d(ny, self.hy).scaled(b.1), 1, &dims);
            dx.add(&dy)
        };
        let su = grid(n - 1, n)?;
        let sv = grid(n, n - 1)?;
        SparseMatrix::block(&[vec![Some(&su), None], vec![None, Some(&sv)]])
    }
}

fn skew_coupling(g: &SparseMatrix, nvel: usize, np: usize) -> Result<SparseMatrix> {
    let zu = SparseMatrix::zeros(nvel, nvel);
    let zp = SparseMatrix::zeros(np, np);
    let mgt = g.transpose().scaled(-1.0);
    SparseMatrix::block(&[vec![Some(&zu), Some(g)], vec![Some(&mgt), Some(&zp)]])
}

/// Pressure-regularized Stokes operator
/// `[[-ν Δ, ∇], [div, s1 I - s2 Δ_p]]` with
/// `H = diag(ν L, s1 I + s2 G^T G)` and `S = [[0, G], [-G^T, 0]]`.
///
/// The pressure Laplacian `G^T G` carries Neumann conditions, so `s1 > 0` is
/// needed for `H` to be invertible.
pub fn assemble_stokes(spec: &ProblemSpec) -> Result<SplitOperator> {
    expect_kind(spec, ProblemKind::Stokes)?;
    let p = &spec.params;
    if p.s1 == 0.0 && p.s2 == 0.0 {
        return Err(Error::Singular("s1 = s2 = 0 leaves the pressure block of H zero".into()));
    }
    if p.s1 == 0.0 {
        return Err(Error::Singular(
            "s1 = 0 leaves the constant pressure in the kernel of H".into(),
        ));
    }
    let mac = Mac::new(spec);
    let g = mac.gradient();
    let lap = mac.vector_laplacian().scaled(p.nu);
    let np = mac.np();
    let hp = SparseMatrix::identity(np)
        .scaled(p.s1)
        .add(&g.transpose().matmul(&g)?.scaled(p.s2))?;
    let h = SparseMatrix::block(&[vec![Some(&lap), None], vec![None, Some(&hp)]])?;
    let s = skew_coupling(&g, mac.velocity_dofs(), np)?;
    SplitOperator::from_parts(h, s)
}

/// Oseen blocks: `A11 = -div(μ(∇u + ∇u^T)) + b·∇`, `A12 = G`, `A21 = -G^T`,
/// identity pressure mass. The constant pressure spans the kernel of `A12`.
pub fn assemble_oseen(spec: &ProblemSpec) -> Result<BlockSystem> {
    expect_kind(spec, ProblemKind::Oseen)?;
    let mac = Mac::new(spec);
    let visc = mac.strain_operator().scaled(spec.params.mu);
    let adv = mac.advection((spec.advection(0), spec.advection(1)))?;
    let a11 = SplitOperator::from_parts(visc, adv)?;
    let a12 = mac.gradient();
    let a21 = a12.transpose().scaled(-1.0);
    let np = mac.np();
    let c = 1.0 / (np as f64).sqrt();
    Ok(BlockSystem {
        a11,
        a12,
        a21,
        mass_p: SparseMatrix::identity(np),
        h_grid: mac.hx,
        kernel: Some(vec![c; np]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::Params;

    #[test]
    fn laplacian_has_ghost_diagonal() {
        let spec = ProblemSpec::new(ProblemKind::Stokes, 2, 4);
        let mac = Mac::new(&spec);
        let l = mac.vector_laplacian();
        // u(1,0): two cells in x (2/h^2), wall row in y (3/h^2), h = 1/4
        let r = mac.u(1, 0).unwrap();
        assert!((l.get(r, r) - 80.0).abs() < 1e-12);
        let r = mac.u(2, 1).unwrap();
        assert!((l.get(r, r) - 64.0).abs() < 1e-12);
        assert!(l.is_symmetric());
    }

    #[test]
    fn gradient_kills_constants() {
        let spec = ProblemSpec::new(ProblemKind::Oseen, 2, 5);
        let bs = assemble_oseen(&spec).unwrap();
        let gp = bs.a12.spmv(&vec![1.0; 25]).unwrap();
        assert!(gp.iter().all(|&v| v == 0.0));
        assert_eq!(bs.a21, bs.a12.transpose().scaled(-1.0));
    }

    #[test]
    fn stokes_rejects_zero_regularization() {
        let mut spec = ProblemSpec::new(ProblemKind::Stokes, 2, 4);
        spec.params = Params {
            s1: 0.0,
            s2: 0.0,
            ..Params::default()
        };
        assert!(matches!(assemble_stokes(&spec), Err(Error::Singular(_))));
    }

    #[test]
    fn stokes_structure() {
        let sp = assemble_stokes(&ProblemSpec::new(ProblemKind::Stokes, 2, 4)).unwrap();
        assert_eq!(sp.dim(), 12 + 12 + 16);
        assert!(sp.s.is_skew_symmetric() && sp.h.is_symmetric());
    }
}
