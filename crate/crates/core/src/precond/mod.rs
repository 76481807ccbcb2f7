//! Preconditioners: identity, Jacobi, exact symmetric-part solves,
//! incomplete factorizations, geometric multigrid and diagonal scalings.

mod ichol;
mod ilu;
mod multigrid;

pub use ichol::IncompleteCholesky;
pub use ilu::IncompleteLu;
pub use multigrid::{GridHint, Multigrid, MultigridOptions};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::factor::EnvelopeCholesky;
use crate::operator::{check_dims, LinearOperator};
use crate::sparse::SparseMatrix;
use crate::vecops::{axpy, dot};

/// Above this dimension the exact symmetric solve switches to inner CG.
pub const EXACT_SYM_DIRECT_MAX_N: usize = 50_000;
/// Relative residual target of the inner CG used by large exact solves.
pub const EXACT_SYM_CG_TOL: f64 = 1e-14;

/// Which preconditioner to build.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PrecondSpec {
    Identity,
    Jacobi,
    ExactSym,
    IncompleteCholesky { drop_tol: f64 },
    IncompleteLu { drop_tol: f64 },
    GeoMultigrid { levels: usize, cycles: usize, smoother_weight: f64 },
    /// Inverse of the diagonal of the given matrix (e.g. a lumped mass).
    DiagonalOf(Arc<SparseMatrix>),
}

impl PrecondSpec {
    pub fn multigrid(cycles: usize) -> Self {
        PrecondSpec::GeoMultigrid {
            levels: 0,
            cycles,
            smoother_weight: 2.0 / 3.0,
        }
    }

    /// True when the preconditioner approximates the symmetric part `H`
    /// rather than the full matrix.
    pub fn targets_symmetric_part(&self) -> bool {
        !matches!(self, PrecondSpec::IncompleteLu { .. })
    }

    /// True when applying the built preconditioner is a (numerically) exact
    /// solve with a symmetric positive definite target.
    pub fn is_exact_symmetric(&self) -> bool {
        matches!(self, PrecondSpec::ExactSym)
    }
}

impl fmt::Display for PrecondSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrecondSpec::Identity => write!(f, "none"),
            PrecondSpec::Jacobi => write!(f, "jacobi"),
            PrecondSpec::ExactSym => write!(f, "exact"),
            PrecondSpec::IncompleteCholesky { drop_tol } => write!(f, "ichol:{drop_tol:e}"),
            PrecondSpec::IncompleteLu { drop_tol } => write!(f, "ilu:{drop_tol:e}"),
            PrecondSpec::GeoMultigrid {
                levels,
                cycles,
                smoother_weight,
            } => write!(f, "mg:{cycles}:{levels}:{smoother_weight}"),
            PrecondSpec::DiagonalOf(_) => write!(f, "diag-of"),
        }
    }
}

impl FromStr for PrecondSpec {
    type Err = Error;

    /// Accepted forms: `none`, `jacobi`, `exact`, `ichol[:tol]`, `ilu[:tol]`,
    /// `mg[:cycles[:levels[:weight]]]`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let head = parts.next().unwrap_or("").to_ascii_lowercase();
        let rest: Vec<&str> = parts.collect();
        let num = |i: usize, default: f64| -> Result<f64> {
            match rest.get(i) {
                None => Ok(default),
                Some(t) => t
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number '{t}' in preconditioner '{s}'"))),
            }
        };
        let int = |i: usize, default: usize| -> Result<usize> {
            match rest.get(i) {
                None => Ok(default),
                Some(t) => t
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad count '{t}' in preconditioner '{s}'"))),
            }
        };
        let spec = match head.as_str() {
            "none" | "identity" => PrecondSpec::Identity,
            "jacobi" => PrecondSpec::Jacobi,
            "exact" | "exactsym" | "exact-sym" => PrecondSpec::ExactSym,
            "ichol" | "ic" => PrecondSpec::IncompleteCholesky { drop_tol: num(0, 1e-2)? },
            "ilu" => PrecondSpec::IncompleteLu { drop_tol: num(0, 1e-3)? },
            "mg" | "multigrid" => PrecondSpec::GeoMultigrid {
                cycles: int(0, 1)?,
                levels: int(1, 0)?,
                smoother_weight: num(2, 2.0 / 3.0)?,
            },
            _ => return Err(Error::Config(format!("unknown preconditioner '{s}'"))),
        };
        Ok(spec)
    }
}

impl TryFrom<String> for PrecondSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PrecondSpec> for String {
    fn from(p: PrecondSpec) -> String {
        p.to_string()
    }
}

/// Exact solve with a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub enum ExactSolve {
    Cholesky(EnvelopeCholesky),
    /// Inner CG preconditioned by incomplete Cholesky.
    Iterative {
        a: SparseMatrix,
        ic: IncompleteCholesky,
    },
}

impl ExactSolve {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        if !a.is_symmetric() {
            return Err(Error::Structure("exact symmetric solve needs a symmetric matrix".into()));
        }
        if a.nrows() <= EXACT_SYM_DIRECT_MAX_N {
            match EnvelopeCholesky::new(a) {
                Ok(c) => return Ok(ExactSolve::Cholesky(c)),
                Err(Error::TooLarge { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        let ic = IncompleteCholesky::new(a, 1e-3)?;
        Ok(ExactSolve::Iterative { a: a.clone(), ic })
    }

    fn solve_into(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        match self {
            ExactSolve::Cholesky(c) => c.solve_into(b, x),
            ExactSolve::Iterative { a, ic } => {
                inner_pcg(a, ic, b, x, EXACT_SYM_CG_TOL);
                Ok(())
            }
        }
    }
}

/// PCG from zero; stops at the tolerance or when progress stalls.
fn inner_pcg(a: &SparseMatrix, ic: &IncompleteCholesky, b: &[f64], x: &mut [f64], tol: f64) {
    let n = b.len();
    x.iter_mut().for_each(|v| *v = 0.0);
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return;
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    ic.solve_into(&r, &mut z).unwrap();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut best = f64::INFINITY;
    let mut stall = 0;
    for _ in 0..10 * n + 100 {
        a.spmv_into(&p, &mut q).unwrap();
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return;
        }
        let alpha = rz / pq;
        axpy(alpha, &p, x);
        axpy(-alpha, &q, &mut r);
        let rn = dot(&r, &r).sqrt();
        if rn <= tol * bnorm {
            return;
        }
        if rn < 0.5 * best {
            best = rn;
            stall = 0;
        } else {
            stall += 1;
            if stall > 50 {
                return;
            }
        }
        ic.solve_into(&r, &mut z).unwrap();
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
}

/// A built preconditioner; `apply` approximates `target^{-1}`.
#[derive(Clone, Debug)]
pub enum Preconditioner {
    Identity(usize),
    Jacobi(Vec<f64>),
    ExactSym(ExactSolve),
    IncompleteCholesky(IncompleteCholesky),
    IncompleteLu(IncompleteLu),
    GeoMultigrid(Multigrid),
    DiagonalOf(Vec<f64>),
}

fn inverse_diagonal(d: &[f64], what: &str) -> Result<Vec<f64>> {
    d.iter()
        .enumerate()
        .map(|(i, &v)| {
            if v != 0.0 && v.is_finite() {
                Ok(1.0 / v)
            } else {
                Err(Error::Singular(format!("{what}: zero diagonal entry at row {i}")))
            }
        })
        .collect()
}

impl Preconditioner {
    pub fn build(spec: &PrecondSpec, target: &SparseMatrix, grid: Option<&GridHint>) -> Result<Self> {
        if !target.is_square() {
            return shape_err("preconditioner target must be square");
        }
        Ok(match spec {
            PrecondSpec::Identity => Preconditioner::Identity(target.nrows()),
            PrecondSpec::Jacobi => Preconditioner::Jacobi(inverse_diagonal(&target.diagonal(), "Jacobi")?),
            PrecondSpec::ExactSym => Preconditioner::ExactSym(ExactSolve::new(target)?),
            PrecondSpec::IncompleteCholesky { drop_tol } => {
                if !target.is_symmetric() {
                    return Err(Error::Structure("incomplete Cholesky needs a symmetric matrix".into()));
                }
                Preconditioner::IncompleteCholesky(IncompleteCholesky::new(target, *drop_tol)?)
            }
            PrecondSpec::IncompleteLu { drop_tol } => {
                Preconditioner::IncompleteLu(IncompleteLu::new(target, *drop_tol)?)
            }
            PrecondSpec::GeoMultigrid {
                levels,
                cycles,
                smoother_weight,
            } => {
                let grid = grid.ok_or_else(|| {
                    Error::Hierarchy("geometric multigrid needs a structured grid hint".into())
                })?;
                let opts = MultigridOptions {
                    levels: *levels,
                    cycles: *cycles,
                    smoother_weight: *smoother_weight,
                    ..MultigridOptions::default()
                };
                Preconditioner::GeoMultigrid(Multigrid::new(target, grid, opts)?)
            }
            PrecondSpec::DiagonalOf(m) => {
                if m.shape() != target.shape() {
                    return shape_err("diagonal preconditioner matrix does not match target");
                }
                Preconditioner::DiagonalOf(inverse_diagonal(&m.diagonal(), "diagonal preconditioner")?)
            }
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Preconditioner::Identity(n) => *n,
            Preconditioner::Jacobi(d) | Preconditioner::DiagonalOf(d) => d.len(),
            Preconditioner::ExactSym(ExactSolve::Cholesky(c)) => c.dim(),
            Preconditioner::ExactSym(ExactSolve::Iterative { a, .. }) => a.nrows(),
            Preconditioner::IncompleteCholesky(c) => c.dim(),
            Preconditioner::IncompleteLu(c) => c.dim(),
            Preconditioner::GeoMultigrid(m) => m.dim(),
        }
    }

    /// True for variants that are symmetric operators.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, Preconditioner::IncompleteLu(_))
    }

    /// True when `apply` is an exact solve with an SPD matrix.
    pub fn is_exact_symmetric(&self) -> bool {
        matches!(self, Preconditioner::ExactSym(_) | Preconditioner::Identity(_))
    }

    pub fn apply_vec(&self, r: &[f64]) -> Result<Vec<f64>> {
        let mut z = vec![0.0; self.dim()];
        LinearOperator::apply(self, r, &mut z)?;
        Ok(z)
    }
}

impl LinearOperator for Preconditioner {
    fn nrows(&self) -> usize {
        self.dim()
    }
    fn ncols(&self) -> usize {
        self.dim()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dims(self, x, y)?;
        match self {
            Preconditioner::Identity(_) => {
                y.copy_from_slice(x);
                Ok(())
            }
            Preconditioner::Jacobi(d) | Preconditioner::DiagonalOf(d) => {
                for i in 0..x.len() {
                    y[i] = d[i] * x[i];
                }
                Ok(())
            }
            Preconditioner::ExactSym(e) => e.solve_into(x, y),
            Preconditioner::IncompleteCholesky(c) => c.solve_into(x, y),
            Preconditioner::IncompleteLu(c) => c.solve_into(x, y),
            Preconditioner::GeoMultigrid(m) => m.solve_into(x, y),
        }
    }
    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        match self {
            Preconditioner::IncompleteLu(c) => {
                check_dims(self, x, y)?;
                c.solve_transpose_into(x, y)
            }
            _ => self.apply(x, y),
        }
    }
    fn has_adjoint(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn jacobi_diag() {
        let a = SparseMatrix::from_diagonal(&[2.0, 4.0]);
        let p = Preconditioner::build(&PrecondSpec::Jacobi, &a, None).unwrap();
        assert_eq!(p.apply_vec(&[2.0, 4.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn identity_is_identity() {
        let a = tridiag(3);
        let p = Preconditioner::build(&PrecondSpec::Identity, &a, None).unwrap();
        assert_eq!(p.apply_vec(&[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn exact_sym_solves_tridiag() {
        let a = tridiag(3);
        let r = a.spmv(&[1.0, 2.0, 3.0]).unwrap();
        let p = Preconditioner::build(&PrecondSpec::ExactSym, &a, None).unwrap();
        let z = p.apply_vec(&r).unwrap();
        for (zi, e) in z.iter().zip([1.0, 2.0, 3.0]) {
            assert!((zi - e).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_sym_rejects_nonsymmetric() {
        let a = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap();
        assert!(Preconditioner::build(&PrecondSpec::ExactSym, &a, None).is_err());
    }

    #[test]
    fn multigrid_needs_grid() {
        let a = tridiag(7);
        let e = Preconditioner::build(&PrecondSpec::multigrid(1), &a, None);
        assert!(matches!(e, Err(Error::Hierarchy(_))));
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["none", "jacobi", "exact", "ichol:1e-2", "ilu:1e-4", "mg:2:0:0.8"] {
            let p: PrecondSpec = s.parse().unwrap();
            let q: PrecondSpec = p.to_string().parse().unwrap();
            assert_eq!(p, q);
        }
        assert!("bogus".parse::<PrecondSpec>().is_err());
    }
}
