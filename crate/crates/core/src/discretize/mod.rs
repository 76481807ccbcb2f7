//! Finite difference model problems on uniform grids: advection-diffusion-
//! reaction, pressure-regularized Stokes, Oseen, a first-order wave system
//! and a damped beam. Only interior unknowns are kept.

mod advdiff;
mod beam;
mod mac;
mod schur;
mod wave;

pub use advdiff::assemble_advdiff;
pub use beam::assemble_beam;
pub use mac::{assemble_oseen, assemble_stokes};
pub use schur::{schur_operator, SchurOperator};
pub use wave::assemble_wave;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precond::GridHint;
use crate::sparse::{SparseMatrix, SplitOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    AdvDiff,
    Stokes,
    Oseen,
    Wave,
    Beam,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ProblemKind::AdvDiff => "advdiff",
            ProblemKind::Stokes => "stokes",
            ProblemKind::Oseen => "oseen",
            ProblemKind::Wave => "wave",
            ProblemKind::Beam => "beam",
        };
        f.write_str(s)
    }
}

impl FromStr for ProblemKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "advdiff" | "adv-diff" | "advection-diffusion" => Ok(ProblemKind::AdvDiff),
            "stokes" => Ok(ProblemKind::Stokes),
            "oseen" => Ok(ProblemKind::Oseen),
            "wave" => Ok(ProblemKind::Wave),
            "beam" => Ok(ProblemKind::Beam),
            other => Err(Error::Config(format!("unknown problem '{other}'"))),
        }
    }
}

/// Physical parameters. Advection components not given are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    /// Diffusivity / viscosity.
    pub nu: f64,
    /// Constant advection field.
    pub b: Vec<f64>,
    /// Reaction coefficient.
    pub c: f64,
    /// Pressure regularization weights.
    pub s1: f64,
    pub s2: f64,
    /// Wave friction coefficients.
    pub rho: f64,
    pub eta: f64,
    /// Oseen viscosity.
    pub mu: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            nu: 1.0,
            b: Vec::new(),
            c: 0.0,
            s1: 1.0,
            s2: 1.0,
            rho: 1.0,
            eta: 1.0,
            mu: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub dim: usize,
    pub cells_per_side: usize,
    pub params: Params,
    /// Extent of the box along each axis; empty means the unit box.
    pub domain_box: Vec<f64>,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            kind: ProblemKind::AdvDiff,
            dim: 1,
            cells_per_side: 16,
            params: Params::default(),
            domain_box: Vec::new(),
        }
    }
}

impl ProblemSpec {
    /// Default parameters, with unit advection along every axis for the
    /// advection-diffusion and Oseen problems.
    pub fn new(kind: ProblemKind, dim: usize, cells_per_side: usize) -> Self {
        let mut params = Params::default();
        if matches!(kind, ProblemKind::AdvDiff | ProblemKind::Oseen) {
            params.b = vec![1.0; dim];
        }
        Self {
            kind,
            dim,
            cells_per_side,
            params,
            domain_box: Vec::new(),
        }
    }

    pub fn with_cells(&self, cells: usize) -> Self {
        let mut s = self.clone();
        s.cells_per_side = cells;
        s
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.domain_box.get(axis).copied().unwrap_or(1.0)
    }

    /// Mesh width along the first axis.
    pub fn h(&self) -> f64 {
        self.extent(0) / self.cells_per_side as f64
    }

    pub fn advection(&self, axis: usize) -> f64 {
        self.params.b.get(axis).copied().unwrap_or(0.0)
    }

    /// Structured-grid description of the unknowns, when they form a single
    /// tensor grid.
    pub fn grid_hint(&self) -> Option<GridHint> {
        match self.kind {
            ProblemKind::AdvDiff => Some(GridHint::new(vec![self.cells_per_side - 1; self.dim])),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        if self.cells_per_side < 2 {
            return Err(Error::InvalidArgument("cells_per_side must be at least 2".into()));
        }
        let dims_ok = match self.kind {
            ProblemKind::AdvDiff => (1..=3).contains(&self.dim),
            ProblemKind::Stokes | ProblemKind::Oseen => self.dim == 2,
            ProblemKind::Wave | ProblemKind::Beam => self.dim == 1,
        };
        if !dims_ok {
            return Err(Error::Unsupported(format!("{} in dimension {}", self.kind, self.dim)));
        }
        if p.b.len() > self.dim {
            return Err(Error::InvalidArgument(format!(
                "advection vector has {} components in dimension {}",
                p.b.len(),
                self.dim
            )));
        }
        if self.domain_box.len() > self.dim || self.domain_box.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidArgument("domain_box needs one positive extent per axis".into()));
        }
        if p.b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("advection must be finite".into()));
        }
        if matches!(self.kind, ProblemKind::AdvDiff | ProblemKind::Stokes) && !(p.nu > 0.0) {
            return Err(Error::InvalidArgument(format!("nu = {} must be positive", p.nu)));
        }
        if self.kind == ProblemKind::Oseen && !(p.mu > 0.0) {
            return Err(Error::InvalidArgument(format!("mu = {} must be positive", p.mu)));
        }
        if !(p.c >= 0.0) || !(p.s1 >= 0.0) || !(p.s2 >= 0.0) || !(p.rho >= 0.0) || !(p.eta >= 0.0) {
            return Err(Error::InvalidArgument("c, s1, s2, rho and eta must be non-negative".into()));
        }
        Ok(())
    }
}

/// A two-field saddle-point operator `[[A11, A12], [A21, 0]]`.
#[derive(Clone, Debug)]
pub struct BlockSystem {
    pub a11: SplitOperator,
    pub a12: SparseMatrix,
    pub a21: SparseMatrix,
    /// Mass matrix of the second field.
    pub mass_p: SparseMatrix,
    pub h_grid: f64,
    /// Unit vector spanning the kernel of `A12` (the constant pressure), if any.
    pub kernel: Option<Vec<f64>>,
}

impl BlockSystem {
    pub fn n1(&self) -> usize {
        self.a11.dim()
    }
    pub fn n2(&self) -> usize {
        self.a12.ncols()
    }
}

/// Result of assembling a [`ProblemSpec`].
#[derive(Clone, Debug)]
pub enum Assembled {
    Split(SplitOperator),
    Block(BlockSystem),
}

impl Assembled {
    pub fn dofs(&self) -> usize {
        match self {
            Assembled::Split(s) => s.dim(),
            Assembled::Block(b) => b.n1() + b.n2(),
        }
    }
}

pub fn assemble(spec: &ProblemSpec) -> Result<Assembled> {
    Ok(match spec.kind {
        ProblemKind::AdvDiff => Assembled::Split(assemble_advdiff(spec)?),
        ProblemKind::Stokes => Assembled::Split(assemble_stokes(spec)?),
        ProblemKind::Wave => Assembled::Split(assemble_wave(spec)?),
        ProblemKind::Oseen => Assembled::Block(assemble_oseen(spec)?),
        ProblemKind::Beam => Assembled::Block(assemble_beam(spec)?),
    })
}

pub(crate) fn expect_kind(spec: &ProblemSpec, kind: ProblemKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::InvalidArgument(format!("expected a {kind} problem, got {}", spec.kind)));
    }
    spec.validate()
}

/// tridiag(-1, 2, -1) / h^2
pub(crate) fn laplacian_1d(n: usize, h: f64) -> SparseMatrix {
    let d = 2.0 / (h * h);
    let o = -1.0 / (h * h);
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        if i > 0 {
            t.push((i, i - 1, o));
        }
        t.push((i, i, d));
        if i + 1 < n {
            t.push((i, i + 1, o));
        }
    }
    SparseMatrix::from_triplets(n, n, &t).expect("valid stencil")
}

/// tridiag(-1, 0, 1) / (2h)
pub(crate) fn central_difference_1d(n: usize, h: f64) -> SparseMatrix {
    let c = 1.0 / (2.0 * h);
    let mut t = Vec::with_capacity(2 * n);
    for i in 0..n {
        if i > 0 {
            t.push((i, i - 1, -c));
        }
        if i + 1 < n {
            t.push((i, i + 1, c));
        }
    }
    SparseMatrix::from_triplets(n, n, &t).expect("valid stencil")
}

/// Embeds a 1D operator acting along `axis` of a tensor grid with x fastest.
pub(crate) fn along_axis(op: &SparseMatrix, axis: usize, dims: &[usize]) -> SparseMatrix {
    let mut m = SparseMatrix::identity(1);
    for a in (0..dims.len()).rev() {
        let f = if a == axis { op.clone() } else { SparseMatrix::identity(dims[a]) };
        m = m.kron(&f);
    }
    m
}
