//! Linear-quadratic optimal control with a linear constraint:
//!
//! ```text
//! minimize  1/2 ||C x - y_ref||^2 + λ/2 ||u - u_ref||^2   subject to  A x - B u = f
//! ```
//!
//! Three solution paths are provided: CG on the control-reduced (condensed)
//! operator, projected preconditioned CG on the full KKT system with a
//! constraint preconditioner, and CG on the adjoint Schur complement when the
//! observation `C` is invertible.

mod midpoint;

pub use midpoint::midpoint_step;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::factor::EnvelopeLu;
use crate::krylov::{cg_solve_ext, CgOptions, Method, PreparedSolver, SolveReport, SolverConfig, Termination};
use crate::operator::{check_dims, FnOperator, LinearOperator};
use crate::precond::{GridHint, PrecondSpec};
use crate::sparse::{SparseMatrix, SplitOperator};
use crate::vecops::{axpy, norm2};

/// Inner tolerance of the condensed pipeline relative to the outer one.
pub const CONDENSED_INNER_FACTOR: f64 = 0.1;
/// Fixed inner tolerance of the PPCG pipeline.
pub const PPCG_INNER_TOL: f64 = 1e-6;
/// Constraint drift, relative to `max(1, ||f||)`, that marks a PPCG run as
/// infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-6;
/// Residual-replacement restarts of the Schur-route CG.
const SCHUR_RESTARTS: usize = 5;

#[derive(Clone, Debug)]
pub struct OcpProblem {
    pub a_split: SplitOperator,
    pub b_in: SparseMatrix,
    pub c_out: SparseMatrix,
    pub lambda_reg: f64,
    pub f: Vec<f64>,
    pub y_ref: Vec<f64>,
    pub u_ref: Vec<f64>,
    /// Grid of the state unknowns, for multigrid inner solvers.
    pub grid: Option<GridHint>,
}

impl OcpProblem {
    pub fn new(
        a_split: SplitOperator,
        b_in: SparseMatrix,
        c_out: SparseMatrix,
        lambda_reg: f64,
        f: Vec<f64>,
        y_ref: Vec<f64>,
        u_ref: Vec<f64>,
    ) -> Result<Self> {
        let p = Self {
            a_split,
            b_in,
            c_out,
            lambda_reg,
            f,
            y_ref,
            u_ref,
            grid: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Distributed control and full observation: `B = C = I`, `u_ref = 0`.
    pub fn distributed(a_split: SplitOperator, lambda_reg: f64, f: Vec<f64>, y_ref: Vec<f64>) -> Result<Self> {
        let n = a_split.dim();
        Self::new(
            a_split,
            SparseMatrix::identity(n),
            SparseMatrix::identity(n),
            lambda_reg,
            f,
            y_ref,
            vec![0.0; n],
        )
    }

    pub fn with_grid(mut self, grid: Option<GridHint>) -> Self {
        self.grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.b_in.nrows() != n {
            return shape_err(format!("B has {} rows, A is {n}x{n}", self.b_in.nrows()));
        }
        if self.c_out.ncols() != n {
            return shape_err(format!("C has {} columns, A is {n}x{n}", self.c_out.ncols()));
        }
        if self.f.len() != n || self.y_ref.len() != self.q() || self.u_ref.len() != self.m() {
            return shape_err("f, y_ref or u_ref has the wrong length");
        }
        if !(self.lambda_reg > 0.0) || !self.lambda_reg.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "regularization {} must be positive",
                self.lambda_reg
            )));
        }
        Ok(())
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a_split.dim()
    }
    /// Control dimension.
    pub fn m(&self) -> usize {
        self.b_in.ncols()
    }
    /// Observation dimension.
    pub fn q(&self) -> usize {
        self.c_out.nrows()
    }

    /// `A x - B u - f`.
    pub fn constraint_residual(&self, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.a_split.a.spmv(x)?;
        let bu = self.b_in.spmv(u)?;
        for i in 0..r.len() {
            r[i] -= bu[i] + self.f[i];
        }
        Ok(r)
    }

    /// `1/2 ||C x - y_ref||^2 + λ/2 ||u - u_ref||^2` for a given state.
    pub fn cost_at(&self, x: &[f64], u: &[f64]) -> Result<f64> {
        let cx = self.c_out.spmv(x)?;
        let track: f64 = cx.iter().zip(&self.y_ref).map(|(a, b)| (a - b).powi(2)).sum();
        let reg: f64 = u.iter().zip(&self.u_ref).map(|(a, b)| (a - b).powi(2)).sum();
        Ok(0.5 * track + 0.5 * self.lambda_reg * reg)
    }
}

/// Solver-side counters of `A` and `A^T` solves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnerTotals {
    pub solves: usize,
    pub iterations: usize,
}

impl InnerTotals {
    fn of(solver: &PreparedSolver) -> Self {
        Self {
            solves: solver.total_solves(),
            iterations: solver.total_iterations(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct KktSolution {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub outer_report: SolveReport,
    pub inner_totals: InnerTotals,
    /// `||A x_k - B u_k - f||` per outer iteration (PPCG only).
    pub constraint_residual_history: Vec<f64>,
    /// The PPCG iterates drifted off the constraint beyond [`FEASIBILITY_TOL`].
    pub feasibility_degraded: bool,
    /// Relative residual of the full KKT system at the returned point.
    pub kkt_residual: f64,
    /// Seconds including preconditioner and factorization setup.
    pub total_time: f64,
}

/// The KKT matrix `[[C^T C, 0, A^T], [0, λI, -B^T], [A, -B, 0]]` with
/// right-hand side `(C^T y_ref, λ u_ref, f)`, unknowns ordered `(x, u, p)`.
#[derive(Clone, Debug)]
pub struct KktSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
}

pub fn assemble_kkt(ocp: &OcpProblem) -> Result<KktSystem> {
    ocp.validate()?;
    let a = &ocp.a_split.a;
    let ctc = ocp.c_out.transpose().matmul(&ocp.c_out)?;
    let lam = SparseMatrix::identity(ocp.m()).scaled(ocp.lambda_reg);
    let at = a.transpose();
    let mbt = ocp.b_in.transpose().scaled(-1.0);
    let mb = ocp.b_in.scaled(-1.0);
    let matrix = SparseMatrix::block(&[
        vec![Some(&ctc), None, Some(&at)],
        vec![None, Some(&lam), Some(&mbt)],
        vec![Some(a), Some(&mb), None],
    ])?;
    let mut rhs = ocp.c_out.transpose().spmv(&ocp.y_ref)?;
    rhs.extend(ocp.u_ref.iter().map(|v| ocp.lambda_reg * v));
    rhs.extend_from_slice(&ocp.f);
    Ok(KktSystem { matrix, rhs })
}

/// `||K z - rhs|| / ||rhs||` for the KKT system, evaluated blockwise.
pub fn kkt_residual(ocp: &OcpProblem, x: &[f64], u: &[f64], p: &[f64]) -> Result<f64> {
    let a = &ocp.a_split.a;
    let cx = ocp.c_out.spmv(x)?;
    let mut r1 = ocp.c_out.transpose().spmv(&cx)?;
    let mut atp = vec![0.0; ocp.n()];
    a.spmv_transpose_into(p, &mut atp)?;
    let cty = ocp.c_out.transpose().spmv(&ocp.y_ref)?;
    for i in 0..r1.len() {
        r1[i] += atp[i] - cty[i];
    }
    let mut btp = vec![0.0; ocp.m()];
    ocp.b_in.spmv_transpose_into(p, &mut btp)?;
    let r2: Vec<f64> = (0..ocp.m())
        .map(|i| ocp.lambda_reg * (u[i] - ocp.u_ref[i]) - btp[i])
        .collect();
    let r3 = ocp.constraint_residual(x, u)?;
    let num = (norm2(&r1).powi(2) + norm2(&r2).powi(2) + norm2(&r3).powi(2)).sqrt();
    let den = (norm2(&cty).powi(2) + (ocp.lambda_reg * norm2(&ocp.u_ref)).powi(2) + norm2(&ocp.f).powi(2)).sqrt();
    Ok(if den > 0.0 { num / den } else { num })
}

/// The control-reduced operator `(C A^{-1} B)^T (C A^{-1} B) + λ I`, applied
/// with one state solve and one adjoint solve.
pub struct ReducedOperator<'a> {
    ocp: &'a OcpProblem,
    solver: PreparedSolver,
}

impl<'a> ReducedOperator<'a> {
    pub fn new(ocp: &'a OcpProblem, inner: &SolverConfig) -> Result<Self> {
        ocp.validate()?;
        Ok(Self {
            ocp,
            solver: PreparedSolver::new(&ocp.a_split, inner, ocp.grid.as_ref())?,
        })
    }

    pub fn solver(&self) -> &PreparedSolver {
        &self.solver
    }

    pub fn inner_totals(&self) -> InnerTotals {
        InnerTotals::of(&self.solver)
    }

    /// `A^{-T} C^T (C x - y)` with `y` optional.
    fn adjoint_of_state(&self, x: &[f64], y: Option<&[f64]>) -> Result<Vec<f64>> {
        let mut cx = self.ocp.c_out.spmv(x)?;
        if let Some(y) = y {
            cx.iter_mut().zip(y).for_each(|(a, b)| *a -= b);
        }
        let mut g = vec![0.0; self.ocp.n()];
        self.ocp.c_out.spmv_transpose_into(&cx, &mut g)?;
        self.solver.solve_transpose(&g).map_err(|e| e.context("adjoint solve"))
    }

    fn state(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solver.solve(rhs).map_err(|e| e.context("state solve"))
    }

    /// State `x = A^{-1}(B u + f)`.
    pub fn state_of(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut rhs = self.ocp.b_in.spmv(u)?;
        axpy(1.0, &self.ocp.f, &mut rhs);
        self.state(&rhs)
    }

    /// Right-hand side `-B^T A^{-T} C^T (C A^{-1} f - y_ref) + λ u_ref`.
    pub fn rhs(&self) -> Result<Vec<f64>> {
        let x0 = self.state(&self.ocp.f)?;
        let w = self.adjoint_of_state(&x0, Some(&self.ocp.y_ref))?;
        let mut g = vec![0.0; self.ocp.m()];
        self.ocp.b_in.spmv_transpose_into(&w, &mut g)?;
        Ok(g
            .iter()
            .zip(&self.ocp.u_ref)
            .map(|(gi, ui)| self.ocp.lambda_reg * ui - gi)
            .collect())
    }

    /// Gradient of the reduced cost `u -> J(x(u), u)`.
    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        let x = self.state_of(u)?;
        let w = self.adjoint_of_state(&x, Some(&self.ocp.y_ref))?;
        let mut g = vec![0.0; self.ocp.m()];
        self.ocp.b_in.spmv_transpose_into(&w, &mut g)?;
        for i in 0..g.len() {
            g[i] += self.ocp.lambda_reg * (u[i] - self.ocp.u_ref[i]);
        }
        Ok(g)
    }

    /// Reduced cost `J(x(u), u)`.
    pub fn cost(&self, u: &[f64]) -> Result<f64> {
        let x = self.state_of(u)?;
        self.ocp.cost_at(&x, u)
    }
}

impl LinearOperator for ReducedOperator<'_> {
    fn nrows(&self) -> usize {
        self.ocp.m()
    }
    fn ncols(&self) -> usize {
        self.ocp.m()
    }
    fn apply(&self, u: &[f64], y: &mut [f64]) -> Result<()> {
        check_dims(self, u, y)?;
        let v = self.state(&self.ocp.b_in.spmv(u)?)?;
        let w = self.adjoint_of_state(&v, None)?;
        self.ocp.b_in.spmv_transpose_into(&w, y)?;
        axpy(self.ocp.lambda_reg, u, y);
        Ok(())
    }
    fn apply_adjoint(&self, u: &[f64], y: &mut [f64]) -> Result<()> {
        self.apply(u, y)
    }
    fn has_adjoint(&self) -> bool {
        true
    }
}

/// One application of the reduced operator.
pub fn reduced_apply(ocp: &OcpProblem, inner: &SolverConfig, u: &[f64]) -> Result<Vec<f64>> {
    ReducedOperator::new(ocp, inner)?.apply_vec(u)
}

/// Reduced gradient at `u` by one state and one adjoint solve.
pub fn reduced_gradient(ocp: &OcpProblem, inner: &SolverConfig, u: &[f64]) -> Result<Vec<f64>> {
    ReducedOperator::new(ocp, inner)?.gradient(u)
}

/// Outer-loop settings shared by the three pipelines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OcpOptions {
    pub max_outer: usize,
    /// Overrides the pipeline's inner tolerance policy.
    pub inner_tol: Option<f64>,
}

impl Default for OcpOptions {
    fn default() -> Self {
        Self {
            max_outer: 1000,
            inner_tol: None,
        }
    }
}

fn outer_cfg(cgtol: f64, opts: &OcpOptions) -> SolverConfig {
    SolverConfig::new(Method::Cg, PrecondSpec::Identity, cgtol).with_max_iter(opts.max_outer)
}

fn with_inner_tol(inner: &SolverConfig, tol: f64) -> SolverConfig {
    let mut c = inner.clone();
    c.tol = tol;
    c
}

/// CG on the reduced operator; inner solves run to `cgtol / 10`.
pub fn condensed_solve(ocp: &OcpProblem, inner: &SolverConfig, cgtol: f64) -> Result<KktSolution> {
    condensed_solve_with(ocp, inner, cgtol, &OcpOptions::default())
}

pub fn condensed_solve_with(
    ocp: &OcpProblem,
    inner: &SolverConfig,
    cgtol: f64,
    opts: &OcpOptions,
) -> Result<KktSolution> {
    let start = Instant::now();
    let inner = with_inner_tol(inner, opts.inner_tol.unwrap_or(CONDENSED_INNER_FACTOR * cgtol));
    let red = ReducedOperator::new(ocp, &inner)?;
    let rhs = red.rhs()?;
    let (u, mut report) = cg_solve_ext(&red, None, &rhs, &outer_cfg(cgtol, opts), CgOptions::default(), None)?;
    let x = red.state_of(&u)?;
    // p = A^{-T} C^T (y_ref - C x)
    let mut p = red.adjoint_of_state(&x, Some(&ocp.y_ref))?;
    p.iter_mut().for_each(|v| *v = -*v);
    let totals = red.inner_totals();
    report.inner_iterations = totals.iterations;
    Ok(KktSolution {
        kkt_residual: kkt_residual(ocp, &x, &u, &p)?,
        x,
        u,
        p,
        outer_report: report,
        inner_totals: totals,
        constraint_residual_history: Vec::new(),
        feasibility_degraded: false,
        total_time: start.elapsed().as_secs_f64(),
    })
}

/// The constraint preconditioner `[[0, 0, A^T], [0, λI, -B^T], [A, -B, 0]]`
/// inverted block-row-wise with one `A^T` solve and one `A` solve.
pub struct ConstraintPreconditioner<'a> {
    ocp: &'a OcpProblem,
    solver: PreparedSolver,
}

impl<'a> ConstraintPreconditioner<'a> {
    pub fn new(ocp: &'a OcpProblem, inner: &SolverConfig) -> Result<Self> {
        ocp.validate()?;
        Ok(Self {
            ocp,
            solver: PreparedSolver::new(&ocp.a_split, inner, ocp.grid.as_ref())?,
        })
    }

    pub fn inner_totals(&self) -> InnerTotals {
        InnerTotals::of(&self.solver)
    }

    fn dim(&self) -> usize {
        2 * self.ocp.n() + self.ocp.m()
    }
}

impl LinearOperator for ConstraintPreconditioner<'_> {
    fn nrows(&self) -> usize {
        self.dim()
    }
    fn ncols(&self) -> usize {
        self.dim()
    }
    fn apply(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        check_dims(self, r, z)?;
        let (n, m) = (self.ocp.n(), self.ocp.m());
        let (r1, rest) = r.split_at(n);
        let (r2, r3) = rest.split_at(m);
        let p = self.solver.solve_transpose(r1).map_err(|e| e.context("adjoint solve"))?;
        let mut u = vec![0.0; m];
        self.ocp.b_in.spmv_transpose_into(&p, &mut u)?;
        for i in 0..m {
            u[i] = (u[i] + r2[i]) / self.ocp.lambda_reg;
        }
        let mut rhs = self.ocp.b_in.spmv(&u)?;
        axpy(1.0, r3, &mut rhs);
        let x = self.solver.solve(&rhs).map_err(|e| e.context("state solve"))?;
        z[..n].copy_from_slice(&x);
        z[n..n + m].copy_from_slice(&u);
        z[n + m..].copy_from_slice(&p);
        Ok(())
    }
}

/// `z = P^{-1} r` for a 3-block vector `r = (r1, r2, r3)`.
pub fn constraint_precond_apply(ocp: &OcpProblem, inner: &SolverConfig, r: &[f64]) -> Result<Vec<f64>> {
    ConstraintPreconditioner::new(ocp, inner)?.apply_vec(r)
}

/// Projected preconditioned CG on the KKT system, started from the feasible
/// point `(A^{-1} f, 0, 0)`. Inner solves run to `1e-6`.
pub fn ppcg_solve(ocp: &OcpProblem, inner: &SolverConfig, cgtol: f64) -> Result<KktSolution> {
    ppcg_solve_with(ocp, inner, cgtol, &OcpOptions::default())
}

pub fn ppcg_solve_with(ocp: &OcpProblem, inner: &SolverConfig, cgtol: f64, opts: &OcpOptions) -> Result<KktSolution> {
    let start = Instant::now();
    let inner = with_inner_tol(inner, opts.inner_tol.unwrap_or(PPCG_INNER_TOL));
    let kkt = assemble_kkt(ocp)?;
    let prec = ConstraintPreconditioner::new(ocp, &inner)?;
    let (n, m) = (ocp.n(), ocp.m());
    let mut z0 = prec.solver.solve(&ocp.f).map_err(|e| e.context("initial state solve"))?;
    z0.resize(2 * n + m, 0.0);
    let mut history = Vec::new();
    let mut first_err = None;
    let mut observer = |_k: usize, z: &[f64]| match ocp.constraint_residual(&z[..n], &z[n..n + m]) {
        Ok(r) => history.push(norm2(&r)),
        Err(e) => {
            first_err.get_or_insert(e);
        }
    };
    let cg_opts = CgOptions {
        x0: Some(&z0),
        ref_norm: Some(norm2(&kkt.rhs)),
    };
    let (z, mut report) = cg_solve_ext(
        &kkt.matrix,
        Some(&prec),
        &kkt.rhs,
        &outer_cfg(cgtol, opts),
        cg_opts,
        Some(&mut observer),
    )?;
    if let Some(e) = first_err {
        return Err(e);
    }
    let limit = FEASIBILITY_TOL * norm2(&ocp.f).max(1.0);
    let degraded = history.iter().any(|&r| r > limit);
    let (x, rest) = z.split_at(n);
    let (u, p) = rest.split_at(m);
    let totals = prec.inner_totals();
    report.inner_iterations = totals.iterations;
    Ok(KktSolution {
        kkt_residual: kkt_residual(ocp, x, u, p)?,
        x: x.to_vec(),
        u: u.to_vec(),
        p: p.to_vec(),
        outer_report: report,
        inner_totals: totals,
        constraint_residual_history: history,
        feasibility_degraded: degraded,
        total_time: start.elapsed().as_secs_f64(),
    })
}

/// CG on the adjoint Schur complement `A (C^T C)^{-1} A^T + B B^T / λ`,
/// followed by back substitution. Needs a square invertible `C`; `cfg`
/// configures the outer CG (method and preconditioner are ignored).
pub fn kkt_schur_solve(ocp: &OcpProblem, cfg: &SolverConfig) -> Result<KktSolution> {
    let start = Instant::now();
    ocp.validate()?;
    let (n, m) = (ocp.n(), ocp.m());
    if ocp.q() != n {
        return Err(Error::Unsupported(
            "the Schur route needs a square observation operator C".into(),
        ));
    }
    let c_lu = EnvelopeLu::new(&ocp.c_out)
        .map_err(|e| Error::Unsupported(format!("the Schur route needs C^T C invertible: {e}")))?;
    let a = &ocp.a_split.a;
    let lam = ocp.lambda_reg;
    // (C^T C)^{-1} v = C^{-1} C^{-T} v
    let ctc_inv = |v: &[f64]| -> Result<Vec<f64>> { c_lu.solve(&c_lu.solve_transpose(v)?) };
    let schur = FnOperator::new(n, n, |p: &[f64], y: &mut [f64]| {
        let mut t = vec![0.0; n];
        a.spmv_transpose_into(p, &mut t)?;
        a.spmv_into(&ctc_inv(&t)?, y)?;
        let mut btp = vec![0.0; m];
        ocp.b_in.spmv_transpose_into(p, &mut btp)?;
        let bbtp = ocp.b_in.spmv(&btp)?;
        axpy(1.0 / lam, &bbtp, y);
        Ok(())
    });
    // rhs = A C^{-1} y_ref - B u_ref - f
    let mut rhs = a.spmv(&c_lu.solve(&ocp.y_ref)?)?;
    let bu = ocp.b_in.spmv(&ocp.u_ref)?;
    for i in 0..n {
        rhs[i] -= bu[i] + ocp.f[i];
    }
    let kkt_rhs_norm = (norm2(&ocp.c_out.transpose().spmv(&ocp.y_ref)?).powi(2)
        + (lam * norm2(&ocp.u_ref)).powi(2)
        + norm2(&ocp.f).powi(2))
    .sqrt();
    let outer = SolverConfig::new(Method::Cg, PrecondSpec::Identity, cfg.tol).with_max_iter(cfg.max_iter);
    let ref_norm = if kkt_rhs_norm > 0.0 { kkt_rhs_norm } else { 1.0 };
    // The recursive CG residual drifts on this ill-conditioned operator, so
    // restart from the current iterate until the true residual agrees.
    let mut report = SolveReport::new();
    let mut p = vec![0.0; n];
    for restart in 0..=SCHUR_RESTARTS {
        let cg_opts = CgOptions {
            x0: Some(&p),
            ref_norm: Some(ref_norm),
        };
        let budget = outer.clone().with_max_iter(outer.max_iter.saturating_sub(report.iterations).max(1));
        let (next, rep) = cg_solve_ext(&schur, None, &rhs, &budget, cg_opts, None)?;
        p = next;
        report.iterations += rep.iterations;
        if restart == 0 {
            report.residual_history = rep.residual_history;
        } else {
            report.residual_history.extend_from_slice(&rep.residual_history[1..]);
        }
        let sp = schur.apply_vec(&p)?;
        let true_rel = rhs.iter().zip(&sp).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / ref_norm;
        *report.residual_history.last_mut().unwrap() = true_rel;
        if true_rel <= cfg.tol || !rep.converged || report.iterations >= outer.max_iter {
            break;
        }
    }
    report.finish(cfg.tol, start, Termination::MaxIterations);
    // x = C^{-1} y_ref - (C^T C)^{-1} A^T p, u = u_ref + B^T p / λ
    let mut atp = vec![0.0; n];
    a.spmv_transpose_into(&p, &mut atp)?;
    let mut x = c_lu.solve(&ocp.y_ref)?;
    axpy(-1.0, &ctc_inv(&atp)?, &mut x);
    let mut u = vec![0.0; m];
    ocp.b_in.spmv_transpose_into(&p, &mut u)?;
    for i in 0..m {
        u[i] = ocp.u_ref[i] + u[i] / lam;
    }
    Ok(KktSolution {
        kkt_residual: kkt_residual(ocp, &x, &u, &p)?,
        x,
        u,
        p,
        outer_report: report,
        inner_totals: InnerTotals::default(),
        constraint_residual_history: Vec::new(),
        feasibility_degraded: false,
        total_time: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(a: f64, lambda: f64, y: f64) -> OcpProblem {
        let sp = SplitOperator::from_parts(SparseMatrix::from_diagonal(&[a]), SparseMatrix::zeros(1, 1)).unwrap();
        OcpProblem::distributed(sp, lambda, vec![0.0], vec![y]).unwrap()
    }

    #[test]
    fn unit_kkt_matrix() {
        let k = assemble_kkt(&scalar(1.0, 1.0, 1.0)).unwrap();
        let expect = vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, -1.0], vec![1.0, -1.0, 0.0]];
        assert_eq!(k.matrix.to_dense(), expect);
        assert!(k.matrix.is_symmetric());
        assert_eq!(k.rhs, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn reduced_apply_examples() {
        let d = SolverConfig::direct();
        assert_eq!(reduced_apply(&scalar(1.0, 0.5, 0.0), &d, &[1.0]).unwrap(), vec![1.5]);
        // λ must be positive for a valid problem; check the Gram part alone
        let ocp = scalar(2.0, 1e-300, 0.0);
        let y = reduced_apply(&ocp, &d, &[1.0]).unwrap();
        assert!((y[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn preconditioner_examples() {
        let d = SolverConfig::direct();
        let ocp = scalar(1.0, 2.0, 0.0);
        let z = constraint_precond_apply(&ocp, &d, &[3.0, 0.0, 0.0]).unwrap();
        assert_eq!(z, vec![1.5, 1.5, 3.0]);
        let ocp = scalar(1.0, 1.0, 0.0);
        let z = constraint_precond_apply(&ocp, &d, &[0.0, 0.0, 2.0]).unwrap();
        assert_eq!(z, vec![2.0, 0.0, 0.0]);
    }

    #[test]
    fn scalar_closed_form_all_paths() {
        let d = SolverConfig::direct();
        let ocp = scalar(1.0, 1.0, 1.0);
        // x = u = p = 1/2
        for sol in [
            condensed_solve(&ocp, &d, 1e-12).unwrap(),
            ppcg_solve(&ocp, &d, 1e-12).unwrap(),
            kkt_schur_solve(&ocp, &SolverConfig::new(Method::Cg, PrecondSpec::Identity, 1e-12)).unwrap(),
        ] {
            for v in [sol.x[0], sol.u[0], sol.p[0]] {
                assert!((v - 0.5).abs() < 1e-14, "{v}");
            }
            assert!(sol.kkt_residual < 1e-14);
        }
    }
}
