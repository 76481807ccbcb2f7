//! Method dispatch and reusable solvers for repeated solves with `A` and
//! `A^T`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use super::cg::{cg_solve_ext, CgOptions};
use super::gmres::gmres_solve;
use super::rapoport::rapoport_solve_with;
use super::widlund::widlund_solve_with;
use super::{Method, Observer, SolveReport, SolverConfig, Termination};
use crate::error::{shape_err, Error, Result};
use crate::factor::EnvelopeLu;
use crate::operator::{LinearOperator, Transposed};
use crate::precond::{GridHint, IncompleteLu, PrecondSpec, Preconditioner};
use crate::sparse::SplitOperator;
use crate::vecops::norm2;

/// Solves `A x = b` for a split operator with the configured method.
pub fn solve(
    split: &SplitOperator,
    b: &[f64],
    cfg: &SolverConfig,
    grid: Option<&GridHint>,
) -> Result<(Vec<f64>, SolveReport)> {
    let prepared = PreparedSolver::new(split, cfg, grid)?;
    prepared.run(b, false, None)
}

/// Like [`solve`], calling `observer` with every iterate (CG, Widlund and
/// Rapoport only).
pub fn solve_with_observer(
    split: &SplitOperator,
    b: &[f64],
    cfg: &SolverConfig,
    grid: Option<&GridHint>,
    observer: Observer<'_>,
) -> Result<(Vec<f64>, SolveReport)> {
    let prepared = PreparedSolver::new(split, cfg, grid)?;
    prepared.run(b, false, Some(observer))
}

#[derive(Debug)]
enum Engine {
    Lu(EnvelopeLu),
    Ilu(IncompleteLu),
    Krylov(Preconditioner),
}

/// A solver for `A` and `A^T` with its factorizations and preconditioners
/// built once. Counts cumulative iterations across solves.
#[derive(Debug)]
pub struct PreparedSolver {
    split: SplitOperator,
    split_t: SplitOperator,
    cfg: SolverConfig,
    engine: Engine,
    degraded: bool,
    iterations: AtomicUsize,
    solves: AtomicUsize,
}

impl PreparedSolver {
    pub fn new(split: &SplitOperator, cfg: &SolverConfig, grid: Option<&GridHint>) -> Result<Self> {
        cfg.validate()?;
        let engine = match (cfg.method, &cfg.precond) {
            (Method::Direct, PrecondSpec::IncompleteLu { drop_tol }) => {
                Engine::Ilu(IncompleteLu::new(&split.a, *drop_tol)?)
            }
            (Method::Direct, _) => Engine::Lu(EnvelopeLu::new(&split.a)?),
            (_, spec) => {
                let target = if spec.targets_symmetric_part() { &split.h } else { &split.a };
                Engine::Krylov(Preconditioner::build(spec, target, grid)?)
            }
        };
        let degraded = match &engine {
            Engine::Krylov(p) => {
                matches!(cfg.method, Method::Widlund | Method::Rapoport) && !p.is_exact_symmetric()
            }
            _ => false,
        };
        Ok(Self {
            split: split.clone(),
            split_t: split.transposed(),
            cfg: cfg.clone(),
            engine,
            degraded,
            iterations: AtomicUsize::new(0),
            solves: AtomicUsize::new(0),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn split(&self) -> &SplitOperator {
        &self.split
    }

    pub fn dim(&self) -> usize {
        self.split.dim()
    }

    /// Cumulative iterations over all solves (direct solves count one each).
    pub fn total_iterations(&self) -> usize {
        self.iterations.load(Ordering::Relaxed)
    }

    pub fn total_solves(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    pub fn reset_counters(&self) {
        self.iterations.store(0, Ordering::Relaxed);
        self.solves.store(0, Ordering::Relaxed);
    }

    /// Solves `A x = b`; failure to converge is an error.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let (x, rep) = self.run(b, false, None)?;
        if !rep.converged {
            return Err(Error::NotConverged {
                iterations: rep.iterations,
                residual: rep.final_residual(),
            });
        }
        Ok(x)
    }

    /// Solves `A^T x = b`; failure to converge is an error.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        let (x, rep) = self.run(b, true, None)?;
        if !rep.converged {
            return Err(Error::NotConverged {
                iterations: rep.iterations,
                residual: rep.final_residual(),
            });
        }
        Ok(x)
    }

    /// Runs one solve and returns the full report.
    pub fn run(&self, b: &[f64], transpose: bool, observer: Option<Observer<'_>>) -> Result<(Vec<f64>, SolveReport)> {
        if b.len() != self.dim() {
            return shape_err("right-hand side length does not match the operator");
        }
        let split = if transpose { &self.split_t } else { &self.split };
        let start = Instant::now();
        let (x, rep) = match &self.engine {
            Engine::Lu(lu) => {
                let x = if transpose { lu.solve_transpose(b)? } else { lu.solve(b)? };
                let rep = direct_report(split, b, &x, self.cfg.tol, start)?;
                (x, rep)
            }
            Engine::Ilu(ilu) => {
                let mut x = vec![0.0; b.len()];
                if transpose {
                    ilu.solve_transpose_into(b, &mut x)?;
                } else {
                    ilu.solve_into(b, &mut x)?;
                }
                // approximate factorizations report their actual accuracy
                let rep = direct_report(split, b, &x, f64::INFINITY, start)?;
                (x, rep)
            }
            Engine::Krylov(prec) => {
                let hinv: &dyn LinearOperator = prec;
                let t;
                let pop: &dyn LinearOperator = if transpose && !prec.is_symmetric() {
                    t = Transposed(prec);
                    &t
                } else {
                    prec
                };
                match self.cfg.method {
                    Method::Widlund => widlund_solve_with(split, hinv, self.degraded, b, &self.cfg, observer)?,
                    Method::Rapoport => rapoport_solve_with(split, hinv, self.degraded, b, &self.cfg, observer)?,
                    Method::Gmres => gmres_solve(split, Some(pop), b, &self.cfg)?,
                    Method::Cg => cg_solve_ext(split, Some(pop), b, &self.cfg, CgOptions::default(), observer)?,
                    Method::Direct => unreachable!("direct methods use a factorization engine"),
                }
            }
        };
        self.iterations.fetch_add(rep.iterations, Ordering::Relaxed);
        self.solves.fetch_add(1, Ordering::Relaxed);
        Ok((x, rep))
    }
}

fn direct_report(split: &SplitOperator, b: &[f64], x: &[f64], tol: f64, start: Instant) -> Result<SolveReport> {
    let ax = split.a.spmv(x)?;
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let bn = norm2(b);
    let rel = if bn > 0.0 { norm2(&r) / bn } else { norm2(&r) };
    let mut rep = SolveReport::new();
    rep.iterations = 1;
    rep.residual_history = vec![if bn > 0.0 { 1.0 } else { 0.0 }, rel];
    // a direct solve is exact up to rounding; report its residual as is
    rep.finish(tol.max(rel), start, Termination::Converged);
    Ok(rep)
}
