//! Widlund's method: Galerkin condition `(I + T_k) y = ||b_hat||_H e_1` on
//! the `H`-Lanczos basis, realized as a short recurrence through the LU
//! factorization of the tridiagonal `I + T_k` (no pivoting is needed; the
//! pivots satisfy `d_j >= 1` when `T` is skew).

use std::time::Instant;

use super::lanczos::HLanczos;
use super::{Observer, SolveReport, SolverConfig, Termination};
use crate::error::{shape_err, Result};
use crate::operator::LinearOperator;
use crate::precond::{GridHint, Preconditioner};
use crate::sparse::SplitOperator;
use crate::vecops::{axpy, norm2};

/// Builds the configured `H` preconditioner and runs Widlund's method.
pub fn widlund_solve(split: &SplitOperator, b: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveReport)> {
    widlund_solve_grid(split, b, cfg, None)
}

pub(crate) fn widlund_solve_grid(
    split: &SplitOperator,
    b: &[f64],
    cfg: &SolverConfig,
    grid: Option<&GridHint>,
) -> Result<(Vec<f64>, SolveReport)> {
    let prec = Preconditioner::build(&cfg.precond, &split.h, grid)?;
    let degraded = !prec.is_exact_symmetric();
    widlund_solve_with(split, &prec, degraded, b, cfg, None)
}

/// Widlund's method with a prebuilt `H`-solver. Each iteration costs one
/// product with `S`, one `H`-solve and one product with `A` for the true
/// residual.
pub fn widlund_solve_with(
    split: &SplitOperator,
    hinv: &dyn LinearOperator,
    symmetry_degraded: bool,
    b: &[f64],
    cfg: &SolverConfig,
    mut observer: Option<Observer<'_>>,
) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    let n = split.dim();
    if b.len() != n {
        return shape_err("right-hand side length does not match the operator");
    }
    let start = Instant::now();
    let mut report = SolveReport::new();
    report.symmetry_degraded = symmetry_degraded;
    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    let scale = if bnorm > 0.0 { bnorm } else { 1.0 };
    report.residual_history.push(bnorm / scale);
    if let Some(obs) = observer.as_mut() {
        obs(0, &x);
    }
    let Some(mut lz) = HLanczos::new(&split.s, hinv, b, cfg.full_reorth)? else {
        report.finish(cfg.tol, start, Termination::Converged);
        return Ok((x, report));
    };
    let mut p = vec![0.0; n];
    let mut d_prev = 1.0;
    let mut beta_k = 0.0;
    let mut zeta = lz.b_hat_norm();
    let mut r = vec![0.0; n];
    let mut fallback = Termination::MaxIterations;
    for k in 1..=cfg.max_iter {
        let st = lz.step()?;
        let v_k = lz.previous();
        let d = 1.0 + st.alpha + beta_k * beta_k / d_prev;
        if k > 1 {
            zeta = -(beta_k / d_prev) * zeta;
        }
        for i in 0..n {
            p[i] = (v_k[i] + beta_k * p[i]) / d;
        }
        axpy(zeta, &p, &mut x);
        split.a.spmv_into(&x, &mut r)?;
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let rel = norm2(&r) / scale;
        report.iterations = k;
        report.residual_history.push(rel);
        if let Some(obs) = observer.as_mut() {
            obs(k, &x);
        }
        if rel <= cfg.tol {
            break;
        }
        if st.breakdown {
            fallback = Termination::Breakdown;
            break;
        }
        d_prev = d;
        beta_k = st.beta_next;
    }
    report.finish(cfg.tol, start, fallback);
    Ok((x, report))
}
