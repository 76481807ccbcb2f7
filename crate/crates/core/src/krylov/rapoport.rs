//! Rapoport's method: minimizes the `H^{-1}`-norm of the residual over the
//! `H`-Lanczos space, i.e. the least-squares problem
//! `min || ||b_hat||_H e_1 - ([I; 0] + T_{k+1,k}) y ||`, solved with Givens
//! rotations as a short recurrence.

use std::time::Instant;

use super::lanczos::HLanczos;
use super::{Observer, SolveReport, SolverConfig, Termination};
use crate::error::{shape_err, Result};
use crate::operator::LinearOperator;
use crate::precond::{GridHint, Preconditioner};
use crate::sparse::SplitOperator;
use crate::vecops::{axpy, norm2};

/// Builds the configured `H` preconditioner and runs Rapoport's method.
pub fn rapoport_solve(split: &SplitOperator, b: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, SolveReport)> {
    rapoport_solve_grid(split, b, cfg, None)
}

pub(crate) fn rapoport_solve_grid(
    split: &SplitOperator,
    b: &[f64],
    cfg: &SolverConfig,
    grid: Option<&GridHint>,
) -> Result<(Vec<f64>, SolveReport)> {
    let prec = Preconditioner::build(&cfg.precond, &split.h, grid)?;
    let degraded = !prec.is_exact_symmetric();
    rapoport_solve_with(split, &prec, degraded, b, cfg, None)
}

/// Rapoport's method with a prebuilt `H`-solver. The stopping test uses the
/// Euclidean residual `||b - A x_k|| / ||b||`.
pub fn rapoport_solve_with(
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
    // rotations G_{k-2}, G_{k-1}
    let (mut c1, mut s1) = (1.0, 0.0);
    let (mut c2, mut s2) = (1.0, 0.0);
    // directions m_{k-2}, m_{k-1}
    let mut m1 = vec![0.0; n];
    let mut m2 = vec![0.0; n];
    let mut g = lz.b_hat_norm();
    let mut beta_k = 0.0;
    let mut r = vec![0.0; n];
    let mut fallback = Termination::MaxIterations;
    for k in 1..=cfg.max_iter {
        let st = lz.step()?;
        let v_k = lz.previous();
        // column k of [I;0] + T: (-beta_k, 1 + alpha_k, beta_{k+1}) at rows k-1, k, k+1
        let mut t_km2 = 0.0;
        let mut t_km1 = -beta_k;
        let mut t_k = 1.0 + st.alpha;
        let t_kp1 = st.beta_next;
        if k >= 3 {
            t_km2 = s2 * t_km1;
            t_km1 *= c2;
        }
        if k >= 2 {
            let a = c1 * t_km1 + s1 * t_k;
            t_k = -s1 * t_km1 + c1 * t_k;
            t_km1 = a;
        }
        let rho = t_k.hypot(t_kp1);
        let (c, s) = (t_k / rho, t_kp1 / rho);
        let gk = c * g;
        g *= -s;
        let mut m = vec![0.0; n];
        for i in 0..n {
            m[i] = (v_k[i] - t_km1 * m1[i] - t_km2 * m2[i]) / rho;
        }
        axpy(gk, &m, &mut x);
        m2 = std::mem::replace(&mut m1, m);
        c2 = c1;
        s2 = s1;
        c1 = c;
        s1 = s;
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
        beta_k = st.beta_next;
    }
    report.finish(cfg.tol, start, fallback);
    Ok((x, report))
}
