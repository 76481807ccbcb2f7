use std::time::Instant;

use super::{Observer, SolveReport, SolverConfig, Termination};
use crate::error::{shape_err, Error, Result};
use crate::operator::LinearOperator;
use crate::vecops::{axpy, dot, norm2};

/// Extra knobs for [`cg_solve_ext`].
#[derive(Default)]
pub struct CgOptions<'a> {
    /// Initial guess; zero when absent.
    pub x0: Option<&'a [f64]>,
    /// Normalizing constant for the relative residual; `||b||` when absent.
    pub ref_norm: Option<f64>,
}

/// Preconditioned conjugate gradients from a zero initial guess.
pub fn cg_solve(
    op: &dyn LinearOperator,
    prec: Option<&dyn LinearOperator>,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    cg_solve_ext(op, prec, b, cfg, CgOptions::default(), None)
}

/// Preconditioned conjugate gradients. Fails with `Indefinite` when a search
/// direction has non-positive curvature.
pub fn cg_solve_ext(
    op: &dyn LinearOperator,
    prec: Option<&dyn LinearOperator>,
    b: &[f64],
    cfg: &SolverConfig,
    opts: CgOptions<'_>,
    mut observer: Option<Observer<'_>>,
) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    let n = op.nrows();
    if op.ncols() != n || b.len() != n {
        return shape_err("CG needs a square operator matching the right-hand side");
    }
    let start = Instant::now();
    let mut report = SolveReport::new();
    let mut x = match opts.x0 {
        Some(x0) if x0.len() == n => x0.to_vec(),
        Some(_) => return shape_err("initial guess has the wrong length"),
        None => vec![0.0; n],
    };
    let mut r = b.to_vec();
    if opts.x0.is_some() {
        let ax = op.apply_vec(&x)?;
        for i in 0..n {
            r[i] -= ax[i];
        }
    }
    let scale = match opts.ref_norm {
        Some(s) if s > 0.0 => s,
        _ => {
            let bn = norm2(b);
            if bn > 0.0 {
                bn
            } else {
                1.0
            }
        }
    };
    let mut rel = norm2(&r) / scale;
    report.residual_history.push(rel);
    if let Some(obs) = observer.as_mut() {
        obs(0, &x);
    }
    if rel <= cfg.tol {
        report.finish(cfg.tol, start, Termination::Converged);
        return Ok((x, report));
    }
    let precondition = |r: &[f64]| -> Result<Vec<f64>> {
        match prec {
            Some(p) => p.apply_vec(r),
            None => Ok(r.to_vec()),
        }
    };
    let mut z = precondition(&r)?;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    for k in 1..=cfg.max_iter {
        op.apply(&p, &mut q)?;
        let curvature = dot(&p, &q);
        if !(curvature > 0.0) {
            return Err(Error::Indefinite {
                iteration: k,
                curvature,
            });
        }
        let alpha = rz / curvature;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        rel = norm2(&r) / scale;
        report.iterations = k;
        report.residual_history.push(rel);
        if let Some(obs) = observer.as_mut() {
            obs(k, &x);
        }
        if rel <= cfg.tol {
            break;
        }
        z = precondition(&r)?;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    report.finish(cfg.tol, start, Termination::MaxIterations);
    Ok((x, report))
}
