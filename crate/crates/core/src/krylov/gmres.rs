use std::time::Instant;

use super::{SolveReport, SolverConfig, Termination};
use crate::error::{shape_err, Result};
use crate::operator::LinearOperator;
use crate::vecops::{axpy, dot, norm2};

/// Left-preconditioned restarted GMRES with modified Gram-Schmidt.
///
/// Stops when `||M^{-1}(b - A x)|| <= tol * ||M^{-1} b||`. A restart cycle
/// that fails to reduce the residual ends the solve with `Stagnation`.
pub fn gmres_solve(
    op: &dyn LinearOperator,
    prec: Option<&dyn LinearOperator>,
    b: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    let n = op.nrows();
    if op.ncols() != n || b.len() != n {
        return shape_err("GMRES needs a square operator matching the right-hand side");
    }
    let start = Instant::now();
    let mut report = SolveReport::new();
    let precondition = |r: &[f64]| -> Result<Vec<f64>> {
        match prec {
            Some(p) => p.apply_vec(r),
            None => Ok(r.to_vec()),
        }
    };
    let mut x = vec![0.0; n];
    let pb = precondition(b)?;
    let mut scale = norm2(&pb);
    if scale == 0.0 {
        scale = 1.0;
    }
    let m = cfg.restart.unwrap_or(cfg.max_iter).min(cfg.max_iter).max(1);
    let mut r = pb.clone();
    let mut beta = norm2(&r);
    report.residual_history.push(beta / scale);
    let mut total = 0usize;
    let mut fallback = Termination::MaxIterations;
    let mut ax = vec![0.0; n];
    'outer: while beta / scale > cfg.tol && total < cfg.max_iter {
        let cycle_start = beta;
        let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|ri| ri / beta).collect());
        // Hessenberg columns after rotation (upper triangular part)
        let mut hcols: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![beta];
        let mut j = 0;
        let mut happy = false;
        while j < m && total < cfg.max_iter {
            op.apply(&v[j], &mut ax)?;
            let mut w = precondition(&ax)?;
            let mut h = vec![0.0; j + 2];
            for i in 0..=j {
                h[i] = dot(&w, &v[i]);
                axpy(-h[i], &v[i], &mut w);
            }
            let hn = norm2(&w);
            h[j + 1] = hn;
            for i in 0..j {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            let rho = h[j].hypot(h[j + 1]);
            let (c, s) = if rho == 0.0 { (1.0, 0.0) } else { (h[j] / rho, h[j + 1] / rho) };
            h[j] = rho;
            h.truncate(j + 1);
            cs.push(c);
            sn.push(s);
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s * gj);
            hcols.push(h);
            total += 1;
            j += 1;
            let res = g[j].abs();
            report.residual_history.push(res / scale);
            if res / scale <= cfg.tol {
                break;
            }
            if hn <= 1e-14 * beta.max(f64::MIN_POSITIVE) {
                happy = true;
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        // back substitution R y = g
        let mut y = vec![0.0; j];
        for i in (0..j).rev() {
            let mut s = g[i];
            for k in i + 1..j {
                s -= hcols[k][i] * y[k];
            }
            y[i] = if hcols[i][i] != 0.0 { s / hcols[i][i] } else { 0.0 };
        }
        for (i, yi) in y.iter().enumerate() {
            axpy(*yi, &v[i], &mut x);
        }
        op.apply(&x, &mut ax)?;
        let res: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        r = precondition(&res)?;
        beta = norm2(&r);
        *report.residual_history.last_mut().unwrap() = beta / scale;
        report.iterations = total;
        if beta / scale <= cfg.tol {
            break;
        }
        if happy {
            fallback = Termination::Breakdown;
            break 'outer;
        }
        if beta >= (1.0 - 1e-12) * cycle_start {
            fallback = Termination::Stagnation;
            break 'outer;
        }
    }
    report.iterations = total;
    report.finish(cfg.tol, start, fallback);
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::Method;
    use crate::precond::PrecondSpec;
    use crate::sparse::SparseMatrix;

    fn cfg(tol: f64) -> SolverConfig {
        SolverConfig::new(Method::Gmres, PrecondSpec::Identity, tol)
    }

    #[test]
    fn diagonal_three() {
        let a = SparseMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let (x, rep) = gmres_solve(&a, None, &[1.0, 1.0, 1.0], &cfg(1e-12)).unwrap();
        assert!(rep.converged && rep.iterations <= 3);
        for (xi, e) in x.iter().zip([1.0, 0.5, 1.0 / 3.0]) {
            assert!((xi - e).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_plus_nilpotent() {
        let a = SparseMatrix::from_triplets(
            4,
            4,
            &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0), (3, 3, 1.0), (0, 3, 5.0)],
        )
        .unwrap();
        let (x, rep) = gmres_solve(&a, None, &[1.0, 2.0, 3.0, 4.0], &cfg(1e-12)).unwrap();
        assert!(rep.converged && rep.iterations <= 2, "{rep:?}");
        assert!((x[0] - (1.0 - 20.0)).abs() < 1e-10);
    }

    #[test]
    fn restarted_history_is_monotone() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 3.0));
            if i + 1 < n {
                t.push((i, i + 1, 1.0));
                t.push((i + 1, i, -0.5));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &t).unwrap();
        let c = cfg(1e-10).with_restart(Some(5));
        let (_, rep) = gmres_solve(&a, None, &vec![1.0; n], &c).unwrap();
        assert!(rep.converged);
        for w in rep.residual_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-10));
        }
    }
}
