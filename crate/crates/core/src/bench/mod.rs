//! Experiment driver behind the `skewsplit` binary: condition number
//! studies, solver benchmarks and optimal control pipeline sweeps, written
//! as CSV or JSON tables.
//!
//! Output is deterministic for a fixed configuration apart from the
//! `time_s` column. `time_s` in solve rows covers the iteration only; in
//! ocp rows it also includes building the inner solvers.

mod config;
mod output;

pub use config::{Experiment, ExperimentConfig, InnerPreset, OcpMode, OcpSweep, OutputFormat, RhsKind};
pub use output::{write_rows, Table};

use std::time::Instant;

use serde::Serialize;

use crate::discretize::{assemble, Assembled, ProblemSpec};
use crate::error::{Error, Result};
use crate::krylov::{Method, PreparedSolver, SolverConfig};
use crate::optctl::{self, KktSolution, OcpProblem};
use crate::precond::{GridHint, PrecondSpec};
use crate::rng::SplitMix64;
use crate::sparse::{self, read_matrix_market, read_vector_market, SparseMatrix, SplitOperator};
use crate::spectra::{refinement_levels, refinement_study, CondConfig, StudyOptions};
use crate::vecops::{norm2, sub};

pub const STATUS_OK: &str = "ok";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CondRow {
    pub h: f64,
    pub dofs: usize,
    pub target: String,
    pub kappa2: Option<f64>,
    pub lambda_width: Option<f64>,
    pub method: Option<String>,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveRow {
    pub dofs: usize,
    pub method: String,
    pub precond: String,
    pub iters: usize,
    pub time_s: f64,
    /// True relative residual `|b - A x| / |b|`.
    pub final_relres: Option<f64>,
    pub converged: bool,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OcpRow {
    pub dofs: usize,
    pub mode: String,
    pub inner: String,
    pub lambda: f64,
    pub cgtol: f64,
    pub outer_iters: usize,
    /// Cumulative iterations of all inner solves.
    pub inner_iters: usize,
    pub time_s: f64,
    pub converged: bool,
    pub status: String,
}

/// Rows that carry a status column.
pub trait StatusRow {
    fn status(&self) -> &str;
    /// Converged rows with a caveat read `ok; <note>` and do not count as
    /// failures.
    fn failed(&self) -> bool {
        !self.status().starts_with(STATUS_OK)
    }
}

impl StatusRow for CondRow {
    fn status(&self) -> &str {
        &self.status
    }
}
impl StatusRow for SolveRow {
    fn status(&self) -> &str {
        &self.status
    }
}
impl StatusRow for OcpRow {
    fn status(&self) -> &str {
        &self.status
    }
}

/// Runs the configured experiment and returns its table.
pub fn run(cfg: &ExperimentConfig) -> Result<Table> {
    cfg.validate()?;
    Ok(match cfg.experiment {
        Experiment::Cond => Table::Cond(run_cond(cfg)?),
        Experiment::Solve => Table::Solve(run_solve(cfg)?),
        Experiment::Ocp => Table::Ocp(run_ocp(cfg)?),
    })
}

pub fn run_cond(cfg: &ExperimentConfig) -> Result<Vec<CondRow>> {
    let spec = cfg
        .problem
        .as_ref()
        .ok_or_else(|| Error::Config("condition studies need a built-in problem".into()))?;
    let opts = StudyOptions {
        cond: CondConfig {
            method: cfg.cond_method,
            seed: cfg.seed,
            ..Default::default()
        },
        precond: cfg.study_precond.clone(),
        ..Default::default()
    };
    let targets = cfg.resolved_targets()?;
    let rows = refinement_study(spec, cfg.refinements, &targets, &opts)?;
    Ok(rows
        .into_iter()
        .map(|r| CondRow {
            h: r.h,
            dofs: r.dofs,
            target: r.target.to_string(),
            kappa2: r.kappa2,
            lambda_width: r.lambda_width,
            method: r.method.map(|m| m.to_string()),
            status: r.status,
        })
        .collect())
}

/// One linear system of a solve sweep.
struct SolveCase {
    split: SplitOperator,
    grid: Option<GridHint>,
    rhs: Vec<f64>,
}

fn rhs_for(kind: RhsKind, n: usize, seed: u64) -> Vec<f64> {
    match kind {
        RhsKind::Ones => vec![1.0; n],
        RhsKind::Random => SplitMix64::new(seed).vector(n),
    }
}

/// Full matrix of an assembled problem. Block systems are assembled as
/// `[[A11, A12], [A21, 0]]`.
pub fn system_matrix(assembled: &Assembled) -> Result<SparseMatrix> {
    match assembled {
        Assembled::Split(sp) => Ok(sp.a.clone()),
        Assembled::Block(bs) => SparseMatrix::block(&[
            vec![Some(&bs.a11.a), Some(&bs.a12)],
            vec![Some(&bs.a21), None],
        ]),
    }
}

fn solve_cases(cfg: &ExperimentConfig) -> Result<Vec<SolveCase>> {
    if let Some(path) = &cfg.matrix {
        let a = read_matrix_market(path)?;
        let rhs = match &cfg.rhs {
            Some(p) => read_vector_market(p)?,
            None => rhs_for(cfg.rhs_kind, a.nrows(), cfg.seed),
        };
        if rhs.len() != a.nrows() {
            return Err(Error::Shape(format!(
                "right-hand side has {} entries, matrix has {} rows",
                rhs.len(),
                a.nrows()
            )));
        }
        return Ok(vec![SolveCase {
            split: sparse::split(&a)?,
            grid: None,
            rhs,
        }]);
    }
    let spec = cfg.problem.as_ref().expect("validated");
    let mut cases = Vec::new();
    for level in refinement_levels(spec, cfg.refinements) {
        let assembled = assemble(&level)?;
        // Splitting the assembled matrix (rather than using the assembled
        // parts) keeps runs identical to the Matrix Market path.
        let a = system_matrix(&assembled)?;
        let n = a.nrows();
        let grid = match &assembled {
            Assembled::Split(_) => level.grid_hint(),
            Assembled::Block(_) => None,
        };
        cases.push(SolveCase {
            split: sparse::split(&a)?,
            grid,
            rhs: rhs_for(cfg.rhs_kind, n, cfg.seed),
        });
    }
    Ok(cases)
}

fn solve_row(case: &SolveCase, solver: &SolverConfig) -> SolveRow {
    let mut row = SolveRow {
        dofs: case.split.dim(),
        method: solver.method.to_string(),
        precond: solver.precond.to_string(),
        iters: 0,
        time_s: 0.0,
        final_relres: None,
        converged: false,
        status: STATUS_OK.into(),
    };
    let result = PreparedSolver::new(&case.split, solver, case.grid.as_ref()).and_then(|prepared| {
        let start = Instant::now();
        let (x, report) = prepared.run(&case.rhs, false, None)?;
        let elapsed = start.elapsed().as_secs_f64();
        Ok((x, report, elapsed))
    });
    match result {
        Ok((x, report, elapsed)) => {
            row.iters = report.iterations;
            row.time_s = elapsed;
            row.converged = report.converged;
            row.final_relres = case.split.a.spmv(&x).ok().map(|ax| {
                let bn = norm2(&case.rhs);
                norm2(&sub(&case.rhs, &ax)) / if bn > 0.0 { bn } else { 1.0 }
            });
            if !report.converged {
                row.status = format!("not converged ({:?})", report.termination).to_lowercase();
            } else if report.symmetry_degraded {
                row.status = "ok; symmetry degraded".into();
            }
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

pub fn run_solve(cfg: &ExperimentConfig) -> Result<Vec<SolveRow>> {
    let cases = solve_cases(cfg)?;
    let mut rows = Vec::new();
    for case in &cases {
        for solver in &cfg.solvers {
            rows.push(solve_row(case, solver));
        }
    }
    Ok(rows)
}

/// Distributed control problem on an assembled split operator: `B = C = I`,
/// unit source and a seeded random target state.
pub fn distributed_ocp(split: SplitOperator, lambda: f64, seed: u64, grid: Option<GridHint>) -> Result<OcpProblem> {
    let n = split.dim();
    let y_ref = SplitMix64::new(seed).vector(n);
    Ok(OcpProblem::distributed(split, lambda, vec![1.0; n], y_ref)?.with_grid(grid))
}

/// Runs one pipeline with an inner solver preset.
pub fn solve_ocp(
    ocp: &OcpProblem,
    mode: OcpMode,
    inner: InnerPreset,
    cgtol: f64,
    max_outer: usize,
) -> Result<KktSolution> {
    let opts = optctl::OcpOptions {
        max_outer,
        inner_tol: None,
    };
    let inner_cfg = inner.config(mode, cgtol);
    match mode {
        OcpMode::Condensed => optctl::condensed_solve_with(ocp, &inner_cfg, cgtol, &opts),
        OcpMode::Ppcg => optctl::ppcg_solve_with(ocp, &inner_cfg, cgtol, &opts),
        OcpMode::Schur => {
            let outer = SolverConfig::new(Method::Cg, PrecondSpec::Identity, cgtol)
                .with_max_iter(max_outer);
            optctl::kkt_schur_solve(ocp, &outer)
        }
    }
}

fn ocp_row(ocp: &OcpProblem, mode: OcpMode, inner: Option<InnerPreset>, cgtol: f64, max_outer: usize) -> OcpRow {
    let mut row = OcpRow {
        dofs: ocp.n(),
        mode: mode.to_string(),
        inner: inner.map_or_else(|| "none".to_string(), |p| p.to_string()),
        lambda: ocp.lambda_reg,
        cgtol,
        outer_iters: 0,
        inner_iters: 0,
        time_s: 0.0,
        converged: false,
        status: STATUS_OK.into(),
    };
    match solve_ocp(ocp, mode, inner.unwrap_or(InnerPreset::Direct), cgtol, max_outer) {
        Ok(sol) => {
            row.outer_iters = sol.outer_report.iterations;
            row.inner_iters = sol.inner_totals.iterations;
            row.time_s = sol.total_time;
            row.converged = sol.outer_report.converged;
            if !row.converged {
                row.status = "not converged".into();
            } else if sol.feasibility_degraded {
                row.status = "ok; feasibility degraded".into();
            }
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    row
}

pub fn run_ocp(cfg: &ExperimentConfig) -> Result<Vec<OcpRow>> {
    let spec: &ProblemSpec = cfg
        .problem
        .as_ref()
        .ok_or_else(|| Error::Config("ocp experiments need a built-in problem".into()))?;
    let sweep = cfg.ocp.clone().unwrap_or_default();
    let mut rows = Vec::new();
    for level in refinement_levels(spec, cfg.refinements) {
        let split = match assemble(&level)? {
            Assembled::Split(sp) => sp,
            Assembled::Block(_) => {
                return Err(Error::Unsupported(format!(
                    "ocp experiments need a single-field problem, {} is a block system",
                    level.kind
                )))
            }
        };
        for &mode in &sweep.modes {
            for &lambda in &sweep.lambdas {
                let ocp = distributed_ocp(split.clone(), lambda, cfg.seed, level.grid_hint())?;
                for &cgtol in &sweep.cgtols {
                    if mode == OcpMode::Schur {
                        // The Schur route has no inner solver to vary.
                        rows.push(ocp_row(&ocp, mode, None, cgtol, sweep.max_outer));
                        continue;
                    }
                    for &inner in &sweep.inner {
                        rows.push(ocp_row(&ocp, mode, Some(inner), cgtol, sweep.max_outer));
                    }
                }
            }
        }
    }
    Ok(rows)
}
