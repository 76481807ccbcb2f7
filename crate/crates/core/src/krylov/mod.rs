//! Krylov solvers: CG, restarted GMRES and the Widlund and Rapoport methods
//! built on a Lanczos process in the `H` inner product.

mod cg;
mod gmres;
mod inner;
mod lanczos;
mod rapoport;
mod widlund;

pub use cg::{cg_solve, cg_solve_ext, CgOptions};
pub use gmres::gmres_solve;
pub use inner::{solve, solve_with_observer, PreparedSolver};
pub use lanczos::{h_lanczos, HLanczos, LanczosState};
pub use rapoport::{rapoport_solve, rapoport_solve_with};
pub use widlund::{widlund_solve, widlund_solve_with};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precond::PrecondSpec;

/// Callback invoked with `(iteration, current iterate)`.
pub type Observer<'a> = &'a mut dyn FnMut(usize, &[f64]);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cg,
    Gmres,
    Widlund,
    Rapoport,
    Direct,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Cg => "cg",
            Method::Gmres => "gmres",
            Method::Widlund => "widlund",
            Method::Rapoport => "rapoport",
            Method::Direct => "direct",
        };
        f.write_str(s)
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cg" | "pcg" => Ok(Method::Cg),
            "gmres" => Ok(Method::Gmres),
            "widlund" => Ok(Method::Widlund),
            "rapoport" => Ok(Method::Rapoport),
            "direct" | "lu" => Ok(Method::Direct),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub method: Method,
    /// Relative residual target.
    pub tol: f64,
    pub max_iter: usize,
    /// GMRES restart length; `None` means no restarts.
    pub restart: Option<usize>,
    pub precond: PrecondSpec,
    /// Full reorthogonalization in the Lanczos kernel (diagnostics only).
    pub full_reorth: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Widlund,
            tol: 1e-8,
            max_iter: 1000,
            restart: None,
            precond: PrecondSpec::ExactSym,
            full_reorth: false,
        }
    }
}

impl SolverConfig {
    pub fn new(method: Method, precond: PrecondSpec, tol: f64) -> Self {
        Self {
            method,
            precond,
            tol,
            ..Self::default()
        }
    }

    pub fn direct() -> Self {
        Self::new(Method::Direct, PrecondSpec::Identity, 1e-14)
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_restart(mut self, restart: Option<usize>) -> Self {
        self.restart = restart;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {} must be positive", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if self.restart == Some(0) {
            return Err(Error::InvalidArgument("restart must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    /// A full GMRES restart cycle made no progress.
    Stagnation,
    /// The Krylov process broke down before reaching the tolerance.
    Breakdown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Relative residual per iteration, starting with the initial one. The
    /// norm is the one the method stops on.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Seconds.
    pub wall_time: f64,
    /// Work inside preconditioners or inner solvers when measurable.
    pub inner_iterations: usize,
    pub termination: Termination,
    /// Widlund/Rapoport ran with an inexact `H` solve.
    pub symmetry_degraded: bool,
}

impl SolveReport {
    pub(crate) fn new() -> Self {
        Self {
            iterations: 0,
            residual_history: Vec::new(),
            converged: false,
            wall_time: 0.0,
            inner_iterations: 0,
            termination: Termination::MaxIterations,
            symmetry_degraded: false,
        }
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }

    pub fn stagnated(&self) -> bool {
        self.termination == Termination::Stagnation
    }

    pub(crate) fn finish(&mut self, tol: f64, start: std::time::Instant, fallback: Termination) {
        self.converged = self.final_residual() <= tol;
        self.termination = if self.converged { Termination::Converged } else { fallback };
        self.wall_time = start.elapsed().as_secs_f64();
    }
}
