use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::discretize::{ProblemKind, ProblemSpec};
use crate::error::{Error, Result};
use crate::krylov::{Method, SolverConfig};
use crate::precond::PrecondSpec;
use crate::spectra::{EstimateMethod, Target};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Cond,
    Solve,
    Ocp,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RhsKind {
    #[default]
    Ones,
    /// Uniform on `[-1, 1)` from the configured seed.
    Random,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum OcpMode {
    /// CG on the reduced (control-only) system.
    Condensed,
    /// Projected CG on the KKT system with the constraint preconditioner.
    Ppcg,
    /// CG on the adjoint Schur complement; needs full observation.
    Schur,
}

impl fmt::Display for OcpMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OcpMode::Condensed => "condensed",
            OcpMode::Ppcg => "ppcg",
            OcpMode::Schur => "schur",
        })
    }
}

impl FromStr for OcpMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "condensed" | "reduced" => Ok(OcpMode::Condensed),
            "ppcg" => Ok(OcpMode::Ppcg),
            "schur" => Ok(OcpMode::Schur),
            other => Err(Error::Config(format!("unknown ocp mode '{other}'"))),
        }
    }
}

impl TryFrom<String> for OcpMode {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<OcpMode> for String {
    fn from(m: OcpMode) -> String {
        m.to_string()
    }
}

/// Named inner solver configurations for the optimal control pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InnerPreset {
    /// Sparse LU.
    Direct,
    /// Incomplete LU used as the solver, drop tolerance `cgtol / 100`
    /// (condensed) or `cgtol / 10` (ppcg).
    Ilu,
    /// GMRES preconditioned by an exact solve with `H`.
    Gmres,
    /// GMRES preconditioned by incomplete Cholesky of `H`, drop tolerance 0.1.
    GmresIc,
    /// GMRES preconditioned by two multigrid cycles on `H`.
    GmresMg,
    Widlund,
    Rapoport,
    /// Widlund with two multigrid cycles as the `H` solve (inexact).
    WidlundMg,
    RapoportMg,
}

impl InnerPreset {
    pub const ALL: [InnerPreset; 9] = [
        InnerPreset::Direct,
        InnerPreset::Ilu,
        InnerPreset::Gmres,
        InnerPreset::GmresIc,
        InnerPreset::GmresMg,
        InnerPreset::Widlund,
        InnerPreset::Rapoport,
        InnerPreset::WidlundMg,
        InnerPreset::RapoportMg,
    ];

    fn name(self) -> &'static str {
        match self {
            InnerPreset::Direct => "direct",
            InnerPreset::Ilu => "ilu",
            InnerPreset::Gmres => "gmres",
            InnerPreset::GmresIc => "gmres-ic",
            InnerPreset::GmresMg => "gmres-mg",
            InnerPreset::Widlund => "widlund",
            InnerPreset::Rapoport => "rapoport",
            InnerPreset::WidlundMg => "widlund-mg",
            InnerPreset::RapoportMg => "rapoport-mg",
        }
    }

    /// The solver configuration. Its tolerance is replaced by the pipeline's
    /// inner tolerance policy.
    pub fn config(self, mode: OcpMode, cgtol: f64) -> SolverConfig {
        let mg = PrecondSpec::multigrid(2);
        let (method, precond) = match self {
            InnerPreset::Direct => return SolverConfig::direct(),
            InnerPreset::Ilu => {
                let drop_tol = match mode {
                    OcpMode::Condensed => cgtol / 100.0,
                    _ => cgtol / 10.0,
                };
                (Method::Direct, PrecondSpec::IncompleteLu { drop_tol })
            }
            InnerPreset::Gmres => (Method::Gmres, PrecondSpec::ExactSym),
            InnerPreset::GmresIc => (Method::Gmres, PrecondSpec::IncompleteCholesky { drop_tol: 0.1 }),
            InnerPreset::GmresMg => (Method::Gmres, mg),
            InnerPreset::Widlund => (Method::Widlund, PrecondSpec::ExactSym),
            InnerPreset::Rapoport => (Method::Rapoport, PrecondSpec::ExactSym),
            InnerPreset::WidlundMg => (Method::Widlund, mg),
            InnerPreset::RapoportMg => (Method::Rapoport, mg),
        };
        SolverConfig::new(method, precond, cgtol)
    }
}

impl fmt::Display for InnerPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InnerPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        InnerPreset::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown inner solver preset '{s}'")))
    }
}

impl TryFrom<String> for InnerPreset {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InnerPreset> for String {
    fn from(p: InnerPreset) -> String {
        p.to_string()
    }
}

/// Sweep over optimal control pipelines. Every combination of mode,
/// regularization, outer tolerance and inner preset is run on every level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OcpSweep {
    pub modes: Vec<OcpMode>,
    pub lambdas: Vec<f64>,
    pub cgtols: Vec<f64>,
    pub inner: Vec<InnerPreset>,
    pub max_outer: usize,
}

impl Default for OcpSweep {
    fn default() -> Self {
        Self {
            modes: vec![OcpMode::Condensed, OcpMode::Ppcg],
            lambdas: vec![0.1],
            cgtols: vec![1e-6],
            inner: vec![InnerPreset::Direct],
            max_outer: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Built-in problem at the coarsest level.
    pub problem: Option<ProblemSpec>,
    /// Matrix Market input instead of a built-in problem (solve only).
    pub matrix: Option<PathBuf>,
    /// Matrix Market right-hand side for `matrix`; otherwise `rhs_kind`.
    pub rhs: Option<PathBuf>,
    pub rhs_kind: RhsKind,
    /// Number of levels, each halving the mesh width.
    pub refinements: usize,
    /// Operators for condition studies; empty selects defaults for the
    /// problem kind.
    pub targets: Vec<Target>,
    /// Forces the condition number estimator; by default dense up to the
    /// size limit, power iteration above.
    pub cond_method: Option<EstimateMethod>,
    /// Preconditioner for the `PinvA` target.
    pub study_precond: PrecondSpec,
    pub solvers: Vec<SolverConfig>,
    pub ocp: Option<OcpSweep>,
    /// Output file; standard output when absent.
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Cond,
            problem: None,
            matrix: None,
            rhs: None,
            rhs_kind: RhsKind::Ones,
            refinements: 4,
            targets: Vec::new(),
            cond_method: None,
            study_precond: PrecondSpec::ExactSym,
            solvers: default_solvers(1e-8),
            ocp: None,
            output: None,
            format: OutputFormat::Csv,
            seed: 0,
        }
    }
}

/// GMRES with an exact `H` solve, Widlund and Rapoport.
pub(crate) fn default_solvers(tol: f64) -> Vec<SolverConfig> {
    [Method::Gmres, Method::Widlund, Method::Rapoport]
        .into_iter()
        .map(|m| SolverConfig::new(m, PrecondSpec::ExactSym, tol))
        .collect()
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            ..Self::default()
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_json_str(&text).map_err(|e| e.context(path.as_ref().display().to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.problem, &self.matrix) {
            (Some(p), None) => p.validate()?,
            (None, Some(_)) => {
                if self.experiment != Experiment::Solve {
                    return Err(Error::Config("matrix files are only supported by solve experiments".into()));
                }
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either a built-in problem or a matrix file, not both".into()))
            }
            (None, None) => return Err(Error::Config("no problem or matrix file given".into())),
        }
        if self.rhs.is_some() && self.matrix.is_none() {
            return Err(Error::Config("a right-hand side file needs a matrix file".into()));
        }
        if self.refinements == 0 {
            return Err(Error::Config("refinements must be at least 1".into()));
        }
        match self.experiment {
            Experiment::Cond => {
                if self.refinements < 3 {
                    return Err(Error::Config("condition studies need at least 3 refinement levels".into()));
                }
            }
            Experiment::Solve => {
                if self.solvers.is_empty() {
                    return Err(Error::Config("no solvers configured".into()));
                }
                for s in &self.solvers {
                    s.validate()?;
                }
            }
            Experiment::Ocp => {
                let sweep = self.ocp.clone().unwrap_or_default();
                if sweep.modes.is_empty() || sweep.lambdas.is_empty() || sweep.cgtols.is_empty() {
                    return Err(Error::Config("ocp sweep needs modes, lambdas and cgtols".into()));
                }
                if sweep.inner.is_empty() && sweep.modes.iter().any(|&m| m != OcpMode::Schur) {
                    return Err(Error::Config("ocp sweep needs at least one inner preset".into()));
                }
                if sweep.lambdas.iter().any(|&l| !(l > 0.0)) {
                    return Err(Error::Config("regularization parameters must be positive".into()));
                }
                if sweep.cgtols.iter().any(|&t| !(t > 0.0)) {
                    return Err(Error::Config("cgtol values must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Configured targets, or the defaults for the problem kind.
    pub fn resolved_targets(&self) -> Result<Vec<Target>> {
        if !self.targets.is_empty() {
            return Ok(self.targets.clone());
        }
        let kind = self
            .problem
            .as_ref()
            .map(|p| p.kind)
            .ok_or_else(|| Error::Config("no problem given".into()))?;
        Ok(match kind {
            ProblemKind::AdvDiff | ProblemKind::Stokes | ProblemKind::Wave => {
                vec![Target::H, Target::S, Target::HinvA]
            }
            ProblemKind::Oseen | ProblemKind::Beam => {
                vec![Target::A11, Target::H11invA11, Target::W, Target::HwInvW, Target::MpInvW]
            }
        })
    }
}
