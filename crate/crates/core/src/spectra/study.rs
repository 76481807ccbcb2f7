use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    cond2_with_inverse, materialize, spectral_width, CondConfig, Deflated, DenseOperator, EstimateMethod,
    SpectrumReport, DENSE_MAX_N,
};
use crate::discretize::{assemble, schur_operator, Assembled, BlockSystem, ProblemSpec};
use crate::error::{Error, Result};
use crate::factor::EnvelopeLu;
use crate::krylov::{cg_solve, Method, SolverConfig};
use crate::operator::{FnOperator, LinearOperator, Product};
use crate::precond::{GridHint, PrecondSpec, Preconditioner};
use crate::sparse::{SparseMatrix, SplitOperator};

/// Operators whose condition number a study can report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Target {
    A,
    H,
    S,
    HinvA,
    /// `P^{-1} A` for the study's preconditioner.
    PinvA,
    A11,
    H11invA11,
    A12,
    /// Schur complement `-A21 A11^{-1} A12`.
    W,
    /// `W` preconditioned by its own symmetric part.
    HwInvW,
    /// `W` preconditioned by the mass matrix of the second field.
    MpInvW,
}

impl Target {
    pub const ALL: [Target; 11] = [
        Target::A,
        Target::H,
        Target::S,
        Target::HinvA,
        Target::PinvA,
        Target::A11,
        Target::H11invA11,
        Target::A12,
        Target::W,
        Target::HwInvW,
        Target::MpInvW,
    ];

    fn name(self) -> &'static str {
        match self {
            Target::A => "A",
            Target::H => "H",
            Target::S => "S",
            Target::HinvA => "HinvA",
            Target::PinvA => "PinvA",
            Target::A11 => "A11",
            Target::H11invA11 => "H11invA11",
            Target::A12 => "A12",
            Target::W => "W",
            Target::HwInvW => "HwInvW",
            Target::MpInvW => "MpInvW",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['_', '-', ' '], "");
        Target::ALL
            .into_iter()
            .find(|t| t.name().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::Config(format!("unknown target '{s}'")))
    }
}

impl TryFrom<String> for Target {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Target> for String {
    fn from(t: Target) -> String {
        t.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyOptions {
    pub cond: CondConfig,
    /// Preconditioner `P` for [`Target::PinvA`].
    pub precond: PrecondSpec,
    /// Solver for `A11` inside Schur complements.
    pub inner: SolverConfig,
    /// Also report the spectral width of `H^{-1}S` next to `H^{-1}A` rows.
    pub width: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            cond: CondConfig::default(),
            precond: PrecondSpec::ExactSym,
            inner: SolverConfig::direct(),
            width: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub h: f64,
    pub dofs: usize,
    pub target: Target,
    pub kappa2: Option<f64>,
    pub lambda_width: Option<f64>,
    pub method: Option<EstimateMethod>,
    /// `ok` or a description of why the row has no value.
    pub status: String,
}

impl StudyRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

/// The sequence of problems visited by a study, starting at `spec`. Each
/// level halves the mesh width; an odd number of cells `N` is refined to
/// `2N - 1` so that the number of interior nodes per axis stays even.
pub fn refinement_levels(spec: &ProblemSpec, levels: usize) -> Vec<ProblemSpec> {
    let mut out = Vec::with_capacity(levels);
    let mut cells = spec.cells_per_side;
    for _ in 0..levels {
        out.push(spec.with_cells(cells));
        cells = if cells % 2 == 1 { 2 * cells - 1 } else { 2 * cells };
    }
    out
}

/// Least-squares slope of `log k` against `log h`.
pub fn loglog_slope(h: &[f64], k: &[f64]) -> f64 {
    let n = h.len().min(k.len()) as f64;
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = k.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Condition numbers of the selected operators on `levels` successively
/// refined grids. Assembly failures abort; estimation failures are recorded
/// in the row status.
pub fn refinement_study(
    spec: &ProblemSpec,
    levels: usize,
    targets: &[Target],
    opts: &StudyOptions,
) -> Result<Vec<StudyRow>> {
    if levels < 3 {
        return Err(Error::InvalidArgument(format!("a refinement study needs at least 3 levels, got {levels}")));
    }
    let mut rows = Vec::new();
    for level in refinement_levels(spec, levels) {
        let assembled = assemble(&level)?;
        let mut ctx = LevelContext::new(&level, &assembled, opts);
        for &t in targets {
            let row = match ctx.estimate(t) {
                Ok(rep) => StudyRow {
                    h: level.h(),
                    dofs: assembled.dofs(),
                    target: t,
                    kappa2: Some(rep.kappa2),
                    lambda_width: rep.lambda_width,
                    method: Some(rep.method),
                    status: "ok".into(),
                },
                Err(e) => StudyRow {
                    h: level.h(),
                    dofs: assembled.dofs(),
                    target: t,
                    kappa2: None,
                    lambda_width: None,
                    method: None,
                    status: format!("error: {e}"),
                },
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Per-level state shared between targets (the dense Schur complement is
/// formed at most once).
struct LevelContext<'a> {
    spec: &'a ProblemSpec,
    assembled: &'a Assembled,
    opts: &'a StudyOptions,
    grid: Option<GridHint>,
    dense_w: Option<DenseOperator>,
}

fn lu_inverse(a: &SparseMatrix) -> Option<EnvelopeLu> {
    EnvelopeLu::new(a).ok()
}

impl<'a> LevelContext<'a> {
    fn new(spec: &'a ProblemSpec, assembled: &'a Assembled, opts: &'a StudyOptions) -> Self {
        Self {
            spec,
            assembled,
            opts,
            grid: spec.grid_hint(),
            dense_w: None,
        }
    }

    fn estimate(&mut self, t: Target) -> Result<SpectrumReport> {
        let cfg = &self.opts.cond;
        match (self.assembled, t) {
            (Assembled::Split(sp), Target::A) => matrix_cond(&sp.a, cfg),
            (Assembled::Split(sp), Target::H) => matrix_cond(&sp.h, cfg),
            (Assembled::Split(sp), Target::S) => {
                cond2_with_inverse(&sp.s, None, cfg).map_err(|e| e.context("cond(S)"))
            }
            (Assembled::Split(sp), Target::HinvA) => self.hinv_a(sp),
            (Assembled::Split(sp), Target::PinvA) => {
                let target = if self.opts.precond.targets_symmetric_part() { &sp.h } else { &sp.a };
                let p = Preconditioner::build(&self.opts.precond, target, self.grid.as_ref())?;
                let op = Product::new(&p, &sp.a)?;
                cond2_with_inverse(&op, None, cfg)
            }
            (Assembled::Block(bs), Target::A11) => matrix_cond(&bs.a11.a, cfg),
            (Assembled::Block(bs), Target::H11invA11) => self.hinv_a(&bs.a11),
            (Assembled::Block(bs), Target::A12) => {
                if !bs.a12.is_square() {
                    return Err(Error::Unsupported("A12 is rectangular".into()));
                }
                matrix_cond(&bs.a12, cfg)
            }
            (Assembled::Block(bs), Target::W | Target::HwInvW | Target::MpInvW) => self.schur(bs, t),
            (Assembled::Split(_), _) => Err(Error::Unsupported(format!(
                "{t} needs a block problem; {} assembles a single operator",
                self.spec.kind
            ))),
            (Assembled::Block(_), _) => Err(Error::Unsupported(format!(
                "{t} needs a single operator; {} assembles a block system",
                self.spec.kind
            ))),
        }
    }

    fn hinv_a(&self, sp: &SplitOperator) -> Result<SpectrumReport> {
        let hinv = Preconditioner::build(&PrecondSpec::ExactSym, &sp.h, None)?;
        let op = Product::new(&hinv, &sp.a)?;
        let ainv = lu_inverse(&sp.a);
        let inv = match &ainv {
            Some(lu) => Some(Product::new(lu, &sp.h)?),
            None => None,
        };
        let mut rep = cond2_with_inverse(&op, inv.as_ref().map(|p| p as &dyn LinearOperator), &self.opts.cond)?;
        if self.opts.width {
            rep.lambda_width = Some(spectral_width(sp, &hinv)?);
        }
        Ok(rep)
    }

    fn schur(&mut self, bs: &BlockSystem, t: Target) -> Result<SpectrumReport> {
        let n2 = bs.n2();
        let reduced = n2 - usize::from(bs.kernel.is_some());
        let dense = match self.opts.cond.method {
            Some(EstimateMethod::Dense) => true,
            Some(EstimateMethod::PowerIteration) => false,
            None => n2 <= DENSE_MAX_N,
        };
        let mut cfg = self.opts.cond.clone();
        cfg.deflate = bs.kernel.clone();
        let mp = Preconditioner::build(&PrecondSpec::Jacobi, &bs.mass_p, None)?;
        if dense {
            if self.dense_w.is_none() {
                let w = schur_operator(bs, &self.opts.inner)?;
                self.dense_w = Some(DenseOperator(materialize(&w)?));
            }
            let w = self.dense_w.as_ref().unwrap();
            cfg.method = Some(EstimateMethod::Dense);
            return match t {
                Target::W => cond2_with_inverse(w, None, &cfg),
                Target::MpInvW => cond2_with_inverse(&Product::new(&mp, w)?, None, &cfg),
                _ => {
                    let wc = match &bs.kernel {
                        Some(k) => materialize(&Deflated::new(w, k)?)?,
                        None => w.0.clone(),
                    };
                    let hw = (&wc + wc.transpose()) * 0.5;
                    let chol = hw
                        .cholesky()
                        .ok_or_else(|| Error::Singular("symmetric part of W is not positive definite".into()))?;
                    let m = DenseOperator(chol.solve(&wc));
                    cfg.deflate = None;
                    let mut rep = cond2_with_inverse(&m, None, &cfg)?;
                    rep.n = reduced;
                    Ok(rep)
                }
            };
        }
        let w = schur_operator(bs, &self.opts.inner)?;
        match t {
            Target::W => cond2_with_inverse(&w, None, &cfg),
            Target::MpInvW => cond2_with_inverse(&Product::new(&mp, &w)?, None, &cfg),
            _ => {
                let deflated = bs.kernel.as_ref().map(|k| Deflated::new(&w, k)).transpose()?;
                let wd: &dyn LinearOperator = match &deflated {
                    Some(d) => d,
                    None => &w,
                };
                let hw_inv = SymmetricPartInverse {
                    op: wd,
                    tol: self.opts.cond.inner_tol,
                };
                let op = Product::new(&hw_inv, wd)?;
                cfg.deflate = None;
                cond2_with_inverse(&op, None, &cfg)
            }
        }
    }
}

fn matrix_cond(a: &SparseMatrix, cfg: &CondConfig) -> Result<SpectrumReport> {
    let lu = lu_inverse(a);
    cond2_with_inverse(a, lu.as_ref().map(|l| l as &dyn LinearOperator), cfg)
}

/// `((op + op^T) / 2)^{-1}` by CG.
struct SymmetricPartInverse<'a> {
    op: &'a dyn LinearOperator,
    tol: f64,
}

impl LinearOperator for SymmetricPartInverse<'_> {
    fn nrows(&self) -> usize {
        self.op.nrows()
    }
    fn ncols(&self) -> usize {
        self.op.ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let n = self.op.nrows();
        let sym = FnOperator::new(n, n, |v: &[f64], out: &mut [f64]| {
            let a = self.op.apply_vec(v)?;
            let b = self.op.apply_adjoint_vec(v)?;
            for i in 0..n {
                out[i] = 0.5 * (a[i] + b[i]);
            }
            Ok(())
        });
        let cfg = SolverConfig::new(Method::Cg, PrecondSpec::Identity, self.tol).with_max_iter(20 * n.max(50));
        let (sol, rep) = cg_solve(&sym, None, x, &cfg)?;
        if !rep.converged {
            return Err(Error::NotConverged {
                iterations: rep.iterations,
                residual: rep.final_residual(),
            });
        }
        y.copy_from_slice(&sol);
        Ok(())
    }
    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.apply(x, y)
    }
    fn has_adjoint(&self) -> bool {
        true
    }
}
