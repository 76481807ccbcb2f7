//! Condition numbers and spectral widths of sparse and matrix-free operators.
//!
//! Condition numbers are the Euclidean `κ₂ = σ_max / σ_min`. Small operators
//! are materialized and handed to a dense SVD; larger ones use power
//! iteration on `op^T op` and inverse iteration with `op^{-1}`.

mod dense;
mod study;

pub use dense::{
    dense_eig_oracle, dense_spectral_width, materialize, singular_values, to_dense, DenseOperator, DenseSpectrum,
    DENSE_MAX_N,
};
pub use study::{loglog_slope, refinement_levels, refinement_study, StudyOptions, StudyRow, Target};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::krylov::{gmres_solve, Method, SolverConfig};
use crate::operator::{check_dims, LinearOperator, Transposed};
use crate::precond::{PrecondSpec, Preconditioner};
use crate::rng::SplitMix64;
use crate::sparse::SplitOperator;
use crate::vecops::{dot, norm2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EstimateMethod {
    Dense,
    PowerIteration,
}

impl fmt::Display for EstimateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimateMethod::Dense => "dense",
            EstimateMethod::PowerIteration => "power",
        })
    }
}

impl FromStr for EstimateMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dense" | "svd" => Ok(EstimateMethod::Dense),
            "power" | "poweriteration" | "power-iteration" => Ok(EstimateMethod::PowerIteration),
            other => Err(Error::Config(format!("unknown estimation method '{other}'"))),
        }
    }
}

impl TryFrom<String> for EstimateMethod {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EstimateMethod> for String {
    fn from(m: EstimateMethod) -> String {
        m.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CondConfig {
    /// `None` picks dense up to [`DENSE_MAX_N`] and power iteration above.
    pub method: Option<EstimateMethod>,
    /// Relative change of the Rayleigh estimate regarded as converged.
    pub tol: f64,
    /// Number of consecutive sweeps that must satisfy `tol`.
    pub window: usize,
    pub max_sweeps: usize,
    pub seed: u64,
    /// Relative tolerance of the GMRES solves used when no inverse is given.
    pub inner_tol: f64,
    /// Unit vector spanning a known kernel; the estimate is taken on its
    /// orthogonal complement.
    pub deflate: Option<Vec<f64>>,
}

impl Default for CondConfig {
    fn default() -> Self {
        Self {
            method: None,
            tol: 1e-8,
            window: 10,
            max_sweeps: 5000,
            seed: 0x5eed,
            inner_tol: 1e-12,
            deflate: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub kappa2: f64,
    pub lambda_width: Option<f64>,
    pub n: usize,
    pub method: EstimateMethod,
    /// Power sweeps spent (both ends); zero for the dense method.
    pub sweeps: usize,
}

impl SpectrumReport {
    fn new(sigma_max: f64, sigma_min: f64, n: usize, method: EstimateMethod, sweeps: usize) -> Self {
        Self {
            sigma_max,
            sigma_min,
            kappa2: sigma_max / sigma_min,
            lambda_width: None,
            n,
            method,
            sweeps,
        }
    }
}

/// `κ₂(op)`, inverting `op` by GMRES when power iteration is used.
pub fn cond2(op: &dyn LinearOperator, cfg: &CondConfig) -> Result<SpectrumReport> {
    cond2_with_inverse(op, None, cfg)
}

/// `κ₂(op)` with an optional exact inverse for the `σ_min` end. With
/// `cfg.deflate` set, `inverse` must map the complement of the kernel into
/// itself (a pseudo-inverse does).
pub fn cond2_with_inverse(
    op: &dyn LinearOperator,
    inverse: Option<&dyn LinearOperator>,
    cfg: &CondConfig,
) -> Result<SpectrumReport> {
    if op.nrows() != op.ncols() {
        return shape_err("condition number needs a square operator");
    }
    if let Some(k) = &cfg.deflate {
        let d = Deflated::new(op, k)?;
        let inv = inverse.map(|i| Deflated::new(i, k)).transpose()?;
        let mut c = cfg.clone();
        c.deflate = None;
        return cond2_with_inverse(&d, inv.as_ref().map(|i| i as &dyn LinearOperator), &c);
    }
    let n = op.nrows();
    let method = cfg
        .method
        .unwrap_or(if n <= DENSE_MAX_N { EstimateMethod::Dense } else { EstimateMethod::PowerIteration });
    match method {
        EstimateMethod::Dense => {
            let s = singular_values(&materialize(op)?);
            let (smax, smin) = (s[0], s[s.len() - 1]);
            if !(smin > 0.0) {
                return Err(Error::Singular("operator has a zero singular value".into()));
            }
            Ok(SpectrumReport::new(smax, smin, n, method, 0))
        }
        EstimateMethod::PowerIteration => {
            if !op.has_adjoint() {
                return Err(Error::Unsupported("power iteration needs the adjoint of the operator".into()));
            }
            let mut rng = SplitMix64::new(cfg.seed);
            let (rho_max, sw1) = power_gram(op, &rng.vector(n), cfg)?;
            let gmres_inv;
            let inv: &dyn LinearOperator = match inverse {
                Some(i) => i,
                None => {
                    gmres_inv = GmresInverse { op, tol: cfg.inner_tol };
                    &gmres_inv
                }
            };
            let (rho_inv, sw2) = power_gram(inv, &rng.vector(n), cfg)
                .map_err(|e| e.context("inverse iteration for sigma_min"))?;
            Ok(SpectrumReport::new(rho_max.sqrt(), 1.0 / rho_inv.sqrt(), n, method, sw1 + sw2))
        }
    }
}

/// Largest eigenvalue of `op^T op` by power iteration.
fn power_gram(op: &dyn LinearOperator, x0: &[f64], cfg: &CondConfig) -> Result<(f64, usize)> {
    let mut x = x0.to_vec();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut y = vec![0.0; op.nrows()];
    let mut z = vec![0.0; op.ncols()];
    let mut rho = 0.0;
    let mut calm = 0;
    for sweep in 1..=cfg.max_sweeps {
        op.apply(&x, &mut y)?;
        op.apply_adjoint(&y, &mut z)?;
        let next = dot(&y, &y);
        let nz = norm2(&z);
        if nz == 0.0 {
            return Ok((0.0, sweep));
        }
        if (next - rho).abs() <= cfg.tol * next {
            calm += 1;
        } else {
            calm = 0;
        }
        rho = next;
        if calm >= cfg.window {
            return Ok((rho, sweep));
        }
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi = zi / nz;
        }
    }
    Ok((rho, cfg.max_sweeps))
}

/// `op^{-1}` and `op^{-T}` by unpreconditioned GMRES.
struct GmresInverse<'a> {
    op: &'a dyn LinearOperator,
    tol: f64,
}

impl GmresInverse<'_> {
    fn solve(&self, op: &dyn LinearOperator, b: &[f64], y: &mut [f64]) -> Result<()> {
        let cfg = SolverConfig::new(Method::Gmres, PrecondSpec::Identity, self.tol)
            .with_max_iter(20 * op.nrows().max(50))
            .with_restart(Some(300.min(op.nrows())));
        let (x, rep) = gmres_solve(op, None, b, &cfg)?;
        if !rep.converged {
            return Err(Error::NotConverged {
                iterations: rep.iterations,
                residual: rep.final_residual(),
            });
        }
        y.copy_from_slice(&x);
        Ok(())
    }
}

impl LinearOperator for GmresInverse<'_> {
    fn nrows(&self) -> usize {
        self.op.ncols()
    }
    fn ncols(&self) -> usize {
        self.op.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dims(self, x, y)?;
        self.solve(self.op, x, y)
    }
    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.solve(&Transposed(self.op), x, y)
    }
    fn has_adjoint(&self) -> bool {
        true
    }
}

/// `Q^T op Q` where the columns of `Q` are an orthonormal basis of the
/// complement of a unit vector `k`, taken from a Householder reflector.
pub struct Deflated<'a> {
    op: &'a dyn LinearOperator,
    v: Vec<f64>,
}

impl<'a> Deflated<'a> {
    pub fn new(op: &'a dyn LinearOperator, kernel: &[f64]) -> Result<Self> {
        let n = op.nrows();
        if op.ncols() != n || kernel.len() != n || n < 2 {
            return shape_err("deflation vector does not match the operator");
        }
        let nk = norm2(kernel);
        if !(nk > 0.0) {
            return Err(Error::InvalidArgument("deflation vector is zero".into()));
        }
        // P k = s e_last with s = -sign(k_last) ||k||
        let mut v: Vec<f64> = kernel.iter().map(|x| x / nk).collect();
        let s = if v[n - 1] >= 0.0 { -1.0 } else { 1.0 };
        v[n - 1] -= s;
        let nv = norm2(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        Ok(Self { op, v })
    }

    fn reflect(&self, x: &mut [f64]) {
        let c = 2.0 * dot(&self.v, x);
        x.iter_mut().zip(&self.v).for_each(|(xi, vi)| *xi -= c * vi);
    }

    fn embed(&self, x: &[f64]) -> Vec<f64> {
        let mut full = x.to_vec();
        full.push(0.0);
        self.reflect(&mut full);
        full
    }

    fn restrict(&self, mut full: Vec<f64>, y: &mut [f64]) {
        self.reflect(&mut full);
        y.copy_from_slice(&full[..full.len() - 1]);
    }
}

impl LinearOperator for Deflated<'_> {
    fn nrows(&self) -> usize {
        self.op.nrows() - 1
    }
    fn ncols(&self) -> usize {
        self.op.ncols() - 1
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dims(self, x, y)?;
        let mut t = vec![0.0; self.op.nrows()];
        self.op.apply(&self.embed(x), &mut t)?;
        self.restrict(t, y);
        Ok(())
    }
    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let mut t = vec![0.0; self.op.ncols()];
        self.op.apply_adjoint(&self.embed(x), &mut t)?;
        self.restrict(t, y);
        Ok(())
    }
    fn has_adjoint(&self) -> bool {
        self.op.has_adjoint()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WidthOptions {
    pub tol: f64,
    pub window: usize,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for WidthOptions {
    fn default() -> Self {
        Self {
            tol: 1e-13,
            window: 10,
            max_sweeps: 200_000,
            seed: 0x5eed,
        }
    }
}

/// Spectral half-width `λ` with `σ(H^{-1}S) ⊂ i[-λ, λ]`, by power iteration on
/// the `H`-symmetric operator `-(H^{-1}S)^2` in the `H` inner product.
pub fn spectral_width(split: &SplitOperator, h_solver: &Preconditioner) -> Result<f64> {
    spectral_width_with(split, h_solver, &WidthOptions::default())
}

pub fn spectral_width_with(split: &SplitOperator, h_solver: &Preconditioner, opts: &WidthOptions) -> Result<f64> {
    if !h_solver.is_exact_symmetric() {
        return Err(Error::Structure("spectral width needs an exact solver for H".into()));
    }
    let n = split.dim();
    if h_solver.dim() != n {
        return shape_err("H solver does not match the operator");
    }
    if split.s.values().iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let mut x = SplitMix64::new(opts.seed).vector(n);
    let mut rho = 0.0;
    let mut calm = 0;
    for _ in 0..opts.max_sweeps {
        let hx = split.h.spmv(&x)?;
        let xhx = dot(&x, &hx);
        let sx = split.s.spmv(&x)?;
        let y = h_solver.apply_vec(&sx)?;
        // <x, -K^2 x>_H = (Sx)^T H^{-1} (Sx)
        let next = dot(&sx, &y) / xhx;
        if next == 0.0 {
            return Ok(0.0);
        }
        if (next - rho).abs() <= opts.tol * next {
            calm += 1;
        } else {
            calm = 0;
        }
        rho = next;
        if calm >= opts.window {
            break;
        }
        let sy = split.s.spmv(&y)?;
        let mut z = h_solver.apply_vec(&sy)?;
        z.iter_mut().for_each(|v| *v = -*v);
        let hz = split.h.spmv(&z)?;
        let nz = dot(&z, &hz).sqrt();
        x = z.into_iter().map(|v| v / nz).collect();
    }
    Ok(rho.max(0.0).sqrt())
}
