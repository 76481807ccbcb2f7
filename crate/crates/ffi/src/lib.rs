//! C ABI for the `skewsplit` solver library.
//!
//! Objects are passed as opaque handles created by `sk_*_new`/`sk_*_read`
//! style functions and released with the matching `sk_*_free`. Every
//! fallible function returns an [`SkStatus`]; on failure a description is
//! available from [`sk_last_error`] on the same thread until the next
//! failing call.
//!
//! Vectors are passed as pointer plus length. Output arrays are written
//! only when the call succeeds.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use skewsplit::bench::{self, InnerPreset, OcpMode};
use skewsplit::discretize::{assemble, Params, ProblemKind, ProblemSpec};
use skewsplit::krylov::{self, Method};
use skewsplit::optctl::OcpProblem;
use skewsplit::spectra::{self, CondConfig, EstimateMethod};
use skewsplit::{Error, GridHint, PrecondSpec, Preconditioner, SolverConfig, SparseMatrix, SplitOperator};

/// Result codes. `SK_STATUS_OK` is zero; everything else is an error.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkStatus {
    Ok = 0,
    NullPointer = 1,
    Shape = 2,
    InvalidArgument = 3,
    Singular = 4,
    Breakdown = 5,
    NotConverged = 6,
    Unsupported = 7,
    Io = 8,
    Parse = 9,
    Indefinite = 10,
    TooLarge = 11,
    Panic = 12,
    Other = 13,
}

impl From<&Error> for SkStatus {
    fn from(e: &Error) -> Self {
        match e.root() {
            Error::Shape(_) => SkStatus::Shape,
            Error::Structure(_) | Error::InvalidArgument(_) | Error::Config(_) => SkStatus::InvalidArgument,
            Error::Singular(_) => SkStatus::Singular,
            Error::Breakdown { .. } => SkStatus::Breakdown,
            Error::NotConverged { .. } => SkStatus::NotConverged,
            Error::Unsupported(_) | Error::Hierarchy(_) => SkStatus::Unsupported,
            Error::Io(_) => SkStatus::Io,
            Error::Parse { .. } => SkStatus::Parse,
            Error::Indefinite { .. } => SkStatus::Indefinite,
            Error::TooLarge { .. } => SkStatus::TooLarge,
            _ => SkStatus::Other,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Failure raised inside an FFI entry point.
struct Fail(SkStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(SkStatus::from(&e), e.to_string())
    }
}

type FfiResult<T = ()> = Result<T, Fail>;

fn null(what: &str) -> Fail {
    Fail(SkStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(SkStatus::InvalidArgument, msg.into())
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> FfiResult) -> SkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SkStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_last_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            SkStatus::Panic
        }
    }
}

unsafe fn slice_in<'a>(p: *const f64, len: usize, what: &str) -> FfiResult<&'a [f64]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn slice_out<'a>(p: *mut f64, len: usize, what: &str) -> FfiResult<&'a mut [f64]> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn path_arg(p: *const c_char) -> FfiResult<String> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| invalid("path is not valid UTF-8"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> FfiResult {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn copy_into(dst: &mut [f64], src: &[f64], what: &str) -> FfiResult {
    if dst.len() != src.len() {
        return Err(Fail(
            SkStatus::Shape,
            format!("{what} has length {}, expected {}", dst.len(), src.len()),
        ));
    }
    dst.copy_from_slice(src);
    Ok(())
}

/// Opaque sparse matrix (CSR).
pub struct SkMatrix(SparseMatrix);

/// Opaque splitting `A = H + S` of a square matrix.
pub struct SkSplit(SplitOperator);

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sk_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn sk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a matrix from CSR arrays (`row_ptr` has `nrows + 1` entries,
/// `col_idx` and `values` have `row_ptr[nrows]`). Column indices within a
/// row may be unsorted; duplicates are summed.
///
/// # Safety
/// The arrays must be valid for the stated lengths and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_matrix_from_csr(
    nrows: usize,
    ncols: usize,
    row_ptr: *const usize,
    col_idx: *const usize,
    values: *const f64,
    out: *mut *mut SkMatrix,
) -> SkStatus {
    guard(|| {
        if row_ptr.is_null() {
            return Err(null("row_ptr"));
        }
        let rp = slice::from_raw_parts(row_ptr, nrows + 1);
        let nnz = rp[nrows];
        if nnz > 0 && (col_idx.is_null() || values.is_null()) {
            return Err(null("col_idx/values"));
        }
        let (ci, vals): (&[usize], &[f64]) = if nnz == 0 {
            (&[], &[])
        } else {
            (slice::from_raw_parts(col_idx, nnz), slice::from_raw_parts(values, nnz))
        };
        let mut triplets = Vec::with_capacity(nnz);
        for i in 0..nrows {
            if rp[i] > rp[i + 1] || rp[i + 1] > nnz {
                return Err(invalid(format!("row_ptr is not monotone at row {i}")));
            }
            for k in rp[i]..rp[i + 1] {
                triplets.push((i, ci[k], vals[k]));
            }
        }
        let m = SparseMatrix::from_triplets(nrows, ncols, &triplets)?;
        put(out, SkMatrix(m))
    })
}

/// Builds a matrix from coordinate triplets; duplicates are summed.
///
/// # Safety
/// `rows`, `cols` and `values` must hold `nnz` entries; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_matrix_from_triplets(
    nrows: usize,
    ncols: usize,
    nnz: usize,
    rows: *const usize,
    cols: *const usize,
    values: *const f64,
    out: *mut *mut SkMatrix,
) -> SkStatus {
    guard(|| {
        if nnz > 0 && (rows.is_null() || cols.is_null() || values.is_null()) {
            return Err(null("triplet arrays"));
        }
        let triplets: Vec<(usize, usize, f64)> = (0..nnz).map(|k| (*rows.add(k), *cols.add(k), *values.add(k))).collect();
        let m = SparseMatrix::from_triplets(nrows, ncols, &triplets)?;
        put(out, SkMatrix(m))
    })
}

/// Reads a Matrix Market coordinate file.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_matrix_read_mm(path: *const c_char, out: *mut *mut SkMatrix) -> SkStatus {
    guard(|| {
        let p = path_arg(path)?;
        let m = skewsplit::sparse::read_matrix_market(&p)?;
        put(out, SkMatrix(m))
    })
}

/// Writes a matrix as Matrix Market coordinate real general.
///
/// # Safety
/// `m` must be a live handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sk_matrix_write_mm(m: *const SkMatrix, path: *const c_char) -> SkStatus {
    guard(|| {
        let m = handle(m, "matrix")?;
        let p = path_arg(path)?;
        skewsplit::sparse::write_matrix_market(&m.0, &p)?;
        Ok(())
    })
}

/// Writes the dimensions and stored entry count of `m`.
///
/// # Safety
/// `m` must be a live handle; each output pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn sk_matrix_shape(
    m: *const SkMatrix,
    nrows: *mut usize,
    ncols: *mut usize,
    nnz: *mut usize,
) -> SkStatus {
    guard(|| {
        let m = handle(m, "matrix")?;
        if !nrows.is_null() {
            *nrows = m.0.nrows();
        }
        if !ncols.is_null() {
            *ncols = m.0.ncols();
        }
        if !nnz.is_null() {
            *nnz = m.0.nnz();
        }
        Ok(())
    })
}

/// `y = m x`.
///
/// # Safety
/// `m` must be a live handle, `x` hold `x_len` and `y` hold `y_len` values.
#[no_mangle]
pub unsafe extern "C" fn sk_matrix_spmv(
    m: *const SkMatrix,
    x: *const f64,
    x_len: usize,
    y: *mut f64,
    y_len: usize,
) -> SkStatus {
    guard(|| {
        let m = handle(m, "matrix")?;
        let x = slice_in(x, x_len, "x")?;
        let y = slice_out(y, y_len, "y")?;
        m.0.spmv_into(x, y)?;
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn sk_matrix_free(m: *mut SkMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Splits a square matrix into symmetric and skew-symmetric parts.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_split_new(m: *const SkMatrix, out: *mut *mut SkSplit) -> SkStatus {
    guard(|| {
        let m = handle(m, "matrix")?;
        put(out, SkSplit(skewsplit::split(&m.0)?))
    })
}

/// Copies the symmetric part `H` (`which = 0`), the skew part `S`
/// (`which = 1`) or the full matrix (`which = 2`) into a new matrix handle.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_split_part(s: *const SkSplit, which: u32, out: *mut *mut SkMatrix) -> SkStatus {
    guard(|| {
        let s = handle(s, "split")?;
        let m = match which {
            0 => s.0.h.clone(),
            1 => s.0.s.clone(),
            2 => s.0.a.clone(),
            _ => return Err(invalid(format!("unknown split part {which}"))),
        };
        put(out, SkMatrix(m))
    })
}

/// # Safety
/// `s` must be a live handle; `n` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_split_dim(s: *const SkSplit, n: *mut usize) -> SkStatus {
    guard(|| {
        let s = handle(s, "split")?;
        if n.is_null() {
            return Err(null("n"));
        }
        *n = s.0.dim();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn sk_split_free(s: *mut SkSplit) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Built-in model problems.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkProblem {
    AdvDiff = 0,
    Stokes = 1,
    Oseen = 2,
    Wave = 3,
    Beam = 4,
}

impl From<SkProblem> for ProblemKind {
    fn from(p: SkProblem) -> Self {
        match p {
            SkProblem::AdvDiff => ProblemKind::AdvDiff,
            SkProblem::Stokes => ProblemKind::Stokes,
            SkProblem::Oseen => ProblemKind::Oseen,
            SkProblem::Wave => ProblemKind::Wave,
            SkProblem::Beam => ProblemKind::Beam,
        }
    }
}

/// Physical parameters of a model problem. Unused fields are ignored.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkProblemParams {
    pub nu: f64,
    /// Advection vector; only the first `dim` entries are used.
    pub b: [f64; 3],
    pub c: f64,
    pub s1: f64,
    pub s2: f64,
    pub rho: f64,
    pub eta: f64,
    pub mu: f64,
}

/// Default parameters for `problem` in dimension `dim`.
#[no_mangle]
pub extern "C" fn sk_problem_params_default(problem: SkProblem, dim: usize) -> SkProblemParams {
    let p = ProblemSpec::new(problem.into(), dim, 2).params;
    let mut b = [0.0; 3];
    for (dst, src) in b.iter_mut().zip(&p.b) {
        *dst = *src;
    }
    SkProblemParams {
        nu: p.nu,
        b,
        c: p.c,
        s1: p.s1,
        s2: p.s2,
        rho: p.rho,
        eta: p.eta,
        mu: p.mu,
    }
}

fn problem_spec(problem: SkProblem, dim: usize, cells: usize, params: Option<&SkProblemParams>) -> ProblemSpec {
    let mut spec = ProblemSpec::new(problem.into(), dim, cells);
    if let Some(p) = params {
        spec.params = Params {
            nu: p.nu,
            b: p.b[..dim.min(3)].to_vec(),
            c: p.c,
            s1: p.s1,
            s2: p.s2,
            rho: p.rho,
            eta: p.eta,
            mu: p.mu,
        };
    }
    spec
}

/// Assembles a model problem on the unit box with `cells` cells per side
/// and returns its full system matrix. Two-field problems are returned as
/// `[[A11, A12], [A21, 0]]`. `params` may be null for defaults.
///
/// # Safety
/// `params` must be null or valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_problem_assemble(
    problem: SkProblem,
    dim: usize,
    cells: usize,
    params: *const SkProblemParams,
    out: *mut *mut SkMatrix,
) -> SkStatus {
    guard(|| {
        let spec = problem_spec(problem, dim, cells, params.as_ref());
        let assembled = assemble(&spec)?;
        put(out, SkMatrix(bench::system_matrix(&assembled)?))
    })
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkMethod {
    Cg = 0,
    Gmres = 1,
    Widlund = 2,
    Rapoport = 3,
    Direct = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkPrecond {
    Identity = 0,
    Jacobi = 1,
    ExactSym = 2,
    IncompleteCholesky = 3,
    IncompleteLu = 4,
    Multigrid = 5,
}

/// Solver settings. `restart = 0` disables GMRES restarts. Multigrid needs
/// the interior grid `grid[0..grid_dims]`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkSolverOptions {
    pub method: SkMethod,
    pub precond: SkPrecond,
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
    /// Drop tolerance for the incomplete factorizations.
    pub drop_tol: f64,
    pub mg_cycles: usize,
    pub grid_dims: usize,
    pub grid: [usize; 3],
}

#[no_mangle]
pub extern "C" fn sk_solver_options_default() -> SkSolverOptions {
    SkSolverOptions {
        method: SkMethod::Widlund,
        precond: SkPrecond::ExactSym,
        tol: 1e-8,
        max_iter: 1000,
        restart: 0,
        drop_tol: 1e-2,
        mg_cycles: 1,
        grid_dims: 0,
        grid: [0; 3],
    }
}

fn solver_config(o: &SkSolverOptions) -> FfiResult<(SolverConfig, Option<GridHint>)> {
    let method = match o.method {
        SkMethod::Cg => Method::Cg,
        SkMethod::Gmres => Method::Gmres,
        SkMethod::Widlund => Method::Widlund,
        SkMethod::Rapoport => Method::Rapoport,
        SkMethod::Direct => Method::Direct,
    };
    let precond = match o.precond {
        SkPrecond::Identity => PrecondSpec::Identity,
        SkPrecond::Jacobi => PrecondSpec::Jacobi,
        SkPrecond::ExactSym => PrecondSpec::ExactSym,
        SkPrecond::IncompleteCholesky => PrecondSpec::IncompleteCholesky { drop_tol: o.drop_tol },
        SkPrecond::IncompleteLu => PrecondSpec::IncompleteLu { drop_tol: o.drop_tol },
        SkPrecond::Multigrid => PrecondSpec::multigrid(o.mg_cycles),
    };
    if o.grid_dims > 3 {
        return Err(invalid("grid_dims must be at most 3"));
    }
    let grid = (o.grid_dims > 0).then(|| GridHint::new(o.grid[..o.grid_dims].to_vec()));
    let cfg = SolverConfig::new(method, precond, o.tol)
        .with_max_iter(o.max_iter)
        .with_restart((o.restart > 0).then_some(o.restart));
    cfg.validate()?;
    Ok((cfg, grid))
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SkSolveReport {
    pub iterations: usize,
    /// Last relative residual in the norm the method stops on.
    pub final_residual: f64,
    pub converged: bool,
    pub wall_time: f64,
    pub inner_iterations: usize,
    /// Widlund/Rapoport ran with an inexact `H` solve.
    pub symmetry_degraded: bool,
}

/// Solves `A x = b` for the split operator. Not reaching the tolerance is
/// not an error: check `report.converged`. `options` and `report` may be
/// null (defaults / no report).
///
/// # Safety
/// `s` must be a live handle; `b` and `x` must hold `n` values.
#[no_mangle]
pub unsafe extern "C" fn sk_solve(
    s: *const SkSplit,
    b: *const f64,
    x: *mut f64,
    n: usize,
    options: *const SkSolverOptions,
    report: *mut SkSolveReport,
) -> SkStatus {
    guard(|| {
        let s = handle(s, "split")?;
        let b = slice_in(b, n, "b")?;
        let x = slice_out(x, n, "x")?;
        let opts = options.as_ref().copied().unwrap_or_else(|| sk_solver_options_default());
        let (cfg, grid) = solver_config(&opts)?;
        let (sol, rep) = krylov::solve(&s.0, b, &cfg, grid.as_ref())?;
        copy_into(x, &sol, "x")?;
        if let Some(r) = report.as_mut() {
            *r = SkSolveReport {
                iterations: rep.iterations,
                final_residual: rep.final_residual(),
                converged: rep.converged,
                wall_time: rep.wall_time,
                inner_iterations: rep.inner_iterations,
                symmetry_degraded: rep.symmetry_degraded,
            };
        }
        Ok(())
    })
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SkSpectrum {
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub kappa2: f64,
    /// 1 when the dense singular value decomposition was used, 0 for power
    /// iteration.
    pub dense: bool,
}

/// Spectral condition number of a square matrix. `method` is 0 for the
/// automatic choice, 1 for dense, 2 for power iteration.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_cond2(m: *const SkMatrix, method: u32, out: *mut SkSpectrum) -> SkStatus {
    guard(|| {
        let m = handle(m, "matrix")?;
        let method = match method {
            0 => None,
            1 => Some(EstimateMethod::Dense),
            2 => Some(EstimateMethod::PowerIteration),
            _ => return Err(invalid(format!("unknown estimation method {method}"))),
        };
        let cfg = CondConfig {
            method,
            ..Default::default()
        };
        let rep = spectra::cond2(&m.0, &cfg)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = SkSpectrum {
            sigma_max: rep.sigma_max,
            sigma_min: rep.sigma_min,
            kappa2: rep.kappa2,
            dense: rep.method == EstimateMethod::Dense,
        };
        Ok(())
    })
}

/// Spectral half-width `λ` of `H^{-1} S`, whose eigenvalues lie in
/// `i[-λ, λ]`.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_spectral_width(s: *const SkSplit, out: *mut f64) -> SkStatus {
    guard(|| {
        let s = handle(s, "split")?;
        let p = Preconditioner::build(&PrecondSpec::ExactSym, &s.0.h, None)?;
        let w = spectra::spectral_width(&s.0, &p)?;
        *out.as_mut().ok_or_else(|| null("out"))? = w;
        Ok(())
    })
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkOcpMode {
    Condensed = 0,
    Ppcg = 1,
    Schur = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkInner {
    Direct = 0,
    Ilu = 1,
    Gmres = 2,
    GmresIc = 3,
    GmresMg = 4,
    Widlund = 5,
    Rapoport = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SkOcpReport {
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub converged: bool,
    /// Relative residual of the optimality system at the returned point.
    pub kkt_residual: f64,
    pub total_time: f64,
    pub feasibility_degraded: bool,
}

/// Solves the distributed control problem
/// `min ½|x - y_ref|² + ½λ|u|²` subject to `A x - u = f`, where `A` is the
/// split operator. `x`, `u` and `p` (adjoint) receive `n` values each.
///
/// # Safety
/// `s` must be a live handle; all arrays must hold `n` values; `report`
/// may be null.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sk_ocp_solve(
    s: *const SkSplit,
    lambda: f64,
    f: *const f64,
    y_ref: *const f64,
    n: usize,
    mode: SkOcpMode,
    inner: SkInner,
    cgtol: f64,
    x: *mut f64,
    u: *mut f64,
    p: *mut f64,
    report: *mut SkOcpReport,
) -> SkStatus {
    guard(|| {
        let s = handle(s, "split")?;
        let f = slice_in(f, n, "f")?;
        let y_ref = slice_in(y_ref, n, "y_ref")?;
        let (x, u, p) = (slice_out(x, n, "x")?, slice_out(u, n, "u")?, slice_out(p, n, "p")?);
        if !(cgtol > 0.0) {
            return Err(invalid("cgtol must be positive"));
        }
        let ocp = OcpProblem::distributed(s.0.clone(), lambda, f.to_vec(), y_ref.to_vec())?;
        let preset = match inner {
            SkInner::Direct => InnerPreset::Direct,
            SkInner::Ilu => InnerPreset::Ilu,
            SkInner::Gmres => InnerPreset::Gmres,
            SkInner::GmresIc => InnerPreset::GmresIc,
            SkInner::GmresMg => InnerPreset::GmresMg,
            SkInner::Widlund => InnerPreset::Widlund,
            SkInner::Rapoport => InnerPreset::Rapoport,
        };
        let mode = match mode {
            SkOcpMode::Condensed => OcpMode::Condensed,
            SkOcpMode::Ppcg => OcpMode::Ppcg,
            SkOcpMode::Schur => OcpMode::Schur,
        };
        let sol = bench::solve_ocp(&ocp, mode, preset, cgtol, 1000)?;
        copy_into(x, &sol.x, "x")?;
        copy_into(u, &sol.u, "u")?;
        copy_into(p, &sol.p, "p")?;
        if let Some(r) = report.as_mut() {
            *r = SkOcpReport {
                outer_iterations: sol.outer_report.iterations,
                inner_iterations: sol.inner_totals.iterations,
                converged: sol.outer_report.converged,
                kkt_residual: sol.kkt_residual,
                total_time: sol.total_time,
                feasibility_degraded: sol.feasibility_degraded,
            };
        }
        Ok(())
    })
}
