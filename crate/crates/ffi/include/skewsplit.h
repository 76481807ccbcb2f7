#ifndef SKEWSPLIT_H
#define SKEWSPLIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result codes. `SK_STATUS_OK` is zero; everything else is an error.
typedef enum SkStatus {
  SK_STATUS_OK = 0,
  SK_STATUS_NULL_POINTER = 1,
  SK_STATUS_SHAPE = 2,
  SK_STATUS_INVALID_ARGUMENT = 3,
  SK_STATUS_SINGULAR = 4,
  SK_STATUS_BREAKDOWN = 5,
  SK_STATUS_NOT_CONVERGED = 6,
  SK_STATUS_UNSUPPORTED = 7,
  SK_STATUS_IO = 8,
  SK_STATUS_PARSE = 9,
  SK_STATUS_INDEFINITE = 10,
  SK_STATUS_TOO_LARGE = 11,
  SK_STATUS_PANIC = 12,
  SK_STATUS_OTHER = 13,
} SkStatus;

// Built-in model problems.
typedef enum SkProblem {
  SK_PROBLEM_ADV_DIFF = 0,
  SK_PROBLEM_STOKES = 1,
  SK_PROBLEM_OSEEN = 2,
  SK_PROBLEM_WAVE = 3,
  SK_PROBLEM_BEAM = 4,
} SkProblem;

typedef enum SkMethod {
  SK_METHOD_CG = 0,
  SK_METHOD_GMRES = 1,
  SK_METHOD_WIDLUND = 2,
  SK_METHOD_RAPOPORT = 3,
  SK_METHOD_DIRECT = 4,
} SkMethod;

typedef enum SkPrecond {
  SK_PRECOND_IDENTITY = 0,
  SK_PRECOND_JACOBI = 1,
  SK_PRECOND_EXACT_SYM = 2,
  SK_PRECOND_INCOMPLETE_CHOLESKY = 3,
  SK_PRECOND_INCOMPLETE_LU = 4,
  SK_PRECOND_MULTIGRID = 5,
} SkPrecond;

typedef enum SkOcpMode {
  SK_OCP_MODE_CONDENSED = 0,
  SK_OCP_MODE_PPCG = 1,
  SK_OCP_MODE_SCHUR = 2,
} SkOcpMode;

typedef enum SkInner {
  SK_INNER_DIRECT = 0,
  SK_INNER_ILU = 1,
  SK_INNER_GMRES = 2,
  SK_INNER_GMRES_IC = 3,
  SK_INNER_GMRES_MG = 4,
  SK_INNER_WIDLUND = 5,
  SK_INNER_RAPOPORT = 6,
} SkInner;

// Opaque sparse matrix (CSR).
typedef struct SkMatrix SkMatrix;

// Opaque splitting `A = H + S` of a square matrix.
typedef struct SkSplit SkSplit;

// Physical parameters of a model problem. Unused fields are ignored.
typedef struct SkProblemParams {
  double nu;
  // Advection vector; only the first `dim` entries are used.
  double b[3];
  double c;
  double s1;
  double s2;
  double rho;
  double eta;
  double mu;
} SkProblemParams;

// Solver settings. `restart = 0` disables GMRES restarts. Multigrid needs
// the interior grid `grid[0..grid_dims]`.
typedef struct SkSolverOptions {
  enum SkMethod method;
  enum SkPrecond precond;
  double tol;
  uintptr_t max_iter;
  uintptr_t restart;
  // Drop tolerance for the incomplete factorizations.
  double drop_tol;
  uintptr_t mg_cycles;
  uintptr_t grid_dims;
  uintptr_t grid[3];
} SkSolverOptions;

typedef struct SkSolveReport {
  uintptr_t iterations;
  // Last relative residual in the norm the method stops on.
  double final_residual;
  bool converged;
  double wall_time;
  uintptr_t inner_iterations;
  // Widlund/Rapoport ran with an inexact `H` solve.
  bool symmetry_degraded;
} SkSolveReport;

typedef struct SkSpectrum {
  double sigma_max;
  double sigma_min;
  double kappa2;
  // 1 when the dense singular value decomposition was used, 0 for power
  // iteration.
  bool dense;
} SkSpectrum;

typedef struct SkOcpReport {
  uintptr_t outer_iterations;
  uintptr_t inner_iterations;
  bool converged;
  // Relative residual of the optimality system at the returned point.
  double kkt_residual;
  double total_time;
  bool feasibility_degraded;
} SkOcpReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *sk_last_error(void);

// Library version as a static nul-terminated string.
const char *sk_version(void);

// Builds a matrix from CSR arrays (`row_ptr` has `nrows + 1` entries,
// `col_idx` and `values` have `row_ptr[nrows]`). Column indices within a
// row may be unsorted; duplicates are summed.
//
// # Safety
// The arrays must be valid for the stated lengths and `out` writable.
enum SkStatus sk_matrix_from_csr(uintptr_t nrows,
                                 uintptr_t ncols,
                                 const uintptr_t *row_ptr,
                                 const uintptr_t *col_idx,
                                 const double *values,
                                 struct SkMatrix **out);

// Builds a matrix from coordinate triplets; duplicates are summed.
//
// # Safety
// `rows`, `cols` and `values` must hold `nnz` entries; `out` writable.
enum SkStatus sk_matrix_from_triplets(uintptr_t nrows,
                                      uintptr_t ncols,
                                      uintptr_t nnz,
                                      const uintptr_t *rows,
                                      const uintptr_t *cols,
                                      const double *values,
                                      struct SkMatrix **out);

// Reads a Matrix Market coordinate file.
//
// # Safety
// `path` must be a nul-terminated string and `out` writable.
enum SkStatus sk_matrix_read_mm(const char *path, struct SkMatrix **out);

// Writes a matrix as Matrix Market coordinate real general.
//
// # Safety
// `m` must be a live handle and `path` a nul-terminated string.
enum SkStatus sk_matrix_write_mm(const struct SkMatrix *m, const char *path);

// Writes the dimensions and stored entry count of `m`.
//
// # Safety
// `m` must be a live handle; each output pointer may be null.
enum SkStatus sk_matrix_shape(const struct SkMatrix *m,
                              uintptr_t *nrows,
                              uintptr_t *ncols,
                              uintptr_t *nnz);

// `y = m x`.
//
// # Safety
// `m` must be a live handle, `x` hold `x_len` and `y` hold `y_len` values.
enum SkStatus sk_matrix_spmv(const struct SkMatrix *m,
                             const double *x,
                             uintptr_t x_len,
                             double *y,
                             uintptr_t y_len);

// # Safety
// `m` must be null or a handle not freed before.
void sk_matrix_free(struct SkMatrix *m);

// Splits a square matrix into symmetric and skew-symmetric parts.
//
// # Safety
// `m` must be a live handle and `out` writable.
enum SkStatus sk_split_new(const struct SkMatrix *m, struct SkSplit **out);

// Copies the symmetric part `H` (`which = 0`), the skew part `S`
// (`which = 1`) or the full matrix (`which = 2`) into a new matrix handle.
//
// # Safety
// `s` must be a live handle and `out` writable.
enum SkStatus sk_split_part(const struct SkSplit *s, uint32_t which, struct SkMatrix **out);

// # Safety
// `s` must be a live handle; `n` writable.
enum SkStatus sk_split_dim(const struct SkSplit *s, uintptr_t *n);

// # Safety
// `s` must be null or a handle not freed before.
void sk_split_free(struct SkSplit *s);

// Default parameters for `problem` in dimension `dim`.
struct SkProblemParams sk_problem_params_default(enum SkProblem problem, uintptr_t dim);

// Assembles a model problem on the unit box with `cells` cells per side
// and returns its full system matrix. Two-field problems are returned as
// `[[A11, A12], [A21, 0]]`. `params` may be null for defaults.
//
// # Safety
// `params` must be null or valid; `out` writable.
enum SkStatus sk_problem_assemble(enum SkProblem problem,
                                  uintptr_t dim,
                                  uintptr_t cells,
                                  const struct SkProblemParams *params,
                                  struct SkMatrix **out);

struct SkSolverOptions sk_solver_options_default(void);

// Solves `A x = b` for the split operator. Not reaching the tolerance is
// not an error: check `report.converged`. `options` and `report` may be
// null (defaults / no report).
//
// # Safety
// `s` must be a live handle; `b` and `x` must hold `n` values.
enum SkStatus sk_solve(const struct SkSplit *s,
                       const double *b,
                       double *x,
                       uintptr_t n,
                       const struct SkSolverOptions *options,
                       struct SkSolveReport *report);

// Spectral condition number of a square matrix. `method` is 0 for the
// automatic choice, 1 for dense, 2 for power iteration.
//
// # Safety
// `m` must be a live handle and `out` writable.
enum SkStatus sk_cond2(const struct SkMatrix *m, uint32_t method, struct SkSpectrum *out);

// Spectral half-width `λ` of `H^{-1} S`, whose eigenvalues lie in
// `i[-λ, λ]`.
//
// # Safety
// `s` must be a live handle and `out` writable.
enum SkStatus sk_spectral_width(const struct SkSplit *s, double *out);

// Solves the distributed control problem
// `min ½|x - y_ref|² + ½λ|u|²` subject to `A x - u = f`, where `A` is the
// split operator. `x`, `u` and `p` (adjoint) receive `n` values each.
//
// # Safety
// `s` must be a live handle; all arrays must hold `n` values; `report`
// may be null.
enum SkStatus sk_ocp_solve(const struct SkSplit *s,
                           double lambda,
                           const double *f,
                           const double *y_ref,
                           uintptr_t n,
                           enum SkOcpMode mode,
                           enum SkInner inner,
                           double cgtol,
                           double *x,
                           double *u,
                           double *p,
                           struct SkOcpReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKEWSPLIT_H */
