//! Preconditioned Krylov solvers for positive real linear systems `A x = b`
//! built around the splitting `A = H + S` into a symmetric part `H` and a
//! skew-symmetric part `S`.
//!
//! The crate contains sparse storage and Matrix Market I/O, preconditioners
//! (exact symmetric solves, incomplete factorizations, geometric multigrid),
//! CG, GMRES and the short-recurrence Widlund and Rapoport methods, finite
//! difference model problems, condition number estimators and solvers for
//! linear-quadratic optimal control problems.

pub mod bench;
pub mod discretize;
pub mod error;
pub mod factor;
pub mod krylov;
pub mod operator;
pub mod optctl;
pub mod precond;
pub mod rng;
pub mod sparse;
pub mod spectra;
pub mod vecops;

pub use error::{Error, Result};
pub use krylov::{Method, SolveReport, SolverConfig};
pub use operator::LinearOperator;
pub use precond::{GridHint, PrecondSpec, Preconditioner};
pub use sparse::{split, SparseMatrix, SplitOperator};
