//! Abstract linear operators.
//!
//! Everything the Krylov solvers and the spectral estimators touch goes through
//! [`LinearOperator`]: sparse matrices, preconditioners, Schur complements and
//! compositions of these.

use crate::error::{shape_err, Error, Result};

pub trait LinearOperator {
    /// Dimension of the output space.
    fn nrows(&self) -> usize;
    /// Dimension of the input space.
    fn ncols(&self) -> usize;
    /// y = Op x.
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()>;
    /// y = Op^T x. Operators without an adjoint return `Unsupported`.
    fn apply_adjoint(&self, _x: &[f64], _y: &mut [f64]) -> Result<()> {
        Err(Error::Unsupported("operator has no adjoint".into()))
    }
    fn has_adjoint(&self) -> bool {
        false
    }

    fn apply_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows()];
        self.apply(x, &mut y)?;
        Ok(y)
    }

    fn apply_adjoint_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.ncols()];
        self.apply_adjoint(x, &mut y)?;
        Ok(y)
    }
}

pub(crate) fn check_dims(op: &dyn LinearOperator, x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != op.ncols() || y.len() != op.nrows() {
        return shape_err(format!(
            "operator is {}x{}, got input {} and output {}",
            op.nrows(),
            op.ncols(),
            x.len(),
            y.len()
        ));
    }
    Ok(())
}

/// Product `left * right`.
pub struct Product<'a> {
    pub left: &'a dyn LinearOperator,
    pub right: &'a dyn LinearOperator,
}

impl<'a> Product<'a> {
    pub fn new(left: &'a dyn LinearOperator, right: &'a dyn LinearOperator) -> Result<Self> {
        if left.ncols() != right.nrows() {
            return shape_err(format!(
                "cannot compose {}x{} with {}x{}",
                left.nrows(),
                left.ncols(),
                right.nrows(),
                right.ncols()
            ));
        }
        Ok(Self { left, right })
    }
}

impl LinearOperator for Product<'_> {
    fn nrows(&self) -> usize {
        self.left.nrows()
    }
    fn ncols(&self) -> usize {
        self.right.ncols()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let mut t = vec![0.0; self.right.nrows()];
        self.right.apply(x, &mut t)?;
        self.left.apply(&t, y)
    }
    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let mut t = vec![0.0; self.left.ncols()];
        self.left.apply_adjoint(x, &mut t)?;
        self.right.apply_adjoint(&t, y)
    }
    fn has_adjoint(&self) -> bool {
        self.left.has_adjoint() && self.right.has_adjoint()
    }
}

/// Transpose view of an operator with an adjoint.
pub struct Transposed<'a>(pub &'a dyn LinearOperator);

impl LinearOperator for Transposed<'_> {
    fn nrows(&self) -> usize {
        self.0.ncols()
    }
    fn ncols(&self) -> usize {
        self.0.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.0.apply_adjoint(x, y)
    }
    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.0.apply(x, y)
    }
    fn has_adjoint(&self) -> bool {
        true
    }
}

/// The identity on R^n.
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn nrows(&self) -> usize {
        self.0
    }
    fn ncols(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dims(self, x, y)?;
        y.copy_from_slice(x);
        Ok(())
    }
    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.apply(x, y)
    }
    fn has_adjoint(&self) -> bool {
        true
    }
}

/// Operator backed by closures. Useful for ad hoc matrix-free operators.
pub struct FnOperator<F, G = fn(&[f64], &mut [f64]) -> Result<()>>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
    G: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    pub rows: usize,
    pub cols: usize,
    pub forward: F,
    pub adjoint: Option<G>,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(rows: usize, cols: usize, forward: F) -> Self {
        Self {
            rows,
            cols,
            forward,
            adjoint: None,
        }
    }
}

impl<F, G> FnOperator<F, G>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
    G: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    pub fn with_adjoint(rows: usize, cols: usize, forward: F, adjoint: G) -> Self {
        Self {
            rows,
            cols,
            forward,
            adjoint: Some(adjoint),
        }
    }
}

impl<F, G> LinearOperator for FnOperator<F, G>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()>,
    G: Fn(&[f64], &mut [f64]) -> Result<()>,
{
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dims(self, x, y)?;
        (self.forward)(x, y)
    }
    fn apply_adjoint(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        match &self.adjoint {
            Some(g) => {
                if x.len() != self.rows || y.len() != self.cols {
                    return shape_err("adjoint dimension mismatch");
                }
                g(x, y)
            }
            None => Err(Error::Unsupported("operator has no adjoint".into())),
        }
    }
    fn has_adjoint(&self) -> bool {
        self.adjoint.is_some()
    }
}
