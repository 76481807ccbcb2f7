//! Lanczos process for `K = H^{-1} S`, which is skew-adjoint in the `H`
//! inner product. The recurrence is
//! `K v_k = beta_{k+1} v_{k+1} + alpha_k v_k - beta_k v_{k-1}` with
//! `alpha_k = 0` in exact arithmetic. `u_k = H v_k` is carried along so no
//! products with `H` are needed.

use crate::error::{shape_err, Error, Result};
use crate::operator::LinearOperator;
use crate::precond::Preconditioner;
use crate::sparse::{SparseMatrix, SplitOperator};
use crate::vecops::{axpy, dot};

/// Relative size of a new basis vector below which the process stops.
pub const BREAKDOWN_TOL: f64 = 1e-14;

/// Coefficients produced by one Lanczos step.
#[derive(Clone, Copy, Debug)]
pub struct LanczosStep {
    pub alpha: f64,
    /// Coupling to the next vector; zero on breakdown.
    pub beta_next: f64,
    pub breakdown: bool,
}

/// Incremental Lanczos engine shared by the Widlund and Rapoport solvers.
pub struct HLanczos<'a> {
    s: &'a SparseMatrix,
    hinv: &'a dyn LinearOperator,
    v_prev: Vec<f64>,
    u_prev: Vec<f64>,
    v: Vec<f64>,
    u: Vec<f64>,
    beta: f64,
    b_hat_norm: f64,
    steps: usize,
    history: Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)>,
}

impl<'a> HLanczos<'a> {
    /// Starts from `b_hat = H^{-1} b`. Returns `None` when `b = 0`.
    pub fn new(
        s: &'a SparseMatrix,
        hinv: &'a dyn LinearOperator,
        b: &[f64],
        full_reorth: bool,
    ) -> Result<Option<Self>> {
        let n = s.nrows();
        if b.len() != n || hinv.nrows() != n {
            return shape_err("Lanczos dimension mismatch");
        }
        let b_hat = hinv.apply_vec(b)?;
        let nrm2 = dot(&b_hat, b);
        if nrm2 == 0.0 {
            return Ok(None);
        }
        if !(nrm2 > 0.0) {
            return Err(Error::Structure(
                "H-solve is not positive definite: <H^{-1} b, b> <= 0".into(),
            ));
        }
        let beta1 = nrm2.sqrt();
        let v: Vec<f64> = b_hat.iter().map(|x| x / beta1).collect();
        let u: Vec<f64> = b.iter().map(|x| x / beta1).collect();
        let history = full_reorth.then(|| (Vec::new(), Vec::new()));
        Ok(Some(Self {
            s,
            hinv,
            v_prev: vec![0.0; n],
            u_prev: vec![0.0; n],
            v,
            u,
            beta: 0.0,
            b_hat_norm: beta1,
            steps: 0,
            history,
        }))
    }

    pub fn b_hat_norm(&self) -> f64 {
        self.b_hat_norm
    }

    /// Current (not yet expanded) basis vector.
    pub fn current(&self) -> &[f64] {
        &self.v
    }

    /// The vector that was current before the last step.
    pub fn previous(&self) -> &[f64] {
        &self.v_prev
    }

    /// `H` times the current basis vector.
    pub fn current_h(&self) -> &[f64] {
        &self.u
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Expands the basis by one vector.
    pub fn step(&mut self) -> Result<LanczosStep> {
        let n = self.v.len();
        let mut z = vec![0.0; n];
        self.s.spmv_into(&self.v, &mut z)?;
        axpy(self.beta, &self.u_prev, &mut z);
        let mut w = self.hinv.apply_vec(&z)?;
        let alpha = dot(&w, &self.u);
        axpy(-alpha, &self.v, &mut w);
        axpy(-alpha, &self.u, &mut z);
        if let Some((vs, us)) = self.history.as_mut() {
            vs.push(self.v.clone());
            us.push(self.u.clone());
            for _ in 0..2 {
                for (vj, uj) in vs.iter().zip(us.iter()) {
                    let c = dot(&w, uj);
                    axpy(-c, vj, &mut w);
                    axpy(-c, uj, &mut z);
                }
            }
        }
        let nrm2 = dot(&w, &z);
        self.steps += 1;
        let beta_next = if nrm2 > 0.0 { nrm2.sqrt() } else { 0.0 };
        let breakdown = !(beta_next >= BREAKDOWN_TOL * self.b_hat_norm);
        std::mem::swap(&mut self.v_prev, &mut self.v);
        std::mem::swap(&mut self.u_prev, &mut self.u);
        if breakdown {
            self.beta = 0.0;
            self.v.iter_mut().for_each(|x| *x = 0.0);
            self.u.iter_mut().for_each(|x| *x = 0.0);
            return Ok(LanczosStep {
                alpha,
                beta_next: 0.0,
                breakdown: true,
            });
        }
        for i in 0..n {
            self.v[i] = w[i] / beta_next;
            self.u[i] = z[i] / beta_next;
        }
        self.beta = beta_next;
        Ok(LanczosStep {
            alpha,
            beta_next,
            breakdown: false,
        })
    }
}

/// Result of [`h_lanczos`].
#[derive(Clone, Debug)]
pub struct LanczosState {
    /// `H`-orthonormal basis vectors `v_1, ..., v_{k+1}` (or fewer after
    /// breakdown).
    pub v_basis: Vec<Vec<f64>>,
    /// Diagonal of `T` (zero in exact arithmetic).
    pub alphas: Vec<f64>,
    /// Subdiagonal `beta_2, ..., beta_{k+1}`; the superdiagonal is its
    /// negative.
    pub betas: Vec<f64>,
    pub b_hat_norm: f64,
    /// True when the process stopped on an invariant subspace.
    pub breakdown: bool,
}

impl LanczosState {
    /// Dense `(m+1) x m` matrix `T_{m+1,m}` with `m = betas.len()`.
    pub fn t_matrix(&self) -> Vec<Vec<f64>> {
        let m = self.betas.len();
        let mut t = vec![vec![0.0; m]; m + 1];
        for j in 0..m {
            t[j][j] = self.alphas[j];
            t[j + 1][j] = self.betas[j];
            if j + 1 < m {
                t[j][j + 1] = -self.betas[j];
            }
        }
        t
    }
}

/// Runs `k` Lanczos steps on `H^{-1} S` starting from `H^{-1} b`.
pub fn h_lanczos(split: &SplitOperator, h_solver: &Preconditioner, b: &[f64], k: usize) -> Result<LanczosState> {
    if !h_solver.is_symmetric() {
        return Err(Error::Structure("the H-solver must be symmetric".into()));
    }
    if h_solver.dim() != split.dim() {
        return shape_err("H-solver dimension does not match the operator");
    }
    let Some(mut lz) = HLanczos::new(&split.s, h_solver, b, false)? else {
        return Err(Error::InvalidArgument("Lanczos needs a nonzero starting vector".into()));
    };
    let mut state = LanczosState {
        v_basis: vec![lz.current().to_vec()],
        alphas: Vec::new(),
        betas: Vec::new(),
        b_hat_norm: lz.b_hat_norm(),
        breakdown: false,
    };
    for _ in 0..k {
        let st = lz.step()?;
        state.alphas.push(st.alpha);
        if st.breakdown {
            state.breakdown = true;
            break;
        }
        state.betas.push(st.beta_next);
        state.v_basis.push(lz.current().to_vec());
    }
    Ok(state)
}
