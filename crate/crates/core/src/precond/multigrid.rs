//! Geometric multigrid on tensor-product grids: full coarsening, linear
//! interpolation, Galerkin coarse operators and damped Jacobi smoothing.

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::factor::EnvelopeLu;
use crate::sparse::SparseMatrix;

/// Interior node counts per axis of a structured grid, x varying fastest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridHint {
    pub interior: Vec<usize>,
}

impl GridHint {
    pub fn new(interior: Vec<usize>) -> Self {
        Self { interior }
    }

    pub fn dofs(&self) -> usize {
        self.interior.iter().product()
    }
}

#[derive(Clone, Debug)]
pub struct MultigridOptions {
    /// Number of levels including the finest; 0 coarsens as far as possible.
    pub levels: usize,
    pub cycles: usize,
    pub smoother_weight: f64,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
}

impl Default for MultigridOptions {
    fn default() -> Self {
        Self {
            levels: 0,
            cycles: 1,
            smoother_weight: 2.0 / 3.0,
            pre_sweeps: 2,
            post_sweeps: 2,
        }
    }
}

#[derive(Clone, Debug)]
struct Level {
    a: SparseMatrix,
    inv_diag: Vec<f64>,
    /// Prolongation from the next coarser level onto this one.
    p: Option<SparseMatrix>,
    pt: Option<SparseMatrix>,
}

#[derive(Clone, Debug)]
pub struct Multigrid {
    levels: Vec<Level>,
    coarse: EnvelopeLu,
    opts: MultigridOptions,
}

fn prolongation_1d(nc: usize) -> SparseMatrix {
    let nf = 2 * nc + 1;
    let mut t = Vec::with_capacity(3 * nc);
    for i in 0..nc {
        t.push((2 * i, i, 0.5));
        t.push((2 * i + 1, i, 1.0));
        t.push((2 * i + 2, i, 0.5));
    }
    SparseMatrix::from_triplets(nf, nc, &t).expect("valid prolongation")
}

fn prolongation(coarse_dims: &[usize]) -> SparseMatrix {
    // x fastest: P = P_last ⊗ ... ⊗ P_x
    let mut p = SparseMatrix::identity(1);
    for &nc in coarse_dims.iter().rev() {
        p = p.kron(&prolongation_1d(nc));
    }
    p
}

impl Multigrid {
    pub fn new(a: &SparseMatrix, grid: &GridHint, opts: MultigridOptions) -> Result<Self> {
        if !a.is_square() {
            return shape_err("multigrid needs a square matrix");
        }
        if grid.interior.is_empty() || grid.dofs() != a.nrows() {
            return Err(Error::Hierarchy(format!(
                "grid hint {:?} does not match matrix dimension {}",
                grid.interior,
                a.nrows()
            )));
        }
        for &n in &grid.interior {
            if !(n + 1).is_power_of_two() || n < 1 {
                return Err(Error::Hierarchy(format!(
                    "{n} interior nodes per axis is not 2^k - 1"
                )));
            }
        }
        if opts.cycles == 0 {
            return Err(Error::InvalidArgument("multigrid needs at least one cycle".into()));
        }
        if !(opts.smoother_weight > 0.0 && opts.smoother_weight < 2.0) {
            return Err(Error::InvalidArgument(format!(
                "smoother weight {} outside (0, 2)",
                opts.smoother_weight
            )));
        }
        let max_levels = grid
            .interior
            .iter()
            .map(|&n| (n + 1).trailing_zeros() as usize)
            .min()
            .unwrap();
        let nlev = if opts.levels == 0 { max_levels } else { opts.levels };
        if nlev > max_levels {
            return Err(Error::Hierarchy(format!(
                "{nlev} levels requested but the grid supports at most {max_levels}"
            )));
        }
        let mut levels = Vec::with_capacity(nlev);
        let mut dims = grid.interior.clone();
        let mut cur = a.clone();
        for l in 0..nlev {
            let inv_diag = cur
                .diagonal()
                .iter()
                .enumerate()
                .map(|(i, &d)| {
                    if d > 0.0 {
                        Ok(1.0 / d)
                    } else {
                        Err(Error::Hierarchy(format!("non-positive diagonal at row {i} on level {l}")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if l + 1 < nlev {
                let cdims: Vec<usize> = dims.iter().map(|&n| (n - 1) / 2).collect();
                let p = prolongation(&cdims);
                let pt = p.transpose();
                let next = pt.matmul(&cur)?.matmul(&p)?;
                levels.push(Level {
                    a: cur,
                    inv_diag,
                    p: Some(p),
                    pt: Some(pt),
                });
                cur = next;
                dims = cdims;
            } else {
                levels.push(Level {
                    a: cur.clone(),
                    inv_diag,
                    p: None,
                    pt: None,
                });
            }
        }
        let coarse = EnvelopeLu::new(&levels.last().unwrap().a)?;
        Ok(Self { levels, coarse, opts })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn dim(&self) -> usize {
        self.levels[0].a.nrows()
    }

    fn smooth(&self, lev: &Level, b: &[f64], x: &mut [f64], sweeps: usize, r: &mut [f64]) {
        let w = self.opts.smoother_weight;
        for _ in 0..sweeps {
            lev.a.spmv_into(x, r).expect("level dimensions are consistent");
            for i in 0..x.len() {
                x[i] += w * lev.inv_diag[i] * (b[i] - r[i]);
            }
        }
    }

    fn vcycle(&self, l: usize, b: &[f64]) -> Vec<f64> {
        let lev = &self.levels[l];
        if l + 1 == self.levels.len() {
            return self.coarse.solve(b).expect("coarse dimensions are consistent");
        }
        let n = b.len();
        let mut x = vec![0.0; n];
        let mut r = vec![0.0; n];
        self.smooth(lev, b, &mut x, self.opts.pre_sweeps, &mut r);
        lev.a.spmv_into(&x, &mut r).unwrap();
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let rc = lev.pt.as_ref().unwrap().spmv(&r).unwrap();
        let ec = self.vcycle(l + 1, &rc);
        let e = lev.p.as_ref().unwrap().spmv(&ec).unwrap();
        for i in 0..n {
            x[i] += e[i];
        }
        self.smooth(lev, b, &mut x, self.opts.post_sweeps, &mut r);
        x
    }

    /// Runs `cycles` V-cycles from a zero initial guess.
    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        let n = self.dim();
        if b.len() != n || x.len() != n {
            return shape_err("multigrid apply dimension mismatch");
        }
        x.iter_mut().for_each(|v| *v = 0.0);
        let a = &self.levels[0].a;
        let mut r = vec![0.0; n];
        for c in 0..self.opts.cycles {
            if c == 0 {
                r.copy_from_slice(b);
            } else {
                a.spmv_into(x, &mut r)?;
                for i in 0..n {
                    r[i] = b[i] - r[i];
                }
            }
            let e = self.vcycle(0, &r);
            for i in 0..n {
                x[i] += e[i];
            }
        }
        Ok(())
    }
}
