//! Conic solver for the LPs and SDPs behind the extension, steering and
//! nonlocality certificates.
//!
//! Programs are stated in primal standard form
//!
//! ```text
//! minimize cᵀx + offset   subject to   A x = b,   x ∈ K,
//! ```
//!
//! where `K` is a product of free, nonnegative and Hermitian-PSD blocks.
//! [`solve`] runs operator splitting on the homogeneous self-dual
//! embedding; [`lp_vertex_enumeration_check`] is an exact reference for
//! tiny LPs.

mod admm;
pub mod enumerate;
mod herm;
pub mod io;
mod presolve;
mod sparse;

use serde::{Deserialize, Serialize};

pub use admm::solve;
pub use enumerate::{lp_vertex_enumeration, lp_vertex_enumeration_check, LpField};
pub use herm::{devectorize, herm_dim, offdiag_coords, vectorize, BlockRef, EqualityRef, HermitianMap, ProgramBuilder};
pub use sparse::CsrMatrix;

use crate::error::{Error, Result};
use crate::qmat::CMatrix;

/// One block of the variable vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cone {
    Free(usize),
    NonNeg(usize),
    /// Hermitian `n×n` PSD matrix, stored as `n²` reals.
    Psd(usize),
}

impl Cone {
    /// Number of real coordinates.
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Free(n) | Cone::NonNeg(n) => n,
            Cone::Psd(n) => n * n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConicProgram {
    pub c: Vec<f64>,
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    pub cones: Vec<Cone>,
    /// Constant added to both objectives.
    pub offset: f64,
}

impl ConicProgram {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn block_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.cones.len());
        let mut acc = 0;
        for c in &self.cones {
            off.push(acc);
            acc += c.dim();
        }
        off
    }

    pub fn validate(&self) -> Result<()> {
        let n: usize = self.cones.iter().map(Cone::dim).sum();
        if n != self.c.len() || self.a.cols() != n {
            return Err(Error::Program(format!(
                "blocks span {n} coordinates, c has {}, A has {} columns",
                self.c.len(),
                self.a.cols()
            )));
        }
        if self.a.rows() != self.b.len() {
            return Err(Error::Program(format!("A has {} rows, b has {}", self.a.rows(), self.b.len())));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.c) || !finite(&self.b) || self.a.has_non_finite() || !self.offset.is_finite() {
            return Err(Error::Program("NaN or infinite entry in program data".into()));
        }
        Ok(())
    }

    /// Copy with `b` and `c` multiplied by the given factors.
    pub fn scaled(&self, sb: f64, sc: f64) -> Self {
        let mut p = self.clone();
        p.b.iter_mut().for_each(|x| *x *= sb);
        p.c.iter_mut().for_each(|x| *x *= sc);
        p.offset *= sb * sc;
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::Optimal => "OPTIMAL",
            Status::Infeasible => "INFEASIBLE",
            Status::Unbounded => "UNBOUNDED",
            Status::MaxIter => "MAX_ITER",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Bound on relative residuals and gap for `OPTIMAL`.
    pub tol: f64,
    pub max_iter: usize,
    /// Recorded for provenance; the iteration itself is deterministic.
    pub seed: u64,
    /// Over-relaxation parameter in `(0, 2)`.
    pub alpha: f64,
    /// Anderson acceleration memory (0 disables it).
    pub anderson: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_iter: 200_000, seed: 0, alpha: 1.5, anderson: 8 }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicSolution {
    pub x: Vec<f64>,
    /// Multipliers of `A x = b`; the dual slack is `s = c − Aᵀy`.
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    /// `|primal − dual| / (1 + |primal|)`.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub status: Status,
    pub iterations: usize,
}

impl ConicSolution {
    pub fn block<'a>(&'a self, p: &ConicProgram, index: usize) -> &'a [f64] {
        let off = p.block_offsets()[index];
        &self.x[off..off + p.cones[index].dim()]
    }

    /// Value of a PSD block as a Hermitian matrix.
    pub fn psd_block(&self, p: &ConicProgram, index: usize) -> CMatrix<f64> {
        match p.cones[index] {
            Cone::Psd(n) => devectorize(self.block(p, index), n),
            other => panic!("block {index} is {other:?}, not PSD"),
        }
    }

    /// Dual matrix of a Hermitian equality added through [`ProgramBuilder`].
    pub fn dual_hermitian(&self, eq: EqualityRef) -> CMatrix<f64> {
        devectorize(&self.y[eq.first_row..eq.first_row + eq.dim * eq.dim], eq.dim)
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}
