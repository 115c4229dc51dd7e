use num_complex::Complex;

use super::{herm_eig, kron, CMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bipartite density matrix on `C^dimA ⊗ C^dimB`, basis `|i⟩|j⟩ ↦ i·dimB + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    dim_a: usize,
    dim_b: usize,
    mat: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and positivity within the scalar's
    /// tolerances.
    pub fn new(mat: CMatrix<T>, dim_a: usize, dim_b: usize) -> Result<Self> {
        let rho = Self::new_unchecked(mat, dim_a, dim_b)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Shape check only; use for matrices that are states by construction.
    pub fn new_unchecked(mat: CMatrix<T>, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 || !mat.is_square() || mat.rows() != dim_a * dim_b {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dims ({dim_a}, {dim_b})",
                mat.rows(),
                mat.cols()
            )));
        }
        Ok(Self { dim_a, dim_b, mat })
    }

    /// Single-party state (`dimB = 1`).
    pub fn single(mat: CMatrix<T>) -> Result<Self> {
        let n = mat.rows();
        Self::new(mat, n, 1)
    }

    pub fn from_ket(psi: &[Complex<T>], dim_a: usize, dim_b: usize) -> Result<Self> {
        let n = super::norm(psi);
        if n == T::zero() {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v: Vec<_> = psi.iter().map(|z| *z / n).collect();
        Self::new_unchecked(CMatrix::projector(&v), dim_a, dim_b)
    }

    pub fn maximally_mixed(dim_a: usize, dim_b: usize) -> Self {
        let n = dim_a * dim_b;
        let m = CMatrix::identity(n).scale(T::one() / T::from_usize(n).unwrap());
        Self { dim_a, dim_b, mat: m }
    }

    /// Projects a Hermitian matrix onto the state space: symmetrize, clip
    /// negative eigenvalues, renormalize the trace.
    pub fn project(mat: &CMatrix<T>, dim_a: usize, dim_b: usize) -> Result<Self> {
        let eig = herm_eig(mat)?;
        let total: T = eig.eigenvalues.iter().map(|&x| x.max(T::zero())).sum();
        if total <= T::zero() {
            return Err(Error::InvalidState("no positive spectral weight".into()));
        }
        let m = eig.apply(|x| x.max(T::zero()) / total);
        Self::new_unchecked(m, dim_a, dim_b)
    }

    pub fn validate(&self) -> Result<()> {
        let tol = T::state_tol();
        let dev = self.mat.hermitian_deviation();
        if dev > tol {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {dev})")));
        }
        let tr = self.mat.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let lo = herm_eig(&self.mat)?.min();
        if lo < -T::psd_tol() {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo}")));
        }
        Ok(())
    }

    #[inline]
    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    #[inline]
    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.mat
    }

    /// `ρ_A ⊗ ρ_B` for single-party inputs; dims become `(dimA, dimB)` of
    /// the two factors' total dimensions.
    pub fn product(a: &Self, b: &Self) -> Self {
        Self { dim_a: a.dim(), dim_b: b.dim(), mat: kron(&a.mat, &b.mat) }
    }

    /// `U ρ U†`
    pub fn conjugate_by(&self, u: &CMatrix<T>) -> Self {
        let m = &(u * &self.mat) * &u.adjoint();
        Self { dim_a: self.dim_a, dim_b: self.dim_b, mat: m }
    }

    /// `(UA ⊗ UB) ρ (UA ⊗ UB)†`
    pub fn local_unitary(&self, ua: &CMatrix<T>, ub: &CMatrix<T>) -> Self {
        self.conjugate_by(&kron(ua, ub))
    }

    /// Expectation value `tr(ρ O)`.
    pub fn expect(&self, op: &CMatrix<T>) -> Complex<T> {
        self.mat.trace_product(op)
    }

    /// Same operator with A and B exchanged.
    pub fn swapped(&self) -> Self {
        let m = super::permute_subsystems(&self.mat, &[self.dim_a, self.dim_b], &[1, 0]).expect("dims");
        Self { dim_a: self.dim_b, dim_b: self.dim_a, mat: m }
    }

    pub fn cast<U: Real>(&self) -> DensityMatrix<U> {
        DensityMatrix { dim_a: self.dim_a, dim_b: self.dim_b, mat: self.mat.cast() }
    }
}
