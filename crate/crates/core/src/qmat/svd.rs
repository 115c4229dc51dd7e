//! One-sided (Hestenes) Jacobi SVD for complex matrices.

use num_complex::Complex;

use super::{inner, norm, CMatrix};
use crate::scalar::Real;

/// `M = U · diag(s) · Vdag` with square unitary `U` (rows×rows) and `Vdag`
/// (cols×cols), singular values descending.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub u: CMatrix<T>,
    pub s: Vec<T>,
    pub vdag: CMatrix<T>,
}

impl<T: Real> Svd<T> {
    /// Rectangular `Σ` with the singular values on its diagonal.
    pub fn sigma(&self) -> CMatrix<T> {
        let mut m = CMatrix::zeros(self.u.rows(), self.vdag.rows());
        for (i, &x) in self.s.iter().enumerate() {
            m[(i, i)] = Complex::new(x, T::zero());
        }
        m
    }

    pub fn recompose(&self) -> CMatrix<T> {
        &(&self.u * &self.sigma()) * &self.vdag
    }
}

pub fn svd<T: Real>(m: &CMatrix<T>) -> Svd<T> {
    if m.rows() < m.cols() {
        let t = svd_tall(&m.adjoint());
        return Svd { u: t.vdag.adjoint(), s: t.s, vdag: t.u.adjoint() };
    }
    svd_tall(m)
}

fn svd_tall<T: Real>(m: &CMatrix<T>) -> Svd<T> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut w: Vec<Vec<Complex<T>>> = (0..cols).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<Complex<T>>> = (0..cols).map(|j| super::basis(cols, j)).collect();
    let eps = T::epsilon();
    let two = T::lit(2.0);

    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: T = w[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: T = w[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = inner(&w[p], &w[q]);
                let g = gamma.norm();
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (two * g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for cols_vec in [&mut w, &mut v] {
                    let (lo, hi) = cols_vec.split_at_mut(q);
                    let (cp, cq) = (&mut lo[p], &mut hi[0]);
                    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
                        let bq = *b * phase;
                        let na = *a * c - bq * s;
                        let nb = *a * s + bq * c;
                        *a = na;
                        *b = nb;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<T> = w.iter().map(|c| norm(c)).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let s: Vec<T> = order.iter().map(|&i| norms[i]).collect();
    let smax = s.first().copied().unwrap_or(T::zero());
    let cutoff = smax * eps * T::from_usize(rows.max(cols)).unwrap();

    let mut ucols: Vec<Vec<Complex<T>>> = Vec::with_capacity(rows);
    for (k, &i) in order.iter().enumerate() {
        if s[k] > cutoff && s[k] > T::zero() {
            ucols.push(w[i].iter().map(|z| *z / s[k]).collect());
        } else {
            break;
        }
    }
    complete_basis(&mut ucols, rows);

    let u = CMatrix::from_fn(rows, rows, |i, j| ucols[j][i]);
    let vmat = CMatrix::from_fn(cols, cols, |i, j| v[order[j]][i]);
    Svd { u, s, vdag: vmat.adjoint() }
}

/// Extends orthonormal columns to a full orthonormal basis of `C^dim`.
pub(crate) fn complete_basis<T: Real>(cols: &mut Vec<Vec<Complex<T>>>, dim: usize) {
    let mut candidate = 0;
    while cols.len() < dim && candidate < dim {
        let mut x = super::basis::<T>(dim, candidate);
        candidate += 1;
        for _ in 0..2 {
            for c in cols.iter() {
                let proj = inner(c, &x);
                for (xi, ci) in x.iter_mut().zip(c) {
                    *xi -= *ci * proj;
                }
            }
        }
        let n = norm(&x);
        if n > T::lit(1e-3) {
            cols.push(x.iter().map(|z| *z / n).collect());
        }
    }
}
