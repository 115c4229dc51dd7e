//! Hermitian eigensolver: Householder reduction to a real symmetric
//! tridiagonal matrix followed by implicit QL iterations.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::{norm, CMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `H = Q Λ Q†` with eigenvalues ascending and orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigDecomposition<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: CMatrix<T>,
}

impl<T: Real> EigDecomposition<T> {
    pub fn min(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> T {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        self.eigenvectors.column(k)
    }

    /// `Q f(Λ) Q†`
    pub fn apply(&self, f: impl Fn(T) -> T) -> CMatrix<T> {
        let n = self.eigenvalues.len();
        let q = &self.eigenvectors;
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w == T::zero() {
                continue;
            }
            for i in 0..n {
                let qi = q[(i, k)] * w;
                if qi.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += qi * q[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> CMatrix<T> {
        self.apply(|x| x)
    }
}

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized as
/// `(H + H†)/2` before reduction.
pub fn herm_eig<T: Real>(h: &CMatrix<T>) -> Result<EigDecomposition<T>> {
    if !h.is_square() {
        return Err(Error::NotSquare { rows: h.rows(), cols: h.cols() });
    }
    let n = h.rows();
    let mut a = h.hermitian_part();
    let two = T::lit(2.0);

    // Householder reflectors, one per eliminated column (None when the
    // column was already reduced).
    let mut reflectors: Vec<Option<Vec<Complex<T>>>> = Vec::with_capacity(n.saturating_sub(2));
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex<T>> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let xnorm = norm(&x);
        let tail = x[1..].iter().map(|z| z.norm_sqr()).sum::<T>();
        if xnorm == T::zero() || tail == T::zero() {
            reflectors.push(None);
            continue;
        }
        let x0n = x[0].norm();
        let phase = if x0n > T::zero() { x[0] / x0n } else { Complex::one() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vn = norm(&v);
        for z in v.iter_mut() {
            *z /= vn;
        }
        let m = n - k - 1;
        // p = B v on the trailing block
        let mut p = vec![Complex::zero(); m];
        for i in 0..m {
            let mut acc = Complex::zero();
            for j in 0..m {
                acc += a[(k + 1 + i, k + 1 + j)] * v[j];
            }
            p[i] = acc;
        }
        let beta: T = v.iter().zip(&p).map(|(vi, pi)| (vi.conj() * *pi).re).sum();
        let w: Vec<Complex<T>> = p.iter().zip(&v).map(|(pi, vi)| *pi - *vi * beta).collect();
        for i in 0..m {
            for j in 0..m {
                let upd = (v[i] * w[j].conj() + w[i] * v[j].conj()) * two;
                a[(k + 1 + i, k + 1 + j)] -= upd;
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in k + 2..n {
            a[(i, k)] = Complex::zero();
            a[(k, i)] = Complex::zero();
        }
        reflectors.push(Some(v));
    }

    let mut d: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut e = vec![T::zero(); n];
    let mut phases = vec![Complex::<T>::one(); n];
    for i in 0..n.saturating_sub(1) {
        let sub = a[(i + 1, i)];
        let m = sub.norm();
        e[i] = m;
        phases[i + 1] = if m > T::zero() { phases[i] * (sub / m) } else { phases[i] };
    }

    // z_t[i] holds column i of the tridiagonal eigenvector matrix.
    let mut z_t = vec![T::zero(); n * n];
    for i in 0..n {
        z_t[i * n + i] = T::one();
    }
    tql2(&mut d, &mut e, &mut z_t, n);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues: Vec<T> = order.iter().map(|&i| d[i]).collect();

    let mut q = CMatrix::from_fn(n, n, |i, col| phases[i] * z_t[order[col] * n + i]);
    for (k, refl) in reflectors.iter().enumerate().rev() {
        let Some(v) = refl else { continue };
        let off = k + 1;
        for col in 0..n {
            let mut s = Complex::zero();
            for (i, vi) in v.iter().enumerate() {
                s += vi.conj() * q[(off + i, col)];
            }
            if s.is_zero() {
                continue;
            }
            s *= two;
            for (i, vi) in v.iter().enumerate() {
                q[(off + i, col)] -= *vi * s;
            }
        }
    }
    Ok(EigDecomposition { eigenvalues, eigenvectors: q })
}

/// Implicit QL on a symmetric tridiagonal matrix (diagonal `d`, coupling
/// `e[i]` between `i` and `i+1`). Accumulates rotations into the rows of
/// `z_t`, which store eigenvector columns.
fn tql2<T: Real>(d: &mut [T], e: &mut [T], z_t: &mut [T], n: usize) {
    if n == 0 {
        return;
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let two = T::lit(2.0);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = z_t.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..(i + 1) * n];
                    let zi1 = &mut hi[..n];
                    for k in 0..n {
                        let hk = zi1[k];
                        zi1[k] = s * zi[k] + c * hk;
                        zi[k] = c * zi[k] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 || iter > 60 * n {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
}

/// Principal square root of a positive semidefinite matrix; eigenvalues
/// below zero are clipped.
pub fn psd_sqrt<T: Real>(h: &CMatrix<T>) -> Result<CMatrix<T>> {
    let eig = herm_eig(h)?;
    Ok(eig.apply(|x| x.max(T::zero()).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{c, pauli};
    use crate::random::{random_hermitian, seeded};

    fn check(h: &CMatrix<f64>) {
        let eig = herm_eig(h).unwrap();
        let n = h.rows();
        let q = &eig.eigenvectors;
        let qtq = &q.adjoint() * q;
        assert!(qtq.max_abs_diff(&CMatrix::identity(n)) < 1e-10, "orthonormality");
        let rec = eig.reconstruct();
        let scale = h.frobenius_norm().max(1.0);
        assert!((&rec - h).frobenius_norm() <= 1e-9 * scale, "reconstruction");
        for w in eig.eigenvalues.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let tr: f64 = eig.eigenvalues.iter().sum();
        assert!((tr - h.trace().re).abs() <= 1e-9 * n as f64);
    }

    #[test]
    fn small_cases() {
        let eig = herm_eig(&CMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0, 1.0]);
        let eig = herm_eig(&pauli::<f64>(2)).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-15 && (eig.eigenvalues[1] - 1.0).abs() < 1e-15);
        let eig = herm_eig(&pauli::<f64>(1)).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        check(&CMatrix::from_fn(1, 1, |_, _| c(2.5, 0.0)));
        check(&CMatrix::zeros(4, 4));
    }

    #[test]
    fn random_hermitian_matrices() {
        let mut rng = seeded(11);
        for n in [2, 3, 5, 9, 16, 27, 40] {
            check(&random_hermitian(n, &mut rng));
        }
    }

    #[test]
    fn degenerate_and_structured() {
        let mut m = CMatrix::<f64>::zeros(6, 6);
        for i in 0..6 {
            m[(i, (i + 1) % 6)] = c(0.0, 1.0);
            m[((i + 1) % 6, i)] = c(0.0, -1.0);
        }
        check(&m);
        let p = CMatrix::<f64>::from_fn(5, 5, |_, _| c(1.0, 0.0));
        check(&p);
    }

    #[test]
    fn rejects_rectangular() {
        assert!(herm_eig(&CMatrix::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let h = CMatrix::<f32>::from_fn(4, 4, |i, j| {
            let x = (i + 2 * j) as f32 * 0.1;
            if i == j { Complex::new(x, 0.0) } else if i < j { Complex::new(x, 0.3) } else { Complex::new((j + 2 * i) as f32 * 0.1, -0.3) }
        });
        let eig = herm_eig(&h).unwrap();
        assert!((&eig.reconstruct() - &h).frobenius_norm() < 1e-5);
    }
}
