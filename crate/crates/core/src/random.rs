//! Seeded random sampling: Haar unitaries, Ginibre states, Hermitian noise.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::qmat::{inner, norm, CMatrix, DensityMatrix, Ket};
use crate::scalar::Real;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-restart seed, `seed XOR index`.
#[inline]
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    seed ^ index
}

fn gauss<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let x: f64 = rng.sample(StandardNormal);
    T::lit(x)
}

pub fn complex_gauss<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    Complex::new(gauss(rng), gauss(rng))
}

pub fn random_complex_matrix<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix<T> {
    CMatrix::from_fn(rows, cols, |_, _| complex_gauss(rng))
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the phases of
/// `R`'s diagonal fixed to be positive (Gram-Schmidt does this directly).
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix<T> {
    let g: CMatrix<T> = random_complex_matrix(d, d, rng);
    let mut q: Vec<Ket<T>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        for _ in 0..2 {
            for u in &q {
                let p = inner(u, &v);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= *ui * p;
                }
            }
        }
        let n = norm(&v);
        q.push(v.into_iter().map(|z| z / n).collect());
    }
    CMatrix::from_fn(d, d, |i, j| q[j][i])
}

/// Gaussian Hermitian matrix (GUE-like, unnormalized).
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix<T> {
    random_complex_matrix::<T, R>(n, n, rng).hermitian_part()
}

pub fn random_ket<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Ket<T> {
    let v: Ket<T> = (0..n).map(|_| complex_gauss(rng)).collect();
    let nv = norm(&v);
    v.into_iter().map(|z| z / nv).collect()
}

/// Ginibre-distributed mixed state `G G† / tr(G G†)`.
pub fn random_state<T: Real, R: Rng + ?Sized>(dim_a: usize, dim_b: usize, rng: &mut R) -> DensityMatrix<T> {
    let n = dim_a * dim_b;
    let g: CMatrix<T> = random_complex_matrix(n, n, rng);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new_unchecked(m.scale(T::one() / tr), dim_a, dim_b).expect("dims")
}

/// Random separable state: a finite mixture of random product states.
pub fn random_separable_state<T: Real, R: Rng + ?Sized>(dim_a: usize, dim_b: usize, terms: usize, rng: &mut R) -> DensityMatrix<T> {
    let n = dim_a * dim_b;
    let mut acc = CMatrix::zeros(n, n);
    let mut total = T::zero();
    for _ in 0..terms {
        let w: T = T::lit(rng.random::<f64>());
        let a: Ket<T> = random_ket(dim_a, rng);
        let b: Ket<T> = random_ket(dim_b, rng);
        let ab = crate::qmat::kron_ket(&a, &b);
        acc += &CMatrix::projector(&ab).scale(w);
        total += w;
    }
    DensityMatrix::new_unchecked(acc.scale(T::one() / total), dim_a, dim_b).expect("dims")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_is_unitary_and_reproducible() {
        let u: CMatrix<f64> = haar_unitary(4, &mut seeded(1));
        assert!(u.unitary_deviation() < 1e-12);
        let v: CMatrix<f64> = haar_unitary(4, &mut seeded(1));
        assert_eq!(u, v);
    }

    #[test]
    fn random_states_are_valid() {
        let mut rng = seeded(2);
        random_state::<f64, _>(3, 3, &mut rng).validate().unwrap();
        random_separable_state::<f64, _>(2, 3, 5, &mut rng).validate().unwrap();
    }
}
