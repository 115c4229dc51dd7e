use super::{herm_eig, psd_sqrt, CMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Von Neumann entropy in bits. Eigenvalues below `1e-12` contribute zero.
pub fn von_neumann_entropy<T: Real>(rho: &CMatrix<T>) -> Result<T> {
    let eig = herm_eig(rho)?;
    let floor = T::lit(1e-12);
    let mut s = T::zero();
    for &lam in &eig.eigenvalues {
        if lam < -T::lit(1e-8) {
            return Err(Error::NegativeEigenvalue(lam.to_f64_lossy()));
        }
        if lam > floor {
            s -= lam * lam.log2();
        }
    }
    Ok(s.max(T::zero()))
}

/// Uhlmann-Jozsa fidelity `(tr √(√ρ σ √ρ))²`.
pub fn uhlmann_fidelity<T: Real>(rho: &CMatrix<T>, sigma: &CMatrix<T>) -> Result<T> {
    if rho.rows() != sigma.rows() || rho.cols() != sigma.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            rho.rows(),
            rho.cols(),
            sigma.rows(),
            sigma.cols()
        )));
    }
    let sr = psd_sqrt(rho)?;
    let inner = &(&sr * sigma) * &sr;
    let eig = herm_eig(&inner)?;
    let t: T = eig.eigenvalues.iter().map(|&x| x.max(T::zero()).sqrt()).sum();
    Ok((t * t).min(T::one()).max(T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{basis, kron, DensityMatrix};
    use crate::random::{random_state, seeded};

    #[test]
    fn entropy_values() {
        let pure = CMatrix::<f64>::projector(&basis(3, 1));
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-12);
        let mixed = CMatrix::<f64>::identity(4).scale(0.25);
        assert!((von_neumann_entropy(&mixed).unwrap() - 2.0).abs() < 1e-12);
        let bad = CMatrix::<f64>::diag_real(&[1.1, -0.1]);
        assert!(von_neumann_entropy(&bad).is_err());
    }

    #[test]
    fn entropy_is_additive() {
        let mut rng = seeded(3);
        for _ in 0..5 {
            let a = random_state::<f64, _>(2, 1, &mut rng);
            let b = random_state(3, 1, &mut rng);
            let ab = DensityMatrix::product(&a, &b);
            let lhs = von_neumann_entropy(ab.matrix()).unwrap();
            let rhs = von_neumann_entropy(a.matrix()).unwrap() + von_neumann_entropy(b.matrix()).unwrap();
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn fidelity_values() {
        let p0 = CMatrix::<f64>::projector(&basis(2, 0));
        let p1 = CMatrix::<f64>::projector(&basis(2, 1));
        let mix = CMatrix::<f64>::identity(2).scale(0.5);
        assert!((uhlmann_fidelity(&p0, &p0).unwrap() - 1.0).abs() < 1e-12);
        assert!(uhlmann_fidelity(&p0, &p1).unwrap().abs() < 1e-12);
        assert!((uhlmann_fidelity(&p0, &mix).unwrap() - 0.5).abs() < 1e-12);
        assert!(uhlmann_fidelity(&p0, &kron(&p0, &p0)).is_err());
    }

    #[test]
    fn fidelity_symmetric() {
        let mut rng = seeded(8);
        for _ in 0..10 {
            let r = random_state::<f64, _>(3, 2, &mut rng);
            let s = random_state(3, 2, &mut rng);
            let f1 = uhlmann_fidelity(r.matrix(), s.matrix()).unwrap();
            let f2 = uhlmann_fidelity(s.matrix(), r.matrix()).unwrap();
            assert!((f1 - f2).abs() < 1e-10);
            assert!((uhlmann_fidelity(r.matrix(), r.matrix()).unwrap() - 1.0).abs() < 1e-9);
        }
    }
}
