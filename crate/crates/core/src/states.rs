//! Werner states and their two-qubit building blocks.
//!
//! `W⁽ᵈ⁾(v) = v·Π₊/n₊ + (1−v)·Π₋/n₋` with `Π± = (I ± V)/2` and
//! `n± = d(d±1)/2`. Three constructors are provided: the projector form,
//! the uniform mixture of noisy singlet blocks (valid for
//! `v ≤ (d+1)/(2d)`), and a block mixture valid on the whole of `[0, 1]`.

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{cr, uhlmann_fidelity, CMatrix, DensityMatrix, Ket};
use crate::random::{random_hermitian, seeded};
use crate::scalar::Real;

/// Local dimension and symmetric weight of a Werner state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WernerParams {
    pub d: usize,
    pub v: f64,
}

impl WernerParams {
    pub fn new(d: usize, v: f64) -> Result<Self> {
        check_dim(d)?;
        check_weight(v)?;
        Ok(Self { d, v })
    }

    /// Singlet-block weight `q = 1 − 2d·v/(d+1)`.
    pub fn q(&self) -> f64 {
        let d = self.d as f64;
        1.0 - 2.0 * d / (d + 1.0) * self.v
    }

    /// Diagonal-block share `p = 1/d`.
    pub fn p(&self) -> f64 {
        1.0 / self.d as f64
    }

    /// Largest `v` the singlet-mixture route can represent, `(d+1)/(2d)`.
    pub fn q_nonnegative_limit(d: usize) -> f64 {
        (d as f64 + 1.0) / (2.0 * d as f64)
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("local dimension d = {d} < 2")));
    }
    Ok(())
}

fn check_weight(v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) || v.is_nan() {
        return Err(Error::InvalidParameter(format!("symmetric weight v = {v} outside [0, 1]")));
    }
    Ok(())
}

pub fn n_plus(d: usize) -> usize {
    d * (d + 1) / 2
}

pub fn n_minus(d: usize) -> usize {
    d * (d - 1) / 2
}

/// Swap operator `V = Σ |i⟩⟨j| ⊗ |j⟩⟨i|`.
pub fn swap_operator<T: Real>(d: usize) -> Result<CMatrix<T>> {
    check_dim(d)?;
    let n = d * d;
    let mut v = CMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            v[(j * d + i, i * d + j)] = Complex::one();
        }
    }
    Ok(v)
}

/// `Π₊` (`sign = +1`) or `Π₋` (`sign = −1`).
pub fn symmetric_projector<T: Real>(d: usize, antisymmetric: bool) -> Result<CMatrix<T>> {
    let v = swap_operator::<T>(d)?;
    let id = CMatrix::identity(d * d);
    let half = T::lit(0.5);
    Ok(if antisymmetric { (&id - &v).scale(half) } else { (&id + &v).scale(half) })
}

/// Werner state from its projector form.
pub fn werner<T: Real>(d: usize, v: f64) -> Result<DensityMatrix<T>> {
    check_dim(d)?;
    check_weight(v)?;
    let ps = symmetric_projector::<T>(d, false)?;
    let pa = symmetric_projector::<T>(d, true)?;
    let ws = T::lit(v / n_plus(d) as f64);
    let wa = T::lit((1.0 - v) / n_minus(d) as f64);
    DensityMatrix::new_unchecked(&ps.scale(ws) + &pa.scale(wa), d, d)
}

/// Two-qubit block states living on `span{|ii⟩, |ij⟩, |ji⟩, |jj⟩}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockKind {
    /// `|Ψ⁻_ij⟩⟨Ψ⁻_ij|`
    Singlet,
    /// `(|ii⟩⟨ii| + |jj⟩⟨jj|)/2`
    Diag,
    /// `(|ij⟩⟨ij| + |ji⟩⟨ji|)/2`
    Cross,
    /// `|Ψ⁺_ij⟩⟨Ψ⁺_ij|`
    Triplet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitBlock {
    pub i: usize,
    pub j: usize,
    pub kind: BlockKind,
}

impl QubitBlock {
    pub fn new(i: usize, j: usize, kind: BlockKind) -> Result<Self> {
        if i >= j {
            return Err(Error::InvalidParameter(format!("block indices must satisfy i < j, got ({i}, {j})")));
        }
        Ok(Self { i, j, kind })
    }

    /// Embeds the block as a `d²×d²` density matrix.
    pub fn matrix<T: Real>(&self, d: usize) -> Result<CMatrix<T>> {
        if self.j >= d {
            return Err(Error::InvalidParameter(format!("block ({}, {}) outside dimension {d}", self.i, self.j)));
        }
        let (i, j) = (self.i, self.j);
        let idx = |a: usize, b: usize| a * d + b;
        let half = cr(T::lit(0.5));
        let mut m = CMatrix::zeros(d * d, d * d);
        match self.kind {
            BlockKind::Diag => {
                m[(idx(i, i), idx(i, i))] = half;
                m[(idx(j, j), idx(j, j))] = half;
            }
            BlockKind::Cross => {
                m[(idx(i, j), idx(i, j))] = half;
                m[(idx(j, i), idx(j, i))] = half;
            }
            BlockKind::Singlet | BlockKind::Triplet => {
                let s = if self.kind == BlockKind::Singlet { -half } else { half };
                m[(idx(i, j), idx(i, j))] = half;
                m[(idx(j, i), idx(j, i))] = half;
                m[(idx(i, j), idx(j, i))] = s;
                m[(idx(j, i), idx(i, j))] = s;
            }
        }
        Ok(m)
    }
}

fn block_mixture<T: Real>(d: usize, weights: &[(BlockKind, f64)]) -> Result<DensityMatrix<T>> {
    let n = d * d;
    let mut acc = CMatrix::zeros(n, n);
    let norm = 1.0 / n_minus(d) as f64;
    for i in 0..d {
        for j in i + 1..d {
            for &(kind, w) in weights {
                if w == 0.0 {
                    continue;
                }
                let b = QubitBlock::new(i, j, kind)?.matrix::<T>(d)?;
                acc += &b.scale(T::lit(w * norm));
            }
        }
    }
    DensityMatrix::new_unchecked(acc, d, d)
}

/// Werner state as a uniform mixture of noisy singlet blocks
/// `q·ϱ₀ + (1−q)[p·ϱ₁ + (1−p)·ϱ₂]`, `p = 1/d`. Requires `q ≥ 0`.
pub fn werner_from_qubit_mixture<T: Real>(d: usize, v: f64) -> Result<DensityMatrix<T>> {
    let params = WernerParams::new(d, v)?;
    let limit = WernerParams::q_nonnegative_limit(d);
    if v > limit {
        return Err(Error::UseAllVRoute { v, limit });
    }
    let (p, q) = (params.p(), params.q().max(0.0));
    block_mixture(
        d,
        &[
            (BlockKind::Singlet, q),
            (BlockKind::Diag, (1.0 - q) * p),
            (BlockKind::Cross, (1.0 - q) * (1.0 - p)),
        ],
    )
}

/// Block-mixture parameters `(p, q)` of the all-`v` decomposition.
pub fn all_v_params(d: usize, v: f64) -> (f64, f64) {
    let df = d as f64;
    let p = (df + 1.0) * (1.0 - v) / (df + 1.0 - 2.0 * v);
    let q = 2.0 * v / (df + 1.0);
    (p, q)
}

/// Werner state as a uniform mixture of `q·ξ₂ + (1−q)[p·ξ₀ + (1−p)·ξ₁]`
/// blocks, valid for every `v ∈ [0, 1]`.
pub fn werner_all_v<T: Real>(d: usize, v: f64) -> Result<DensityMatrix<T>> {
    WernerParams::new(d, v)?;
    let (p, q) = all_v_params(d, v);
    block_mixture(
        d,
        &[
            (BlockKind::Diag, q),
            (BlockKind::Singlet, (1.0 - q) * p),
            (BlockKind::Triplet, (1.0 - q) * (1.0 - p)),
        ],
    )
}

/// Maximally entangled vector `(I ⊗ U)|Φ⁺_d⟩`.
pub fn mes<T: Real>(d: usize, u: &CMatrix<T>) -> Result<Ket<T>> {
    if u.rows() != d || u.cols() != d {
        return Err(Error::DimensionMismatch(format!("{}x{} unitary for d = {d}", u.rows(), u.cols())));
    }
    let dev = u.unitary_deviation();
    if dev > T::state_tol() {
        return Err(Error::NotUnitary(dev.to_f64_lossy()));
    }
    let amp = T::one() / T::from_usize(d).unwrap().sqrt();
    let mut psi = vec![Complex::zero(); d * d];
    for i in 0..d {
        for k in 0..d {
            psi[i * d + k] = u[(k, i)] * amp;
        }
    }
    Ok(psi)
}

/// Two-knob noise model used to emulate imperfectly prepared states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Weight of global white noise.
    pub depol: f64,
    /// Frobenius norm of the random traceless Hermitian perturbation.
    pub coherent_eps: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self { depol: 0.0, coherent_eps: 0.0, seed: 0 }
    }
}

/// Depolarize, add a seeded random traceless Hermitian perturbation,
/// re-project onto the state space.
pub fn noisy_surrogate<T: Real>(ideal: &DensityMatrix<T>, spec: &NoiseSpec) -> Result<DensityMatrix<T>> {
    if !(0.0..=1.0).contains(&spec.depol) || spec.coherent_eps < 0.0 || !spec.coherent_eps.is_finite() {
        return Err(Error::InvalidParameter(format!("noise spec {spec:?}")));
    }
    if spec.depol == 0.0 && spec.coherent_eps == 0.0 {
        return Ok(ideal.clone());
    }
    let n = ideal.dim();
    let id = CMatrix::<T>::identity(n);
    let mut m = ideal.matrix().scale(T::lit(1.0 - spec.depol));
    m += &id.scale(T::lit(spec.depol / n as f64));
    if spec.coherent_eps > 0.0 {
        let mut rng = seeded(spec.seed);
        let mut h: CMatrix<T> = random_hermitian(n, &mut rng);
        let shift = h.trace().re / T::from_usize(n).unwrap();
        for i in 0..n {
            h[(i, i)] -= cr(shift);
        }
        let hn = h.frobenius_norm();
        if hn > T::zero() {
            m += &h.scale(T::lit(spec.coherent_eps) / hn);
        }
    } else {
        return DensityMatrix::new_unchecked(m, ideal.dim_a(), ideal.dim_b());
    }
    DensityMatrix::project(&m, ideal.dim_a(), ideal.dim_b())
}

/// Depolarizing weight that brings the surrogate's fidelity to `target`
/// for fixed `coherent_eps` and seed (bisection on `depol`).
pub fn depol_for_fidelity(ideal: &DensityMatrix<f64>, target: f64, coherent_eps: f64, seed: u64) -> Result<NoiseSpec> {
    let fid = |depol: f64| -> Result<f64> {
        let s = noisy_surrogate(ideal, &NoiseSpec { depol, coherent_eps, seed })?;
        uhlmann_fidelity(s.matrix(), ideal.matrix())
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if fid(lo)? < target {
        return Ok(NoiseSpec { depol: 0.0, coherent_eps, seed });
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if fid(mid)? >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(NoiseSpec { depol: lo, coherent_eps, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{basis, kron, kron_ket, partial_trace, partial_transpose, phi_plus, Side};
    use crate::random::haar_unitary;

    type M = CMatrix<f64>;

    #[test]
    fn swap_operator_properties() {
        let v = swap_operator::<f64>(2).unwrap();
        let k01 = kron_ket(&basis::<f64>(2, 0), &basis(2, 1));
        let k10 = kron_ket(&basis::<f64>(2, 1), &basis(2, 0));
        assert_eq!(v.matvec(&k01), k10);
        let v3 = swap_operator::<f64>(3).unwrap();
        assert_eq!(v3.trace().re, 3.0);
        assert!((&v3 * &v3).max_abs_diff(&M::identity(9)) == 0.0);
        assert!(v3.is_hermitian(0.0));
        let vt = v3.partial_transpose_bi(3, 3, Side::A).unwrap();
        let expect = M::projector(&phi_plus(3)).scale(3.0);
        assert!(vt.max_abs_diff(&expect) < 1e-15);
        assert!(swap_operator::<f64>(1).is_err());
    }

    #[test]
    fn werner_matrix_elements() {
        let w = werner::<f64>(3, 0.3).unwrap();
        assert!((w.matrix()[(0, 0)].re - 0.3 / 6.0).abs() < 1e-15);
        let w0 = werner::<f64>(3, 0.0).unwrap();
        assert!((w0.matrix()[(1, 3)].re + 1.0 / 6.0).abs() < 1e-15);
        let wm = werner::<f64>(3, 2.0 / 3.0).unwrap();
        assert!(wm.matrix().max_abs_diff(&M::identity(9).scale(1.0 / 9.0)) < 1e-15);
        assert!(werner::<f64>(3, 1.2).is_err());
        assert!(werner::<f64>(3, -0.1).is_err());
        w.validate().unwrap();
    }

    #[test]
    fn werner_marginals_are_maximally_mixed() {
        for v in [0.0, 0.25, 0.7, 1.0] {
            let w = werner::<f64>(3, v).unwrap();
            let m = partial_trace(&w, Side::A);
            assert!(m.max_abs_diff(&M::identity(3).scale(1.0 / 3.0)) < 1e-14);
        }
    }

    #[test]
    fn werner_spectrum_at_zero() {
        let eig = crate::qmat::herm_eig(werner::<f64>(3, 0.0).unwrap().matrix()).unwrap();
        let zeros = eig.eigenvalues.iter().filter(|x| x.abs() < 1e-12).count();
        let thirds = eig.eigenvalues.iter().filter(|x| (**x - 1.0 / 3.0).abs() < 1e-12).count();
        assert_eq!((zeros, thirds), (6, 3));
        let pt = partial_transpose(&werner::<f64>(3, 0.0).unwrap(), Side::A);
        assert!((crate::qmat::herm_eig(&pt).unwrap().min() + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn constructors_agree() {
        for d in 2..=5 {
            for step in 0..=20 {
                let v = step as f64 * 0.05;
                let w = werner::<f64>(d, v).unwrap();
                let all = werner_all_v::<f64>(d, v).unwrap();
                assert!(w.matrix().max_abs_diff(all.matrix()) < 1e-12, "all-v d={d} v={v}");
                if v <= WernerParams::q_nonnegative_limit(d) {
                    let mix = werner_from_qubit_mixture::<f64>(d, v).unwrap();
                    assert!(w.matrix().max_abs_diff(mix.matrix()) < 1e-12, "mixture d={d} v={v}");
                } else {
                    assert!(matches!(werner_from_qubit_mixture::<f64>(d, v), Err(Error::UseAllVRoute { .. })));
                }
            }
        }
    }

    #[test]
    fn all_v_extremes() {
        let (p, q) = all_v_params(3, 1.0);
        assert!((q - 0.5).abs() < 1e-15 && p.abs() < 1e-15);
        let w1 = werner_all_v::<f64>(3, 1.0).unwrap();
        let sym = symmetric_projector::<f64>(3, false).unwrap().scale(1.0 / 6.0);
        assert!(w1.matrix().max_abs_diff(&sym) < 1e-14);
        let (p, q) = all_v_params(3, 0.0);
        assert!((p - 1.0).abs() < 1e-15 && q == 0.0);
        let w0 = werner_all_v::<f64>(3, 0.0).unwrap();
        let anti = symmetric_projector::<f64>(3, true).unwrap().scale(1.0 / 3.0);
        assert!(w0.matrix().max_abs_diff(&anti) < 1e-14);
    }

    #[test]
    fn qubit_blocks_are_states() {
        for kind in [BlockKind::Singlet, BlockKind::Diag, BlockKind::Cross, BlockKind::Triplet] {
            let m = QubitBlock::new(0, 2, kind).unwrap().matrix::<f64>(3).unwrap();
            DensityMatrix::new(m, 3, 3).unwrap();
        }
        assert!(QubitBlock::new(1, 1, BlockKind::Diag).is_err());
        assert!(QubitBlock::new(1, 3, BlockKind::Diag).unwrap().matrix::<f64>(3).is_err());
    }

    #[test]
    fn twirl_and_swap_invariance() {
        let mut rng = crate::random::seeded(99);
        let w = werner::<f64>(3, 0.3).unwrap();
        for _ in 0..20 {
            let u: M = haar_unitary(3, &mut rng);
            let uu = kron(&u, &u);
            let t = w.conjugate_by(&uu);
            assert!((&t.into_matrix() - w.matrix()).frobenius_norm() < 1e-9);
        }
        let v = swap_operator::<f64>(3).unwrap();
        assert!(w.conjugate_by(&v).matrix().max_abs_diff(w.matrix()) < 1e-12);
        let ps = symmetric_projector::<f64>(3, false).unwrap();
        assert!((w.expect(&ps).re - 0.3).abs() < 1e-12);
    }

    #[test]
    fn maximally_entangled_vectors() {
        let psi = mes::<f64>(3, &M::identity(3)).unwrap();
        assert!(psi.iter().zip(phi_plus::<f64>(3)).all(|(a, b)| (a - b).norm() < 1e-15));
        // iY maps Φ⁺ to the singlet up to phase
        let iy = crate::qmat::pauli::<f64>(1).scale_c(Complex::new(0.0, 1.0));
        let s = mes::<f64>(2, &iy).unwrap();
        let singlet = [0.0, 1.0, -1.0, 0.0].map(|x| Complex::new(x / 2f64.sqrt(), 0.0));
        let overlap = crate::qmat::inner(&singlet, &s).norm();
        assert!((overlap - 1.0).abs() < 1e-14);
        assert!(mes::<f64>(2, &M::diag_real(&[1.0, 2.0])).is_err());
        let w0 = werner::<f64>(3, 0.0).unwrap();
        assert!(w0.matrix().sandwich(&phi_plus(3), &phi_plus(3)).norm() < 1e-15);
        let rho = DensityMatrix::from_ket(&psi, 3, 3).unwrap();
        assert!((partial_trace(&rho, Side::A).max_abs_diff(&M::identity(3).scale(1.0 / 3.0))) < 1e-14);
    }

    #[test]
    fn surrogate_extremes() {
        let w = werner::<f64>(3, 0.2).unwrap();
        assert_eq!(noisy_surrogate(&w, &NoiseSpec::none()).unwrap(), w);
        let full = noisy_surrogate(&w, &NoiseSpec { depol: 1.0, coherent_eps: 0.0, seed: 1 }).unwrap();
        assert!(full.matrix().max_abs_diff(&M::identity(9).scale(1.0 / 9.0)) < 1e-15);
        let a = noisy_surrogate(&w, &NoiseSpec { depol: 0.05, coherent_eps: 0.02, seed: 4 }).unwrap();
        let b = noisy_surrogate(&w, &NoiseSpec { depol: 0.05, coherent_eps: 0.02, seed: 4 }).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
    }

    #[test]
    fn surrogate_hits_worst_fidelity_row() {
        let w = werner::<f64>(3, 0.0).unwrap();
        let spec = depol_for_fidelity(&w, 0.958, 0.02, 7).unwrap();
        let s = noisy_surrogate(&w, &spec).unwrap();
        let f = uhlmann_fidelity(s.matrix(), w.matrix()).unwrap();
        assert!((f - 0.958).abs() < 0.01, "fidelity {f}");
    }
}
