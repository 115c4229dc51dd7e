//! Scalar certificates of entanglement, distillability, teleportation
//! fidelity, CHSH nonlocality and dense-codability.
//!
//! Heuristic searches (1-distillability, fully entangled fraction for
//! `d ≥ 3`) can certify a property but never its absence; they report
//! `Inconclusive` when nothing is found.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::filterops::filtered_weight;
use crate::qmat::{herm_eig, kron, partial_trace, partial_transpose, pauli, svd, von_neumann_entropy, CMatrix, DensityMatrix, Ket, Side};
use crate::random::{derive_seed, haar_unitary, seeded};

type C64 = Complex<f64>;
type M = CMatrix<f64>;

/// Absolute tolerance for comparing a value against its threshold.
pub const THRESHOLD_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertName {
    PptMinEig,
    OneDistillable,
    GurvitsBall,
    Fef,
    ChshHorodecki,
    DenseCoding,
}

/// `Pass`: the named property is certified. `Fail`: it is ruled out by an
/// exact criterion. `Inconclusive`: a heuristic found no evidence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: CertName,
    pub value: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
}

impl Certificate {
    fn exact(name: CertName, value: f64, threshold: f64, pass: bool) -> Self {
        let verdict = if pass { Verdict::Pass } else { Verdict::Fail };
        Self { name, value, threshold, verdict, witness: None, seed: None, restarts: None }
    }

    fn search(name: CertName, value: f64, threshold: f64, pass: bool, seed: u64, restarts: usize) -> Self {
        let verdict = if pass { Verdict::Pass } else { Verdict::Inconclusive };
        Self { name, value, threshold, verdict, witness: None, seed: Some(seed), restarts: Some(restarts) }
    }

    fn with_witness(mut self, w: serde_json::Value) -> Self {
        self.witness = Some(w);
        self
    }
}

fn ket_json(v: &[C64]) -> serde_json::Value {
    json!(v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
}

fn matrix_json(m: &M) -> serde_json::Value {
    serde_json::to_value(crate::io::MatrixDoc::from(m)).expect("matrix serializes")
}

/// Smallest eigenvalue of `ρ^{T_A}`; `Pass` (entangled) below `−1e-9`.
pub fn ppt_min_eig(rho: &DensityMatrix<f64>) -> Result<Certificate> {
    let value = herm_eig(&partial_transpose(rho, Side::A))?.min();
    Ok(Certificate::exact(CertName::PptMinEig, value, 0.0, value < -THRESHOLD_TOL))
}

/// Tolerance below which a Schmidt-rank-2 direction counts as negative.
pub const DISTILL_TOL: f64 = 1e-6;

/// Minimum of `⟨ψ|ρ^{T_A}|ψ⟩` over Schmidt-rank-2 vectors `ψ`.
///
/// Each restart alternates between the two sides: with a 2-dim frame fixed
/// on one side, the best `ψ` is the lowest eigenvector of `ρ^{T_A}`
/// compressed to (full other side) ⊗ (frame), and its Schmidt vectors on
/// the other side become the next frame.
pub fn one_distillable(rho: &DensityMatrix<f64>, restarts: usize, seed: u64) -> Result<Certificate> {
    let (da, db) = (rho.dim_a(), rho.dim_b());
    if da < 2 || db < 2 {
        return Err(Error::InvalidParameter("one_distillable needs local dimensions ≥ 2".into()));
    }
    let pt = partial_transpose(rho, Side::A);
    let restarts = restarts.max(1);
    let runs: Vec<(f64, Ket<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded(derive_seed(seed, r as u64));
            let u: M = haar_unitary(db, &mut rng);
            let frame_b = u.select(&(0..db).collect::<Vec<_>>(), &[0, 1]);
            distill_descent(&pt, da, db, frame_b)
        })
        .collect::<Result<Vec<_>>>()?;
    let (value, psi) = runs
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one restart");
    Ok(Certificate::search(CertName::OneDistillable, value, 0.0, value < -DISTILL_TOL, seed, restarts)
        .with_witness(ket_json(&psi)))
}

/// Orthonormal 2-frame spanning the column space of `m` (n×2), completed
/// deterministically when `m` has rank 1.
fn two_frame(m: &M) -> M {
    let dec = svd(m);
    dec.u.select(&(0..m.rows()).collect::<Vec<_>>(), &[0, 1])
}

fn distill_descent(pt: &M, da: usize, db: usize, mut frame_b: M) -> Result<(f64, Ket<f64>)> {
    let mut best = f64::INFINITY;
    let mut best_psi = Vec::new();
    for _ in 0..500 {
        // A side free, B compressed to its frame
        let w = kron(&M::identity(da), &frame_b);
        let h = &(&w.adjoint() * pt) * &w;
        let eig = herm_eig(&h)?;
        let psi_small = eig.vector(0);
        // ψ as da×2 coefficient matrix → A frame
        let coeff = M::from_vec(da, 2, psi_small.clone())?;
        let frame_a = two_frame(&coeff);
        let w = kron(&frame_a, &M::identity(db));
        let h = &(&w.adjoint() * pt) * &w;
        let eig = herm_eig(&h)?;
        let val = eig.min();
        let psi_small = eig.vector(0);
        // ψ as 2×db matrix; B frame from its row space
        let coeff = M::from_vec(2, db, psi_small.clone())?;
        frame_b = two_frame(&coeff.transpose());
        let improved = best - val;
        if val < best {
            best = val;
            best_psi = w.matvec(&psi_small);
        }
        if improved < 1e-13 {
            break;
        }
    }
    Ok((best, best_psi))
}

/// `‖ρ − I/D‖²_F` against the radius `1/(D(D−1))`; `Pass` certifies
/// separability.
pub fn gurvits_ball(rho: &DensityMatrix<f64>) -> Certificate {
    let n = rho.dim();
    let mixed = M::identity(n).scale(1.0 / n as f64);
    let value = (rho.matrix() - &mixed).frobenius_norm().powi(2);
    let threshold = 1.0 / (n as f64 * (n as f64 - 1.0));
    let verdict = if value <= threshold { Verdict::Pass } else { Verdict::Inconclusive };
    Certificate { name: CertName::GurvitsBall, value, threshold, verdict, witness: None, seed: None, restarts: None }
}

/// `⟨Ψ_U|ρ|Ψ_U⟩` for `Ψ_U = (I⊗U)|Φ⁺⟩`.
fn fef_objective(rho: &M, u: &M) -> f64 {
    let d = u.rows();
    let psi = crate::states::mes(d, u).unwrap_or_else(|_| unreachable_mes(d, u));
    rho.sandwich(&psi, &psi).re
}

fn unreachable_mes(d: usize, u: &M) -> Ket<f64> {
    // the ascent keeps U unitary to rounding; avoid the strict check
    let amp = 1.0 / (d as f64).sqrt();
    let mut psi = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for k in 0..d {
            psi[i * d + k] = u[(k, i)] * amp;
        }
    }
    psi
}

/// Ascent of the fully entangled fraction over `U`.
///
/// The objective is a convex quadratic in `U`, so replacing `U` by the
/// unitary that maximizes its linearization never decreases it. That
/// unitary is the polar factor of the gradient.
fn fef_ascent(rho: &M, d: usize, mut u: M) -> Result<(f64, M)> {
    let mut f = fef_objective(rho, &u);
    let amp = 1.0 / (d as f64).sqrt();
    for _ in 0..5000 {
        let psi = unreachable_mes(d, &u);
        let rpsi = rho.matvec(&psi);
        let g = M::from_fn(d, d, |k, i| rpsi[i * d + k] * amp);
        let dec = svd(&g);
        let cand = &dec.u * &dec.vdag;
        let fc = fef_objective(rho, &cand);
        if fc <= f + 1e-15 {
            if fc > f {
                u = cand;
                f = fc;
            }
            break;
        }
        u = cand;
        f = fc;
    }
    Ok((f, u))
}

/// Fully entangled fraction by multi-start ascent over the unitary group.
/// The first start is `U = I`; the rest are Haar-random.
pub fn fef(rho: &DensityMatrix<f64>, restarts: usize, seed: u64) -> Result<Certificate> {
    let d = rho.dim_a();
    if rho.dim_b() != d {
        return Err(Error::DimensionMismatch(format!("fef needs d×d, got {}×{}", d, rho.dim_b())));
    }
    let restarts = restarts.max(1);
    let runs: Vec<(f64, M)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let u0 = if r == 0 {
                M::identity(d)
            } else {
                haar_unitary(d, &mut seeded(derive_seed(seed, r as u64)))
            };
            fef_ascent(rho.matrix(), d, u0)
        })
        .collect::<Result<Vec<_>>>()?;
    let (value, u) = runs.into_iter().max_by(|a, b| a.0.total_cmp(&b.0)).expect("at least one restart");
    let threshold = 1.0 / d as f64;
    Ok(Certificate::search(CertName::Fef, value, threshold, value > threshold + THRESHOLD_TOL, seed, restarts)
        .with_witness(matrix_json(&u)))
}

/// Magic basis `{Φ⁺, i(|00⟩−|11⟩)/√2, i(|01⟩+|10⟩)/√2, (|01⟩−|10⟩)/√2}` as
/// columns.
pub fn magic_basis() -> M {
    let h = 1.0 / 2f64.sqrt();
    let r = |x: f64| C64::new(x, 0.0);
    let i = |x: f64| C64::new(0.0, x);
    let cols = [
        [r(h), r(0.0), r(0.0), r(h)],
        [i(h), r(0.0), r(0.0), i(-h)],
        [r(0.0), i(h), i(h), r(0.0)],
        [r(0.0), r(h), r(-h), r(0.0)],
    ];
    M::from_fn(4, 4, |row, col| cols[col][row])
}

fn check_two_qubit(rho: &DensityMatrix<f64>) -> Result<()> {
    if rho.dim_a() != 2 || rho.dim_b() != 2 {
        return Err(Error::DimensionMismatch(format!("expected two qubits, got {}×{}", rho.dim_a(), rho.dim_b())));
    }
    Ok(())
}

/// Two-qubit fully entangled fraction: the largest eigenvalue of the real
/// part of `ρ` in the magic basis.
pub fn fef2_exact(rho: &DensityMatrix<f64>) -> Result<f64> {
    Ok(fef2_with_witness(rho)?.0)
}

/// Value and a unitary `U` attaining it.
fn fef2_with_witness(rho: &DensityMatrix<f64>) -> Result<(f64, M)> {
    check_two_qubit(rho)?;
    let e = magic_basis();
    let rm = &(&e.adjoint() * rho.matrix()) * &e;
    let re = rm.map(|z| C64::new(z.re, 0.0));
    let eig = herm_eig(&re)?;
    let top = eig.vector(3);
    // real combination of magic vectors is maximally entangled
    let phase = top.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(C64::new(1.0, 0.0));
    let phase = phase.conj() / phase.norm();
    let coeffs: Vec<C64> = top.iter().map(|z| C64::new((z * phase).re, 0.0)).collect();
    let psi = e.matvec(&coeffs);
    let s2 = 2f64.sqrt();
    let u = M::from_fn(2, 2, |k, i| psi[i * 2 + k] * s2);
    Ok((eig.max(), u))
}

/// Whether `ρ ⊕ 0`, embedded in `d×d`, has `F_d > 1/d`, using the unitary
/// `U₂ ⊕ I_{d−2}` built from the two-qubit optimum.
pub fn fef_embedding_check(rho: &DensityMatrix<f64>, d: usize) -> Result<bool> {
    let (f2, u2) = fef2_with_witness(rho)?;
    if f2 <= 0.5 {
        return Err(Error::InvalidParameter(format!("two-qubit fraction {f2} does not exceed 1/2")));
    }
    if d < 2 {
        return Err(Error::InvalidParameter("embedding dimension < 2".into()));
    }
    let inc = M::from_fn(d, 2, |r, c| if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    let big = kron(&inc, &inc);
    let embedded = &(&big * rho.matrix()) * &big.adjoint();
    let mut ud = M::identity(d);
    for r in 0..2 {
        for c in 0..2 {
            ud[(r, c)] = u2[(r, c)];
        }
    }
    let value = fef_objective(&embedded, &ud);
    Ok(value > 1.0 / d as f64)
}

/// Correlation matrix `T_mn = tr[ρ σ_m⊗σ_n]`.
pub fn correlation_matrix(rho: &DensityMatrix<f64>) -> Result<M> {
    check_two_qubit(rho)?;
    let s: Vec<M> = (0..3).map(pauli::<f64>).collect();
    Ok(M::from_fn(3, 3, |m, n| C64::new(rho.expect(&kron(&s[m], &s[n])).re, 0.0)))
}

/// Maximal CHSH value `2√(t₁² + t₂²)` from the two largest singular values
/// of the correlation matrix.
pub fn chsh_horodecki(rho: &DensityMatrix<f64>) -> Result<Certificate> {
    let t = correlation_matrix(rho)?;
    let dec = svd(&t);
    let value = 2.0 * (dec.s[0].powi(2) + dec.s[1].powi(2)).sqrt();
    let plane: Vec<Vec<f64>> = (0..2).map(|k| (0..3).map(|m| dec.u[(m, k)].re).collect()).collect();
    Ok(Certificate::exact(CertName::ChshHorodecki, value, 2.0, value > 2.0 + THRESHOLD_TOL)
        .with_witness(json!({ "singular_values": dec.s, "plane_a": plane })))
}

/// `δ = S(ρ_B) − S(ρ_AB)` in bits.
pub fn dense_coding_delta(rho: &DensityMatrix<f64>) -> Result<Certificate> {
    let rb = partial_trace(rho, Side::A);
    let value = von_neumann_entropy(&rb)? - von_neumann_entropy(rho.matrix())?;
    Ok(Certificate::exact(CertName::DenseCoding, value, 0.0, value > THRESHOLD_TOL))
}

fn xlog2(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.log2()
    }
}

/// Closed-form `δ` of `W⁽ᵈ⁾(v)`.
pub fn werner_delta(d: usize, v: f64) -> f64 {
    let df = d as f64;
    df.log2() + xlog2(v, 2.0 * v / (df * (df + 1.0))) + xlog2(1.0 - v, 2.0 * (1.0 - v) / (df * (df - 1.0)))
}

/// Closed-form `δ` after qubit projections on both sides of `W⁽ᵈ⁾(v)`.
pub fn filtered_delta(d: usize, v: f64) -> f64 {
    werner_delta(2, filtered_weight(d, v))
}

/// Root of [`filtered_delta`] on `[0, 0.5]` by bisection.
pub fn dc_threshold(d: usize, tol: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("d = {d} < 2")));
    }
    let (mut lo, mut hi) = (0.0, 0.5);
    let (flo, fhi) = (filtered_delta(d, lo), filtered_delta(d, hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSignChange);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if filtered_delta(d, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filterops::rotated_filtered_state;
    use crate::qmat::{basis, kron_ket, phi_plus};
    use crate::random::{random_state, seeded};
    use crate::states::werner;

    fn singlet() -> DensityMatrix<f64> {
        let h = 1.0 / 2f64.sqrt();
        let psi = vec![C64::new(0.0, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0), C64::new(0.0, 0.0)];
        DensityMatrix::from_ket(&psi, 2, 2).unwrap()
    }

    #[test]
    fn ppt_values() {
        for k in 0..=5 {
            let v = 0.1 * k as f64;
            let c = ppt_min_eig(&werner(3, v).unwrap()).unwrap();
            assert!((c.value - (2.0 * v - 1.0) / 3.0).abs() < 1e-9);
            assert_eq!(c.verdict, if k < 5 { Verdict::Pass } else { Verdict::Fail });
        }
        let prod = DensityMatrix::from_ket(&kron_ket(&basis(2, 0), &basis(3, 1)), 2, 3).unwrap();
        assert!(ppt_min_eig(&prod).unwrap().value >= -1e-12);
    }

    #[test]
    fn distillability_of_maximally_entangled() {
        let rho = DensityMatrix::from_ket(&phi_plus(2), 2, 2).unwrap();
        let c = one_distillable(&rho, 4, 1).unwrap();
        assert!((c.value + 0.5).abs() < 1e-9, "{}", c.value);
        assert_eq!(c.verdict, Verdict::Pass);
    }

    #[test]
    fn distillability_bounds_min_eig() {
        let mut rng = seeded(4);
        for _ in 0..5 {
            let rho: DensityMatrix<f64> = random_state(3, 3, &mut rng);
            let c = one_distillable(&rho, 8, 2).unwrap();
            assert!(c.value >= ppt_min_eig(&rho).unwrap().value - 1e-12);
        }
    }

    #[test]
    fn gurvits_values() {
        let c = gurvits_ball(&DensityMatrix::maximally_mixed(3, 3));
        assert!(c.value.abs() < 1e-15 && c.verdict == Verdict::Pass);
        let c = gurvits_ball(&werner(3, 0.5).unwrap());
        assert!((c.value - (6.0 / 36f64.powi(2) + 3.0 / 18f64.powi(2))).abs() < 1e-12);
        assert_eq!(c.verdict, Verdict::Inconclusive);
        let c = gurvits_ball(&werner(2, 0.6).unwrap());
        assert!((c.value - 0.03).abs() < 1e-12);
        assert_eq!(c.verdict, Verdict::Pass);
        assert!((c.threshold - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn fef_two_qubit_values() {
        let s = singlet();
        assert!((fef2_exact(&s).unwrap() - 1.0).abs() < 1e-12);
        assert!((fef(&s, 4, 3).unwrap().value - 1.0).abs() < 1e-9);
        assert!((fef2_exact(&DensityMatrix::maximally_mixed(2, 2)).unwrap() - 0.25).abs() < 1e-12);
        let f = fef2_exact(&rotated_filtered_state(0.4).unwrap()).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
        let f = fef2_exact(&rotated_filtered_state(0.2).unwrap()).unwrap();
        assert!((f - 3.2 / 4.4).abs() < 1e-12, "{f}");
        assert!(fef2_exact(&werner(3, 0.1).unwrap()).is_err());
    }

    #[test]
    fn fef_matches_magic_basis_oracle() {
        let mut rng = seeded(8);
        for i in 0..100 {
            let rho: DensityMatrix<f64> = random_state(2, 2, &mut rng);
            let exact = fef2_exact(&rho).unwrap();
            let num = fef(&rho, 8, i).unwrap().value;
            assert!((exact - num).abs() < 1e-6, "{exact} vs {num}");
        }
    }

    #[test]
    fn fef_bounds() {
        let mut rng = seeded(9);
        for i in 0..5 {
            let rho: DensityMatrix<f64> = random_state(3, 3, &mut rng);
            let v = fef(&rho, 8, i).unwrap().value;
            let id = rho.matrix().sandwich(&phi_plus(3), &phi_plus(3)).re;
            assert!(v >= id - 1e-12);
            assert!(v <= herm_eig(rho.matrix()).unwrap().max() + 1e-12);
        }
        assert!(fef(&random_state::<f64, _>(2, 3, &mut rng), 2, 0).is_err());
    }

    #[test]
    fn embedding_bound_holds() {
        assert!(fef_embedding_check(&singlet(), 3).unwrap());
        assert!(fef_embedding_check(&rotated_filtered_state(0.39).unwrap(), 3).unwrap());
        assert!(fef_embedding_check(&rotated_filtered_state(0.3).unwrap(), 5).unwrap());
        assert!(fef_embedding_check(&DensityMatrix::maximally_mixed(2, 2), 3).is_err());
    }

    #[test]
    fn chsh_values() {
        let c = chsh_horodecki(&singlet()).unwrap();
        assert!((c.value - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(c.verdict, Verdict::Pass);
        let vp = filtered_weight(3, 0.15);
        let c = chsh_horodecki(&rotated_filtered_state(0.15).unwrap()).unwrap();
        assert!((c.value - 2.0 * 2f64.sqrt() * (1.0 - 4.0 / 3.0 * vp)).abs() < 1e-12);
        assert!((c.value - 2.0391).abs() < 1e-4, "{}", c.value);
        assert!(chsh_horodecki(&DensityMatrix::maximally_mixed(2, 2)).unwrap().verdict == Verdict::Fail);
    }

    #[test]
    fn chsh_violation_implies_teleportation() {
        let mut rng = seeded(10);
        for _ in 0..200 {
            let rho: DensityMatrix<f64> = random_state(2, 2, &mut rng);
            if chsh_horodecki(&rho).unwrap().value > 2.0 {
                assert!(fef2_exact(&rho).unwrap() > 0.5);
            }
        }
    }

    #[test]
    fn dense_coding_values() {
        let c = dense_coding_delta(&DensityMatrix::from_ket(&phi_plus(2), 2, 2).unwrap()).unwrap();
        assert!((c.value - 1.0).abs() < 1e-12);
        assert!((werner_delta(2, 0.0) - 1.0).abs() < 1e-15);
        for d in 2..=4 {
            for k in 0..=20 {
                let v = 0.05 * k as f64;
                let c = dense_coding_delta(&werner(d, v).unwrap()).unwrap();
                assert!((c.value - werner_delta(d, v)).abs() < 1e-9, "d={d} v={v}");
                if d >= 3 {
                    // zero only at v = 0 for d = 3
                    assert!(c.value < 1e-12);
                }
            }
        }
        assert!(dense_coding_delta(&rotated_filtered_state(0.05).unwrap()).unwrap().value > 0.0);
        let c = dense_coding_delta(&rotated_filtered_state(0.12).unwrap()).unwrap();
        assert!((c.value - filtered_delta(3, 0.12)).abs() < 1e-9);
    }

    #[test]
    fn werner_never_dense_codable() {
        for d in 3..=8 {
            for k in 1..=100 {
                assert!(werner_delta(d, 0.01 * k as f64) < 0.0);
            }
        }
        assert!(werner_delta(3, 0.0).abs() < 1e-12);
        assert!(werner_delta(4, 0.0) < 0.0);
    }

    #[test]
    fn dense_coding_thresholds() {
        let t2 = dc_threshold(2, 1e-9).unwrap();
        assert!(filtered_delta(2, 0.18) > 0.0 && filtered_delta(2, 0.2) < 0.0);
        assert!((t2 - 0.19).abs() < 0.01);
        let t3 = dc_threshold(3, 1e-9).unwrap();
        assert!((0.13..=0.14).contains(&t3), "{t3}");
        let mut prev = 1.0;
        for d in 2..=16 {
            let t = dc_threshold(d, 1e-9).unwrap();
            assert!(t < prev);
            prev = t;
        }
        let inf = dc_threshold(1_000_000, 1e-10).unwrap();
        assert!((inf - 0.0722088).abs() < 1e-4, "{inf}");
    }

    #[test]
    fn certificate_json_shape() {
        let c = one_distillable(&werner(3, 0.1).unwrap(), 2, 5).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["name"], "one_distillable");
        assert_eq!(v["verdict"], "PASS");
        assert_eq!(v["seed"], 5);
        assert_eq!(v["restarts"], 2);
        assert!(v["witness"].is_array());
    }
}
