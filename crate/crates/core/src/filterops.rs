//! Single-copy local filtering.
//!
//! A filter is one Kraus operator `M` (d′×d, `‖M‖_∞ = 1`) applied on one
//! side. Any such `M = U·Σ·V†` is realized by a basis change `V†`, a
//! per-mode attenuation `Σ`, and a second basis change `U`.

use num_complex::Complex;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::MatrixDoc;
use crate::qmat::{cr, kron, pauli, phi_plus, svd, CMatrix, DensityMatrix, Side};
use crate::scalar::Real;

/// Kraus operator of a local filter together with the side it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterOperator<T> {
    mat: CMatrix<T>,
    side: Side,
}

impl<T: Real> FilterOperator<T> {
    /// Accepts `mat` only if its largest singular value is 1.
    pub fn new(mat: CMatrix<T>, side: Side) -> Result<Self> {
        check_shape(&mat)?;
        let s0 = svd(&mat).s[0];
        if (s0 - T::one()).abs() > T::state_tol() {
            return Err(Error::InvalidParameter(format!(
                "filter operator norm {} differs from 1",
                s0.to_f64_lossy()
            )));
        }
        Ok(Self { mat, side })
    }

    /// Rescales `mat` to unit operator norm; returns the filter and the
    /// factor that was applied.
    pub fn rescaled(mat: CMatrix<T>, side: Side) -> Result<(Self, T)> {
        check_shape(&mat)?;
        let s0 = svd(&mat).s[0];
        if s0 <= T::zero() {
            return Err(Error::InvalidParameter("zero filter".into()));
        }
        let scale = T::one() / s0;
        Ok((Self { mat: mat.scale(scale), side }, scale))
    }

    pub fn identity(d: usize, side: Side) -> Self {
        Self { mat: CMatrix::identity(d), side }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.mat
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn input_dim(&self) -> usize {
        self.mat.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn protocol(&self) -> Result<FilterProtocol<T>> {
        filter_protocol(&self.mat)
    }
}

fn check_shape<T: Real>(mat: &CMatrix<T>) -> Result<()> {
    if mat.rows() < 2 {
        return Err(Error::InvalidParameter(format!("filter output dimension {} < 2", mat.rows())));
    }
    if mat.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter("non-finite filter entry".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterDoc {
    pub side: Side,
    #[serde(flatten)]
    pub matrix: MatrixDoc,
}

impl FilterOperator<f64> {
    pub fn to_doc(&self) -> FilterDoc {
        FilterDoc { side: self.side, matrix: MatrixDoc::from(&self.mat) }
    }

    pub fn from_doc(doc: &FilterDoc) -> Result<Self> {
        Self::new(doc.matrix.to_matrix()?, doc.side)
    }
}

/// Qubit projection `|i⟩⟨i| + |j⟩⟨j|` written as the 2×d row selector.
pub fn qubit_projection<T: Real>(d: usize, keep: (usize, usize), side: Side) -> Result<FilterOperator<T>> {
    let (i, j) = keep;
    if i >= j || j >= d {
        return Err(Error::InvalidParameter(format!("qubit projection needs 0 <= i < j < d, got ({i}, {j}) with d = {d}")));
    }
    let mut m = CMatrix::zeros(2, d);
    m[(0, i)] = Complex::one();
    m[(1, j)] = Complex::one();
    Ok(FilterOperator { mat: m, side })
}

/// `(M_A⊗M_B)ρ(M_A⊗M_B)†` normalized, with its success probability.
pub fn apply_filter<T: Real>(
    rho: &DensityMatrix<T>,
    fa: &FilterOperator<T>,
    fb: &FilterOperator<T>,
) -> Result<(DensityMatrix<T>, T)> {
    if fa.side != Side::A || fb.side != Side::B {
        return Err(Error::InvalidParameter("filters must be given as (side A, side B)".into()));
    }
    if fa.input_dim() != rho.dim_a() || fb.input_dim() != rho.dim_b() {
        return Err(Error::DimensionMismatch(format!(
            "filters on {}x{} inputs, state is {}x{}",
            fa.input_dim(),
            fb.input_dim(),
            rho.dim_a(),
            rho.dim_b()
        )));
    }
    let k = kron(&fa.mat, &fb.mat);
    let out = &(&k * rho.matrix()) * &k.adjoint();
    normalize_output(out, fa.output_dim(), fb.output_dim())
}

fn normalize_output<T: Real>(out: CMatrix<T>, da: usize, db: usize) -> Result<(DensityMatrix<T>, T)> {
    let p = out.trace().re;
    if !(p >= T::lit(1e-12)) {
        return Err(Error::FilterAnnihilates(p.to_f64_lossy()));
    }
    let rho = DensityMatrix::new_unchecked(out.scale(T::one() / p).hermitian_part(), da, db)?;
    Ok((rho, p))
}

/// Symmetric weight of the two-qubit Werner state left after qubit
/// projections on both sides of `W⁽ᵈ⁾(v)`.
pub fn filtered_weight<T: Real>(d: usize, v: T) -> T {
    let df = T::from_usize(d).unwrap();
    let one = T::one();
    let three = T::lit(3.0);
    let num = three * (df - one) * v;
    let den = (df + one) * (one - v) + num;
    if den == T::zero() {
        return T::zero();
    }
    num / den
}

/// Success probability of a qubit projection on both sides of `W⁽ᵈ⁾(v)`.
pub fn filter_success_probability<T: Real>(d: usize, v: T) -> T {
    let df = T::from_usize(d).unwrap();
    let one = T::one();
    let two = T::lit(2.0);
    // kept block holds one antisymmetric vector of weight (1−v)/n₋ and three
    // symmetric ones of weight v/n₊
    let n_minus = df * (df - one) / two;
    let n_plus = df * (df + one) / two;
    (one - v) / n_minus + T::lit(3.0) * v / n_plus
}

/// The filtered `W⁽³⁾(v)` after the `σ_x⊗σ_z` rotation:
/// `[4(1−v)|Φ⁺⟩⟨Φ⁺| + 2v(I − |Φ⁺⟩⟨Φ⁺|)] / (4(1−v) + 6v)`.
pub fn rotated_filtered_state<T: Real>(v: T) -> Result<DensityMatrix<T>> {
    if !(v >= T::zero() && v <= T::one()) {
        return Err(Error::InvalidParameter(format!("v = {} outside [0, 1]", v.to_f64_lossy())));
    }
    let one = T::one();
    let n = T::lit(4.0) * (one - v) + T::lit(6.0) * v;
    let phi = CMatrix::projector(&phi_plus::<T>(2));
    let comp = &CMatrix::identity(4) - &phi;
    let m = &phi.scale(T::lit(4.0) * (one - v) / n) + &comp.scale(T::lit(2.0) * v / n);
    DensityMatrix::new_unchecked(m, 2, 2)
}

/// Local rotation `σ_x⊗σ_z` relating the filtered Werner state to
/// [`rotated_filtered_state`].
pub fn filter_rotation<T: Real>() -> CMatrix<T> {
    kron(&pauli::<T>(0), &pauli::<T>(2))
}

/// Three-step realization `U · Σ · V†` of a filter.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterProtocol<T> {
    /// `V†`, applied first.
    pub pre_unitary: CMatrix<T>,
    /// Modes that are transmitted, with their attenuations `sᵢ`.
    pub kept_indices: Vec<usize>,
    pub attenuations: Vec<T>,
    /// `U`, applied last.
    pub post_unitary: CMatrix<T>,
    /// Factor by which the input was rescaled to reach unit norm.
    pub scale: T,
}

impl<T: Real> FilterProtocol<T> {
    pub fn input_dim(&self) -> usize {
        self.pre_unitary.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.post_unitary.rows()
    }

    /// The attenuation step as a d′×d matrix.
    pub fn attenuation_matrix(&self) -> CMatrix<T> {
        let mut s = CMatrix::zeros(self.output_dim(), self.input_dim());
        for (&i, &a) in self.kept_indices.iter().zip(&self.attenuations) {
            s[(i, i)] = cr(a);
        }
        s
    }

    /// `U · Σ · V†`, which is the unit-norm filter.
    pub fn recompose(&self) -> CMatrix<T> {
        &(&self.post_unitary * &self.attenuation_matrix()) * &self.pre_unitary
    }
}

/// Decomposes `m` (rescaled to unit operator norm) into basis change,
/// attenuation and basis change.
pub fn filter_protocol<T: Real>(m: &CMatrix<T>) -> Result<FilterProtocol<T>> {
    let dec = svd(m);
    let s0 = dec.s.first().copied().unwrap_or(T::zero());
    if !(s0 > T::zero()) {
        return Err(Error::InvalidParameter("zero filter".into()));
    }
    let scale = if (s0 - T::one()).abs() <= T::lit(1e-8) { T::one() } else { T::one() / s0 };
    let mut kept_indices = Vec::new();
    let mut attenuations = Vec::new();
    for (i, &s) in dec.s.iter().enumerate() {
        let s = s * scale;
        if s > T::lit(1e-12) {
            kept_indices.push(i);
            attenuations.push(s.min(T::one()));
        }
    }
    Ok(FilterProtocol { pre_unitary: dec.vdag, kept_indices, attenuations, post_unitary: dec.u, scale })
}

/// Runs the three protocol steps on a bipartite state, one stage at a time.
pub fn apply_protocols<T: Real>(
    rho: &DensityMatrix<T>,
    pa: &FilterProtocol<T>,
    pb: &FilterProtocol<T>,
) -> Result<(DensityMatrix<T>, T)> {
    if pa.input_dim() != rho.dim_a() || pb.input_dim() != rho.dim_b() {
        return Err(Error::DimensionMismatch("protocol input dimensions".into()));
    }
    let stage = |m: &CMatrix<T>, k: &CMatrix<T>| &(k * m) * &k.adjoint();
    let r1 = stage(rho.matrix(), &kron(&pa.pre_unitary, &pb.pre_unitary));
    let r2 = stage(&r1, &kron(&pa.attenuation_matrix(), &pb.attenuation_matrix()));
    let r3 = stage(&r2, &kron(&pa.post_unitary, &pb.post_unitary));
    normalize_output(r3, pa.output_dim(), pb.output_dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::uhlmann_fidelity;
    use crate::random::{random_complex_matrix, random_state, seeded};
    use crate::states::werner;

    type M = CMatrix<f64>;

    fn proj(d: usize, keep: (usize, usize)) -> (FilterOperator<f64>, FilterOperator<f64>) {
        (qubit_projection(d, keep, Side::A).unwrap(), qubit_projection(d, keep, Side::B).unwrap())
    }

    #[test]
    fn qubit_projection_shapes() {
        let (f, _) = proj(3, (0, 1));
        assert_eq!(f.matrix(), &M::identity(3).select(&[0, 1], &[0, 1, 2]));
        let (f, _) = proj(2, (0, 1));
        assert_eq!(f.matrix(), &M::identity(2));
        let s = svd(proj(3, (1, 2)).0.matrix()).s;
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] - 1.0).abs() < 1e-15);
        assert!(qubit_projection::<f64>(3, (1, 1), Side::A).is_err());
        assert!(qubit_projection::<f64>(3, (1, 3), Side::A).is_err());
        assert!(qubit_projection::<f64>(3, (2, 1), Side::A).is_err());
    }

    #[test]
    fn operator_validation() {
        assert!(FilterOperator::new(M::diag_real(&[1.0, 0.5]), Side::A).is_ok());
        assert!(FilterOperator::new(M::diag_real(&[2.0, 0.5]), Side::A).is_err());
        let (f, s) = FilterOperator::rescaled(M::diag_real(&[2.0, 0.5]), Side::A).unwrap();
        assert_eq!(s, 0.5);
        assert_eq!(f.matrix(), &M::diag_real(&[1.0, 0.25]));
        assert!(FilterOperator::new(M::identity(1), Side::A).is_err());
        assert!(FilterOperator::rescaled(M::zeros(2, 2), Side::A).is_err());
    }

    #[test]
    fn identity_filters_do_nothing() {
        let rho: DensityMatrix<f64> = random_state(3, 2, &mut seeded(2));
        let (out, p) =
            apply_filter(&rho, &FilterOperator::identity(3, Side::A), &FilterOperator::identity(2, Side::B)).unwrap();
        assert!((p - 1.0).abs() < 1e-14);
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-14);
    }

    #[test]
    fn filter_sides_and_dims_checked() {
        let rho = werner::<f64>(3, 0.2).unwrap();
        let (fa, fb) = proj(3, (0, 1));
        assert!(apply_filter(&rho, &fb, &fa).is_err());
        let (ga, gb) = proj(4, (0, 1));
        assert!(apply_filter(&rho, &ga, &gb).is_err());
    }

    #[test]
    fn annihilating_filter_is_an_error() {
        let rho = DensityMatrix::from_ket(&crate::qmat::kron_ket(&crate::qmat::basis(3, 0), &crate::qmat::basis(3, 0)), 3, 3)
            .unwrap();
        let (fa, fb) = proj(3, (1, 2));
        assert!(matches!(apply_filter(&rho, &fa, &fb), Err(Error::FilterAnnihilates(_))));
    }

    #[test]
    fn success_probability_of_singlet_block() {
        let (fa, fb) = proj(3, (1, 2));
        let (_, p) = apply_filter(&werner::<f64>(3, 0.0).unwrap(), &fa, &fb).unwrap();
        assert!((p - 1.0 / 3.0).abs() < 1e-14);
        for v in [0.0, 0.3, 0.9] {
            let (_, p) = apply_filter(&werner::<f64>(4, v).unwrap(), &proj(4, (0, 3)).0, &proj(4, (0, 3)).1).unwrap();
            assert!((p - filter_success_probability(4, v)).abs() < 1e-14);
        }
    }

    #[test]
    fn filtered_weight_values() {
        assert_eq!(filtered_weight(3, 0.0), 0.0);
        assert!((filtered_weight(3, 0.2f64) - 1.2 / 4.4).abs() < 1e-15);
        assert!((filtered_weight(3, 0.5f64) - 0.6).abs() < 1e-15);
        assert!((filtered_weight(2, 0.37f64) - 0.37).abs() < 1e-15);
        assert_eq!(filtered_weight(3, 1.0), 1.0);
        assert!((filtered_weight(3, 0.2f32) - 1.2 / 4.4).abs() < 1e-6);
    }

    #[test]
    fn closed_form_matches_projection() {
        for d in 3..=5 {
            for step in 0..=10 {
                let v = 0.05 * step as f64;
                let (fa, fb) = proj(d, (0, 1));
                let (out, _) = apply_filter(&werner::<f64>(d, v).unwrap(), &fa, &fb).unwrap();
                let expect = werner::<f64>(2, filtered_weight(d, v)).unwrap();
                assert!(out.matrix().max_abs_diff(expect.matrix()) < 1e-10, "d={d} v={v}");
            }
        }
    }

    #[test]
    fn rotated_state_extremes() {
        let phi = M::projector(&phi_plus(2));
        assert!(rotated_filtered_state(0.0).unwrap().matrix().max_abs_diff(&phi) < 1e-15);
        let comp = (&M::identity(4) - &phi).scale(1.0 / 3.0);
        assert!(rotated_filtered_state(1.0).unwrap().matrix().max_abs_diff(&comp) < 1e-15);
        assert!(rotated_filtered_state(1.5).is_err());
    }

    #[test]
    fn rotation_relates_experiment_filter_to_closed_form() {
        let rot = filter_rotation::<f64>();
        let (fa, fb) = proj(3, (1, 2));
        for v in [0.0, 0.1, 0.15, 0.2, 0.5, 1.0] {
            let (out, _) = apply_filter(&werner::<f64>(3, v).unwrap(), &fa, &fb).unwrap();
            let rotated = out.conjugate_by(&rot);
            let target = rotated_filtered_state(v).unwrap();
            let f = uhlmann_fidelity(rotated.matrix(), target.matrix()).unwrap();
            assert!((f - 1.0).abs() < 1e-10, "v={v} fidelity {f}");
            assert!(rotated.matrix().max_abs_diff(target.matrix()) < 1e-12);
        }
    }

    #[test]
    fn protocol_of_row_selector() {
        let (f, _) = proj(3, (1, 2));
        let p = f.protocol().unwrap();
        assert_eq!(p.attenuations.len(), 2);
        assert!(p.attenuations.iter().all(|s| (s - 1.0).abs() < 1e-15));
        // pre-unitary is a permutation of I₃ up to phases
        for r in 0..3 {
            let ones = (0..3).filter(|&c| (p.pre_unitary[(r, c)].norm() - 1.0).abs() < 1e-12).count();
            assert_eq!(ones, 1);
        }
        assert!(p.post_unitary.unitary_deviation() < 1e-14);
        assert!(p.recompose().max_abs_diff(f.matrix()) < 1e-14);
    }

    #[test]
    fn protocol_of_diagonal_attenuator() {
        let p = filter_protocol(&M::diag_real(&[1.0, 0.5])).unwrap();
        assert_eq!(p.kept_indices, vec![0, 1]);
        assert_eq!(p.attenuations, vec![1.0, 0.5]);
        assert!(p.pre_unitary.max_abs_diff(&M::identity(2)) < 1e-15);
        assert!(p.post_unitary.max_abs_diff(&M::identity(2)) < 1e-15);
        assert!(filter_protocol(&M::zeros(2, 3)).is_err());
        let rank1 = filter_protocol(&M::diag_real(&[3.0, 0.0])).unwrap();
        assert_eq!(rank1.kept_indices, vec![0]);
        assert_eq!(rank1.scale, 1.0 / 3.0);
    }

    #[test]
    fn protocol_replay_equals_filter() {
        let mut rng = seeded(11);
        for _ in 0..100 {
            let (fa, _) = FilterOperator::rescaled(random_complex_matrix(2, 3, &mut rng), Side::A).unwrap();
            let (fb, _) = FilterOperator::rescaled(random_complex_matrix(2, 3, &mut rng), Side::B).unwrap();
            let rho: DensityMatrix<f64> = random_state(3, 3, &mut rng);
            let (direct, p1) = apply_filter(&rho, &fa, &fb).unwrap();
            let (pa, pb) = (fa.protocol().unwrap(), fb.protocol().unwrap());
            assert!(pa.recompose().max_abs_diff(fa.matrix()) < 1e-12);
            let (staged, p2) = apply_protocols(&rho, &pa, &pb).unwrap();
            assert!((p1 - p2).abs() < 1e-12);
            assert!(direct.matrix().max_abs_diff(staged.matrix()) < 1e-12);
        }
    }

    #[test]
    fn filter_doc_round_trip() {
        let (f, _) = proj(3, (1, 2));
        let s = serde_json::to_string(&f.to_doc()).unwrap();
        assert!(s.contains("\"side\":\"A\"") && s.contains("\"rows\":2"));
        let back = FilterOperator::from_doc(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn output_is_normalized() {
        let mut rng = seeded(12);
        for _ in 0..20 {
            let (fa, _) = FilterOperator::rescaled(random_complex_matrix(2, 3, &mut rng), Side::A).unwrap();
            let (fb, _) = FilterOperator::rescaled(random_complex_matrix(3, 3, &mut rng), Side::B).unwrap();
            let rho: DensityMatrix<f64> = random_state(3, 3, &mut rng);
            let (out, p) = apply_filter(&rho, &fa, &fb).unwrap();
            assert!(p > 0.0 && p <= 1.0 + 1e-12);
            assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
            assert!(out.matrix().trace().im.abs() < 1e-12);
        }
    }
}
