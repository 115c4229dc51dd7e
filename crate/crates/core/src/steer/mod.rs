//! Steering and Bell nonlocality: assemblages, steering robustness, Bell
//! correlations, nonlocal content and see-saw searches.

mod bell;
mod robustness;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::MatrixDoc;
use crate::qmat::{herm_eig, svd, CMatrix, DensityMatrix, Side};
use crate::random::haar_unitary;

pub use bell::{
    correlation_from, nonlocal_content, nonlocal_content_full, seesaw_bell, BellFunctional, BellSeesaw,
    NonlocalContent, MAX_LOCAL_VERTICES,
};
pub use robustness::{
    sr_state_lower_bound, steering_robustness, steering_robustness_full, white_noise_robustness, SrBound, SrSolution,
    MAX_STRATEGIES,
};

type C64 = Complex<f64>;
type M = CMatrix<f64>;

/// Tolerance on effect positivity and completeness.
pub const MEAS_TOL: f64 = 1e-9;

/// Local measurements `M_{a|x}` on a `dim`-dimensional system.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    pub n_settings: usize,
    pub n_outcomes: usize,
    pub effects: Vec<Vec<M>>,
}

impl MeasurementSet {
    pub fn new(effects: Vec<Vec<M>>) -> Result<Self> {
        let n_settings = effects.len();
        let n_outcomes = effects.first().map_or(0, |e| e.len());
        if n_settings == 0 || n_outcomes == 0 {
            return Err(Error::InvalidParameter("empty measurement set".into()));
        }
        let dim = effects[0][0].rows();
        for (x, povm) in effects.iter().enumerate() {
            if povm.len() != n_outcomes {
                return Err(Error::InvalidParameter(format!("setting {x} has {} outcomes", povm.len())));
            }
            let mut sum = M::zeros(dim, dim);
            for e in povm {
                if e.rows() != dim || e.cols() != dim {
                    return Err(Error::DimensionMismatch(format!("effect of size {}x{}", e.rows(), e.cols())));
                }
                if !e.is_hermitian(MEAS_TOL) {
                    return Err(Error::InvalidParameter(format!("setting {x}: effect not Hermitian")));
                }
                let low = herm_eig(&e.hermitian_part())?.min();
                if low < -MEAS_TOL {
                    return Err(Error::NegativeEigenvalue(low));
                }
                sum += e;
            }
            let dev = sum.max_abs_diff(&M::identity(dim));
            if dev > MEAS_TOL {
                return Err(Error::InvalidParameter(format!("setting {x}: effects sum to I only within {dev:e}")));
            }
        }
        Ok(Self { n_settings, n_outcomes, effects })
    }

    pub fn dim(&self) -> usize {
        self.effects[0][0].rows()
    }

    /// Projective measurements from orthonormal bases (columns). With
    /// `n_outcomes < d`, outcome `a < n_outcomes − 1` is column `a` and the
    /// last outcome collects the remaining columns.
    pub fn projective(bases: &[M], n_outcomes: usize) -> Result<Self> {
        let effects = bases
            .iter()
            .map(|u| {
                if u.unitary_deviation() > 1e-9 {
                    return Err(Error::NotUnitary(u.unitary_deviation()));
                }
                Ok(projectors(u, n_outcomes))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(effects)
    }

    /// `n_settings` Haar-random projective measurements.
    pub fn random_projective<R: Rng + ?Sized>(d: usize, n_settings: usize, n_outcomes: usize, rng: &mut R) -> Self {
        let bases: Vec<M> = (0..n_settings).map(|_| haar_unitary(d, rng)).collect();
        Self::projective(&bases, n_outcomes).expect("Haar bases are unitary")
    }

    /// Qubit Pauli measurements in the order given (`0 = X`, `1 = Y`, `2 = Z`).
    pub fn pauli(which: &[usize]) -> Result<Self> {
        let h = 1.0 / 2f64.sqrt();
        let bases: Vec<M> = which
            .iter()
            .map(|&k| match k {
                0 => Ok(M::from_fn(2, 2, |i, j| C64::new(if i == 1 && j == 1 { -h } else { h }, 0.0))),
                1 => Ok(M::from_fn(2, 2, |i, j| match (i, j) {
                    (0, _) => C64::new(h, 0.0),
                    (1, 0) => C64::new(0.0, h),
                    _ => C64::new(0.0, -h),
                })),
                2 => Ok(M::identity(2)),
                _ => Err(Error::InvalidParameter(format!("Pauli index {k}"))),
            })
            .collect::<Result<_>>()?;
        Self::projective(&bases, 2)
    }
}

/// Outcome of each basis column for a projective measurement with
/// `n` bases starting with the computational one, followed by the
/// quadratic-phase Fourier bases `(1/√d) Σ_j ω^{k j² + m j} |j⟩`, which are
/// mutually unbiased for prime `d`. For qubits these are the Z, X and Y
/// eigenbases. Settings beyond the available bases repeat cyclically.
pub(crate) fn structured_bases(d: usize, n: usize) -> Vec<M> {
    let norm = 1.0 / (d as f64).sqrt();
    let phase = |t: f64| C64::from_polar(norm, t);
    (0..n)
        .map(|s| match s % (d + 1) {
            0 => M::identity(d),
            k => M::from_fn(d, d, |j, m| {
                let (jf, mf, kf) = (j as f64, m as f64, (k - 1) as f64);
                if d == 2 {
                    // the chirp is trivial for d = 2; use the i phase instead
                    phase(std::f64::consts::PI * (mf * jf + 0.5 * kf * jf))
                } else {
                    phase(2.0 * std::f64::consts::PI * (kf * jf * jf + mf * jf) / d as f64)
                }
            }),
        })
        .collect()
}

/// `n_outcomes` outcomes on a `d`-dimensional space.
pub(crate) fn grouping(d: usize, n_outcomes: usize) -> Vec<usize> {
    (0..d).map(|j| j.min(n_outcomes - 1)).collect()
}

pub(crate) fn projectors(u: &M, n_outcomes: usize) -> Vec<M> {
    let d = u.rows();
    let mut out = vec![M::zeros(d, d); n_outcomes];
    for (j, a) in grouping(d, n_outcomes).into_iter().enumerate() {
        out[a] += &M::projector(&u.column(j));
    }
    out
}

/// Maximizes `Σ_j e_j† K_{g(j)} e_j` over orthonormal bases `{e_j}` (columns
/// of `u`), starting from `u0`.
///
/// After shifting every `K` by a common multiple of `I`, which only adds a
/// constant, the objective is convex in the basis. Moving to the unitary
/// that maximizes its linearization, the polar factor of the gradient,
/// therefore never decreases it.
pub(crate) fn polar_basis_ascent(ops: &[M], group: &[usize], u0: M) -> Result<(f64, M)> {
    let d = u0.rows();
    let mut shift = 0.0f64;
    for k in ops {
        shift = shift.min(herm_eig(&k.hermitian_part())?.min());
    }
    let value = |u: &M| -> f64 { (0..d).map(|j| ops[group[j]].sandwich(&u.column(j), &u.column(j)).re).sum() };
    let mut u = u0;
    let mut f = value(&u);
    for _ in 0..1000 {
        let mut g = M::zeros(d, d);
        for j in 0..d {
            let col = u.column(j);
            let kcol = ops[group[j]].matvec(&col);
            for i in 0..d {
                g[(i, j)] = kcol[i] - col[i] * shift;
            }
        }
        let dec = svd(&g);
        let cand = &dec.u * &dec.vdag;
        let fc = value(&cand);
        if fc <= f + 1e-14 {
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

/// `tr_A[(M ⊗ I)ρ]` when `side = A`, `tr_B[(I ⊗ M)ρ]` when `side = B`.
pub fn conditional(rho: &M, da: usize, db: usize, m: &M, side: Side) -> M {
    match side {
        Side::A => M::from_fn(db, db, |j, l| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..da {
                for k in 0..da {
                    acc += m[(i, k)] * rho[(k * db + j, i * db + l)];
                }
            }
            acc
        }),
        Side::B => M::from_fn(da, da, |i, k| {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..db {
                for l in 0..db {
                    acc += m[(j, l)] * rho[(i * db + l, k * db + j)];
                }
            }
            acc
        }),
    }
}

/// Sub-normalized conditional states `σ_{a|x}` of the steered party.
#[derive(Clone, Debug, PartialEq)]
pub struct Assemblage {
    pub n_settings: usize,
    pub n_outcomes: usize,
    pub sigma: Vec<Vec<M>>,
}

/// Positivity and normalization tolerance for assemblages.
pub const ASSEMBLAGE_TOL: f64 = 1e-9;
/// Tolerance on the no-signaling condition.
pub const NO_SIGNALING_TOL: f64 = 1e-8;

impl Assemblage {
    pub fn new(sigma: Vec<Vec<M>>) -> Result<Self> {
        let n_settings = sigma.len();
        let n_outcomes = sigma.first().map_or(0, |s| s.len());
        if n_settings == 0 || n_outcomes == 0 {
            return Err(Error::InvalidParameter("empty assemblage".into()));
        }
        let dim = sigma[0][0].rows();
        let mut reduced: Option<M> = None;
        for (x, row) in sigma.iter().enumerate() {
            if row.len() != n_outcomes {
                return Err(Error::InvalidParameter(format!("setting {x} has {} outcomes", row.len())));
            }
            let mut sum = M::zeros(dim, dim);
            for s in row {
                if s.rows() != dim {
                    return Err(Error::DimensionMismatch("assemblage element size".into()));
                }
                let low = herm_eig(&s.hermitian_part())?.min();
                if low < -ASSEMBLAGE_TOL {
                    return Err(Error::NegativeEigenvalue(low));
                }
                sum += s;
            }
            let tr = sum.trace().re;
            if (tr - 1.0).abs() > ASSEMBLAGE_TOL {
                return Err(Error::InvalidParameter(format!("setting {x}: total trace {tr}")));
            }
            match &reduced {
                None => reduced = Some(sum),
                Some(r) => {
                    let dev = r.max_abs_diff(&sum);
                    if dev > NO_SIGNALING_TOL {
                        return Err(Error::InvalidParameter(format!("signaling deviation {dev:e} at setting {x}")));
                    }
                }
            }
        }
        Ok(Self { n_settings, n_outcomes, sigma })
    }

    pub fn dim(&self) -> usize {
        self.sigma[0][0].rows()
    }

    /// `Σ_a σ_{a|0}`, the steered party's reduced state.
    pub fn reduced(&self) -> M {
        let d = self.dim();
        self.sigma[0].iter().fold(M::zeros(d, d), |acc, s| &acc + s)
    }

    /// `λ·self + (1 − λ)·other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        if self.n_settings != other.n_settings || self.n_outcomes != other.n_outcomes || self.dim() != other.dim() {
            return Err(Error::DimensionMismatch("assemblage scenarios differ".into()));
        }
        let sigma = self
            .sigma
            .iter()
            .zip(&other.sigma)
            .map(|(r1, r2)| r1.iter().zip(r2).map(|(a, b)| &a.scale(lambda) + &b.scale(1.0 - lambda)).collect())
            .collect();
        Self::new(sigma)
    }

    /// The same assemblage restricted to a subset of settings.
    pub fn restrict(&self, settings: &[usize]) -> Result<Self> {
        Self::new(settings.iter().map(|&x| self.sigma[x].clone()).collect())
    }
}

/// Conditional states on the unmeasured side for measurements by
/// `steering_side`.
pub fn assemblage_from(rho: &DensityMatrix<f64>, meas: &MeasurementSet, steering_side: Side) -> Result<Assemblage> {
    let (da, db) = (rho.dim_a(), rho.dim_b());
    let dm = match steering_side {
        Side::A => da,
        Side::B => db,
    };
    if meas.dim() != dm {
        return Err(Error::DimensionMismatch(format!("measurement on dim {} applied to side of dim {dm}", meas.dim())));
    }
    let sigma = meas
        .effects
        .iter()
        .map(|povm| povm.iter().map(|m| conditional(rho.matrix(), da, db, m, steering_side).hermitian_part()).collect())
        .collect();
    Assemblage::new(sigma)
}

#[derive(Serialize, Deserialize)]
struct AssemblageDoc {
    n_settings: usize,
    n_outcomes: usize,
    dim: usize,
    sigma: Vec<Vec<MatrixDoc>>,
}

impl Serialize for Assemblage {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AssemblageDoc {
            n_settings: self.n_settings,
            n_outcomes: self.n_outcomes,
            dim: self.dim(),
            sigma: self.sigma.iter().map(|r| r.iter().map(MatrixDoc::from).collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Assemblage {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = AssemblageDoc::deserialize(d)?;
        let sigma = doc
            .sigma
            .iter()
            .map(|r| r.iter().map(MatrixDoc::to_matrix).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        let a = Assemblage::new(sigma).map_err(serde::de::Error::custom)?;
        if a.n_settings != doc.n_settings || a.n_outcomes != doc.n_outcomes || a.dim() != doc.dim {
            return Err(serde::de::Error::custom("assemblage metadata does not match its tables"));
        }
        Ok(a)
    }
}

/// Joint outcome probabilities `P(a,b|x,y)`, stored flat with index
/// `((x·s_B + y)·o_A + a)·o_B + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub settings_a: usize,
    pub outcomes_a: usize,
    pub settings_b: usize,
    pub outcomes_b: usize,
    pub p: Vec<f64>,
}

/// Tolerance on nonnegativity and per-setting normalization.
pub const CORRELATION_TOL: f64 = 1e-9;

impl Correlation {
    pub fn new(settings_a: usize, outcomes_a: usize, settings_b: usize, outcomes_b: usize, p: Vec<f64>) -> Result<Self> {
        let c = Self { settings_a, outcomes_a, settings_b, outcomes_b, p };
        c.validate()?;
        Ok(c)
    }

    pub fn index(&self, a: usize, b: usize, x: usize, y: usize) -> usize {
        ((x * self.settings_b + y) * self.outcomes_a + a) * self.outcomes_b + b
    }

    pub fn get(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.p[self.index(a, b, x, y)]
    }

    pub fn len(&self) -> usize {
        self.settings_a * self.settings_b * self.outcomes_a * self.outcomes_b
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_empty() || self.p.len() != self.len() {
            return Err(Error::DimensionMismatch(format!("{} probabilities for scenario of size {}", self.p.len(), self.len())));
        }
        if let Some(bad) = self.p.iter().find(|&&q| !q.is_finite() || q < -CORRELATION_TOL) {
            return Err(Error::InvalidParameter(format!("probability {bad}")));
        }
        for x in 0..self.settings_a {
            for y in 0..self.settings_b {
                let s: f64 = (0..self.outcomes_a)
                    .flat_map(|a| (0..self.outcomes_b).map(move |b| (a, b)))
                    .map(|(a, b)| self.get(a, b, x, y))
                    .sum();
                if (s - 1.0).abs() > CORRELATION_TOL {
                    return Err(Error::InvalidParameter(format!("P(·,·|{x},{y}) sums to {s}")));
                }
            }
        }
        let dev = self.signaling_deviation();
        if dev > NO_SIGNALING_TOL {
            return Err(Error::InvalidParameter(format!("signaling deviation {dev:e}")));
        }
        Ok(())
    }

    /// Largest dependence of either marginal on the other party's setting.
    pub fn signaling_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for x in 0..self.settings_a {
            for a in 0..self.outcomes_a {
                let m0: f64 = (0..self.outcomes_b).map(|b| self.get(a, b, x, 0)).sum();
                for y in 1..self.settings_b {
                    let m: f64 = (0..self.outcomes_b).map(|b| self.get(a, b, x, y)).sum();
                    dev = dev.max((m - m0).abs());
                }
            }
        }
        for y in 0..self.settings_b {
            for b in 0..self.outcomes_b {
                let m0: f64 = (0..self.outcomes_a).map(|a| self.get(a, b, 0, y)).sum();
                for x in 1..self.settings_a {
                    let m: f64 = (0..self.outcomes_a).map(|a| self.get(a, b, x, y)).sum();
                    dev = dev.max((m - m0).abs());
                }
            }
        }
        dev
    }

    /// Local deterministic box with responses `a = fa[x]`, `b = fb[y]`.
    pub fn deterministic(fa: &[usize], outcomes_a: usize, fb: &[usize], outcomes_b: usize) -> Result<Self> {
        let (sa, sb) = (fa.len(), fb.len());
        if fa.iter().any(|&a| a >= outcomes_a) || fb.iter().any(|&b| b >= outcomes_b) {
            return Err(Error::InvalidParameter("response outside outcome range".into()));
        }
        let mut p = vec![0.0; sa * sb * outcomes_a * outcomes_b];
        for x in 0..sa {
            for y in 0..sb {
                p[((x * sb + y) * outcomes_a + fa[x]) * outcomes_b + fb[y]] = 1.0;
            }
        }
        Self::new(sa, outcomes_a, sb, outcomes_b, p)
    }

    /// Popescu–Rohrlich box, `a ⊕ b = x·y`.
    pub fn pr_box() -> Self {
        let mut p = vec![0.0; 16];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    let b = a ^ (x & y);
                    p[((x * 2 + y) * 2 + a) * 2 + b] = 0.5;
                }
            }
        }
        Self::new(2, 2, 2, 2, p).expect("PR box is a valid box")
    }

    /// Uniformly random outcomes.
    pub fn white_noise(settings_a: usize, outcomes_a: usize, settings_b: usize, outcomes_b: usize) -> Self {
        let n = settings_a * settings_b * outcomes_a * outcomes_b;
        let w = 1.0 / (outcomes_a * outcomes_b) as f64;
        Self::new(settings_a, outcomes_a, settings_b, outcomes_b, vec![w; n]).expect("uniform box is valid")
    }

    /// `λ·self + (1 − λ)·other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        if (self.settings_a, self.outcomes_a, self.settings_b, self.outcomes_b)
            != (other.settings_a, other.outcomes_a, other.settings_b, other.outcomes_b)
        {
            return Err(Error::DimensionMismatch("correlation scenarios differ".into()));
        }
        let p = self.p.iter().zip(&other.p).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
        Self::new(self.settings_a, self.outcomes_a, self.settings_b, self.outcomes_b, p)
    }

    /// `E(x,y) = Σ (−1)^{a+b} P(a,b|x,y)` for two-outcome settings.
    pub fn correlator(&self, x: usize, y: usize) -> f64 {
        let mut e = 0.0;
        for a in 0..self.outcomes_a {
            for b in 0..self.outcomes_b {
                let s = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                e += s * self.get(a, b, x, y);
            }
        }
        e
    }
}
