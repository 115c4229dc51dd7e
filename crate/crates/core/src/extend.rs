//! Symmetric extensions of a bipartite state, their quasi-extension
//! relaxation, and the bosonic restriction.
//!
//! For `k` copies of one side the program is
//!
//! ```text
//! minimize t   s.t.   tr_{all but copy i}(ρ̃) = ρ + (t − 1)·I/D   for every copy i,
//! ```
//!
//! with `ρ̃ ⪰ 0` (SE), `ρ̃ = P + Σ_p Q_p^{T_p}` with `P, Q_p ⪰ 0` (SQE), or
//! `ρ̃ = W X W†` with `W` the isometry onto the symmetric subspace of the
//! copies (SE-B). An extension of `ρ` itself exists iff `t* ≤ 1`.
//!
//! Copies of the extended side are adjacent in tensor order: `A ⊗ B₁…B_k`
//! when extending `B`, and `A₁…A_k ⊗ B` when extending `A`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{kron, CMatrix, DensityMatrix, Side};
use crate::solver::{solve, Cone, ConicProgram, HermitianMap, ProgramBuilder, SolverOptions, Status};
use crate::states::{n_plus, werner};

/// Largest extension space handled, `3⁵`.
pub const MAX_EXTENSION_DIM: usize = 243;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flavor {
    #[serde(rename = "SE")]
    Symmetric,
    #[serde(rename = "SQE")]
    Quasi,
    #[serde(rename = "SE_B")]
    Bosonic,
}

impl std::fmt::Display for Flavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Flavor::Symmetric => "SE",
            Flavor::Quasi => "SQE",
            Flavor::Bosonic => "SE_B",
        })
    }
}

impl std::str::FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SE" | "se" => Ok(Flavor::Symmetric),
            "SQE" | "sqe" => Ok(Flavor::Quasi),
            "SE_B" | "se_b" | "SEB" | "seb" => Ok(Flavor::Bosonic),
            _ => Err(Error::InvalidParameter(format!("unknown extension flavor `{s}`"))),
        }
    }
}

/// One side of a bipartition of the `k + 1` parties: the listed copies
/// (0-based) and, if `other` is set, the unextended party.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub copies: Vec<usize>,
    pub other: bool,
}

impl Cut {
    fn parties(&self) -> usize {
        self.copies.len() + usize::from(self.other)
    }
}

#[derive(Clone, Debug)]
pub struct ExtensionQuery {
    pub rho: DensityMatrix<f64>,
    pub k: usize,
    pub side: Side,
    pub flavor: Flavor,
    /// Quasi-extension only; defaults per [`default_cuts`].
    pub partitions: Option<Vec<Cut>>,
}

impl ExtensionQuery {
    pub fn new(rho: DensityMatrix<f64>, k: usize, side: Side, flavor: Flavor) -> Self {
        Self { rho, k, side, flavor, partitions: None }
    }

    fn side_dim(&self) -> usize {
        match self.side {
            Side::A => self.rho.dim_a(),
            Side::B => self.rho.dim_b(),
        }
    }

    fn other_dim(&self) -> usize {
        match self.side {
            Side::A => self.rho.dim_b(),
            Side::B => self.rho.dim_a(),
        }
    }

    /// Local dimensions of the extension in tensor order.
    fn dims(&self) -> Vec<usize> {
        let (ds, dother) = (self.side_dim(), self.other_dim());
        match self.side {
            Side::B => std::iter::once(dother).chain(std::iter::repeat_n(ds, self.k)).collect(),
            Side::A => std::iter::repeat_n(ds, self.k).chain(std::iter::once(dother)).collect(),
        }
    }

    /// Tensor position of copy `i` and of the other party.
    fn copy_pos(&self, i: usize) -> usize {
        match self.side {
            Side::B => 1 + i,
            Side::A => i,
        }
    }

    fn other_pos(&self) -> usize {
        match self.side {
            Side::B => 0,
            Side::A => self.k,
        }
    }

    /// Subsystems kept for the marginal on (copy i, other), in `A, B` order.
    fn keep(&self, i: usize) -> Vec<usize> {
        let mut v = vec![self.copy_pos(i), self.other_pos()];
        v.sort_unstable();
        v
    }

    fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidParameter(format!("k = {} < 2", self.k)));
        }
        let ext = self.side_dim().checked_pow(self.k as u32).and_then(|x| x.checked_mul(self.other_dim()));
        match ext {
            Some(n) if n <= MAX_EXTENSION_DIM => {}
            _ => {
                return Err(Error::TooLarge(format!(
                    "extension space {}^{}·{} exceeds {MAX_EXTENSION_DIM}",
                    self.side_dim(),
                    self.k,
                    self.other_dim()
                )))
            }
        }
        if self.flavor == Flavor::Quasi && self.partitions.is_none() && self.k > 4 {
            return Err(Error::TooLarge(format!("quasi-extension with k = {} has no default partition set", self.k)));
        }
        Ok(())
    }
}

/// Every bipartition of the `k + 1` parties (one representative each) for
/// `k ≤ 3`; for `k = 4` the subset `{A₁}, {B}, {A₁A₂}, {A₁B}` written with
/// the extended side in the role of `A`.
pub fn default_cuts(k: usize) -> Vec<Cut> {
    if k == 4 {
        return vec![
            Cut { copies: vec![0], other: false },
            Cut { copies: vec![], other: true },
            Cut { copies: vec![0, 1], other: false },
            Cut { copies: vec![0], other: true },
        ];
    }
    // subsets of the k+1 parties containing party 0 (copy 0), minus the full set
    let parties = k + 1;
    let mut cuts = Vec::new();
    for mask in 1u32..(1u32 << parties) - 1 {
        if mask & 1 == 0 {
            continue;
        }
        let copies: Vec<usize> = (0..k).filter(|&i| mask & (1 << i) != 0).collect();
        let other = mask & (1 << k) != 0;
        cuts.push(Cut { copies, other });
    }
    cuts
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionResult {
    pub t_star: f64,
    pub status: Status,
    pub extension_exists: bool,
    pub gap: f64,
    pub iterations: usize,
}

/// Orthonormal basis of the symmetric subspace of `(ℂᵈ)^⊗k` as the columns
/// of a `d^k × C(d+k−1, k)` isometry, ordered by sorted occupation tuple.
pub fn symmetric_subspace_isometry(d: usize, k: usize) -> Result<CMatrix<f64>> {
    let n = d.checked_pow(k as u32).filter(|&n| n <= MAX_EXTENSION_DIM);
    let Some(n) = n else {
        return Err(Error::TooLarge(format!("{d}^{k} exceeds {MAX_EXTENSION_DIM}")));
    };
    let dims = vec![d; k];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for idx in 0..n {
        let mut digits = crate::qmat::to_digits(idx, &dims);
        digits.sort_unstable();
        match classes.binary_search(&digits) {
            Ok(pos) => members[pos].push(idx),
            Err(pos) => {
                classes.insert(pos, digits);
                members.insert(pos, vec![idx]);
            }
        }
    }
    let mut v = CMatrix::zeros(n, classes.len());
    for (col, mem) in members.iter().enumerate() {
        let amp = 1.0 / (mem.len() as f64).sqrt();
        for &idx in mem {
            v[(idx, col)] = crate::qmat::c(amp, 0.0);
        }
    }
    Ok(v)
}

/// Builds the extension program. Variable block 0 is `t`.
pub fn extension_program(q: &ExtensionQuery) -> Result<ConicProgram> {
    q.validate()?;
    let dims = q.dims();
    let n_ext: usize = dims.iter().product();
    let d = q.rho.dim();
    let id = CMatrix::<f64>::identity(d);
    let rhs = q.rho.matrix() - &id.scale(1.0 / d as f64);
    let neg_id = id.scale(-1.0 / d as f64);

    let mut b = ProgramBuilder::new();
    let t = b.add_block(Cone::NonNeg(1));
    b.add_objective(t, 0, 1.0);

    match q.flavor {
        Flavor::Symmetric => {
            let x = b.add_block(Cone::Psd(n_ext));
            for i in 0..q.k {
                let map = HermitianMap::partial_trace(&dims, &q.keep(i));
                b.add_hermitian_equality(&[(x, &map)], &[(t, 0, &neg_id)], &rhs)?;
            }
        }
        Flavor::Quasi => {
            let cuts = q.partitions.clone().unwrap_or_else(|| default_cuts(q.k));
            for cut in &cuts {
                if cut.copies.iter().any(|&c| c >= q.k) || cut.parties() == 0 || cut.parties() == q.k + 1 {
                    return Err(Error::InvalidParameter(format!("invalid bipartition {cut:?}")));
                }
            }
            let p = b.add_block(Cone::Psd(n_ext));
            let qs: Vec<_> = cuts.iter().map(|_| b.add_block(Cone::Psd(n_ext))).collect();
            for i in 0..q.k {
                let keep = q.keep(i);
                let pmap = HermitianMap::partial_trace(&dims, &keep);
                let qmaps: Vec<HermitianMap> = cuts
                    .iter()
                    .map(|cut| {
                        let mut parts: Vec<usize> = cut.copies.iter().map(|&c| q.copy_pos(c)).collect();
                        if cut.other {
                            parts.push(q.other_pos());
                        }
                        HermitianMap::partial_trace_transposed(&dims, &keep, &parts)
                    })
                    .collect();
                let mut terms = vec![(p, &pmap)];
                terms.extend(qs.iter().copied().zip(qmaps.iter()));
                b.add_hermitian_equality(&terms, &[(t, 0, &neg_id)], &rhs)?;
            }
        }
        Flavor::Bosonic => {
            let v = symmetric_subspace_isometry(q.side_dim(), q.k)?;
            let io = CMatrix::identity(q.other_dim());
            let w = match q.side {
                Side::B => kron(&io, &v),
                Side::A => kron(&v, &io),
            };
            let x = b.add_block(Cone::Psd(w.cols()));
            // every copy gives the same marginal on the symmetric subspace
            let map = HermitianMap::partial_trace_congruence(&dims, &q.keep(0), &w);
            b.add_hermitian_equality(&[(x, &map)], &[(t, 0, &neg_id)], &rhs)?;
        }
    }
    Ok(b.build())
}

fn default_options(q: &ExtensionQuery) -> SolverOptions {
    let mut o = SolverOptions::default();
    if q.k >= 4 {
        o.max_iter *= 4;
    }
    o
}

/// Solves the extension program for any flavor.
pub fn extension(q: &ExtensionQuery, opts: Option<&SolverOptions>) -> Result<ExtensionResult> {
    let prog = extension_program(q)?;
    let opts = opts.copied().unwrap_or_else(|| default_options(q));
    let sol = solve(&prog, &opts)?;
    let t_star = sol.primal_obj;
    Ok(ExtensionResult {
        t_star,
        status: sol.status,
        extension_exists: sol.status == Status::Optimal && t_star <= 1.0 + 1e-6,
        gap: sol.gap,
        iterations: sol.iterations,
    })
}

pub fn symmetric_extension(q: &ExtensionQuery) -> Result<ExtensionResult> {
    extension(&ExtensionQuery { flavor: Flavor::Symmetric, ..q.clone() }, None)
}

pub fn quasi_extension(q: &ExtensionQuery) -> Result<ExtensionResult> {
    extension(&ExtensionQuery { flavor: Flavor::Quasi, ..q.clone() }, None)
}

pub fn bosonic_extension(q: &ExtensionQuery) -> Result<ExtensionResult> {
    extension(&ExtensionQuery { flavor: Flavor::Bosonic, ..q.clone() }, None)
}

/// `v_t = (n₊/D)(t*₀ − 1)/t*₀`, the symmetric weight above which the
/// Werner family becomes extendible, from the optimum at `v = 0`.
pub fn critical_weight(t_star_at_v0: f64, d: usize) -> f64 {
    if t_star_at_v0 <= 1.0 {
        return 0.0;
    }
    let dd = (d * d) as f64;
    n_plus(d) as f64 / dd * (t_star_at_v0 - 1.0) / t_star_at_v0
}

/// `½(1 − (d − 1)/k)`, the extendibility threshold of Werner states.
pub fn werner_symmetric_threshold(d: usize, k: usize) -> f64 {
    0.5 * (1.0 - (d as f64 - 1.0) / k as f64)
}

/// Smallest `v` at which `W⁽ᵈ⁾(v)` has a `k`-copy extension of the given
/// flavor, by bisection on [`ExtensionResult::extension_exists`].
pub fn extension_threshold(d: usize, k: usize, side: Side, flavor: Flavor, v_tol: f64) -> Result<f64> {
    let exists = |v: f64| -> Result<bool> {
        let q = ExtensionQuery::new(werner(d, v)?, k, side, flavor);
        Ok(extension(&q, None)?.extension_exists)
    };
    if exists(0.0)? {
        return Ok(0.0);
    }
    if !exists(1.0)? {
        return Err(Error::NoSignChange);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > v_tol {
        let mid = 0.5 * (lo + hi);
        if exists(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
