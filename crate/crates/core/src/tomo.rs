//! Simulated coincidence tomography and iterative maximum-likelihood
//! reconstruction.
//!
//! Each party projects onto one vector of a local frame, and every pair of
//! frame vectors is one setting. Frames are overcomplete, so the product
//! projectors `Π_k` do not sum to the identity. Reconstruction works in
//! whitened coordinates `σ = S^{1/2} ρ S^{1/2} / tr(Sρ)`, with
//! `S = Σ_k Π_k`, where the whitened projectors form a complete POVM and
//! the log-likelihood is `Σ_k f_k ln q_k`.

use std::io::{Read, Write};

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{herm_eig, kron, kron_ket, CMatrix, DensityMatrix, Ket};
use crate::random::{derive_seed, seeded};
use crate::solver::vectorize;

type C64 = Complex<f64>;
type M = CMatrix<f64>;

/// Named local measurement vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub labels: Vec<String>,
    pub vectors: Vec<Ket<f64>>,
}

fn ket(entries: &[(f64, f64)]) -> Ket<f64> {
    entries.iter().map(|&(re, im)| C64::new(re, im)).collect()
}

/// The nine path-qutrit vectors `M1 … M9`.
pub fn qutrit_bases() -> Frame {
    let h = 1.0 / 2f64.sqrt();
    let vectors = vec![
        ket(&[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]),
        ket(&[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0)]),
        ket(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]),
        ket(&[(h, 0.0), (h, 0.0), (0.0, 0.0)]),
        ket(&[(h, 0.0), (0.0, h), (0.0, 0.0)]),
        ket(&[(h, 0.0), (0.0, 0.0), (h, 0.0)]),
        ket(&[(h, 0.0), (0.0, 0.0), (0.0, h)]),
        ket(&[(0.0, 0.0), (h, 0.0), (h, 0.0)]),
        ket(&[(0.0, 0.0), (h, 0.0), (0.0, h)]),
    ];
    Frame { labels: (1..=9).map(|i| format!("M{i}")).collect(), vectors }
}

/// Six qubit vectors: `|0⟩, |1⟩, |±⟩, |±i⟩`.
pub fn qubit_frame() -> Frame {
    let h = 1.0 / 2f64.sqrt();
    let vectors = vec![
        ket(&[(1.0, 0.0), (0.0, 0.0)]),
        ket(&[(0.0, 0.0), (1.0, 0.0)]),
        ket(&[(h, 0.0), (h, 0.0)]),
        ket(&[(h, 0.0), (-h, 0.0)]),
        ket(&[(h, 0.0), (0.0, h)]),
        ket(&[(h, 0.0), (0.0, -h)]),
    ];
    Frame { labels: (1..=6).map(|i| format!("Q{i}")).collect(), vectors }
}

/// Frame identified by its labels.
pub fn frame_for_labels(labels: &[String]) -> Result<Frame> {
    for f in [qutrit_bases(), qubit_frame()] {
        if f.labels == labels {
            return Ok(f);
        }
    }
    Err(Error::InvalidParameter(format!("unknown frame labels {labels:?}")))
}

impl Frame {
    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Product projector of setting `(i, j)`.
    pub fn projector(&self, i: usize, j: usize) -> M {
        M::projector(&kron_ket(&self.vectors[i], &self.vectors[j]))
    }

    /// All product projectors, row-major in `(i, j)`.
    pub fn projectors(&self) -> Vec<M> {
        let n = self.len();
        (0..n * n).map(|k| self.projector(k / n, k % n)).collect()
    }

    /// Rank of the product projectors as a linear map on two-party
    /// Hermitian operators; `D²` means they determine any state.
    pub fn product_rank(&self) -> Result<usize> {
        let rows: Vec<Vec<f64>> = self.projectors().iter().map(vectorize).collect();
        let n = rows[0].len();
        let gram = M::from_fn(n, n, |a, b| C64::new(rows.iter().map(|r| r[a] * r[b]).sum(), 0.0));
        let eig = herm_eig(&gram)?;
        let top = eig.max();
        Ok(eig.eigenvalues.iter().filter(|&&l| l > 1e-10 * top).count())
    }
}

/// Coincidence counts of every setting pair.
#[derive(Clone, Debug, PartialEq)]
pub struct CountsRecord {
    pub frame: Frame,
    /// `counts[i][j]` for Alice's vector `i` and Bob's vector `j`.
    pub counts: Vec<Vec<u64>>,
    /// Mean number of trials per setting.
    pub shots: u64,
    pub seed: u64,
    pub state_tag: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsMeta {
    #[serde(rename = "N")]
    pub n: u64,
    pub seed: u64,
    pub state_tag: String,
}

fn setting_probabilities(rho: &DensityMatrix<f64>, frame: &Frame) -> Result<Vec<Vec<f64>>> {
    let d = frame.dim();
    if rho.dim_a() != d || rho.dim_b() != d {
        return Err(Error::DimensionMismatch(format!(
            "frame of dimension {d} for a {}x{} state",
            rho.dim_a(),
            rho.dim_b()
        )));
    }
    let n = frame.len();
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = kron_ket(&frame.vectors[i], &frame.vectors[j]);
                    rho.matrix().sandwich(&v, &v).re.max(0.0)
                })
                .collect()
        })
        .collect())
}

/// Poisson counts with means `N·⟨M_i⊗M_j|ρ|M_i⊗M_j⟩`.
pub fn simulate_counts(rho: &DensityMatrix<f64>, frame: &Frame, shots: u64, seed: u64, state_tag: &str) -> Result<CountsRecord> {
    if shots == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    let probs = setting_probabilities(rho, frame)?;
    let mut rng = seeded(seed);
    let counts = probs
        .iter()
        .map(|row| row.iter().map(|&p| poisson(shots as f64 * p, &mut rng)).collect())
        .collect();
    Ok(CountsRecord { frame: frame.clone(), counts, shots, seed, state_tag: state_tag.into() })
}

/// Counts equal to their expected values, rounded.
pub fn expected_counts(rho: &DensityMatrix<f64>, frame: &Frame, shots: u64, state_tag: &str) -> Result<CountsRecord> {
    if shots == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    let probs = setting_probabilities(rho, frame)?;
    let counts = probs.iter().map(|row| row.iter().map(|&p| (shots as f64 * p).round() as u64).collect()).collect();
    Ok(CountsRecord { frame: frame.clone(), counts, shots, seed: 0, state_tag: state_tag.into() })
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite mean");
    dist.sample(rng) as u64
}

impl CountsRecord {
    pub fn meta(&self) -> CountsMeta {
        CountsMeta { n: self.shots, seed: self.seed, state_tag: self.state_tag.clone() }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Header of frame labels, then one row per Alice vector.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.frame.labels).map_err(csv_err)?;
        for row in &self.counts {
            wr.write_record(row.iter().map(u64::to_string)).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, meta: &CountsMeta) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let labels: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
        let frame = frame_for_labels(&labels)?;
        let mut counts = Vec::new();
        for (line, rec) in rd.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let row = rec
                .iter()
                .map(|s| s.trim().parse::<u64>().map_err(|e| Error::Parse { line: line + 2, msg: e.to_string() }))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != frame.len() {
                return Err(Error::Parse { line: line + 2, msg: format!("{} columns", row.len()) });
            }
            counts.push(row);
        }
        if counts.len() != frame.len() {
            return Err(Error::Parse { line: counts.len() + 1, msg: format!("{} data rows", counts.len()) });
        }
        Ok(Self { frame, counts, shots: meta.n, seed: meta.seed, state_tag: meta.state_tag.clone() })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse { line: e.position().map_or(0, |p| p.line() as usize), msg: e.to_string() }
}

#[derive(Clone, Debug)]
pub struct MleResult {
    pub state: DensityMatrix<f64>,
    /// Log-likelihood before the first and after every iteration.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

struct Whitened {
    povm: Vec<M>,
    s_half: M,
    s_inv_half: M,
}

fn whiten(frame: &Frame) -> Result<Whitened> {
    let projs = frame.projectors();
    let dim = projs[0].rows();
    let s = projs.iter().fold(M::zeros(dim, dim), |acc, p| &acc + p);
    let eig = herm_eig(&s)?;
    if eig.min() <= 1e-12 {
        return Err(Error::InvalidParameter("frame does not span the state space".into()));
    }
    let s_half = eig.apply(f64::sqrt);
    let s_inv_half = eig.apply(|l| 1.0 / l.sqrt());
    let povm = projs.iter().map(|p| &(&s_inv_half * p) * &s_inv_half).collect();
    Ok(Whitened { povm, s_half, s_inv_half })
}

fn log_likelihood(freqs: &[f64], povm: &[M], sigma: &M) -> f64 {
    freqs
        .iter()
        .zip(povm)
        .filter(|(f, _)| **f > 0.0)
        .map(|(f, p)| f * p.trace_product(sigma).re.max(1e-300).ln())
        .sum()
}

/// Normalizes a Hermitian PSD matrix to unit trace.
fn normalized(m: M) -> M {
    let t = m.trace().re;
    m.hermitian_part().scale(1.0 / t)
}

/// Iterative maximum-likelihood reconstruction.
///
/// Each step is `σ ← (I + εR) σ (I + εR) / tr(·)` with
/// `R = Σ_k (f_k / q_k) Π̃_k`. The step `ε` starts large, where the update
/// is the plain `RσR` iteration, and is halved until the likelihood does
/// not decrease, so the recorded log-likelihood is monotone. Stops when
/// the relative gain falls below `tol` or after `max_iter` steps.
pub fn mle_reconstruct(c: &CountsRecord, max_iter: usize, tol: f64) -> Result<MleResult> {
    let total = c.total();
    if total == 0 {
        return Err(Error::EmptyCounts);
    }
    let freqs: Vec<f64> = c.counts.iter().flatten().map(|&n| n as f64 / total as f64).collect();
    let w = whiten(&c.frame)?;
    let dim = w.s_half.rows();
    let mut sigma = normalized(&(&w.s_half * &M::identity(dim)) * &w.s_half);
    let mut ll = log_likelihood(&freqs, &w.povm, &sigma);
    let mut trace = vec![ll];
    let mut eps: f64 = 1e6;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut r = M::zeros(dim, dim);
        for (f, p) in freqs.iter().zip(&w.povm) {
            if *f > 0.0 {
                let q = p.trace_product(&sigma).re.max(1e-300);
                r += &p.scale(f / q);
            }
        }
        let mut accepted = None;
        let mut e = (eps * 4.0).min(1e6);
        while e > 1e-12 {
            let k = &M::identity(dim) + &r.scale(e);
            let cand = normalized(&(&k * &sigma) * &k.adjoint());
            let lc = log_likelihood(&freqs, &w.povm, &cand);
            if lc >= ll {
                accepted = Some((cand, lc));
                eps = e;
                break;
            }
            e *= 0.5;
        }
        let Some((cand, lc)) = accepted else {
            converged = true;
            break;
        };
        let gain = lc - ll;
        sigma = cand;
        ll = lc;
        trace.push(ll);
        if gain <= tol * ll.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    let rho = normalized(&(&w.s_inv_half * &sigma) * &w.s_inv_half);
    let d = c.frame.dim();
    Ok(MleResult { state: DensityMatrix::project(&rho, d, d)?, log_likelihood: trace, iterations, converged })
}

/// Default iteration cap of [`mle_reconstruct`].
pub const MLE_MAX_ITER: usize = 5000;
/// Default relative likelihood tolerance of [`mle_reconstruct`].
pub const MLE_TOL: f64 = 1e-10;

/// Mean and standard deviation of `stat` over `b` reconstructions from
/// Poisson-resampled counts (each count redrawn with its observed value as
/// mean).
pub fn bootstrap_error<F>(c: &CountsRecord, stat: F, b: usize, seed: u64) -> Result<(f64, f64)>
where
    F: Fn(&DensityMatrix<f64>) -> Result<f64> + Sync,
{
    if b < 10 {
        return Err(Error::InvalidParameter(format!("B = {b} < 10 resamples")));
    }
    let values = (0..b)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded(derive_seed(seed, i as u64));
            let counts = c.counts.iter().map(|row| row.iter().map(|&n| poisson(n as f64, &mut rng)).collect()).collect();
            let rec = CountsRecord { counts, ..c.clone() };
            let rho = mle_reconstruct(&rec, MLE_MAX_ITER, MLE_TOL)?.state;
            stat(&rho)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = values.iter().sum::<f64>() / b as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b as f64 - 1.0);
    Ok((mean, var.sqrt()))
}

/// `Σ_k Π_k` of a frame, exposed for diagnostics.
pub fn frame_operator(frame: &Frame) -> M {
    let s1 = frame.vectors.iter().fold(M::zeros(frame.dim(), frame.dim()), |acc, v| &acc + &M::projector(v));
    kron(&s1, &s1)
}
