//! Real coordinates for Hermitian blocks and a builder for programs whose
//! constraints are Hermitian-matrix equalities.
//!
//! An `n×n` Hermitian `X` is stored as `n²` reals: the diagonal first,
//! then `√2·Re X_ij, √2·Im X_ij` for each `i < j` in row order. The map is
//! an isometry, `tr(XY) = ⟨vec X, vec Y⟩`.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use num_complex::Complex;

use super::sparse::CsrMatrix;
use super::{Cone, ConicProgram};
use crate::error::{Error, Result};
use crate::qmat::CMatrix;

type C64 = Complex<f64>;

/// Position of `(i, j)`, `i < j`, among the off-diagonal pairs.
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    // pairs in rows 0..i, then offset in row i
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Coordinate of the diagonal entry `(i, i)`.
pub fn diag_coord(i: usize) -> usize {
    i
}

/// Coordinates of `√2·Re X_ij` and `√2·Im X_ij` for `i < j`.
pub fn offdiag_coords(n: usize, i: usize, j: usize) -> (usize, usize) {
    let p = n + 2 * pair_index(n, i, j);
    (p, p + 1)
}

pub fn herm_dim(n: usize) -> usize {
    n * n
}

pub fn vectorize(h: &CMatrix<f64>) -> Vec<f64> {
    let n = h.rows();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i] = h[(i, i)].re;
        for j in i + 1..n {
            let (r, m) = offdiag_coords(n, i, j);
            let z = 0.5 * (h[(i, j)] + h[(j, i)].conj());
            v[r] = SQRT_2 * z.re;
            v[m] = SQRT_2 * z.im;
        }
    }
    v
}

pub fn devectorize(v: &[f64], n: usize) -> CMatrix<f64> {
    assert_eq!(v.len(), n * n, "vector length {} for {n}x{n} block", v.len());
    let mut h = CMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(v[i], 0.0);
        for j in i + 1..n {
            let (r, m) = offdiag_coords(n, i, j);
            let z = C64::new(v[r], v[m]) / SQRT_2;
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// `X_rs` as a complex combination of the real coordinates of `X`.
fn entry_coords(n: usize, r: usize, s: usize) -> [(usize, C64); 2] {
    use std::cmp::Ordering::*;
    let inv = 1.0 / SQRT_2;
    match r.cmp(&s) {
        Equal => [(diag_coord(r), C64::new(1.0, 0.0)), (usize::MAX, C64::new(0.0, 0.0))],
        Less => {
            let (a, b) = offdiag_coords(n, r, s);
            [(a, C64::new(inv, 0.0)), (b, C64::new(0.0, inv))]
        }
        Greater => {
            let (a, b) = offdiag_coords(n, s, r);
            [(a, C64::new(inv, 0.0)), (b, C64::new(0.0, -inv))]
        }
    }
}

/// Linear map `X ↦ Y` between Hermitian matrices, listed as terms
/// `Y_pq += coeff · X_rs`. Only terms with `p ≤ q` are used, so the map
/// must send Hermitian inputs to Hermitian outputs.
#[derive(Clone, Debug, Default)]
pub struct HermitianMap {
    pub in_dim: usize,
    pub out_dim: usize,
    pub terms: Vec<(usize, usize, usize, usize, C64)>,
}

impl HermitianMap {
    pub fn new(in_dim: usize, out_dim: usize) -> Self {
        Self { in_dim, out_dim, terms: Vec::new() }
    }

    pub fn push(&mut self, p: usize, q: usize, r: usize, s: usize, coeff: C64) {
        if p <= q {
            self.terms.push((p, q, r, s, coeff));
        }
    }

    /// `X ↦ X`
    pub fn identity(n: usize) -> Self {
        let mut m = Self::new(n, n);
        for p in 0..n {
            for q in p..n {
                m.push(p, q, p, q, C64::new(1.0, 0.0));
            }
        }
        m
    }

    /// `X ↦ K X K†` for a fixed (possibly rectangular) `K`.
    pub fn congruence(k: &CMatrix<f64>) -> Self {
        let (out, inp) = (k.rows(), k.cols());
        let mut m = Self::new(inp, out);
        for p in 0..out {
            for q in p..out {
                for r in 0..inp {
                    if k[(p, r)] == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for s in 0..inp {
                        let w = k[(p, r)] * k[(q, s)].conj();
                        if w != C64::new(0.0, 0.0) {
                            m.push(p, q, r, s, w);
                        }
                    }
                }
            }
        }
        m
    }

    /// Partial trace keeping the subsystems in `keep` (ascending) of a
    /// system with local dimensions `dims`.
    pub fn partial_trace(dims: &[usize], keep: &[usize]) -> Self {
        Self::partial_trace_transposed(dims, keep, &[])
    }

    /// `X ↦ tr_{¬keep}(X^{T_parts})`: partial transpose of the subsystems
    /// in `parts`, then partial trace.
    pub fn partial_trace_transposed(dims: &[usize], keep: &[usize], parts: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        let layout = TraceLayout::new(dims, keep);
        let mut m = Self::new(n, layout.n_out);
        for p in 0..layout.n_out {
            for q in p..layout.n_out {
                for t in 0..layout.n_traced {
                    let (r, s) = crate::qmat::transpose_index(layout.index(p, t), layout.index(q, t), dims, parts);
                    m.push(p, q, r, s, C64::new(1.0, 0.0));
                }
            }
        }
        m
    }

    /// `Z ↦ tr_{¬keep}(K Z K†)` where the rows of `K` index the system with
    /// local dimensions `dims`.
    pub fn partial_trace_congruence(dims: &[usize], keep: &[usize], k: &CMatrix<f64>) -> Self {
        let layout = TraceLayout::new(dims, keep);
        assert_eq!(k.rows(), dims.iter().product::<usize>(), "congruence rows vs dims");
        let nz = k.cols();
        let sparse_rows: Vec<Vec<(usize, C64)>> = (0..k.rows())
            .map(|r| (0..nz).filter(|&c| k[(r, c)] != C64::new(0.0, 0.0)).map(|c| (c, k[(r, c)])).collect())
            .collect();
        let mut m = Self::new(nz, layout.n_out);
        let mut acc: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for p in 0..layout.n_out {
            for q in p..layout.n_out {
                acc.clear();
                for t in 0..layout.n_traced {
                    let rp = &sparse_rows[layout.index(p, t)];
                    let rq = &sparse_rows[layout.index(q, t)];
                    for &(a, wa) in rp {
                        for &(b, wb) in rq {
                            *acc.entry((a, b)).or_insert(C64::new(0.0, 0.0)) += wa * wb.conj();
                        }
                    }
                }
                for (&(a, b), &w) in &acc {
                    if w.norm() > 1e-15 {
                        m.push(p, q, a, b, w);
                    }
                }
            }
        }
        m
    }

    /// Applies the map to a concrete matrix (used for checking).
    pub fn apply(&self, x: &CMatrix<f64>) -> CMatrix<f64> {
        let mut y = CMatrix::zeros(self.out_dim, self.out_dim);
        for &(p, q, r, s, w) in &self.terms {
            y[(p, q)] += w * x[(r, s)];
        }
        for p in 0..self.out_dim {
            for q in p + 1..self.out_dim {
                y[(q, p)] = y[(p, q)].conj();
            }
            y[(p, p)].im = 0.0;
        }
        y
    }
}

/// Index bookkeeping for a partial trace over the complement of `keep`.
struct TraceLayout {
    dims: Vec<usize>,
    keep: Vec<usize>,
    traced: Vec<usize>,
    kept_dims: Vec<usize>,
    traced_dims: Vec<usize>,
    n_out: usize,
    n_traced: usize,
}

impl TraceLayout {
    fn new(dims: &[usize], keep: &[usize]) -> Self {
        let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
        let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
        Self {
            dims: dims.to_vec(),
            keep: keep.to_vec(),
            n_out: kept_dims.iter().product(),
            n_traced: traced_dims.iter().product(),
            traced,
            kept_dims,
            traced_dims,
        }
    }

    /// Full index of kept multi-index `kept` combined with traced `tr`.
    fn index(&self, kept: usize, tr: usize) -> usize {
        let kd = crate::qmat::to_digits(kept, &self.kept_dims);
        let td = crate::qmat::to_digits(tr, &self.traced_dims);
        let mut digits = vec![0; self.dims.len()];
        for (i, &k) in self.keep.iter().enumerate() {
            digits[k] = kd[i];
        }
        for (i, &t) in self.traced.iter().enumerate() {
            digits[t] = td[i];
        }
        crate::qmat::from_digits(&digits, &self.dims)
    }
}

/// Handle to a variable block inside a [`ProgramBuilder`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockRef {
    pub index: usize,
    pub offset: usize,
    pub cone: Cone,
}

/// Rows belonging to one Hermitian equality, for reading its dual.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EqualityRef {
    pub first_row: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ProgramBuilder {
    cones: Vec<Cone>,
    n: usize,
    c: BTreeMap<usize, f64>,
    rows: Vec<BTreeMap<usize, f64>>,
    b: Vec<f64>,
    offset: f64,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, cone: Cone) -> BlockRef {
        let r = BlockRef { index: self.cones.len(), offset: self.n, cone };
        self.n += cone.dim();
        self.cones.push(cone);
        r
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds `w` to the objective coefficient of coordinate `coord` of `block`.
    pub fn add_objective(&mut self, block: BlockRef, coord: usize, w: f64) {
        *self.c.entry(block.offset + coord).or_insert(0.0) += w;
    }

    /// Adds `tr(W X)` to the objective for a PSD block `X`.
    pub fn add_objective_trace(&mut self, block: BlockRef, w: &CMatrix<f64>) {
        for (k, v) in vectorize(w).into_iter().enumerate() {
            if v != 0.0 {
                self.add_objective(block, k, v);
            }
        }
    }

    pub fn add_objective_constant(&mut self, c: f64) {
        self.offset += c;
    }

    /// Scalar equality `Σ w·x = rhs` with entries `(block, coord, w)`.
    pub fn add_scalar_equality(&mut self, entries: &[(BlockRef, usize, f64)], rhs: f64) -> usize {
        let mut row = BTreeMap::new();
        for &(blk, k, w) in entries {
            *row.entry(blk.offset + k).or_insert(0.0) += w;
        }
        self.rows.push(row);
        self.b.push(rhs);
        self.rows.len() - 1
    }

    /// Hermitian equality `Σ maps_i(X_i) + Σ x_j·M_j = rhs`, where each
    /// `X_i` is a PSD block and each `x_j` a scalar coordinate.
    pub fn add_hermitian_equality(
        &mut self,
        maps: &[(BlockRef, &HermitianMap)],
        scalars: &[(BlockRef, usize, &CMatrix<f64>)],
        rhs: &CMatrix<f64>,
    ) -> Result<EqualityRef> {
        let dim = rhs.rows();
        let first_row = self.rows.len();
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); dim * dim];
        for &(blk, map) in maps {
            let n = match blk.cone {
                Cone::Psd(n) => n,
                _ => return Err(Error::Program("Hermitian map applied to a non-PSD block".into())),
            };
            if map.in_dim != n || map.out_dim != dim {
                return Err(Error::Program(format!(
                    "map {}->{} used with block {n} and equality {dim}",
                    map.in_dim, map.out_dim
                )));
            }
            for &(p, q, r, s, w) in &map.terms {
                for (coord, z) in entry_coords(n, r, s) {
                    if coord == usize::MAX {
                        continue;
                    }
                    let val = w * z;
                    let col = blk.offset + coord;
                    if p == q {
                        *rows[diag_coord(p)].entry(col).or_insert(0.0) += val.re;
                    } else {
                        let (rr, ri) = offdiag_coords(dim, p, q);
                        *rows[rr].entry(col).or_insert(0.0) += SQRT_2 * val.re;
                        *rows[ri].entry(col).or_insert(0.0) += SQRT_2 * val.im;
                    }
                }
            }
        }
        for &(blk, k, m) in scalars {
            if m.rows() != dim {
                return Err(Error::Program("scalar term dimension".into()));
            }
            for (row, v) in vectorize(m).into_iter().enumerate() {
                if v != 0.0 {
                    *rows[row].entry(blk.offset + k).or_insert(0.0) += v;
                }
            }
        }
        self.rows.extend(rows);
        self.b.extend(vectorize(rhs));
        Ok(EqualityRef { first_row, dim })
    }

    pub fn build(self) -> ConicProgram {
        let mut c = vec![0.0; self.n];
        for (k, v) in self.c {
            c[k] = v;
        }
        let a = CsrMatrix::from_row_maps(self.n, self.rows);
        ConicProgram { c, a, b: self.b, cones: self.cones, offset: self.offset }
    }
}
