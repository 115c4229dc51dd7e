use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{CMatrix, DensityMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One party of a bipartite system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::A => "A",
            Side::B => "B",
        })
    }
}

/// `(kron(A,B))_{(i·rB+k),(j·cB+l)} = A_ij B_kl`
pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let (rb, cb) = (b.rows(), b.cols());
    let mut out = CMatrix::zeros(a.rows() * rb, a.cols() * cb);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let x = a[(i, j)];
            if x.is_zero() {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Traces out `side` of a bipartite state; the result acts on the kept party.
pub fn partial_trace<T: Real>(rho: &DensityMatrix<T>, side: Side) -> CMatrix<T> {
    rho.matrix().partial_trace_bi(rho.dim_a(), rho.dim_b(), side).expect("validated dims")
}

/// Partial transposition of `side` of a bipartite state.
pub fn partial_transpose<T: Real>(rho: &DensityMatrix<T>, side: Side) -> CMatrix<T> {
    rho.matrix().partial_transpose_bi(rho.dim_a(), rho.dim_b(), side).expect("validated dims")
}

/// Reorders tensor factors: output factor `k` is input factor `perm[k]`.
pub fn permute_subsystems<T: Real>(m: &CMatrix<T>, dims: &[usize], perm: &[usize]) -> Result<CMatrix<T>> {
    let total: usize = dims.iter().product();
    if m.rows() != total || m.cols() != total {
        return Err(Error::DimensionMismatch(format!("matrix {}x{} vs dims {dims:?}", m.rows(), m.cols())));
    }
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len() || perm.iter().any(|&p| p >= dims.len() || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation")));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let map: Vec<usize> = (0..total)
        .map(|idx| {
            let digits = to_digits(idx, &new_dims);
            let mut orig = vec![0; dims.len()];
            for (k, &p) in perm.iter().enumerate() {
                orig[p] = digits[k];
            }
            from_digits(&orig, dims)
        })
        .collect();
    Ok(CMatrix::from_fn(total, total, |i, j| m[(map[i], map[j])]))
}

pub(crate) fn to_digits(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
    out
}

pub(crate) fn from_digits(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

impl<T: Real> CMatrix<T> {
    fn check_bipartite(&self, da: usize, db: usize) -> Result<()> {
        if !self.is_square() || self.rows() != da * db {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not a {da}x{db} bipartite operator",
                self.rows(),
                self.cols()
            )));
        }
        Ok(())
    }

    /// Bipartite partial trace over `side`.
    pub fn partial_trace_bi(&self, da: usize, db: usize, side: Side) -> Result<CMatrix<T>> {
        self.check_bipartite(da, db)?;
        Ok(match side {
            Side::B => CMatrix::from_fn(da, da, |i, j| (0..db).map(|k| self[(i * db + k, j * db + k)]).sum()),
            Side::A => CMatrix::from_fn(db, db, |i, j| (0..da).map(|k| self[(k * db + i, k * db + j)]).sum()),
        })
    }

    /// Bipartite partial transpose of `side`.
    pub fn partial_transpose_bi(&self, da: usize, db: usize, side: Side) -> Result<CMatrix<T>> {
        self.check_bipartite(da, db)?;
        let n = da * db;
        Ok(CMatrix::from_fn(n, n, |r, c| {
            let (i, k) = (r / db, r % db);
            let (j, l) = (c / db, c % db);
            match side {
                Side::A => self[(j * db + k, i * db + l)],
                Side::B => self[(i * db + l, j * db + k)],
            }
        }))
    }

    /// Partial trace over every factor not listed in `keep` (kept in the
    /// given order) for a multipartite operator with factor sizes `dims`.
    pub fn partial_trace_keep(&self, dims: &[usize], keep: &[usize]) -> Result<CMatrix<T>> {
        let total: usize = dims.iter().product();
        if !self.is_square() || self.rows() != total {
            return Err(Error::DimensionMismatch(format!("{}x{} vs dims {dims:?}", self.rows(), self.cols())));
        }
        let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
        let kdims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
        let tdims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
        let kn: usize = kdims.iter().product();
        let tn: usize = tdims.iter().product();
        let mut out = CMatrix::zeros(kn, kn);
        let mut digits = vec![0usize; dims.len()];
        let compose = |digits: &mut Vec<usize>, kd: &[usize], td: &[usize]| {
            for (pos, &k) in keep.iter().enumerate() {
                digits[k] = kd[pos];
            }
            for (pos, &k) in traced.iter().enumerate() {
                digits[k] = td[pos];
            }
            from_digits(digits, dims)
        };
        for r in 0..kn {
            let rd = to_digits(r, &kdims);
            for c in 0..kn {
                let cd = to_digits(c, &kdims);
                let mut acc = Complex::zero();
                for t in 0..tn {
                    let td = to_digits(t, &tdims);
                    let row = compose(&mut digits, &rd, &td);
                    let col = compose(&mut digits, &cd, &td);
                    acc += self[(row, col)];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(out)
    }

    /// Partial transpose of the listed factors of a multipartite operator.
    pub fn partial_transpose_parts(&self, dims: &[usize], parts: &[usize]) -> Result<CMatrix<T>> {
        let total: usize = dims.iter().product();
        if !self.is_square() || self.rows() != total {
            return Err(Error::DimensionMismatch(format!("{}x{} vs dims {dims:?}", self.rows(), self.cols())));
        }
        Ok(CMatrix::from_fn(total, total, |r, c| {
            let (src_r, src_c) = transpose_index(r, c, dims, parts);
            self[(src_r, src_c)]
        }))
    }
}

/// Index pair whose entry lands at `(r, c)` after transposing `parts`.
pub(crate) fn transpose_index(r: usize, c: usize, dims: &[usize], parts: &[usize]) -> (usize, usize) {
    let mut rd = to_digits(r, dims);
    let mut cd = to_digits(c, dims);
    for &p in parts {
        std::mem::swap(&mut rd[p], &mut cd[p]);
    }
    (from_digits(&rd, dims), from_digits(&cd, dims))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{basis, c, kron_ket, pauli};

    type M = CMatrix<f64>;

    #[test]
    fn kron_identities() {
        assert_eq!(kron(&M::identity(2), &M::identity(3)), M::identity(6));
        let a = M::diag_real(&[1.0, 2.0]);
        let b = M::diag_real(&[3.0, 4.0]);
        assert_eq!(kron(&a, &b), M::diag_real(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn kron_bit_flips() {
        let xx = kron(&pauli::<f64>(0), &pauli(0));
        let v00 = kron_ket(&basis::<f64>(2, 0), &basis(2, 0));
        let v11 = kron_ket(&basis::<f64>(2, 1), &basis(2, 1));
        assert_eq!(xx.matvec(&v00), v11);
    }

    #[test]
    fn kron_rectangular_layout() {
        let a = M::from_fn(2, 3, |i, j| c((i * 3 + j) as f64, 0.0));
        let b = M::from_fn(3, 2, |i, j| c(0.0, (i * 2 + j) as f64));
        let k = kron(&a, &b);
        assert_eq!((k.rows(), k.cols()), (6, 6));
        for i in 0..2 {
            for j in 0..3 {
                for p in 0..3 {
                    for q in 0..2 {
                        assert_eq!(k[(i * 3 + p, j * 2 + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn multipartite_trace_matches_bipartite() {
        let a = M::from_fn(2, 2, |i, j| c(1.0 + i as f64, j as f64 - 0.5));
        let b = M::from_fn(3, 3, |i, j| c((i + j) as f64, (i as f64) - (j as f64)));
        let cm = M::from_fn(2, 2, |i, j| c(if i == j { 0.5 } else { 0.1 }, 0.0));
        let abc = kron(&kron(&a, &b), &cm);
        let kept = abc.partial_trace_keep(&[2, 3, 2], &[0, 2]).unwrap();
        let expect = kron(&a, &cm).scale_c(b.trace());
        assert!(kept.max_abs_diff(&expect) < 1e-12);
        let swapped = abc.partial_trace_keep(&[2, 3, 2], &[2, 0]).unwrap();
        let expect = kron(&cm, &a).scale_c(b.trace());
        assert!(swapped.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn multipartite_transpose_and_permutation() {
        let a = M::from_fn(2, 2, |i, j| c(i as f64, 1.0 + j as f64));
        let b = M::from_fn(3, 3, |i, j| c((i * j) as f64, i as f64));
        let ab = kron(&a, &b);
        let pt = ab.partial_transpose_parts(&[2, 3], &[1]).unwrap();
        assert!(pt.max_abs_diff(&kron(&a, &b.transpose())) < 1e-14);
        let ba = permute_subsystems(&ab, &[2, 3], &[1, 0]).unwrap();
        assert!(ba.max_abs_diff(&kron(&b, &a)) < 1e-14);
    }
}
