//! Compressed sparse row storage for the constraint matrix.

use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, row_ptr: vec![0; rows + 1], col_idx: Vec::new(), vals: Vec::new() }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut per_row: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); rows];
        for &(r, c, v) in triplets {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) outside {rows}x{cols}");
            *per_row[r].entry(c).or_insert(0.0) += v;
        }
        Self::from_row_maps(cols, per_row)
    }

    pub(crate) fn from_row_maps(cols: usize, per_row: Vec<BTreeMap<usize, f64>>) -> Self {
        let rows = per_row.len();
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in per_row {
            for (c, v) in row {
                if v != 0.0 {
                    col_idx.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { rows, cols, row_ptr, col_idx, vals }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        (&self.col_idx[a..b], &self.vals[a..b])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (c, v) = self.row(r);
            c.iter().zip(v).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (r, out) in y.iter_mut().enumerate().take(self.rows) {
            let (c, v) = self.row(r);
            *out = c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum();
        }
    }

    /// `y = Aᵀ x`
    pub fn mul_t_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        y.iter_mut().for_each(|z| *z = 0.0);
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            let (c, v) = self.row(r);
            for (&j, &a) in c.iter().zip(v) {
                y[j] += a * xr;
            }
        }
    }

    pub fn row_dot(&self, r1: usize, r2: usize) -> f64 {
        let (c1, v1) = self.row(r1);
        let (c2, v2) = self.row(r2);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < c1.len() && j < c2.len() {
            match c1[i].cmp(&c2[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += v1[i] * v2[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn row_norm(&self, r: usize) -> f64 {
        self.row(r).1.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Keeps the listed rows, in order.
    pub fn select_rows(&self, keep: &[usize]) -> Self {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for &r in keep {
            let (c, v) = self.row(r);
            col_idx.extend_from_slice(c);
            vals.extend_from_slice(v);
            row_ptr.push(col_idx.len());
        }
        Self { rows: keep.len(), cols: self.cols, row_ptr, col_idx, vals }
    }

    /// `diag(dr) · A · diag(dc)`
    pub fn scale(&mut self, dr: &[f64], dc: &[f64]) {
        for r in 0..self.rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                self.vals[k] *= dr[r] * dc[self.col_idx[k]];
            }
        }
    }

    /// Euclidean norm of every column.
    pub fn col_norms(&self) -> Vec<f64> {
        let mut n = vec![0.0; self.cols];
        for (&c, &v) in self.col_idx.iter().zip(&self.vals) {
            n[c] += v * v;
        }
        n.iter_mut().for_each(|x| *x = x.sqrt());
        n
    }

    pub fn has_non_finite(&self) -> bool {
        self.vals.iter().any(|v| !v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_match_dense() {
        let a = CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, -1.0), (0, 2, 1.0)]);
        assert_eq!(a.nnz(), 3);
        let mut y = vec![0.0; 2];
        a.mul_vec(&[1.0, 2.0, 3.0], &mut y);
        assert_eq!(y, vec![10.0, -2.0]);
        let mut z = vec![0.0; 3];
        a.mul_t_vec(&[1.0, 2.0], &mut z);
        assert_eq!(z, vec![1.0, -2.0, 3.0]);
        assert_eq!(a.row_dot(0, 0), 10.0);
        assert_eq!(a.row_dot(0, 1), 0.0);
        assert_eq!(a.select_rows(&[1]).triplets().collect::<Vec<_>>(), vec![(0, 1, -1.0)]);
        assert_eq!(a.col_norms(), vec![1.0, 1.0, 3.0]);
    }
}
