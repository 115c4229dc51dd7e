//! Row reduction: drops zero and linearly dependent rows of `A` after
//! checking that the right-hand side is consistent with them.

use super::sparse::CsrMatrix;

pub(crate) enum Presolved {
    Rows(Vec<usize>),
    Inconsistent,
}

/// Greedy selection of independent rows by incremental Cholesky of the
/// Gram matrix `A Aᵀ`.
pub(crate) fn independent_rows(a: &CsrMatrix, b: &[f64]) -> Presolved {
    let m = a.rows();
    let mut kept: Vec<usize> = Vec::new();
    // rows of the lower-triangular factor
    let mut l: Vec<Vec<f64>> = Vec::new();
    let b_scale = 1.0 + b.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    for i in 0..m {
        let gii = a.row_dot(i, i);
        if gii == 0.0 {
            if b[i].abs() > 1e-9 * b_scale {
                return Presolved::Inconsistent;
            }
            continue;
        }
        let g: Vec<f64> = kept.iter().map(|&k| a.row_dot(i, k)).collect();
        let mut li = vec![0.0; kept.len()];
        for r in 0..kept.len() {
            let s: f64 = (0..r).map(|c| l[r][c] * li[c]).sum();
            li[r] = (g[r] - s) / l[r][r];
        }
        let d = gii - li.iter().map(|x| x * x).sum::<f64>();
        if d <= 1e-10 * gii {
            // a_i = Σ α_k a_k with L α = l·… solved backwards
            let mut alpha = li.clone();
            for r in (0..kept.len()).rev() {
                let s: f64 = (r + 1..kept.len()).map(|c| l[c][r] * alpha[c]).sum();
                alpha[r] = (alpha[r] - s) / l[r][r];
            }
            let predicted: f64 = alpha.iter().zip(&kept).map(|(a, &k)| a * b[k]).sum();
            let scale = 1.0 + alpha.iter().zip(&kept).map(|(a, &k)| (a * b[k]).abs()).sum::<f64>();
            if (predicted - b[i]).abs() > 1e-8 * scale.max(b[i].abs()) {
                return Presolved::Inconsistent;
            }
            continue;
        }
        li.push(d.sqrt());
        l.push(li);
        kept.push(i);
    }
    Presolved::Rows(kept)
}
