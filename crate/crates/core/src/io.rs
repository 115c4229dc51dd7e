//! JSON documents for matrices and bipartite states.
//!
//! Entries are `[re, im]` pairs in row-major order. `serde_json` writes the
//! shortest representation that round-trips, so read-after-write is exact.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{CMatrix, DensityMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StateDoc {
    pub dim_a: usize,
    pub dim_b: usize,
    pub entries: Vec<[f64; 2]>,
}

fn pairs(m: &CMatrix<f64>) -> Vec<[f64; 2]> {
    m.as_slice().iter().map(|z| [z.re, z.im]).collect()
}

fn unpairs(e: &[[f64; 2]]) -> Result<Vec<Complex<f64>>> {
    if e.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite matrix entry".into()));
    }
    Ok(e.iter().map(|[re, im]| Complex::new(*re, *im)).collect())
}

impl From<&CMatrix<f64>> for MatrixDoc {
    fn from(m: &CMatrix<f64>) -> Self {
        Self { rows: m.rows(), cols: m.cols(), entries: pairs(m) }
    }
}

impl MatrixDoc {
    pub fn to_matrix(&self) -> Result<CMatrix<f64>> {
        CMatrix::from_vec(self.rows, self.cols, unpairs(&self.entries)?)
    }
}

impl From<&DensityMatrix<f64>> for StateDoc {
    fn from(rho: &DensityMatrix<f64>) -> Self {
        Self { dim_a: rho.dim_a(), dim_b: rho.dim_b(), entries: pairs(rho.matrix()) }
    }
}

impl StateDoc {
    /// Validating conversion back to a state.
    pub fn to_state(&self) -> Result<DensityMatrix<f64>> {
        let n = self.dim_a * self.dim_b;
        let m = CMatrix::from_vec(n, n, unpairs(&self.entries)?)?;
        DensityMatrix::new(m, self.dim_a, self.dim_b)
    }
}

pub fn state_to_json(rho: &DensityMatrix<f64>) -> Result<String> {
    Ok(serde_json::to_string(&StateDoc::from(rho))?)
}

pub fn state_from_json(s: &str) -> Result<DensityMatrix<f64>> {
    serde_json::from_str::<StateDoc>(s)?.to_state()
}

pub fn matrix_to_json(m: &CMatrix<f64>) -> Result<String> {
    Ok(serde_json::to_string(&MatrixDoc::from(m))?)
}

pub fn matrix_from_json(s: &str) -> Result<CMatrix<f64>> {
    serde_json::from_str::<MatrixDoc>(s)?.to_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_state, seeded};

    #[test]
    fn state_round_trip_is_exact() {
        let mut rng = seeded(5);
        let rho: DensityMatrix<f64> = random_state(3, 3, &mut rng);
        let s = state_to_json(&rho).unwrap();
        assert!(s.contains("\"dimA\":3"));
        let back = state_from_json(&s).unwrap();
        assert_eq!(back, rho);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(state_from_json(r#"{"dimA":2,"dimB":1,"entries":[[1,0]]}"#).is_err());
        assert!(state_from_json(r#"{"dimA":1,"dimB":2,"entries":[[1,0],[0,0],[0,0],[1,0]]}"#).is_err());
        let m = matrix_from_json(r#"{"rows":1,"cols":2,"entries":[[1,0],[0,1]]}"#).unwrap();
        assert_eq!(m[(0, 1)], Complex::new(0.0, 1.0));
    }
}
