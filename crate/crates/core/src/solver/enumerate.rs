//! Exact optimum of a tiny LP by enumerating the vertices of its feasible
//! polyhedron. Generic over the arithmetic: `f64` for speed, `BigRational`
//! for an exact answer.

use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

use super::{Cone, ConicProgram};
use crate::error::{Error, Result};

/// Largest number of variables accepted.
pub const MAX_VARS: usize = 12;

pub trait LpField: Clone + PartialOrd + Num + Signed + Debug {
    fn from_f64_exact(x: f64) -> Option<Self>;
    fn to_f64_lossy(&self) -> f64;
    fn negligible(&self) -> bool;
}

impl LpField for f64 {
    fn from_f64_exact(x: f64) -> Option<Self> {
        Some(x)
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
    fn negligible(&self) -> bool {
        self.abs() <= 1e-10
    }
}

impl LpField for BigRational {
    fn from_f64_exact(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or_else(|| {
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }
    fn negligible(&self) -> bool {
        self.is_zero()
    }
}

/// Outcome of solving a square-or-tall linear system.
enum Solved<F> {
    Unique(Vec<F>),
    /// Consistent, with a one-dimensional solution direction (for rays).
    Line(Vec<F>),
    Other,
}

/// Row-reduces `[M | r]` and classifies the solution set.
fn solve_system<F: LpField>(mut m: Vec<Vec<F>>, mut r: Vec<F>, n: usize) -> Solved<F> {
    let rows = m.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == rows {
            break;
        }
        let best = (row..rows)
            .filter(|&i| !m[i][col].negligible())
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal));
        let Some(p) = best else { continue };
        m.swap(row, p);
        r.swap(row, p);
        let pv = m[row][col].clone();
        for k in col..n {
            m[row][k] = m[row][k].clone() / pv.clone();
        }
        r[row] = r[row].clone() / pv;
        for i in 0..rows {
            if i != row && !m[i][col].negligible() {
                let f = m[i][col].clone();
                for k in col..n {
                    let t = f.clone() * m[row][k].clone();
                    m[i][k] = m[i][k].clone() - t;
                }
                r[i] = r[i].clone() - f * r[row].clone();
            }
        }
        pivots.push(col);
        row += 1;
    }
    if (row..rows).any(|i| !r[i].negligible()) {
        return Solved::Other;
    }
    match n - pivots.len() {
        0 => {
            let mut x = vec![F::zero(); n];
            for (i, &c) in pivots.iter().enumerate() {
                x[c] = r[i].clone();
            }
            Solved::Unique(x)
        }
        1 => {
            // null direction: the free column set to 1
            let free = (0..n).find(|c| !pivots.contains(c)).unwrap();
            let mut d = vec![F::zero(); n];
            d[free] = F::one();
            for (i, &c) in pivots.iter().enumerate() {
                d[c] = -m[i][free].clone();
            }
            Solved::Line(d)
        }
        _ => Solved::Other,
    }
}

fn convert<F: LpField>(x: f64) -> Result<F> {
    F::from_f64_exact(x).ok_or_else(|| Error::Program(format!("value {x} not representable")))
}

/// Minimum of `cᵀx + offset` over the vertices of `{A x = b, x_N ≥ 0}`.
///
/// Errors if the program has PSD blocks, more than [`MAX_VARS`]
/// variables, no vertex, or an improving recession direction.
pub fn lp_vertex_enumeration<F: LpField>(p: &ConicProgram) -> Result<F> {
    p.validate()?;
    let n = p.num_vars();
    if n > MAX_VARS {
        return Err(Error::TooLarge(format!("{n} variables > {MAX_VARS}")));
    }
    let mut nonneg = Vec::new();
    let mut off = 0;
    for cone in &p.cones {
        match *cone {
            Cone::Free(_) => {}
            Cone::NonNeg(k) => nonneg.extend(off..off + k),
            Cone::Psd(_) => return Err(Error::Program("vertex enumeration handles LPs only".into())),
        }
        off += cone.dim();
    }
    let mut a = vec![vec![F::zero(); n]; p.num_rows()];
    for (r, c, v) in p.a.triplets() {
        a[r][c] = convert(v)?;
    }
    let b: Vec<F> = p.b.iter().map(|&x| convert(x)).collect::<Result<_>>()?;
    let c: Vec<F> = p.c.iter().map(|&x| convert(x)).collect::<Result<_>>()?;
    let dot = |x: &[F]| x.iter().zip(&c).fold(F::zero(), |acc, (u, v)| acc + u.clone() * v.clone());
    let feasible = |x: &[F]| nonneg.iter().all(|&j| x[j] >= F::zero() || x[j].negligible());

    let mut best: Option<F> = None;
    for mask in 0u32..(1u32 << nonneg.len()) {
        let mut rows = a.clone();
        let mut rhs = b.clone();
        for (bit, &j) in nonneg.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                let mut e = vec![F::zero(); n];
                e[j] = F::one();
                rows.push(e);
                rhs.push(F::zero());
            }
        }
        match solve_system(rows.clone(), rhs, n) {
            Solved::Unique(x) if feasible(&x) => {
                let v = dot(&x);
                if best.as_ref().is_none_or(|b| v < *b) {
                    best = Some(v);
                }
            }
            _ => {}
        }
        // extreme rays of the recession cone
        if let Solved::Line(d) = solve_system(rows, vec![F::zero(); a.len() + mask.count_ones() as usize], n) {
            for dir in [d.clone(), d.into_iter().map(|z| -z).collect::<Vec<_>>()] {
                if feasible(&dir) && dot(&dir) < F::zero() && !dot(&dir).negligible() {
                    return Err(Error::Program("LP is unbounded below".into()));
                }
            }
        }
    }
    let best = best.ok_or_else(|| Error::Program("feasible set has no vertex".into()))?;
    Ok(best + convert(p.offset)?)
}

/// Exact rational optimum of a small LP, reported in `f64`.
pub fn lp_vertex_enumeration_check(p: &ConicProgram) -> Result<f64> {
    let v: BigRational = lp_vertex_enumeration(p)?;
    Ok(v.to_f64_lossy())
}
