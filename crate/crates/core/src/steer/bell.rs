//! Bell correlations, nonlocal content and see-saw Bell optimization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{conditional, grouping, polar_basis_ascent, projectors, structured_bases, Correlation, MeasurementSet};
use crate::error::{Error, Result};
use crate::qmat::{CMatrix, DensityMatrix, Side};
use crate::random::{derive_seed, haar_unitary, seeded};
use crate::solver::{solve, Cone, ProgramBuilder, SolverOptions, Status};

type M = CMatrix<f64>;

/// Bound on the number of local deterministic boxes `o_A^{s_A}·o_B^{s_B}`.
pub const MAX_LOCAL_VERTICES: usize = 1_000_000;

/// `P(a,b|x,y) = tr[ρ (M_{a|x} ⊗ N_{b|y})]`.
pub fn correlation_from(rho: &DensityMatrix<f64>, meas_a: &MeasurementSet, meas_b: &MeasurementSet) -> Result<Correlation> {
    let (da, db) = (rho.dim_a(), rho.dim_b());
    if meas_a.dim() != da || meas_b.dim() != db {
        return Err(Error::DimensionMismatch(format!(
            "measurements on {}x{} for a {da}x{db} state",
            meas_a.dim(),
            meas_b.dim()
        )));
    }
    let (sa, oa, sb, ob) = (meas_a.n_settings, meas_a.n_outcomes, meas_b.n_settings, meas_b.n_outcomes);
    let mut p = vec![0.0; sa * sb * oa * ob];
    for x in 0..sa {
        for a in 0..oa {
            let cond = conditional(rho.matrix(), da, db, &meas_a.effects[x][a], Side::A);
            for y in 0..sb {
                for b in 0..ob {
                    p[((x * sb + y) * oa + a) * ob + b] = cond.trace_product(&meas_b.effects[y][b]).re.max(0.0);
                }
            }
        }
    }
    Correlation::new(sa, oa, sb, ob, p)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NonlocalContent {
    pub value: f64,
    pub gap: f64,
    pub status: Status,
}

pub fn nonlocal_content(p: &Correlation) -> Result<f64> {
    Ok(nonlocal_content_full(p, None)?.value)
}

/// Smallest `v` with `P = (1 − v)·P_L + v·P_NS`, `P_L` local and `P_NS`
/// no-signaling.
///
/// The local part is written as `Σ_λ D_A(a|x,λ)·q(λ,b,y)` over Alice's
/// deterministic strategies `λ`, where each `q(λ,·,·)` is an unnormalized
/// no-signaling response of Bob. Decomposing those responses into Bob's
/// deterministic strategies recovers the product-vertex form, so this is
/// the same polytope with far fewer variables.
pub fn nonlocal_content_full(p: &Correlation, opts: Option<&SolverOptions>) -> Result<NonlocalContent> {
    p.validate()?;
    let (sa, oa, sb, ob) = (p.settings_a, p.outcomes_a, p.settings_b, p.outcomes_b);
    let la = (oa as f64).powi(sa as i32);
    let lb = (ob as f64).powi(sb as i32);
    if la * lb > MAX_LOCAL_VERTICES as f64 {
        return Err(Error::TooLarge(format!("{la}·{lb} local deterministic boxes")));
    }
    let la = la as usize;
    let resp = |l: usize, x: usize| (l / oa.pow((sa - 1 - x) as u32)) % oa;

    let mut pb = ProgramBuilder::new();
    let q = pb.add_block(Cone::NonNeg(la * ob * sb));
    let n = pb.add_block(Cone::NonNeg(p.len()));
    let qi = |l: usize, b: usize, y: usize| (l * sb + y) * ob + b;
    for a in 0..oa {
        for b in 0..ob {
            pb.add_objective(n, p.index(a, b, 0, 0), 1.0);
        }
    }
    for x in 0..sa {
        for y in 0..sb {
            for a in 0..oa {
                for b in 0..ob {
                    let mut row: Vec<_> = (0..la).filter(|&l| resp(l, x) == a).map(|l| (q, qi(l, b, y), 1.0)).collect();
                    row.push((n, p.index(a, b, x, y), 1.0));
                    pb.add_scalar_equality(&row, p.get(a, b, x, y));
                }
            }
        }
    }
    // Bob's local responses: total weight independent of y
    for l in 0..la {
        for y in 1..sb {
            let mut row = Vec::with_capacity(2 * ob);
            for b in 0..ob {
                row.push((q, qi(l, b, y), 1.0));
                row.push((q, qi(l, b, 0), -1.0));
            }
            pb.add_scalar_equality(&row, 0.0);
        }
    }
    // no-signaling part
    for x in 0..sa {
        for a in 0..oa {
            for y in 1..sb {
                let mut row = Vec::with_capacity(2 * ob);
                for b in 0..ob {
                    row.push((n, p.index(a, b, x, y), 1.0));
                    row.push((n, p.index(a, b, x, 0), -1.0));
                }
                pb.add_scalar_equality(&row, 0.0);
            }
        }
    }
    for y in 0..sb {
        for b in 0..ob {
            for x in 1..sa {
                let mut row = Vec::with_capacity(2 * oa);
                for a in 0..oa {
                    row.push((n, p.index(a, b, x, y), 1.0));
                    row.push((n, p.index(a, b, 0, y), -1.0));
                }
                pb.add_scalar_equality(&row, 0.0);
            }
        }
    }
    let program = pb.build();
    let default = SolverOptions::with_tol(1e-10);
    let sol = solve(&program, opts.unwrap_or(&default))?;
    Ok(NonlocalContent { value: sol.primal_obj.clamp(0.0, 1.0), gap: sol.gap, status: sol.status })
}

/// Linear Bell functional `Σ B(a,b,x,y)·P(a,b|x,y)`, coefficients in the
/// layout of [`Correlation`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellFunctional {
    pub settings_a: usize,
    pub outcomes_a: usize,
    pub settings_b: usize,
    pub outcomes_b: usize,
    pub coeffs: Vec<f64>,
}

impl BellFunctional {
    pub fn new(settings_a: usize, outcomes_a: usize, settings_b: usize, outcomes_b: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != settings_a * settings_b * outcomes_a * outcomes_b {
            return Err(Error::DimensionMismatch(format!("{} Bell coefficients", coeffs.len())));
        }
        Ok(Self { settings_a, outcomes_a, settings_b, outcomes_b, coeffs })
    }

    /// `E₀₀ + E₀₁ + E₁₀ − E₁₁`.
    pub fn chsh() -> Self {
        let mut c = vec![0.0; 16];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let s = (a + b + x * y) % 2;
                        c[((x * 2 + y) * 2 + a) * 2 + b] = if s == 0 { 1.0 } else { -1.0 };
                    }
                }
            }
        }
        Self { settings_a: 2, outcomes_a: 2, settings_b: 2, outcomes_b: 2, coeffs: c }
    }

    fn coeff(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.coeffs[((x * self.settings_b + y) * self.outcomes_a + a) * self.outcomes_b + b]
    }

    pub fn evaluate(&self, p: &Correlation) -> Result<f64> {
        if (p.settings_a, p.outcomes_a, p.settings_b, p.outcomes_b)
            != (self.settings_a, self.outcomes_a, self.settings_b, self.outcomes_b)
        {
            return Err(Error::DimensionMismatch("Bell functional and correlation scenarios differ".into()));
        }
        Ok(self.coeffs.iter().zip(&p.p).map(|(c, q)| c * q).sum())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BellSeesaw {
    pub value: f64,
    pub per_restart: Vec<f64>,
    pub seed: u64,
    #[serde(skip)]
    pub bases_a: Vec<M>,
    #[serde(skip)]
    pub bases_b: Vec<M>,
}

/// Lower bound on the largest value of `f` over projective measurements
/// with `n_settings` settings and `n_outcomes` outcomes per side.
///
/// Each half-step fixes one party and improves the other's bases by polar
/// ascent on its effective operators `K_{b|y} = Σ_{a,x} B(a,b,x,y)·σ_{a|x}`,
/// so the value never decreases along a restart.
pub fn seesaw_bell(
    rho: &DensityMatrix<f64>,
    f: &BellFunctional,
    n_settings: usize,
    n_outcomes: usize,
    restarts: usize,
    seed: u64,
) -> Result<BellSeesaw> {
    let (da, db) = (rho.dim_a(), rho.dim_b());
    if (f.settings_a, f.outcomes_a, f.settings_b, f.outcomes_b) != (n_settings, n_outcomes, n_settings, n_outcomes) {
        return Err(Error::DimensionMismatch("Bell functional scenario differs from the requested one".into()));
    }
    if n_outcomes < 2 || n_outcomes > da.min(db) {
        return Err(Error::InvalidParameter(format!("{n_outcomes} outcomes on {da}x{db}")));
    }
    let restarts = restarts.max(1);
    let runs: Vec<(f64, Vec<M>, Vec<M>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded(derive_seed(seed, r as u64));
            let (ua, ub): (Vec<M>, Vec<M>) = if r == 0 {
                (structured_bases(da, n_settings), structured_bases(db, n_settings))
            } else {
                (
                    (0..n_settings).map(|_| haar_unitary(da, &mut rng)).collect(),
                    (0..n_settings).map(|_| haar_unitary(db, &mut rng)).collect(),
                )
            };
            bell_seesaw_run(rho, f, n_outcomes, ua, ub)
        })
        .collect::<Result<Vec<_>>>()?;
    let per_restart: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let (value, bases_a, bases_b) = runs.into_iter().max_by(|a, b| a.0.total_cmp(&b.0)).expect("at least one restart");
    Ok(BellSeesaw { value, per_restart, seed, bases_a, bases_b })
}

fn effective_ops(rho: &M, da: usize, db: usize, f: &BellFunctional, bases: &[M], n_outcomes: usize, measured: Side) -> Vec<Vec<M>> {
    let n = bases.len();
    let dim = match measured {
        Side::A => db,
        Side::B => da,
    };
    let conds: Vec<Vec<M>> = bases
        .iter()
        .map(|u| projectors(u, n_outcomes).iter().map(|m| conditional(rho, da, db, m, measured)).collect())
        .collect();
    (0..n)
        .map(|t| {
            (0..n_outcomes)
                .map(|o| {
                    let mut k = M::zeros(dim, dim);
                    for (s, row) in conds.iter().enumerate() {
                        for (c, cond) in row.iter().enumerate() {
                            let w = match measured {
                                Side::A => f.coeff(c, o, s, t),
                                Side::B => f.coeff(o, c, t, s),
                            };
                            if w != 0.0 {
                                k += &cond.scale(w);
                            }
                        }
                    }
                    k
                })
                .collect()
        })
        .collect()
}

fn bell_seesaw_run(rho: &DensityMatrix<f64>, f: &BellFunctional, n_outcomes: usize, mut ua: Vec<M>, mut ub: Vec<M>) -> Result<(f64, Vec<M>, Vec<M>)> {
    let (da, db) = (rho.dim_a(), rho.dim_b());
    let (ga, gb) = (grouping(da, n_outcomes), grouping(db, n_outcomes));
    let mut value = f64::NEG_INFINITY;
    for _ in 0..2000 {
        let kb = effective_ops(rho.matrix(), da, db, f, &ua, n_outcomes, Side::A);
        for (y, u) in ub.iter_mut().enumerate() {
            *u = polar_basis_ascent(&kb[y], &gb, u.clone())?.1;
        }
        let ka = effective_ops(rho.matrix(), da, db, f, &ub, n_outcomes, Side::B);
        let mut total = 0.0;
        for (x, u) in ua.iter_mut().enumerate() {
            let (v, nu) = polar_basis_ascent(&ka[x], &ga, u.clone())?;
            *u = nu;
            total += v;
        }
        let gain = total - value;
        value = total;
        if gain < 1e-12 {
            break;
        }
    }
    Ok((value, ua, ub))
}
