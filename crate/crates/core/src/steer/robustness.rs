//! Steering robustness of assemblages and its see-saw over measurements.
//!
//! ```text
//! SR = min Σ_λ tr σ_λ − 1   s.t.   Σ_λ D(a|x,λ) σ_λ ⪰ σ_{a|x},  σ_λ ⪰ 0
//! ```
//!
//! with deterministic responses `D(a|x,λ) = [λ_x = a]`. Its dual is
//! `max Σ tr(F_{a|x} σ_{a|x}) − 1` over `F_{a|x} ⪰ 0` with
//! `Σ_x F_{λ_x|x} ⪯ I` for every `λ`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{assemblage_from, conditional, grouping, polar_basis_ascent, structured_bases, Assemblage, MeasurementSet};
use crate::error::{Error, Result};
use crate::qmat::{herm_eig, CMatrix, DensityMatrix, Side};
use crate::random::{derive_seed, haar_unitary, seeded};
use crate::solver::{solve, Cone, HermitianMap, ProgramBuilder, SolverOptions, Status};

type C64 = Complex<f64>;
type M = CMatrix<f64>;

/// Largest number of deterministic strategies `n_o^{n_s}`.
pub const MAX_STRATEGIES: usize = 4096;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SrSolution {
    /// Primal optimum.
    pub value: f64,
    /// Dual value of the certified feasible dual `F`, a rigorous lower bound
    /// on SR up to rounding.
    pub dual_value: f64,
    /// `|value − dual_value|`.
    pub gap: f64,
    pub status: Status,
    pub iterations: usize,
    #[serde(skip)]
    pub duals: Vec<Vec<M>>,
}

/// Strategy `λ` as its responses `(λ_0, …, λ_{n_s−1})`, first setting most
/// significant.
fn strategy(mut lambda: usize, n_settings: usize, n_outcomes: usize) -> Vec<usize> {
    let mut out = vec![0; n_settings];
    for x in (0..n_settings).rev() {
        out[x] = lambda % n_outcomes;
        lambda /= n_outcomes;
    }
    out
}

fn strategy_count(n_settings: usize, n_outcomes: usize) -> Result<usize> {
    let mut n: usize = 1;
    for _ in 0..n_settings {
        n = n.saturating_mul(n_outcomes);
        if n > MAX_STRATEGIES {
            return Err(Error::TooLarge(format!("{n_outcomes}^{n_settings} deterministic strategies")));
        }
    }
    Ok(n)
}

pub fn steering_robustness(a: &Assemblage) -> Result<f64> {
    Ok(steering_robustness_full(a, None)?.value)
}

/// Solves the robustness SDP and returns both bounds.
///
/// The raw dual is projected onto the dual feasible set (clip negative
/// eigenvalues, then scale so every `Σ_x F_{λ_x|x} ⪯ I`), so `dual_value`
/// is a valid lower bound even when the solver stops early.
pub fn steering_robustness_full(a: &Assemblage, opts: Option<&SolverOptions>) -> Result<SrSolution> {
    let (ns, no, d) = (a.n_settings, a.n_outcomes, a.dim());
    let nl = strategy_count(ns, no)?;
    let lambdas: Vec<Vec<usize>> = (0..nl).map(|l| strategy(l, ns, no)).collect();

    let mut pb = ProgramBuilder::new();
    let sig: Vec<_> = (0..nl).map(|_| pb.add_block(Cone::Psd(d))).collect();
    let slack: Vec<Vec<_>> = (0..ns).map(|_| (0..no).map(|_| pb.add_block(Cone::Psd(d))).collect()).collect();
    for &s in &sig {
        pb.add_objective_trace(s, &M::identity(d));
    }
    pb.add_objective_constant(-1.0);
    let id = HermitianMap::identity(d);
    let mut neg = HermitianMap::new(d, d);
    for p in 0..d {
        for q in p..d {
            neg.push(p, q, p, q, C64::new(-1.0, 0.0));
        }
    }
    let mut eqs = vec![Vec::with_capacity(no); ns];
    for x in 0..ns {
        for o in 0..no {
            let mut maps: Vec<_> = (0..nl).filter(|&l| lambdas[l][x] == o).map(|l| (sig[l], &id)).collect();
            maps.push((slack[x][o], &neg));
            eqs[x].push(pb.add_hermitian_equality(&maps, &[], &a.sigma[x][o])?);
        }
    }
    let program = pb.build();
    let default = SolverOptions::with_tol(1e-9);
    let sol = solve(&program, opts.unwrap_or(&default))?;

    let mut duals: Vec<Vec<M>> = eqs
        .iter()
        .map(|row| {
            row.iter()
                .map(|&e| -> Result<M> {
                    let f = sol.dual_hermitian(e);
                    Ok(herm_eig(&f)?.apply(|l| l.max(0.0)))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for lam in &lambdas {
        let mut s = M::zeros(d, d);
        for x in 0..ns {
            s += &duals[x][lam[x]];
        }
        worst = worst.max(herm_eig(&s)?.max());
    }
    if worst > 1.0 {
        for f in duals.iter_mut().flatten() {
            *f = f.scale(1.0 / worst);
        }
    }
    let mut dual_value = -1.0;
    for x in 0..ns {
        for o in 0..no {
            dual_value += duals[x][o].trace_product(&a.sigma[x][o]).re;
        }
    }
    Ok(SrSolution {
        value: sol.primal_obj,
        dual_value,
        gap: (sol.primal_obj - dual_value).abs(),
        status: sol.status,
        iterations: sol.iterations,
        duals,
    })
}

/// Robustness against white noise only: the least `t` for which
/// `(σ_{a|x} + t·I/(d·n_o))/(1 + t)` admits a local-hidden-state model.
/// Always at least [`steering_robustness`].
pub fn white_noise_robustness(a: &Assemblage) -> Result<f64> {
    let (ns, no, d) = (a.n_settings, a.n_outcomes, a.dim());
    let nl = strategy_count(ns, no)?;
    let lambdas: Vec<Vec<usize>> = (0..nl).map(|l| strategy(l, ns, no)).collect();
    let mut pb = ProgramBuilder::new();
    let sig: Vec<_> = (0..nl).map(|_| pb.add_block(Cone::Psd(d))).collect();
    let t = pb.add_block(Cone::NonNeg(1));
    pb.add_objective(t, 0, 1.0);
    let id = HermitianMap::identity(d);
    let noise = M::identity(d).scale(-1.0 / (d * no) as f64);
    for x in 0..ns {
        for o in 0..no {
            let maps: Vec<_> = (0..nl).filter(|&l| lambdas[l][x] == o).map(|l| (sig[l], &id)).collect();
            pb.add_hermitian_equality(&maps, &[(t, 0, &noise)], &a.sigma[x][o])?;
        }
    }
    let sol = solve(&pb.build(), &SolverOptions::with_tol(1e-9))?;
    Ok(sol.primal_obj)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SrBound {
    /// Best robustness found.
    pub value: f64,
    /// Primal-dual gap of the SDP that produced `value`.
    pub gap: f64,
    /// Best value of each restart.
    pub per_restart: Vec<f64>,
    pub seed: u64,
    #[serde(skip)]
    pub measurements: Option<MeasurementSet>,
}

/// Lower bound on the steering robustness of `ρ` from `A` to `B` with
/// `n_settings` projective measurements of `n_outcomes` outcomes on `A`.
///
/// Each restart starts from Haar-random bases and alternates between the
/// SDP for fixed measurements and a basis update that maximizes the dual
/// objective `Σ_a tr(M_{a|x} tr_B[(I ⊗ F_{a|x})ρ])` for fixed `F`. A dual
/// `F` stays feasible when the measurements change, so the certified value
/// never decreases from one round to the next.
pub fn sr_state_lower_bound(
    rho: &DensityMatrix<f64>,
    n_settings: usize,
    n_outcomes: usize,
    restarts: usize,
    seed: u64,
) -> Result<SrBound> {
    let (da, db) = (rho.dim_a(), rho.dim_b());
    if n_outcomes < 2 || n_outcomes > da {
        return Err(Error::InvalidParameter(format!("{n_outcomes} outcomes on dimension {da}")));
    }
    strategy_count(n_settings, n_outcomes)?;
    let restarts = restarts.max(1);
    let runs: Vec<(f64, f64, MeasurementSet)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded(derive_seed(seed, r as u64));
            let bases: Vec<M> = if r == 0 {
                structured_bases(da, n_settings)
            } else {
                (0..n_settings).map(|_| haar_unitary(da, &mut rng)).collect()
            };
            sr_seesaw(rho, da, db, bases, n_outcomes)
        })
        .collect::<Result<Vec<_>>>()?;
    let per_restart: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let (value, gap, measurements) = runs
        .into_iter()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(v, g, m)| (v, g, Some(m)))
        .expect("at least one restart");
    Ok(SrBound { value, gap, per_restart, seed, measurements })
}

fn sr_seesaw(rho: &DensityMatrix<f64>, da: usize, db: usize, mut bases: Vec<M>, n_outcomes: usize) -> Result<(f64, f64, MeasurementSet)> {
    let group = grouping(da, n_outcomes);
    let opts = SolverOptions::with_tol(1e-8);
    let mut best = f64::NEG_INFINITY;
    let mut best_gap = 0.0;
    let mut best_meas = MeasurementSet::projective(&bases, n_outcomes)?;
    for _ in 0..200 {
        let meas = MeasurementSet::projective(&bases, n_outcomes)?;
        let a = assemblage_from(rho, &meas, Side::A)?;
        let sol = steering_robustness_full(&a, Some(&opts))?;
        let val = sol.dual_value.max(0.0);
        let gain = val - best;
        if val > best {
            best = val;
            best_gap = sol.gap;
            best_meas = meas;
        }
        if gain < 1e-7 {
            break;
        }
        for (x, u) in bases.iter_mut().enumerate() {
            let g: Vec<M> = sol.duals[x].iter().map(|f| conditional(rho.matrix(), da, db, f, Side::B)).collect();
            *u = polar_basis_ascent(&g, &group, u.clone())?.1;
        }
    }
    Ok((best, best_gap, best_meas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_separable_state, random_state};
    use crate::states::werner;

    fn singlet() -> DensityMatrix<f64> {
        let h = 1.0 / 2f64.sqrt();
        let z = C64::new(0.0, 0.0);
        DensityMatrix::from_ket(&[z, C64::new(h, 0.0), C64::new(-h, 0.0), z], 2, 2).unwrap()
    }

    #[test]
    fn strategy_order() {
        assert_eq!(strategy(0, 3, 2), vec![0, 0, 0]);
        assert_eq!(strategy(1, 3, 2), vec![0, 0, 1]);
        assert_eq!(strategy(4, 3, 2), vec![1, 0, 0]);
        assert!(strategy_count(8, 3).is_err());
        assert_eq!(strategy_count(7, 3).unwrap(), 2187);
    }

    #[test]
    fn singlet_two_mubs() {
        let a = assemblage_from(&singlet(), &MeasurementSet::pauli(&[2, 0]).unwrap(), Side::A).unwrap();
        let opts = SolverOptions::with_tol(1e-11);
        let s = steering_robustness_full(&a, Some(&opts)).unwrap();
        assert_eq!(s.status, Status::Optimal);
        // F_{a|x} = P_{a|x}/(1 + 1/√2) is dual optimal
        let expect = 3.0 - 2.0 * 2f64.sqrt();
        assert!((s.value - expect).abs() < 1e-6, "{}", s.value);
        assert!(s.gap <= 1e-8, "{}", s.gap);
        let w = white_noise_robustness(&a).unwrap();
        assert!((w - (2f64.sqrt() - 1.0)).abs() < 1e-6, "{w}");
    }

    #[test]
    fn separable_assemblages_are_unsteerable() {
        let mut rng = seeded(3);
        for _ in 0..5 {
            let rho: DensityMatrix<f64> = random_separable_state(3, 3, 4, &mut rng);
            let meas = MeasurementSet::random_projective(3, 3, 3, &mut rng);
            let sr = steering_robustness(&assemblage_from(&rho, &meas, Side::A).unwrap()).unwrap();
            assert!(sr.abs() < 2e-6, "{sr}");
        }
    }

    #[test]
    fn seesaw_improves_on_random_start() {
        let b = sr_state_lower_bound(&singlet(), 2, 2, 3, 7).unwrap();
        assert!((b.value - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-5, "{}", b.value);
        assert_eq!(b.per_restart.len(), 3);
    }

    #[test]
    fn werner_above_steering_bound() {
        let b = sr_state_lower_bound(&werner(3, 0.3).unwrap(), 2, 3, 4, 1).unwrap();
        assert!(b.value.abs() < 2e-6, "{}", b.value);
    }

    #[test]
    fn more_settings_never_help_less() {
        let mut rng = seeded(5);
        let rho: DensityMatrix<f64> = random_state(2, 2, &mut rng);
        let meas = MeasurementSet::random_projective(2, 3, 2, &mut rng);
        let a = assemblage_from(&rho, &meas, Side::A).unwrap();
        let full = steering_robustness(&a).unwrap();
        let part = steering_robustness(&a.restrict(&[0, 2]).unwrap()).unwrap();
        assert!(full >= part - 1e-6);
    }
}
