//! Property tests of the algebraic invariants of each module.

use proptest::prelude::*;

use wernerlab::certify::{chsh_horodecki, dense_coding_delta, fef, fef2_exact, one_distillable, ppt_min_eig, werner_delta};
use wernerlab::extend::{extension_program, ExtensionQuery, Flavor};
use wernerlab::filterops::{apply_filter, filter_protocol, filtered_weight, qubit_projection, FilterOperator};
use wernerlab::qmat::{
    herm_eig, kron, partial_trace, partial_transpose, svd, uhlmann_fidelity, von_neumann_entropy, DensityMatrix,
};
use wernerlab::random::{haar_unitary, random_complex_matrix, random_state, seeded};
use wernerlab::solver::{solve, SolverOptions, Status};
use wernerlab::states::{swap_operator, symmetric_projector, werner, werner_all_v, werner_from_qubit_mixture, WernerParams};
use wernerlab::tomo::{expected_counts, mle_reconstruct, qubit_frame, qutrit_bases, MLE_MAX_ITER, MLE_TOL};
use wernerlab::{CMat, Density, Side};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn state(da: usize, db: usize, seed: u64) -> Density {
    random_state(da, db, &mut seeded(seed))
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn partial_transpose_is_an_involution(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let rho = state(da, db, seed);
        for side in [Side::A, Side::B] {
            let once = DensityMatrix::new_unchecked(partial_transpose(&rho, side), da, db).unwrap();
            prop_assert_eq!(partial_transpose(&once, side), rho.matrix().clone());
        }
    }

    #[test]
    fn partial_trace_keeps_unit_trace(seed in any::<u64>(), da in 2usize..5, db in 2usize..5) {
        let rho = state(da, db, seed);
        for side in [Side::A, Side::B] {
            prop_assert!((partial_trace(&rho, side).trace().re - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn eigenvalues_sum_to_trace(seed in any::<u64>(), n in 2usize..10) {
        let g: CMat = random_complex_matrix(n, n, &mut seeded(seed));
        let h = g.hermitian_part();
        let e = herm_eig(&h).unwrap();
        let sum: f64 = e.eigenvalues.iter().sum();
        prop_assert!((sum - h.trace().re).abs() <= 1e-9 * n as f64);
    }

    #[test]
    fn largest_singular_value_is_the_operator_norm(seed in any::<u64>(), r in 1usize..6, c in 1usize..6) {
        let m: CMat = random_complex_matrix(r, c, &mut seeded(seed));
        let d = svd(&m);
        prop_assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(d.recompose().max_abs_diff(&m) <= 1e-10);
        let gram = &m.adjoint() * &m;
        let top = herm_eig(&gram).unwrap().max().max(0.0).sqrt();
        prop_assert!((d.s[0] - top).abs() <= 1e-9 * (1.0 + top));
    }

    #[test]
    fn entropy_is_additive_on_products(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a: Density = random_state(2, 1, &mut rng);
        let b: Density = random_state(3, 1, &mut rng);
        let ab = kron(a.matrix(), b.matrix());
        let lhs = von_neumann_entropy(&ab).unwrap();
        let rhs = von_neumann_entropy(a.matrix()).unwrap() + von_neumann_entropy(b.matrix()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9);
    }

    #[test]
    fn fidelity_is_symmetric(seed in any::<u64>()) {
        let rho = state(2, 3, seed);
        let sigma = state(2, 3, seed.wrapping_add(1));
        let f1 = uhlmann_fidelity(rho.matrix(), sigma.matrix()).unwrap();
        let f2 = uhlmann_fidelity(sigma.matrix(), rho.matrix()).unwrap();
        prop_assert!((f1 - f2).abs() <= 1e-10);
        prop_assert!((0.0..=1.0).contains(&f1));
    }

    #[test]
    fn werner_constructors_agree(d in 2usize..6, step in 0usize..21) {
        let v = 0.05 * step as f64;
        let w: Density = werner(d, v).unwrap();
        let all: Density = werner_all_v(d, v).unwrap();
        prop_assert!(w.matrix().max_abs_diff(all.matrix()) <= 1e-12);
        if v <= WernerParams::q_nonnegative_limit(d) {
            let mix: Density = werner_from_qubit_mixture(d, v).unwrap();
            prop_assert!(w.matrix().max_abs_diff(mix.matrix()) <= 1e-12);
        }
    }

    #[test]
    fn werner_states_are_twirl_and_swap_invariant(d in 2usize..5, v in 0.0f64..=1.0, seed in any::<u64>()) {
        let w: Density = werner(d, v).unwrap();
        let u: CMat = haar_unitary(d, &mut seeded(seed));
        let uu = kron(&u, &u);
        let twirled = &(&uu * w.matrix()) * &uu.adjoint();
        prop_assert!((&twirled - w.matrix()).frobenius_norm() <= 1e-9);
        let swap: CMat = swap_operator(d).unwrap();
        let swapped = &(&swap * w.matrix()) * &swap;
        prop_assert!(swapped.max_abs_diff(w.matrix()) <= 1e-12);
        let plus: CMat = symmetric_projector(d, false).unwrap();
        prop_assert!((w.matrix().trace_product(&plus).re - v).abs() <= 1e-12);
    }

    #[test]
    fn filtered_states_are_normalized(seed in any::<u64>(), d in 3usize..5) {
        let rho = state(d, d, seed);
        let fa = qubit_projection(d, (0, 1), Side::A).unwrap();
        let fb = qubit_projection(d, (0, 1), Side::B).unwrap();
        let (out, p) = apply_filter(&rho, &fa, &fb).unwrap();
        if p >= 1e-9 {
            prop_assert!((out.matrix().trace().re - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn filtered_weight_is_increasing(d in 2usize..8, a in 0.001f64..0.998, gap in 1e-4f64..1e-3) {
        prop_assert!(filtered_weight(d, a + gap) > filtered_weight(d, a));
    }

    #[test]
    fn filter_protocol_recomposes(seed in any::<u64>(), rows in 2usize..4, cols in 2usize..5) {
        let m: CMat = random_complex_matrix(rows.min(cols), cols, &mut seeded(seed));
        let (f, _) = FilterOperator::rescaled(m, Side::A).unwrap();
        let p = filter_protocol(f.matrix()).unwrap();
        prop_assert!(p.recompose().max_abs_diff(f.matrix()) <= 1e-12);
    }

    #[test]
    fn distillability_value_bounded_by_ppt(seed in any::<u64>()) {
        let rho = state(3, 3, seed);
        let ppt = ppt_min_eig(&rho).unwrap().value;
        let dist = one_distillable(&rho, 4, seed).unwrap().value;
        prop_assert!(dist >= ppt - 1e-12);
    }

    #[test]
    fn fef_between_identity_overlap_and_max_eigenvalue(seed in any::<u64>(), d in 2usize..4) {
        let rho = state(d, d, seed);
        let phi = wernerlab::qmat::phi_plus::<f64>(d);
        let overlap = rho.matrix().sandwich(&phi, &phi).re;
        let top = herm_eig(rho.matrix()).unwrap().max();
        let f = fef(&rho, 4, seed).unwrap().value;
        prop_assert!(f >= overlap - 1e-12 && f <= top + 1e-12);
    }

    #[test]
    fn chsh_violation_implies_teleportation(seed in any::<u64>()) {
        let rho = state(2, 2, seed);
        if chsh_horodecki(&rho).unwrap().value > 2.0 {
            prop_assert!(fef2_exact(&rho).unwrap() > 0.5);
        }
    }
}

#[test]
fn fef_matches_exact_two_qubit_value() {
    for seed in 0..100 {
        let rho = state(2, 2, seed);
        let exact = fef2_exact(&rho).unwrap();
        let found = fef(&rho, 8, seed).unwrap().value;
        assert!((exact - found).abs() <= 1e-6, "seed {seed}: {exact} vs {found}");
    }
}

#[test]
fn dense_coding_delta_of_werner_states() {
    for d in 2..=4 {
        for step in 0..=20 {
            let v = 0.05 * step as f64;
            let got = dense_coding_delta(&werner(d, v).unwrap()).unwrap().value;
            assert!((got - werner_delta(d, v)).abs() <= 1e-9, "d={d} v={v}");
        }
    }
}

#[test]
fn closed_form_filter_on_werner_family() {
    for d in 3..=5 {
        let fa = qubit_projection(d, (0, 1), Side::A).unwrap();
        let fb = qubit_projection(d, (0, 1), Side::B).unwrap();
        for step in 0..=10 {
            let v = 0.05 * step as f64;
            let (out, _) = apply_filter(&werner(d, v).unwrap(), &fa, &fb).unwrap();
            let want: Density = werner(2, filtered_weight(d, v)).unwrap();
            assert!(out.matrix().max_abs_diff(want.matrix()) <= 1e-10);
        }
    }
}

fn small_program(v: f64) -> wernerlab::solver::ConicProgram {
    extension_program(&ExtensionQuery::new(werner(3, v).unwrap(), 2, Side::B, Flavor::Bosonic)).unwrap()
}

#[test]
fn solver_weak_duality_and_determinism() {
    let opts = SolverOptions::default();
    for v in [0.0, 0.2, 0.45] {
        let p = small_program(v);
        let s1 = solve(&p, &opts).unwrap();
        let s2 = solve(&p, &opts).unwrap();
        assert!(s1.primal_obj >= s1.dual_obj - 1e-6);
        assert_eq!(s1.iterations, s2.iterations);
        assert_eq!(s1.primal_obj.to_bits(), s2.primal_obj.to_bits());
        assert_eq!(s1.dual_obj.to_bits(), s2.dual_obj.to_bits());
    }
}

#[test]
fn solver_status_is_scale_invariant() {
    let opts = SolverOptions::default();
    let p = small_program(0.1);
    let base = solve(&p, &opts).unwrap();
    assert_eq!(base.status, Status::Optimal);
    for (sb, sc) in [(10.0, 1.0), (1.0, 10.0)] {
        let s = solve(&p.scaled(sb, sc), &opts).unwrap();
        assert_eq!(s.status, base.status);
        let want = 10.0 * base.primal_obj;
        assert!((s.primal_obj - want).abs() <= 1e-6 * want.abs().max(1.0), "{} vs {want}", s.primal_obj);
    }
}

#[test]
fn mle_keeps_trace_and_positivity() {
    for (rho, frame) in [
        (werner(3, 0.25).unwrap(), qutrit_bases()),
        (state(2, 2, 9), qubit_frame()),
    ] {
        let c = expected_counts(&rho, &frame, 100_000, "t").unwrap();
        let r = mle_reconstruct(&c, MLE_MAX_ITER, MLE_TOL).unwrap();
        assert!(r.log_likelihood.windows(2).all(|w| w[1] >= w[0]));
        assert!((r.state.matrix().trace().re - 1.0).abs() <= 1e-12);
        assert!(herm_eig(r.state.matrix()).unwrap().min() >= -1e-12);
        // reconstructing the reconstruction is a fixed point
        let again = mle_reconstruct(&expected_counts(&r.state, &frame, 1_000_000_000, "t").unwrap(), MLE_MAX_ITER, MLE_TOL)
            .unwrap();
        assert!(uhlmann_fidelity(again.state.matrix(), r.state.matrix()).unwrap() >= 0.9999);
    }
}

#[test]
fn frames_are_informationally_complete() {
    assert_eq!(qutrit_bases().product_rank().unwrap(), 81);
    assert_eq!(qubit_frame().product_rank().unwrap(), 16);
}
