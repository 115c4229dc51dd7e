use wernerlab::extend::{extension, extension_threshold, werner_symmetric_threshold, ExtensionQuery, ExtensionResult, Flavor};
use wernerlab::random::{random_state, seeded};
use wernerlab::solver::SolverOptions;
use wernerlab::states::werner;
use wernerlab::steer::{correlation_from, nonlocal_content, MeasurementSet};
use wernerlab::{Density, Side};

fn run(rho: &Density, k: usize, side: Side, flavor: Flavor) -> ExtensionResult {
    let q = ExtensionQuery::new(rho.clone(), k, side, flavor);
    extension(&q, Some(&SolverOptions::with_tol(1e-8))).unwrap()
}

#[test]
fn more_copies_never_lower_the_optimum() {
    for v in [0.0, 0.15, 0.3] {
        let rho = werner(3, v).unwrap();
        for flavor in [Flavor::Symmetric, Flavor::Bosonic] {
            let t2 = run(&rho, 2, Side::B, flavor).t_star;
            let t3 = run(&rho, 3, Side::B, flavor).t_star;
            assert!(t3 >= t2 - 1e-6, "v={v} {flavor}: {t2} then {t3}");
        }
    }
}

#[test]
fn flavors_are_ordered() {
    let mut rng = seeded(4);
    let mut states: Vec<Density> = vec![werner(2, 0.1).unwrap(), werner(2, 0.3).unwrap()];
    states.extend((0..3).map(|_| random_state(2, 2, &mut rng)));
    for rho in &states {
        let quasi = run(rho, 2, Side::B, Flavor::Quasi).t_star;
        let sym = run(rho, 2, Side::B, Flavor::Symmetric).t_star;
        let bos = run(rho, 2, Side::B, Flavor::Bosonic).t_star;
        assert!(quasi <= sym + 1e-6 && sym <= bos + 1e-6, "{quasi} {sym} {bos}");
    }
}

#[test]
fn exchange_symmetric_states_give_side_independent_optima() {
    for v in [0.0, 0.2, 0.4] {
        let rho = werner(3, v).unwrap();
        let a = run(&rho, 2, Side::A, Flavor::Symmetric).t_star;
        let b = run(&rho, 2, Side::B, Flavor::Symmetric).t_star;
        assert!((a - b).abs() <= 2e-6, "v={v}: {a} vs {b}");
    }
}

#[test]
fn werner_threshold_by_bisection() {
    for d in 2..=3 {
        for k in 2..=3 {
            let got = extension_threshold(d, k, Side::B, Flavor::Symmetric, 1e-4).unwrap();
            let want = werner_symmetric_threshold(d, k).max(0.0);
            assert!((got - want).abs() <= 2e-3, "d={d} k={k}: {got} vs {want}");
        }
    }
}

#[test]
fn extendible_states_show_no_nonlocality_with_k_settings() {
    let rho = werner(3, 0.3).unwrap();
    let k = 2;
    assert!(run(&rho, k, Side::B, Flavor::Symmetric).extension_exists);
    let mut rng = seeded(50);
    for _ in 0..50 {
        let ma = MeasurementSet::random_projective(3, 3, 3, &mut rng);
        let mb = MeasurementSet::random_projective(3, k, 3, &mut rng);
        let p = correlation_from(&rho, &ma, &mb).unwrap();
        assert!(nonlocal_content(&p).unwrap() <= 1e-7);
    }
}
