use wernerlab::certify::chsh_horodecki;
use wernerlab::filterops::rotated_filtered_state;
use wernerlab::random::{random_separable_state, random_state, seeded};
use wernerlab::states::werner;
use wernerlab::steer::{
    assemblage_from, correlation_from, nonlocal_content, seesaw_bell, sr_state_lower_bound, steering_robustness,
    Assemblage, BellFunctional, MeasurementSet,
};
use wernerlab::{Density, Side};

fn assemblage(rho: &Density, meas: &MeasurementSet) -> Assemblage {
    assemblage_from(rho, meas, Side::A).unwrap()
}

#[test]
fn robustness_is_convex_on_mixtures() {
    let mut rng = seeded(1);
    let meas = MeasurementSet::pauli(&[0, 1, 2]).unwrap();
    for _ in 0..6 {
        let a1 = assemblage(&random_state(2, 2, &mut rng), &meas);
        let a2 = assemblage(&werner(2, 0.1).unwrap(), &meas);
        for lambda in [0.25, 0.5, 0.75] {
            let mixed = steering_robustness(&a1.mix(&a2, lambda).unwrap()).unwrap();
            let bound = lambda * steering_robustness(&a1).unwrap() + (1.0 - lambda) * steering_robustness(&a2).unwrap();
            assert!(mixed <= bound + 2e-6, "λ={lambda}: {mixed} > {bound}");
        }
    }
}

#[test]
fn appending_settings_never_lowers_robustness() {
    let mut rng = seeded(2);
    for _ in 0..5 {
        let rho: Density = random_state(2, 2, &mut rng);
        let two = steering_robustness(&assemblage(&rho, &MeasurementSet::pauli(&[2, 0]).unwrap())).unwrap();
        let three = steering_robustness(&assemblage(&rho, &MeasurementSet::pauli(&[2, 0, 1]).unwrap())).unwrap();
        assert!(three >= two - 1e-6, "{two} then {three}");
    }
}

#[test]
fn unsteerable_assemblages_give_local_correlations() {
    let mut rng = seeded(3);
    for _ in 0..20 {
        let rho: Density = random_separable_state(2, 2, 3, &mut rng);
        let ma = MeasurementSet::random_projective(2, 2, 2, &mut rng);
        let mb = MeasurementSet::random_projective(2, 2, 2, &mut rng);
        assert!(steering_robustness(&assemblage(&rho, &ma)).unwrap() <= 2e-6);
        assert!(nonlocal_content(&correlation_from(&rho, &ma, &mb).unwrap()).unwrap() <= 1e-7);
    }
}

#[test]
fn chsh_seesaw_never_exceeds_the_horodecki_value() {
    let f = BellFunctional::chsh();
    let mut rng = seeded(4);
    for i in 0..8 {
        let rho: Density = random_state(2, 2, &mut rng);
        let exact = chsh_horodecki(&rho).unwrap().value;
        let found = seesaw_bell(&rho, &f, 2, 2, 16, i).unwrap().value;
        assert!(found <= exact + 1e-5, "{found} > {exact}");
        assert!(found >= exact - 1e-4, "{found} well below {exact}");
    }
}

#[test]
fn filtering_does_not_lower_steering_robustness() {
    for v in [0.0, 0.1, 0.2] {
        for ns in 2..=3 {
            let unf = sr_state_lower_bound(&werner(3, v).unwrap(), ns, 3, 6, 7).unwrap().value;
            let fil = sr_state_lower_bound(&rotated_filtered_state(v).unwrap(), ns, 2, 6, 8).unwrap().value;
            assert!(fil >= unf - 1e-6, "v={v} n_s={ns}: {fil} < {unf}");
        }
    }
}
