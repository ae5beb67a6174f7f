use std::sync::Arc;

use rwre::fixtures;
use rwre::green::Domain;
use rwre::kalikow::{auxiliary_kernel, drift_field, prop1_residual, verify_prop1, AuxBudget, AuxMethod, DriftSettings};
use rwre::lattice::Site;
use rwre::model::{ModelSpec, PerturbationAtom, PerturbationLaw, TransitionKernel};
use rwre::montecarlo::annealed_speed;

/// `d = 1` with `U = {-1, 0, 1}` and a two-atom law.
fn three_site_model() -> (ModelSpec, Arc<Domain>) {
    let p0 = TransitionKernel::new(&[0.6, 0.4]).unwrap();
    let nu = PerturbationLaw::new(vec![
        PerturbationAtom::new(vec![1.0, -1.0], 0.3).unwrap(),
        PerturbationAtom::new(vec![-0.5, 0.5], 0.7).unwrap(),
    ])
    .unwrap();
    (ModelSpec::new(p0, nu, 0.05, 0.3).unwrap(), Arc::new(Domain::interval(-1, 1).unwrap()))
}

#[test]
fn enumeration_covers_all_environments() {
    let (m, u) = three_site_model();
    let aux = auxiliary_kernel(&m, 0.2, &u, 1.0, Site::ORIGIN, AuxBudget::exact_only()).unwrap();
    assert_eq!(aux.method, AuxMethod::ExactEnumeration);
    assert_eq!(aux.environments, 8);
    assert!(aux.weights_checked);
    assert!(prop1_residual(&aux).unwrap() < 1e-12);
}

#[test]
fn sampled_kernel_agrees_with_enumeration() {
    let (m, u) = three_site_model();
    let exact = auxiliary_kernel(&m, 0.2, &u, 0.95, Site::ORIGIN, AuxBudget::exact_only()).unwrap();
    let budget = AuxBudget { max_assignments: 0, mc_samples: 20_000, seed: 11 };
    let mc = auxiliary_kernel(&m, 0.2, &u, 0.95, Site::ORIGIN, budget).unwrap();
    assert_eq!(mc.method, AuxMethod::MonteCarlo);
    let stderr = mc.stderr.as_ref().unwrap();
    for (i, (a, b)) in exact.kernels.iter().zip(&mc.kernels).enumerate() {
        for c in 0..2 {
            let diff = (a.probs()[c] - b.probs()[c]).abs();
            assert!(diff <= 4.0 * stderr[i][c] + 1e-12, "site {i}, step {c}: {diff} vs stderr {}", stderr[i][c]);
        }
    }
}

#[test]
fn exactness_on_a_square() {
    let m = fixtures::drifted_2d().unwrap();
    let u = Arc::new(Domain::cube(2, 1).unwrap());
    assert!(verify_prop1(&m, 0.08, &u, 0.95, Site::ORIGIN).unwrap() <= 1e-10);
}

#[test]
fn annealed_speed_lies_near_the_drift_hull() {
    let m = fixtures::drifted_2d().unwrap();
    let g = 0.08;
    let field = drift_field(&m, g, 2, 0.9, DriftSettings::new(32, 3)).unwrap();
    assert!(field.min_alignment() > 0.0);
    let est = annealed_speed(&m, g, 20_000, 200, 4).unwrap();
    let dist = field.distance_to_hull(&est.v_hat).unwrap();
    let stderr = est.stderr.iter().copied().fold(0.0, f64::max);
    let allowance = 3.0 * (stderr + field.max_stderr() + field.slack);
    assert!(dist <= allowance, "distance {dist} > {allowance}; v_hat {:?}, slack {}", est.v_hat, field.slack);
}
