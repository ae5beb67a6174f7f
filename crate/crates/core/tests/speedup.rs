//! The speedup experiment at the step size `gamma = 0.1` with `a = 0.5`, `eps = 0.02`.
//!
//! `p0(-e2) = 0.1225`, and the atom carrying `U(-e2) = -2` gives
//! `p0(-e2) - 2 gamma = -0.0775` at that step: not a probability, so the model
//! cannot be built. Kept as an ignored test to document it.

use rwre::expansion::speed_expansion;
use rwre::fixtures;
use rwre::montecarlo::annealed_speed;

#[test]
#[ignore = "gamma = 0.1 is outside the admissible range of the a = 0.5, eps = 0.02 kernel"]
fn speedup_at_gamma_one_tenth() {
    let m = fixtures::speedup(0.5, 0.02, 0.02, 0.1).unwrap();
    let g = 0.1;
    let d2 = speed_expansion(&m, g, 2).unwrap().d2.unwrap();
    assert!(d2[1] > 0.0);
    let est = annealed_speed(&m, g, 100_000, 2000, 77).unwrap();
    assert!(est.v_hat[1] - m.d0()[1] >= 3.0 * est.stderr[1]);
}

#[test]
fn largest_admissible_step() {
    let g = fixtures::speedup_gamma_limit(0.5, 0.02, 0.02).unwrap();
    assert!((g - 0.05125).abs() < 1e-12, "{g}");
    assert!(fixtures::speedup(0.5, 0.02, 0.02, 0.1).is_err());
}
