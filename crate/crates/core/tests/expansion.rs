use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rwre::expansion::{p3, solomon_speed, speed_expansion, speedup_integral, speedup_integral_grid};
use rwre::fixtures;
use rwre::green::{j_exact, QuadSettings};
use rwre::lattice::directions;
use rwre::model::{ModelSpec, PerturbationAtom, PerturbationLaw, TransitionKernel};
use rwre::Error;

#[test]
fn second_order_error_is_cubic_against_the_exact_speed() {
    let m = fixtures::skewed_1d().unwrap();
    let ratios: Vec<f64> = [0.08, 0.04, 0.02]
        .iter()
        .map(|&g| {
            let v2 = speed_expansion(&m, g, 2).unwrap().v_order[2][0];
            (solomon_speed(&m, g).unwrap() - v2).abs() / (g * g * g)
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(lo > 0.0 && hi / lo < 1.5, "{ratios:?}");
}

#[test]
fn driftless_line_has_a_one_sided_second_order_limit() {
    // p0 symmetric, E xi(e1) = 0.5, centered values 0.5 and -1.5, so E xi_bar^2 = 0.75.
    let p0 = TransitionKernel::simple(1).unwrap();
    let nu = PerturbationLaw::new(vec![
        PerturbationAtom::new(vec![1.0, -1.0], 0.75).unwrap(),
        PerturbationAtom::new(vec![-1.0, 1.0], 0.25).unwrap(),
    ])
    .unwrap();
    let m = ModelSpec::new(p0, nu, 0.05, 0.3).unwrap();
    for g in [1e-3, 1e-4] {
        let plus = speed_expansion(&m, g, 2).unwrap().d2_gamma[0];
        let minus = speed_expansion(&m, -g, 2).unwrap().d2_gamma[0];
        assert!((plus + 3.0).abs() < 100.0 * g, "{g}: {plus}");
        assert!((minus - 3.0).abs() < 100.0 * g, "{g}: {minus}");
    }
}

#[test]
fn third_order_term_matches_atom_enumeration() {
    let p0 = TransitionKernel::new(&[0.35, 0.15, 0.3, 0.2]).unwrap();
    let atoms = [(vec![0.6, -0.2, 0.0, -0.4], 2.0 / 3.0), (vec![-0.3, 0.5, -0.5, 0.3], 1.0 / 3.0)];
    let nu = PerturbationLaw::new(atoms.iter().map(|(u, w)| PerturbationAtom::new(u.clone(), *w).unwrap()).collect())
        .unwrap();
    let j = j_exact(&p0, QuadSettings::default_for(2)).unwrap();
    let mean: Vec<f64> = (0..4).map(|e| atoms.iter().map(|(u, w)| w * u[e]).sum()).collect();
    let got = p3(&nu.third_moments(), &j);
    for e in 0..4 {
        let mut want = 0.0;
        for (u, w) in &atoms {
            for f in directions(2) {
                for g in directions(2) {
                    let (a, b, c) = (u[e] - mean[e], u[f.index()] - mean[f.index()], u[g.index()] - mean[g.index()]);
                    want += w * a * b * c * j.get(f) * j.get(g);
                }
            }
        }
        assert!((got[e] - want).abs() < 1e-13, "e = {e}: {} vs {want}", got[e]);
    }
}

#[test]
fn exact_speed_never_exceeds_the_mean_drift() {
    let mut rng = ChaCha8Rng::seed_from_u64(257);
    let mut ballistic = 0;
    for _ in 0..50 {
        let right = rng.random_range(0.2..0.8);
        let p0 = TransitionKernel::new(&[right, 1.0 - right]).unwrap();
        let u = rng.random_range(0.1..1.0);
        let w = rng.random_range(0.1..0.9);
        let nu = PerturbationLaw::new(vec![
            PerturbationAtom::new(vec![u, -u], w).unwrap(),
            PerturbationAtom::new(vec![-u, u], 1.0 - w).unwrap(),
        ])
        .unwrap();
        let gamma_max = (right.min(1.0 - right) - 0.05) / u;
        let m = ModelSpec::new(p0, nu, 0.05, gamma_max).unwrap();
        let gamma = rng.random_range(0.0..gamma_max);
        let mean = m.mean_drift(gamma)[0];
        match solomon_speed(&m, gamma) {
            Ok(v) => {
                ballistic += 1;
                assert!(v.abs() <= mean.abs() + 1e-15 && v * mean >= 0.0, "v = {v}, mean drift = {mean}");
            }
            Err(Error::Precondition(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(ballistic > 25);
}

#[test]
fn speedup_integral_routes_agree() {
    for a in [0.2, 0.5, 0.8] {
        let reduced = speedup_integral(a).unwrap();
        let grid = speedup_integral_grid(a, 64, 1 << 13, 1e-6).unwrap();
        assert!(reduced.value > 0.0);
        assert!((reduced.value - grid.value).abs() < 1e-6, "a = {a}: {} vs {}", reduced.value, grid.value);
    }
}

#[test]
fn orders_are_nested() {
    let m = fixtures::drifted_2d().unwrap();
    let g = 0.05;
    let r = speed_expansion(&m, g, 3).unwrap();
    let v1: Vec<f64> = r.d0.iter().zip(&r.d1).map(|(a, b)| a + g * b).collect();
    assert_eq!(r.v_order[1], v1);
    for i in 0..2 {
        assert_eq!(r.v_order[2][i], r.v_order[1][i] + g * g * r.d2_gamma[i]);
        let d3 = r.d3.as_ref().unwrap()[i];
        assert!((r.v_order[3][i] - r.v_order[2][i] - g * g * g * d3).abs() < 1e-15);
    }
}
