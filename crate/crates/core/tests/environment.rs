use rwre::environment::sample_atom;
use rwre::fixtures;
use rwre::lattice::Site;

#[test]
fn atom_frequencies_match_the_weights() {
    let m = fixtures::skewed_1d().unwrap();
    let n = 100_000;
    let mut counts = [0u64; 2];
    for x in 0..n {
        counts[sample_atom(&m, 99, Site([x - n / 2, 0, 0])).unwrap()] += 1;
    }
    for (atom, &c) in m.nu().atoms().iter().zip(&counts) {
        let w = atom.weight();
        let sigma = (n as f64 * w * (1.0 - w)).sqrt();
        assert!((c as f64 - n as f64 * w).abs() <= 4.0 * sigma, "{counts:?}");
    }
}

#[test]
fn two_dimensional_sites_are_independent_draws() {
    let m = fixtures::drifted_2d().unwrap();
    // Equal weights: the count of atom 0 on a 200 x 200 block, and on its diagonal neighbours.
    let mut same = 0u64;
    let mut total = 0u64;
    for x in 0..200 {
        for y in 0..200 {
            let a = sample_atom(&m, 5, Site([x, y, 0])).unwrap();
            let b = sample_atom(&m, 5, Site([x + 1, y + 1, 0])).unwrap();
            same += (a == b) as u64;
            total += 1;
        }
    }
    let sigma = (total as f64 * 0.25).sqrt();
    assert!((same as f64 - 0.5 * total as f64).abs() <= 4.0 * sigma, "{same} of {total}");
}
