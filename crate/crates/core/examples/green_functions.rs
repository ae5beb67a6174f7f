//! Green functions three ways: a finite box, the torus quadrature for `J`,
//! and the truncated series that checks it.
//!
//! `cargo run --example green_functions`

use std::sync::Arc;

use rwre::environment::SampledEnvironment;
use rwre::fixtures;
use rwre::green::{green_finite, j_exact, series_oracle, symmetrize, Domain, QuadSettings};
use rwre::lattice::{directions, Site};

fn main() -> rwre::Result<()> {
    let m = fixtures::drifted_2d()?;
    let g = 0.08;

    // Exit distribution of one sampled environment from a 7 x 7 box.
    let domain = Arc::new(Domain::cube(2, 3)?);
    let env = SampledEnvironment::new(&m, g, 7)?;
    let table = green_finite(&domain, 1.0, &env, Site::ORIGIN)?;
    let exit: f64 = domain.boundary().iter().map(|&z| table.get(z)).sum();
    let right: f64 = domain.boundary().iter().filter(|z| z.0[0] == 4).map(|&z| table.get(z)).sum();
    println!("box exit mass {exit:.12}, through the right face {right:.4}");

    let p = m.p_gamma(g)?;
    let sym = symmetrize(&p);
    println!("symmetrized kernel {:?}, k = {:.6}", sym.s.probs(), sym.k);

    let j = j_exact(&p, QuadSettings::default_for(2))?;
    let mut pairs = vec![(Site::ORIGIN, Site::ORIGIN)];
    pairs.extend(directions(2).map(|e| (e.unit(), Site::ORIGIN)));
    let s = series_oracle(&p, &pairs, 1_000_000, 1.0, 1e-12)?;
    println!("{:>3} {:>14} {:>14}", "e", "quadrature", "series");
    for (i, e) in directions(2).enumerate() {
        println!("{e:>3} {:>14.10} {:>14.10}", j.get(e), s.values[i + 1] - s.values[0]);
    }
    Ok(())
}
