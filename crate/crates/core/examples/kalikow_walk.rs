//! The auxiliary walk on a small box: exact enumeration over environments,
//! the identity `E G = G^hat`, and the second-order remainder as gamma shrinks.
//!
//! `cargo run --release --example kalikow_walk`

use std::sync::Arc;

use rwre::fixtures;
use rwre::green::Domain;
use rwre::kalikow::{auxiliary_kernel, lemma2_scaling, prop1_residual, AuxBudget};
use rwre::lattice::Site;

fn main() -> rwre::Result<()> {
    let m = fixtures::drifted_2d()?;
    let u = Arc::new(Domain::cube(2, 1)?);
    let aux = auxiliary_kernel(&m, 0.08, &u, 0.95, Site::ORIGIN, AuxBudget::exact_only())?;
    println!("{} environments, residual {:.2e}", aux.environments, prop1_residual(&aux)?);
    for (z, k) in u.sites().iter().zip(&aux.kernels) {
        println!("  {:>8} {:.5?}", z.display(2), k.probs());
    }

    let m = fixtures::d1_twopoint()?;
    let line = Arc::new(Domain::interval(-2, 2)?);
    let rep = lemma2_scaling(&m, &line, 1.0, Site::ORIGIN, &[0.1, 0.05, 0.025])?;
    println!("\nsecond-order remainder on [-2, 2]:");
    for r in &rep.rows {
        println!("  gamma {:<6} residual {:.3e}  bound {:.3e}", r.gamma, r.residual, r.bound);
    }
    println!("  fitted exponent {:?}", rep.exponent);
    Ok(())
}
