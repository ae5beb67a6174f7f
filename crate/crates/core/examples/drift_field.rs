//! Local drifts of the auxiliary walk around the origin and their convex hull.
//!
//! `cargo run --release --example drift_field`

use rwre::fixtures;
use rwre::kalikow::{drift_field, DriftSettings};

fn main() -> rwre::Result<()> {
    let m = fixtures::drifted_2d()?;
    let field = drift_field(&m, 0.08, 2, 0.9, DriftSettings::new(32, 1))?;
    println!("box of {} sites, padding {:?}, slack {:.2e}", field.box_sites, field.padding, field.slack);
    for (z, v) in field.sites.iter().zip(&field.drifts) {
        println!("  {:>8} {:.5?}", z.display(2), v);
    }
    println!("mean drift {:.5?}, min alignment {:.3e}", field.mean_drift, field.min_alignment());
    if let Some(h) = &field.hull {
        println!("hull vertices {:.5?}", h.vertices());
    }
    Ok(())
}
