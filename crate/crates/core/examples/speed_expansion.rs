//! Speed expansion of the skewed one-dimensional model, order by order,
//! next to the exact speed.
//!
//! `cargo run --example speed_expansion`

use rwre::expansion::{solomon_speed, speed_expansion};
use rwre::fixtures;

fn main() -> rwre::Result<()> {
    let m = fixtures::skewed_1d()?;
    println!("{:>6} {:>12} {:>12} {:>12} {:>12} {:>12}", "gamma", "v0", "v1", "v2", "v3", "exact");
    for g in [0.2, 0.1, 0.05, 0.025] {
        let r = speed_expansion(&m, g, 3)?;
        let v: Vec<f64> = r.v_order.iter().map(|x| x[0]).collect();
        println!("{g:>6} {:>12.8} {:>12.8} {:>12.8} {:>12.8} {:>12.8}", v[0], v[1], v[2], v[3], solomon_speed(&m, g)?);
    }

    let m = fixtures::drifted_2d()?;
    let r = speed_expansion(&m, 0.05, 3)?;
    println!("\ndrifted-2d at gamma = 0.05 (J from {})", r.j_source.as_str());
    println!("  d0 = {:?}\n  d1 = {:?}\n  d2_gamma = {:?}\n  d3 = {:?}", r.d0, r.d1, r.d2_gamma, r.d3);
    for (k, v) in r.v_order.iter().enumerate() {
        println!("  v{k} = {v:?}");
    }
    Ok(())
}
