//! How fast the truncated expansion converges: log-log slopes of the error
//! against the exact one-dimensional speed.
//!
//! `cargo run --example order_scaling`

use rwre::fixtures;
use rwre::montecarlo::{order_scaling, SpeedReference};

fn main() -> rwre::Result<()> {
    let m = fixtures::skewed_1d()?;
    for order in 1..=3 {
        let r = order_scaling(&m, &[0.08, 0.04, 0.02], order, SpeedReference::Exact)?;
        println!("order {order}: slope {:?}", r.slope);
        for row in &r.rows {
            println!("  gamma {:<5} error {:.3e}", row.gamma, row.err);
        }
    }
    Ok(())
}
