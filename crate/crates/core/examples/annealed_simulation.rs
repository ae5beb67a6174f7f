//! Annealed Monte Carlo speed of a two-dimensional model against its expansion.
//!
//! `cargo run --release --example annealed_simulation [n_steps] [replicates]`

use rwre::expansion::speed_expansion;
use rwre::fixtures;
use rwre::montecarlo::annealed_speed;

fn main() -> rwre::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("integer argument"));
    let n_steps = args.next().unwrap_or(20_000);
    let replicates = args.next().unwrap_or(200);
    let m = fixtures::drifted_2d()?;
    for g in [0.1, 0.05] {
        let est = annealed_speed(&m, g, n_steps, replicates, 2024)?;
        let v2 = &speed_expansion(&m, g, 2)?.v_order[2];
        println!("gamma = {g}");
        for i in 0..2 {
            println!("  e{}: v_hat {:.5} ± {:.5}, second order {:.5}", i + 1, est.v_hat[i], est.stderr[i], v2[i]);
        }
    }
    Ok(())
}
