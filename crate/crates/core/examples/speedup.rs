//! The two-dimensional model whose second-order term speeds the walk up along `e2`.
//!
//! `cargo run --release --example speedup [n_steps] [replicates]`

use rwre::expansion::{speed_expansion, speedup_integral};
use rwre::fixtures;
use rwre::montecarlo::annealed_speed;

fn main() -> rwre::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("integer argument"));
    let n_steps = args.next().unwrap_or(20_000);
    let replicates = args.next().unwrap_or(400);

    for a in [0.1, 0.3, 0.5, 0.7, 0.9] {
        println!("a = {a}: integral {:.8}", speedup_integral(a)?.value);
    }
    let m = fixtures::fixture("speedup-s2")?;
    let g = 0.05;
    let d2 = speed_expansion(&m, g, 2)?.d2.expect("d = 2 has a limit");
    let est = annealed_speed(&m, g, n_steps, replicates, 77)?;
    let d0 = m.d0()[1];
    println!("d0.e2 = {d0:.5}, d2.e2 = {:.5}", d2[1]);
    println!(
        "v.e2 = {:.5} ± {:.5} ({:.1} stderr above d0.e2)",
        est.v_hat[1],
        est.stderr[1],
        (est.v_hat[1] - d0) / est.stderr[1]
    );
    Ok(())
}
