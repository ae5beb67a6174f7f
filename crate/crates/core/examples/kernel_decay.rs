//! `sum_z |p_{n+1}(0, z) - p_n(e, z)|` for symmetric kernels in one to three dimensions.
//!
//! `cargo run --release --example kernel_decay`

use rwre::lattice::Direction;
use rwre::model::TransitionKernel;
use rwre::montecarlo::decay::max_steps;
use rwre::montecarlo::lemma4_decay;

fn main() -> rwre::Result<()> {
    let e1 = Direction::new(1, 1)?;
    for d in 1..=3 {
        let s = TransitionKernel::simple(d)?;
        let top = max_steps(d).min(4096);
        let ns: Vec<usize> = (2..).map(|k| 1usize << k).take_while(|&n| n <= top).collect();
        let t = lemma4_decay(&s, &ns, &[e1])?;
        println!("d = {d}: exponent {:.4}, dropped mass {:.1e}", t.fitted_exponent, t.truncated_mass);
        for r in &t.rows {
            println!("  n {:>5}  l1 {:.6}", r.n, r.l1);
        }
    }
    Ok(())
}
