//! Named models used by the examples, the command line and the tests.
//!
//! Direction order everywhere is `+e1, -e1, +e2, -e2`.

use crate::error::{Error, Result};
use crate::model::{ModelSpec, PerturbationAtom, PerturbationLaw, TransitionKernel};

pub const NAMES: [&str; 5] = ["d1-twopoint", "skewed-1d", "drifted-2d", "sym-2d", "speedup-s2"];

/// Looks up a fixture by name.
pub fn fixture(name: &str) -> Result<ModelSpec> {
    match name {
        "d1-twopoint" => d1_twopoint(),
        "skewed-1d" => skewed_1d(),
        "drifted-2d" => drifted_2d(),
        "sym-2d" => sym_2d(),
        "speedup-s2" => speedup(0.5, 0.02, 0.02, 0.05),
        _ => Err(Error::Config(format!("unknown fixture {name:?}; known: {}", NAMES.join(", ")))),
    }
}

/// `p0 = (0.6, 0.4)`, `xi = ±(1, -1)` with equal weights.
pub fn d1_twopoint() -> Result<ModelSpec> {
    let p0 = TransitionKernel::new(&[0.6, 0.4])?;
    ModelSpec::new(p0, PerturbationLaw::symmetric_pair(vec![1.0, -1.0])?, 0.05, 0.3)
}

/// `p0 = (0.6, 0.4)`; `xi(e1) = 0.5` w.p. 2/3 and `-1` w.p. 1/3, so `p1 = 0` and the law is skewed.
pub fn skewed_1d() -> Result<ModelSpec> {
    let p0 = TransitionKernel::new(&[0.6, 0.4])?;
    let nu = PerturbationLaw::new(vec![
        PerturbationAtom::new(vec![0.5, -0.5], 2.0 / 3.0)?,
        PerturbationAtom::new(vec![-1.0, 1.0], 1.0 / 3.0)?,
    ])?;
    ModelSpec::new(p0, nu, 0.05, 0.3)
}

/// A strongly drifted `d = 2` model with `k0 = 0.9` and a non-symmetric law.
pub fn drifted_2d() -> Result<ModelSpec> {
    let p0 = TransitionKernel::new(&[0.4, 0.1, 0.25, 0.25])?;
    let nu = PerturbationLaw::new(vec![
        PerturbationAtom::new(vec![1.0, 0.0, -1.0, 0.0], 0.5)?,
        PerturbationAtom::new(vec![-0.5, 0.5, 0.0, 0.0], 0.5)?,
    ])?;
    ModelSpec::new(p0, nu, 0.05, 0.1)
}

/// Simple symmetric `p0` in `d = 2` with a law of mean `p1 = (0.25, -0.25, 0, 0)`.
pub fn sym_2d() -> Result<ModelSpec> {
    let p0 = TransitionKernel::simple(2)?;
    let nu = PerturbationLaw::new(vec![
        PerturbationAtom::new(vec![0.5, -0.5, 0.0, 0.0], 0.75)?,
        PerturbationAtom::new(vec![-0.5, 0.5, 0.0, 0.0], 0.25)?,
    ])?;
    ModelSpec::new(p0, nu, 0.05, 0.3)
}

/// The `d = 2` speedup kernel: `p0(±e1) = (1+a)/4`, `p0(±e2) = (1-a)(1±eps)/4`,
/// with `xi = ±U`, `U = (1, 1, 0, -2)`.
pub fn speedup_p0(a: f64, eps: f64) -> Result<TransitionKernel> {
    if !(a > 0.0 && a < 1.0 && eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidModel(format!("need 0 < a < 1 and 0 < eps < 1, got a = {a}, eps = {eps}")));
    }
    let h = (1.0 + a) / 4.0;
    let v = (1.0 - a) / 4.0;
    TransitionKernel::new(&[h, h, v * (1.0 + eps), v * (1.0 - eps)])
}

pub fn speedup(a: f64, eps: f64, kappa0: f64, gamma_max: f64) -> Result<ModelSpec> {
    let nu = PerturbationLaw::symmetric_pair(vec![1.0, 1.0, 0.0, -2.0])?;
    ModelSpec::new(speedup_p0(a, eps)?, nu, kappa0, gamma_max)
}

/// Largest `gamma` keeping every site kernel of the speedup model at least `kappa0`.
pub fn speedup_gamma_limit(a: f64, eps: f64, kappa0: f64) -> Result<f64> {
    let p0 = speedup_p0(a, eps)?;
    let u = [1.0, 1.0, 0.0, -2.0];
    let mut g = f64::INFINITY;
    for (p, x) in p0.probs().iter().zip(u) {
        if x != 0.0 {
            g = g.min((p - kappa0) / f64::abs(x));
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixtures_build() {
        for name in NAMES {
            let m = fixture(name).unwrap();
            assert!(m.hypothesis_h(), "{name}");
        }
        assert!(fixture("nope").is_err());
    }

    #[test]
    fn speedup_drift_and_admissibility() {
        let m = fixture("speedup-s2").unwrap();
        let d0 = m.d0();
        assert!(d0[0].abs() < 1e-15);
        assert!((d0[1] - 0.02 * 0.5 / 2.0).abs() < 1e-15);
        // gamma = 0.1 would push p0(-e2) = 0.1225 below zero.
        assert!((speedup_gamma_limit(0.5, 0.02, 0.02).unwrap() - 0.05125).abs() < 1e-12);
        assert!(speedup(0.5, 0.02, 0.02, 0.1).is_err());
    }

    #[test]
    fn skewed_law_has_zero_mean_and_third_moment() {
        let m = fixture("skewed-1d").unwrap();
        assert!(m.p1().iter().all(|x| x.abs() < 1e-15));
        let t = m.nu().third_moments();
        assert!((t[0][0][0] + 0.25).abs() < 1e-15);
    }
}
