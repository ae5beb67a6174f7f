//! Comparison of Green functions before and after changing one site kernel.
//!
//! For `omega'` equal to `omega` except `omega'(z, .) = omega(z, .) + Delta`,
//! with both environments `kappa0`-elliptic:
//!
//! * `|G' - G| <= (2d sup|Delta| / kappa0^2) G'`
//! * `|G' - G - G(y,z) sum_e Delta(e) (delta G(z+e,y') - G(z,y'))| <= (2d sup|Delta|)^2 / kappa0^3 G'`
//!
//! for all `y` in `U` and `y'` in `U ∪ ∂U`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::green::{Domain, GreenMatrix};
use crate::lattice::{directions, Site};
use crate::model::TransitionKernel;

/// Slack for rounding when a bound is compared at equality.
const ROUNDING: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Lemma1Check {
    /// Largest `|G' - G| / bound_1`; at most 1 when the first bound holds.
    pub ratio_first: f64,
    /// Largest second-order remainder over its bound.
    pub ratio_second: f64,
    pub pairs_checked: usize,
    pub violations: usize,
}

impl Lemma1Check {
    pub fn merge(&mut self, other: &Lemma1Check) {
        self.ratio_first = self.ratio_first.max(other.ratio_first);
        self.ratio_second = self.ratio_second.max(other.ratio_second);
        self.pairs_checked += other.pairs_checked;
        self.violations += other.violations;
    }
}

/// Checks both bounds for the pair `(omega, omega')` given by their kernels on `U`.
///
/// `kappa0` defaults to the smallest probability appearing in either environment.
pub fn lemma1_check(
    domain: &Arc<Domain>,
    delta: f64,
    omega: &[TransitionKernel],
    omega_prime: &[TransitionKernel],
    z: Site,
    kappa0: Option<f64>,
) -> Result<Lemma1Check> {
    let iz = domain
        .index_of(z)
        .filter(|&i| i < domain.len())
        .ok_or_else(|| Error::Precondition(format!("perturbed site {} not in U", z.display(domain.dim()))))?;
    for (i, (a, b)) in omega.iter().zip(omega_prime).enumerate() {
        if i != iz && a != b {
            return Err(Error::Precondition("environments differ away from the perturbed site".into()));
        }
    }
    let d = domain.dim();
    let delta_omega: Vec<f64> = omega_prime[iz].probs().iter().zip(omega[iz].probs()).map(|(a, b)| a - b).collect();
    let sup = delta_omega.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let k0 = kappa0.unwrap_or_else(|| {
        omega.iter().chain(omega_prime).map(TransitionKernel::min_prob).fold(f64::INFINITY, f64::min)
    });
    let c1 = 2.0 * d as f64 * sup / (k0 * k0);
    let c2 = (2.0 * d as f64 * sup).powi(2) / k0.powi(3);

    let g = GreenMatrix::new(domain, delta, omega)?;
    let gp = GreenMatrix::new(domain, delta, omega_prime)?;
    let mut out = Lemma1Check::default();
    for &y in domain.sites() {
        let gyz = g.get(y, z);
        for &yp in domain.closure() {
            let (a, b) = (gp.get(y, yp), g.get(y, yp));
            let first = (a - b).abs();
            let linear: f64 = directions(d)
                .map(|e| delta_omega[e.index()] * (delta * g.get(z.step(e), yp) - g.get(z, yp)))
                .sum::<f64>()
                * gyz;
            let second = (a - b - linear).abs();
            let b1 = c1 * a;
            let b2 = c2 * a;
            out.pairs_checked += 1;
            if first > b1 + ROUNDING * (1.0 + a) || second > b2 + ROUNDING * (1.0 + a) {
                out.violations += 1;
            }
            if b1 > 0.0 {
                out.ratio_first = out.ratio_first.max(first / b1);
            }
            if b2 > 0.0 {
                out.ratio_second = out.ratio_second.max(second / b2);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_hold_for_a_simple_perturbation() {
        let u = Arc::new(Domain::cube(2, 2).unwrap());
        let p = TransitionKernel::new(&[0.3, 0.2, 0.25, 0.25]).unwrap();
        let omega = vec![p; u.len()];
        let mut omega_prime = omega.clone();
        let iz = u.index_of(Site([1, 0, 0])).unwrap();
        omega_prime[iz] = TransitionKernel::new(&[0.35, 0.15, 0.25, 0.25]).unwrap();
        let c = lemma1_check(&u, 0.95, &omega, &omega_prime, Site([1, 0, 0]), None).unwrap();
        assert_eq!(c.violations, 0);
        assert!(c.ratio_first > 0.0 && c.ratio_first <= 1.0);
        assert_eq!(c.pairs_checked, 25 * (25 + 20));
    }
}
