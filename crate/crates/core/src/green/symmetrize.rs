//! Diagonal conjugation of a drifted kernel into a symmetric one with killing.
//!
//! With `phi(z) = prod_i r_i^{z_i}` and `r_i = sqrt(p(e_i)/p(-e_i))`,
//! `M_phi P M_phi^{-1} = k P^s` where `k = 2 sum_i sqrt(p(e_i) p(-e_i))` and
//! `s(±e_i) = sqrt(p(e_i) p(-e_i)) / k`. Hence `G^p(z,z') = phi(z'-z) G^s_k(z,z')`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lattice::{directions, Site};
use crate::model::{ModelSpec, TransitionKernel};

#[derive(Clone, Debug, PartialEq)]
pub struct Symmetrization {
    /// `r_i` per axis.
    pub phi_base: Vec<f64>,
    pub k: f64,
    /// `1 - k`, computed as a sum of squares so it keeps full relative precision.
    pub one_minus_k: f64,
    pub s: TransitionKernel,
}

impl Symmetrization {
    /// `phi(z)`.
    pub fn phi(&self, z: Site) -> f64 {
        self.phi_base.iter().zip(z.0).map(|(r, c)| r.powi(c)).product()
    }
}

pub fn symmetrize(p: &TransitionKernel) -> Symmetrization {
    let d = p.dim();
    let pr = p.probs();
    let mut phi_base = Vec::with_capacity(d);
    let mut half = Vec::with_capacity(d);
    let mut one_minus_k = 0.0;
    for i in 0..d {
        let (a, b) = (pr[2 * i], pr[2 * i + 1]);
        phi_base.push((a / b).sqrt());
        half.push((a * b).sqrt());
        one_minus_k += (a.sqrt() - b.sqrt()).powi(2);
    }
    let k: f64 = 2.0 * half.iter().sum::<f64>();
    let s_half: Vec<f64> = half.iter().map(|h| h / k).collect();
    let s = TransitionKernel::symmetric(&s_half).expect("symmetrized kernel is a probability vector");
    Symmetrization { phi_base, k, one_minus_k, s }
}

/// `|(M_phi P M_phi^{-1} f)(z) - k (P^s f)(z)|` for a finitely supported `f`.
pub fn conjugation_residual(p: &TransitionKernel, sym: &Symmetrization, f: &HashMap<Site, f64>, z: Site) -> f64 {
    let val = |x: Site| f.get(&x).copied().unwrap_or(0.0);
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for e in directions(p.dim()) {
        let y = z.step(e);
        lhs += p.prob(e) * val(y) / sym.phi(y);
        rhs += sym.s.prob(e) * val(y);
    }
    (sym.phi(z) * lhs - sym.k * rhs).abs()
}

/// Measured and predicted quadratic coefficient of `1 - k^gamma` when `d0 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct KGammaReport {
    pub gamma: f64,
    pub one_minus_k: f64,
    /// `(1 - k^gamma) / gamma^2`.
    pub k_measured: f64,
    /// `sum_i (p1(e_i) - p1(-e_i))^2 / (4 p0(e_i))`.
    pub k_formula: f64,
    /// `|k_measured - k_formula| <= 5 |gamma|`.
    pub agrees: bool,
}

pub fn kgamma_expansion_check(model: &ModelSpec, gamma: f64) -> Result<KGammaReport> {
    if !model.d0_is_zero() {
        return Err(Error::Precondition("the 1 - k^gamma expansion needs d0 = 0".into()));
    }
    if crate::model::is_zero(&model.d1()) {
        return Err(Error::Precondition("the 1 - k^gamma expansion needs d1 != 0".into()));
    }
    if gamma == 0.0 {
        return Err(Error::Precondition("gamma must be nonzero".into()));
    }
    let sym = symmetrize(&model.p_gamma(gamma)?);
    let p0 = model.p0().probs();
    let p1 = model.p1();
    let k_formula: f64 = (0..model.dim()).map(|i| (p1[2 * i] - p1[2 * i + 1]).powi(2) / (4.0 * p0[2 * i])).sum();
    let k_measured = sym.one_minus_k / (gamma * gamma);
    Ok(KGammaReport {
        gamma,
        one_minus_k: sym.one_minus_k,
        k_measured,
        k_formula,
        agrees: (k_measured - k_formula).abs() <= 5.0 * gamma.abs(),
    })
}
