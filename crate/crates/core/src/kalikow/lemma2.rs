//! Second-order expansion of the auxiliary kernel.
//!
//! `hat_omega(y, e) = p0(e) + gamma p1(e) + gamma^2 sum_e' C(e,e') J~_e'(y) + O(gamma^3)`
//! with `|O(gamma^3)| <= 2 (2d)^2 / kappa0^4 gamma^3`, where
//! `J~_e'(y) = E[G(z0,y) (delta G(y+e',y) - G(y,y))] / E[G(z0,y)]` under the
//! environment `omega^{gamma,y}` whose kernel at `y` is replaced by `p^gamma`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::green::{lemma1_check, Domain, GreenMatrix, Lemma1Check};
use crate::kalikow::auxiliary::{assignment_count, auxiliary_kernel, check_z0, decode, AuxBudget, ENUMERATION_BUDGET};
use crate::lattice::{directions, Site};
use crate::model::ModelSpec;

/// Residuals at or below this are indistinguishable from rounding.
pub const NOISE_FLOOR: f64 = 1e-13;

const CHUNK: u64 = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma2Row {
    pub gamma: f64,
    /// `max_{y,e} |hat_omega(y,e) - p0 - gamma p1 - gamma^2 sum C J~|`.
    pub residual: f64,
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma2Report {
    pub rows: Vec<Lemma2Row>,
    /// Least-squares slope of `log residual` against `log gamma`; `None` when
    /// fewer than two residuals clear the noise floor.
    pub exponent: Option<f64>,
    pub noise_floor: bool,
    /// Perturbation bounds on every `(omega^{gamma,y}, omega^gamma)` pair met along the way.
    pub lemma1: Lemma1Check,
}

/// `J~_e(y)` for every interior `y` (rows in [`Domain::sites`] order), plus the perturbation-bound checks.
pub fn j_tilde(
    model: &ModelSpec,
    gamma: f64,
    domain: &Arc<Domain>,
    delta: f64,
    z0: Site,
    check_lemma1: bool,
) -> Result<(Vec<Vec<f64>>, Lemma1Check)> {
    model.check_gamma(gamma)?;
    check_z0(domain, z0)?;
    let n = domain.len();
    let d = domain.dim();
    let k = model.nu().len();
    let total = assignment_count(k, n - 1)
        .filter(|&t| t <= ENUMERATION_BUDGET)
        .ok_or(Error::BudgetExceeded { needed: (k as f64).powi(n as i32 - 1), budget: ENUMERATION_BUDGET })?;
    let atoms = model.atom_kernels(gamma)?;
    let weights: Vec<f64> = model.nu().atoms().iter().map(|a| a.weight()).collect();
    let mean = model.p_gamma(gamma)?;

    let mut out = Vec::with_capacity(n);
    let mut lemma1 = Lemma1Check::default();
    for (yi, &y) in domain.sites().iter().enumerate() {
        let chunks = total.div_ceil(CHUNK);
        let partials: Vec<(f64, Vec<f64>, Lemma1Check)> = (0..chunks)
            .into_par_iter()
            .map(|c| -> Result<_> {
                let mut den = 0.0;
                let mut num = vec![0.0; 2 * d];
                let mut check = Lemma1Check::default();
                let mut digits = vec![0usize; n - 1];
                let mut kernels = vec![mean; n];
                for index in c * CHUNK..((c + 1) * CHUNK).min(total) {
                    decode(index, k, &mut digits);
                    let mut w = 1.0;
                    let others = (0..n).filter(|&i| i != yi);
                    for (i, &a) in others.zip(&digits) {
                        kernels[i] = atoms[a];
                        w *= weights[a];
                    }
                    let g = GreenMatrix::new(domain, delta, &kernels)?;
                    let gz0 = g.get(z0, y);
                    let gyy = g.get(y, y);
                    den += w * gz0;
                    for e in directions(d) {
                        num[e.index()] += w * gz0 * (delta * g.get(y.step(e), y) - gyy);
                    }
                    if check_lemma1 {
                        for atom in &atoms {
                            let mut perturbed = kernels.clone();
                            perturbed[yi] = *atom;
                            check.merge(&lemma1_check(domain, delta, &kernels, &perturbed, y, None)?);
                        }
                    }
                }
                Ok((den, num, check))
            })
            .collect::<Result<_>>()?;
        let mut den = 0.0;
        let mut num = vec![0.0; 2 * d];
        for (pd, pn, pc) in &partials {
            den += pd;
            for (a, b) in num.iter_mut().zip(pn) {
                *a += b;
            }
            lemma1.merge(pc);
        }
        out.push(if den > 0.0 { num.iter().map(|x| x / den).collect() } else { vec![0.0; 2 * d] });
    }
    Ok((out, lemma1))
}

/// The explicit third-order bound `2 (2d)^2 / kappa0^4 gamma^3`.
pub fn lemma2_bound(d: usize, kappa0: f64, gamma: f64) -> f64 {
    2.0 * (2.0 * d as f64).powi(2) / kappa0.powi(4) * gamma.abs().powi(3)
}

/// Residual of the second-order expansion at one `gamma`.
pub fn lemma2_residual(
    model: &ModelSpec,
    gamma: f64,
    domain: &Arc<Domain>,
    delta: f64,
    z0: Site,
    check_lemma1: bool,
) -> Result<(f64, Lemma1Check)> {
    let aux = auxiliary_kernel(model, gamma, domain, delta, z0, AuxBudget::exact_only())?;
    let (jt, lemma1) = j_tilde(model, gamma, domain, delta, z0, check_lemma1)?;
    let c = model.nu().covariance();
    let p0 = model.p0().probs();
    let p1 = model.p1();
    let mut r: f64 = 0.0;
    for (kernel, j) in aux.kernels.iter().zip(&jt) {
        for (e, &w) in kernel.probs().iter().enumerate() {
            let second: f64 = c[e].iter().zip(j).map(|(a, b)| a * b).sum();
            let predicted = p0[e] + gamma * p1[e] + gamma * gamma * second;
            r = r.max((w - predicted).abs());
        }
    }
    Ok((r, lemma1))
}

/// Residuals over `gammas`, their log-log slope, and the explicit bound.
pub fn lemma2_scaling(
    model: &ModelSpec,
    domain: &Arc<Domain>,
    delta: f64,
    z0: Site,
    gammas: &[f64],
) -> Result<Lemma2Report> {
    let mut rows = Vec::with_capacity(gammas.len());
    let mut lemma1 = Lemma1Check::default();
    for &gamma in gammas {
        let (residual, check) = lemma2_residual(model, gamma, domain, delta, z0, true)?;
        lemma1.merge(&check);
        let bound = lemma2_bound(model.dim(), model.kappa0(), gamma);
        rows.push(Lemma2Row { gamma, residual, bound, within_bound: residual <= bound });
    }
    let points: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.residual > NOISE_FLOOR).map(|r| (r.gamma.abs().ln(), r.residual.ln())).collect();
    let exponent = if points.len() >= 2 { Some(fit_slope(&points)) } else { None };
    Ok(Lemma2Report { noise_floor: points.len() < rows.len(), rows, exponent, lemma1 })
}

/// Ordinary least-squares slope.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{PerturbationLaw, TransitionKernel};

    #[test]
    fn degenerate_law_has_zero_residual() {
        let p0 = TransitionKernel::new(&[0.6, 0.4]).unwrap();
        let m = ModelSpec::new(p0, PerturbationLaw::degenerate(1).unwrap(), 0.05, 0.3).unwrap();
        let u = Arc::new(Domain::interval(-1, 1).unwrap());
        let rep = lemma2_scaling(&m, &u, 1.0, Site::ORIGIN, &[0.1, 0.05]).unwrap();
        assert!(rep.rows.iter().all(|r| r.residual < 1e-15));
        assert!(rep.exponent.is_none() && rep.noise_floor);
    }

    #[test]
    fn two_atom_line_is_third_order() {
        let m = fixtures::d1_twopoint().unwrap();
        let u = Arc::new(Domain::interval(-2, 2).unwrap());
        let rep = lemma2_scaling(&m, &u, 1.0, Site::ORIGIN, &[0.1, 0.05, 0.025]).unwrap();
        assert!(rep.exponent.unwrap() >= 2.7, "{rep:?}");
        assert!(rep.rows.iter().all(|r| r.within_bound));
        assert_eq!(rep.lemma1.violations, 0);
        assert!(rep.lemma1.pairs_checked > 0);
    }

    #[test]
    fn slope_of_a_line() {
        assert!((fit_slope(&[(0.0, 1.0), (1.0, 4.0), (2.0, 7.0)]) - 3.0).abs() < 1e-15);
    }
}
