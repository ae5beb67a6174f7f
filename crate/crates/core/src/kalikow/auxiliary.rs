//! Kalikow's auxiliary kernel on a bounded domain.
//!
//! `hat_omega(z, e) = E[G(z0, z) omega(z, e)] / E[G(z0, z)]`, the expectation
//! taken over environments restricted to `U`. Only the kernels inside `U`
//! influence `G_{U,delta}`, so the expectation is a finite sum over
//! `|atoms|^|U|` assignments when that number is small enough.

use std::sync::Arc;

use rayon::prelude::*;

use crate::environment::sample_atom;
use crate::error::{Error, Result};
use crate::green::finite::green_row;
use crate::green::Domain;
use crate::lattice::Site;
use crate::model::{ModelSpec, TransitionKernel};
use crate::seed;

/// Default cap on enumerated environment assignments.
pub const ENUMERATION_BUDGET: u64 = 1 << 20;

/// Assignments per parallel task.
const CHUNK: u64 = 1024;

/// Tolerance on row sums and ellipticity of the auxiliary kernel.
const ROW_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuxMethod {
    ExactEnumeration,
    MonteCarlo,
}

impl AuxMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            AuxMethod::ExactEnumeration => "exact",
            AuxMethod::MonteCarlo => "monte-carlo",
        }
    }
}

/// How to evaluate the environment expectation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuxBudget {
    /// Enumerate exactly when `|atoms|^|U|` is at most this.
    pub max_assignments: u64,
    /// Environments sampled otherwise; zero forbids the fallback.
    pub mc_samples: usize,
    pub seed: u64,
}

impl AuxBudget {
    pub fn exact_only() -> Self {
        AuxBudget { max_assignments: ENUMERATION_BUDGET, mc_samples: 0, seed: 0 }
    }

    pub fn with_fallback(mc_samples: usize, seed: u64) -> Self {
        AuxBudget { max_assignments: ENUMERATION_BUDGET, mc_samples, seed }
    }
}

#[derive(Clone, Debug)]
pub struct AuxiliaryKernel {
    pub domain: Arc<Domain>,
    pub gamma: f64,
    pub delta: f64,
    pub z0: Site,
    /// `hat_omega(z, .)` per interior site, in [`Domain::sites`] order.
    pub kernels: Vec<TransitionKernel>,
    pub method: AuxMethod,
    /// Per site and direction, Monte Carlo only.
    pub stderr: Option<Vec<Vec<f64>>>,
    /// `E[G(z0, z)]` over `U ∪ ∂U`.
    pub mean_green: Vec<f64>,
    /// Rows sum to one and respect `kappa0`.
    pub weights_checked: bool,
    /// Environments enumerated or sampled.
    pub environments: u64,
}

impl AuxiliaryKernel {
    pub fn kernel(&self, z: Site) -> Option<&TransitionKernel> {
        self.domain.index_of(z).filter(|&i| i < self.domain.len()).map(|i| &self.kernels[i])
    }
}

/// Number of assignments `|atoms|^n`, or `None` past `u64`.
pub fn assignment_count(atoms: usize, n: usize) -> Option<u64> {
    (atoms as u64).checked_pow(n as u32)
}

/// Writes the base-`k` digits of `index` into `out` (least significant first).
pub(crate) fn decode(mut index: u64, k: usize, out: &mut [usize]) {
    for slot in out.iter_mut() {
        *slot = (index % k as u64) as usize;
        index /= k as u64;
    }
}

pub(crate) fn check_z0(domain: &Domain, z0: Site) -> Result<()> {
    match domain.index_of(z0) {
        Some(i) if i < domain.len() => Ok(()),
        _ => Err(Error::Precondition(format!("z0 = {} not in U", z0.display(domain.dim())))),
    }
}

/// Sums over one environment: `sum G(z0,z) omega(z,e)`, `sum G(z0,z)` and the full row.
#[derive(Clone, Debug)]
struct Moments {
    num: Vec<f64>,
    den: Vec<f64>,
    green: Vec<f64>,
}

impl Moments {
    fn zeros(n: usize, steps: usize, closure: usize) -> Self {
        Moments { num: vec![0.0; n * steps], den: vec![0.0; n], green: vec![0.0; closure] }
    }

    fn add_weighted(&mut self, w: f64, row: &[f64], kernels: &[TransitionKernel]) {
        let steps = kernels[0].probs().len();
        for (i, k) in kernels.iter().enumerate() {
            let g = w * row[i];
            self.den[i] += g;
            for (e, &p) in k.probs().iter().enumerate() {
                self.num[i * steps + e] += g * p;
            }
        }
        for (a, &g) in self.green.iter_mut().zip(row) {
            *a += w * g;
        }
    }

    fn merge(&mut self, other: &Moments) {
        for (a, b) in self.num.iter_mut().zip(&other.num) {
            *a += b;
        }
        for (a, b) in self.den.iter_mut().zip(&other.den) {
            *a += b;
        }
        for (a, b) in self.green.iter_mut().zip(&other.green) {
            *a += b;
        }
    }
}

/// Builds the auxiliary kernel, enumerating exactly when the budget allows.
pub fn auxiliary_kernel(
    model: &ModelSpec,
    gamma: f64,
    domain: &Arc<Domain>,
    delta: f64,
    z0: Site,
    budget: AuxBudget,
) -> Result<AuxiliaryKernel> {
    model.check_gamma(gamma)?;
    check_z0(domain, z0)?;
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Precondition(format!("delta = {delta} not in [0, 1]")));
    }
    let n = domain.len();
    let k = model.nu().len();
    match assignment_count(k, n) {
        Some(total) if total <= budget.max_assignments => exact(model, gamma, domain, delta, z0, total),
        count => {
            if budget.mc_samples == 0 {
                return Err(Error::BudgetExceeded {
                    needed: count.map_or((k as f64).powi(n as i32), |c| c as f64),
                    budget: budget.max_assignments,
                });
            }
            monte_carlo(model, gamma, domain, delta, z0, budget.mc_samples, budget.seed)
        }
    }
}

fn exact(
    model: &ModelSpec,
    gamma: f64,
    domain: &Arc<Domain>,
    delta: f64,
    z0: Site,
    total: u64,
) -> Result<AuxiliaryKernel> {
    let n = domain.len();
    let steps = 2 * domain.dim();
    let closure = domain.closure().len();
    let atoms = model.atom_kernels(gamma)?;
    let weights: Vec<f64> = model.nu().atoms().iter().map(|a| a.weight()).collect();
    let k = atoms.len();

    let chunks = total.div_ceil(CHUNK);
    let partials: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Moments> {
            let mut m = Moments::zeros(n, steps, closure);
            let mut digits = vec![0usize; n];
            let mut kernels = vec![atoms[0]; n];
            for index in c * CHUNK..((c + 1) * CHUNK).min(total) {
                decode(index, k, &mut digits);
                let mut w = 1.0;
                for (slot, &a) in kernels.iter_mut().zip(&digits) {
                    *slot = atoms[a];
                    w *= weights[a];
                }
                let row = green_row(domain, delta, &kernels, z0)?;
                m.add_weighted(w, &row, &kernels);
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let mut acc = Moments::zeros(n, steps, closure);
    for p in &partials {
        acc.merge(p);
    }
    finish(model, gamma, domain, delta, z0, acc, AuxMethod::ExactEnumeration, None, total)
}

fn monte_carlo(
    model: &ModelSpec,
    gamma: f64,
    domain: &Arc<Domain>,
    delta: f64,
    z0: Site,
    samples: usize,
    master_seed: u64,
) -> Result<AuxiliaryKernel> {
    let n = domain.len();
    let steps = 2 * domain.dim();
    let closure = domain.closure().len();
    let atoms = model.atom_kernels(gamma)?;
    // One sample per environment, kept for the delta-method variance.
    let samples_out: Vec<Moments> = (0..samples as u64)
        .into_par_iter()
        .map(|s| -> Result<Moments> {
            let env_seed = seed::mix3(master_seed, s, seed::tag::KALIKOW);
            let kernels = domain
                .sites()
                .iter()
                .map(|&z| Ok(atoms[sample_atom(model, env_seed, z)?]))
                .collect::<Result<Vec<_>>>()?;
            let row = green_row(domain, delta, &kernels, z0)?;
            let mut m = Moments::zeros(n, steps, closure);
            m.add_weighted(1.0, &row, &kernels);
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let m = samples as f64;
    let mut acc = Moments::zeros(n, steps, closure);
    for s in &samples_out {
        acc.merge(s);
    }
    for v in acc.num.iter_mut().chain(acc.den.iter_mut()).chain(acc.green.iter_mut()) {
        *v /= m;
    }
    // Ratio estimator variance: Var(N - R D) / (M D_bar^2).
    let mut stderr = vec![vec![0.0; steps]; n];
    if samples > 1 {
        for i in 0..n {
            if acc.den[i] <= 0.0 {
                continue;
            }
            for e in 0..steps {
                let r = acc.num[i * steps + e] / acc.den[i];
                let ss: f64 = samples_out.iter().map(|s| (s.num[i * steps + e] - r * s.den[i]).powi(2)).sum();
                stderr[i][e] = (ss / (m * (m - 1.0))).sqrt() / acc.den[i];
            }
        }
    }
    finish(model, gamma, domain, delta, z0, acc, AuxMethod::MonteCarlo, Some(stderr), samples as u64)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    model: &ModelSpec,
    gamma: f64,
    domain: &Arc<Domain>,
    delta: f64,
    z0: Site,
    acc: Moments,
    method: AuxMethod,
    stderr: Option<Vec<Vec<f64>>>,
    environments: u64,
) -> Result<AuxiliaryKernel> {
    let steps = 2 * domain.dim();
    let fallback = model.p_gamma(gamma)?;
    let mut weights_checked = true;
    let mut kernels = Vec::with_capacity(domain.len());
    for (i, &den) in acc.den.iter().enumerate() {
        // A site the walk never reaches has no weight; any kernel works there.
        // A degenerate law has one environment, whose kernel is p^gamma everywhere.
        if den <= 0.0 || model.nu().is_degenerate() {
            kernels.push(fallback);
            continue;
        }
        let row: Vec<f64> = acc.num[i * steps..(i + 1) * steps].iter().map(|x| x / den).collect();
        let sum: f64 = row.iter().sum();
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        weights_checked &= (sum - 1.0).abs() <= ROW_TOL && min >= model.kappa0() - ROW_TOL;
        kernels.push(TransitionKernel::new(&row)?);
    }
    Ok(AuxiliaryKernel {
        domain: Arc::clone(domain),
        gamma,
        delta,
        z0,
        kernels,
        method,
        stderr,
        mean_green: acc.green,
        weights_checked,
        environments,
    })
}

/// Largest `|E G^omega(z0, z) - G^{hat_omega}(z0, z)|` over `U ∪ ∂U`.
pub fn verify_prop1(model: &ModelSpec, gamma: f64, domain: &Arc<Domain>, delta: f64, z0: Site) -> Result<f64> {
    let aux = auxiliary_kernel(model, gamma, domain, delta, z0, AuxBudget::exact_only())?;
    prop1_residual(&aux)
}

/// Largest `|E G^omega - G^hat|` over the domain for an already computed kernel.
pub fn prop1_residual(aux: &AuxiliaryKernel) -> Result<f64> {
    let g_hat = green_row(&aux.domain, aux.delta, &aux.kernels, aux.z0)?;
    Ok(aux.mean_green.iter().zip(&g_hat).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::PerturbationLaw;

    #[test]
    fn degenerate_law_gives_mean_kernel() {
        let p0 = TransitionKernel::new(&[0.3, 0.2, 0.25, 0.25]).unwrap();
        let m = ModelSpec::new(p0, PerturbationLaw::degenerate(2).unwrap(), 0.05, 0.1).unwrap();
        let u = Arc::new(Domain::cube(2, 1).unwrap());
        let aux = auxiliary_kernel(&m, 0.05, &u, 0.95, Site::ORIGIN, AuxBudget::exact_only()).unwrap();
        for k in &aux.kernels {
            for (a, b) in k.probs().iter().zip(p0.probs()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        assert!(prop1_residual(&aux).unwrap() < 1e-15);
    }

    #[test]
    fn singleton_gives_mean_kernel() {
        let m = fixtures::d1_twopoint().unwrap();
        let u = Arc::new(Domain::new(1, [Site::ORIGIN]).unwrap());
        let aux = auxiliary_kernel(&m, 0.2, &u, 1.0, Site::ORIGIN, AuxBudget::exact_only()).unwrap();
        let p = m.p_gamma(0.2).unwrap();
        assert!((aux.kernels[0].probs()[0] - p.probs()[0]).abs() < 1e-15);
        assert_eq!(aux.environments, 2);
    }

    #[test]
    fn three_site_interval_is_exact() {
        let m = fixtures::d1_twopoint().unwrap();
        let u = Arc::new(Domain::interval(-1, 1).unwrap());
        for delta in [0.9, 1.0] {
            let aux = auxiliary_kernel(&m, 0.2, &u, delta, Site::ORIGIN, AuxBudget::exact_only()).unwrap();
            assert_eq!(aux.environments, 8);
            assert!(aux.weights_checked);
            assert!(prop1_residual(&aux).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let m = fixtures::d1_twopoint().unwrap();
        let u = Arc::new(Domain::interval(-3, 3).unwrap());
        let budget = AuxBudget { max_assignments: 64, mc_samples: 0, seed: 0 };
        let err = auxiliary_kernel(&m, 0.1, &u, 1.0, Site::ORIGIN, budget).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { budget: 64, .. }));
    }

    #[test]
    fn decode_is_base_k() {
        let mut d = [0; 4];
        decode(2 + 3 + 9 * 2, 3, &mut d);
        assert_eq!(d, [2, 1, 2, 0]);
    }
}
