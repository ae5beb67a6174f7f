//! Kernels, perturbation laws and model specifications.
//!
//! An environment is `omega^gamma(z, e) = p0(e) + gamma * xi(z, e)` where the
//! `xi(z, .)` are i.i.d. draws from a finite-support law `nu` on vectors that
//! sum to zero. Everything in this module is plain data plus the moment
//! computations that feed the speed expansion.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{directions, Direction, MAX_DIM};

/// Tolerance for identities that hold exactly in rational arithmetic.
pub const EXACT_TOL: f64 = 1e-12;

/// Number of steps `2d` stored in a kernel.
pub const MAX_STEPS: usize = 2 * MAX_DIM;

/// Transition probabilities over the `2d` nearest-neighbour steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionKernel {
    d: usize,
    probs: [f64; MAX_STEPS],
}

impl TransitionKernel {
    /// `probs` is in canonical direction order (`+e1, -e1, +e2, ...`).
    pub fn new(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() || !probs.len().is_multiple_of(2) || probs.len() > MAX_STEPS {
            return Err(Error::InvalidKernel(format!(
                "expected 2d entries with d in 1..={MAX_DIM}, got {}",
                probs.len()
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidKernel(format!(
                    "probability {p} for {} not in (0,1)",
                    Direction::from_index(i)
                )));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > EXACT_TOL {
            return Err(Error::InvalidKernel(format!("probabilities sum to {total}, not 1")));
        }
        let mut arr = [0.0; MAX_STEPS];
        arr[..probs.len()].copy_from_slice(probs);
        Ok(TransitionKernel { d: probs.len() / 2, probs: arr })
    }

    /// The simple symmetric walk, `1/(2d)` in every direction.
    pub fn simple(d: usize) -> Result<Self> {
        TransitionKernel::new(&vec![1.0 / (2 * d) as f64; 2 * d])
    }

    /// Symmetric kernel with `s(±e_i) = half_weights[i]`.
    pub fn symmetric(half_weights: &[f64]) -> Result<Self> {
        let probs: Vec<f64> = half_weights.iter().flat_map(|&s| [s, s]).collect();
        TransitionKernel::new(&probs)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn prob(&self, e: Direction) -> f64 {
        self.probs[e.index()]
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.probs[..2 * self.d]
    }

    pub fn min_prob(&self) -> f64 {
        self.probs().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_elliptic(&self, kappa0: f64) -> bool {
        self.min_prob() >= kappa0
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.d).all(|i| (self.probs[2 * i] - self.probs[2 * i + 1]).abs() <= EXACT_TOL)
    }

    /// `sum_e p(e) e`.
    pub fn drift(&self) -> Vec<f64> {
        drift(self)
    }

    /// Cumulative probabilities in direction order, last entry forced to 1.
    pub fn cumulative(&self) -> [f64; MAX_STEPS] {
        let mut cum = [1.0; MAX_STEPS];
        let mut acc = 0.0;
        for (i, p) in self.probs().iter().enumerate() {
            acc += p;
            cum[i] = acc;
        }
        cum[2 * self.d - 1] = 1.0;
        cum
    }

    /// Map keyed by signed-axis strings.
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        directions(self.d).map(|e| (e.to_string(), self.prob(e))).collect()
    }

    pub fn from_map(d: usize, map: &BTreeMap<String, f64>) -> Result<Self> {
        TransitionKernel::new(&vector_from_map(d, map, "kernel")?)
    }
}

/// Drift `sum_e p(e) e` of a kernel.
pub fn drift(kernel: &TransitionKernel) -> Vec<f64> {
    vector_drift(kernel.dim(), kernel.probs())
}

/// `sum_e v(e) e` for any vector indexed by directions.
pub fn vector_drift(d: usize, v: &[f64]) -> Vec<f64> {
    (0..d).map(|i| v[2 * i] - v[2 * i + 1]).collect()
}

fn vector_from_map(d: usize, map: &BTreeMap<String, f64>, what: &str) -> Result<Vec<f64>> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::InvalidModel(format!("dimension {d} not in 1..={MAX_DIM}")));
    }
    let mut v = vec![f64::NAN; 2 * d];
    for (key, &value) in map {
        let e: Direction = key.parse()?;
        if e.axis() > d {
            return Err(Error::InvalidModel(format!("{what}: direction {key} exceeds dimension {d}")));
        }
        v[e.index()] = value;
    }
    if let Some(i) = v.iter().position(|x| x.is_nan()) {
        return Err(Error::InvalidModel(format!("{what}: missing entry for direction {}", Direction::from_index(i))));
    }
    Ok(v)
}

/// One atom of the perturbation law: a zero-sum vector `U` with its weight.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationAtom {
    u: Vec<f64>,
    weight: f64,
}

impl PerturbationAtom {
    pub fn new(u: Vec<f64>, weight: f64) -> Result<Self> {
        if u.is_empty() || !u.len().is_multiple_of(2) || u.len() > MAX_STEPS {
            return Err(Error::InvalidLaw(format!("atom has {} entries", u.len())));
        }
        if let Some(x) = u.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidLaw(format!("atom entry {x} is not finite")));
        }
        let total: f64 = u.iter().sum();
        if total.abs() > EXACT_TOL {
            return Err(Error::InvalidLaw(format!("atom entries sum to {total}, not 0")));
        }
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(Error::InvalidLaw(format!("atom weight {weight} not in (0,1]")));
        }
        Ok(PerturbationAtom { u, weight })
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.u.len() / 2
    }
}

/// Finite-support law `nu` of `xi(0, .)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationLaw {
    d: usize,
    atoms: Vec<PerturbationAtom>,
}

impl PerturbationLaw {
    pub fn new(atoms: Vec<PerturbationAtom>) -> Result<Self> {
        let first = atoms.first().ok_or_else(|| Error::InvalidLaw("no atoms".into()))?;
        let d = first.dim();
        if atoms.iter().any(|a| a.dim() != d) {
            return Err(Error::InvalidLaw("atoms have different dimensions".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > EXACT_TOL {
            return Err(Error::InvalidLaw(format!("weights sum to {total}, not 1")));
        }
        Ok(PerturbationLaw { d, atoms })
    }

    /// The law concentrated on `U = 0`.
    pub fn degenerate(d: usize) -> Result<Self> {
        PerturbationLaw::new(vec![PerturbationAtom::new(vec![0.0; 2 * d], 1.0)?])
    }

    /// `U` and `-U` with probability 1/2 each.
    pub fn symmetric_pair(u: Vec<f64>) -> Result<Self> {
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        PerturbationLaw::new(vec![PerturbationAtom::new(u, 0.5)?, PerturbationAtom::new(neg, 0.5)?])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn atoms(&self) -> &[PerturbationAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `p1(e) = E xi(0, e)`.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; 2 * self.d];
        for a in &self.atoms {
            for (mi, ui) in m.iter_mut().zip(&a.u) {
                *mi += a.weight * ui;
            }
        }
        m
    }

    /// `xi_bar = U - p1` for atom `k`.
    pub fn centered(&self, k: usize) -> Vec<f64> {
        let mean = self.mean();
        self.atoms[k].u.iter().zip(&mean).map(|(u, m)| u - m).collect()
    }

    /// True when every atom equals the mean, i.e. the environment is deterministic.
    pub fn is_degenerate(&self) -> bool {
        (0..self.atoms.len()).all(|k| self.centered(k).iter().all(|x| x.abs() <= EXACT_TOL))
    }

    /// `C[e][e'] = Cov(xi(e), xi(e'))`, row-major over direction indices.
    pub fn covariance(&self) -> Vec<Vec<f64>> {
        covariance(self)
    }

    /// `T[e][e'][e''] = E(xi_bar(e) xi_bar(e') xi_bar(e''))`.
    pub fn third_moments(&self) -> Vec<Vec<Vec<f64>>> {
        third_moments(self)
    }

    /// Index of the atom selected by a uniform `u` in `[0,1)` (inverse CDF).
    pub fn atom_for_uniform(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (k, a) in self.atoms.iter().enumerate() {
            acc += a.weight;
            if u < acc {
                return k;
            }
        }
        self.atoms.len() - 1
    }
}

/// Covariance matrix of the site perturbation.
pub fn covariance(nu: &PerturbationLaw) -> Vec<Vec<f64>> {
    let n = 2 * nu.d;
    let mut c = vec![vec![0.0; n]; n];
    for k in 0..nu.atoms.len() {
        let w = nu.atoms[k].weight;
        let xb = nu.centered(k);
        for i in 0..n {
            for j in 0..n {
                c[i][j] += w * xb[i] * xb[j];
            }
        }
    }
    c
}

/// Centered third mixed moments of the site perturbation.
pub fn third_moments(nu: &PerturbationLaw) -> Vec<Vec<Vec<f64>>> {
    let n = 2 * nu.d;
    let mut t = vec![vec![vec![0.0; n]; n]; n];
    for k in 0..nu.atoms.len() {
        let w = nu.atoms[k].weight;
        let xb = nu.centered(k);
        for i in 0..n {
            for j in 0..n {
                let wij = w * xb[i] * xb[j];
                for l in 0..n {
                    t[i][j][l] += wij * xb[l];
                }
            }
        }
    }
    t
}

/// Full model: dimension, mean-environment kernel `p0`, law `nu`, and the
/// ellipticity/admissibility constants supplied by the user.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    d: usize,
    p0: TransitionKernel,
    nu: PerturbationLaw,
    kappa0: f64,
    gamma_max: f64,
}

impl ModelSpec {
    pub fn new(p0: TransitionKernel, nu: PerturbationLaw, kappa0: f64, gamma_max: f64) -> Result<Self> {
        let d = p0.dim();
        if nu.dim() != d {
            return Err(Error::InvalidModel(format!("p0 has dimension {d} but the law has dimension {}", nu.dim())));
        }
        if !(kappa0 > 0.0 && kappa0 < 0.5) {
            return Err(Error::InvalidModel(format!("kappa0 = {kappa0} not in (0, 1/2)")));
        }
        if !(gamma_max >= 0.0 && gamma_max.is_finite()) {
            return Err(Error::InvalidModel(format!("gamma_max = {gamma_max} must be finite and >= 0")));
        }
        // p0 + gamma U is affine in gamma, so checking the two endpoints suffices.
        for atom in nu.atoms() {
            for g in [-gamma_max, gamma_max] {
                for (i, (&p, &u)) in p0.probs().iter().zip(atom.u()).enumerate() {
                    let w = p + g * u;
                    if w < kappa0 - EXACT_TOL || w > 1.0 - kappa0 + EXACT_TOL {
                        return Err(Error::InvalidModel(format!(
                            "p0({e}) + gamma U({e}) = {w} at gamma = {g} leaves [kappa0, 1 - kappa0] = [{kappa0}, {}]",
                            1.0 - kappa0,
                            e = Direction::from_index(i)
                        )));
                    }
                }
            }
        }
        Ok(ModelSpec { d, p0, nu, kappa0, gamma_max })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn p0(&self) -> &TransitionKernel {
        &self.p0
    }

    pub fn nu(&self) -> &PerturbationLaw {
        &self.nu
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn gamma_max(&self) -> f64 {
        self.gamma_max
    }

    pub fn check_gamma(&self, gamma: f64) -> Result<()> {
        if gamma.is_finite() && gamma.abs() <= self.gamma_max {
            Ok(())
        } else {
            Err(Error::GammaOutOfRange { gamma, gamma_max: self.gamma_max })
        }
    }

    /// `p1 = E xi(0, .)`.
    pub fn p1(&self) -> Vec<f64> {
        self.nu.mean()
    }

    /// Mean environment `p^gamma = p0 + gamma p1`.
    pub fn p_gamma(&self, gamma: f64) -> Result<TransitionKernel> {
        self.check_gamma(gamma)?;
        let p1 = self.p1();
        let probs: Vec<f64> = self.p0.probs().iter().zip(&p1).map(|(p, m)| p + gamma * m).collect();
        TransitionKernel::new(&probs)
    }

    /// `omega^gamma(z, .)` when site `z` carries atom `k`.
    pub fn atom_kernel(&self, gamma: f64, k: usize) -> Result<TransitionKernel> {
        self.check_gamma(gamma)?;
        let u = self.nu.atoms()[k].u();
        let probs: Vec<f64> = self.p0.probs().iter().zip(u).map(|(p, x)| p + gamma * x).collect();
        TransitionKernel::new(&probs)
    }

    /// Kernels for every atom, in atom order.
    pub fn atom_kernels(&self, gamma: f64) -> Result<Vec<TransitionKernel>> {
        (0..self.nu.len()).map(|k| self.atom_kernel(gamma, k)).collect()
    }

    pub fn d0(&self) -> Vec<f64> {
        drift(&self.p0)
    }

    pub fn d1(&self) -> Vec<f64> {
        vector_drift(self.d, &self.p1())
    }

    /// Ballistic condition: `d0 != 0` or `d1 != 0`.
    pub fn hypothesis_h(&self) -> bool {
        !is_zero(&self.d0()) || !is_zero(&self.d1())
    }

    pub fn d0_is_zero(&self) -> bool {
        is_zero(&self.d0())
    }

    /// `d0 + gamma d1`, the drift of the mean environment.
    pub fn mean_drift(&self, gamma: f64) -> Vec<f64> {
        self.d0().iter().zip(self.d1()).map(|(a, b)| a + gamma * b).collect()
    }

    pub fn require_h(&self) -> Result<()> {
        if self.hypothesis_h() {
            Ok(())
        } else {
            Err(Error::HypothesisViolated("d0 = 0 and d1 = 0".into()))
        }
    }

    pub fn to_doc(&self) -> ModelDoc {
        ModelDoc {
            d: self.d,
            p0: self.p0.to_map(),
            atoms: self
                .nu
                .atoms()
                .iter()
                .map(|a| AtomDoc {
                    weight: a.weight(),
                    u: directions(self.d).map(|e| (e.to_string(), a.u()[e.index()])).collect(),
                })
                .collect(),
            kappa0: self.kappa0,
            gamma_max: self.gamma_max,
        }
    }

    pub fn from_doc(doc: &ModelDoc) -> Result<Self> {
        let p0 = TransitionKernel::from_map(doc.d, &doc.p0)?;
        let atoms = doc
            .atoms
            .iter()
            .map(|a| PerturbationAtom::new(vector_from_map(doc.d, &a.u, "atom U")?, a.weight))
            .collect::<Result<Vec<_>>>()?;
        ModelSpec::new(p0, PerturbationLaw::new(atoms)?, doc.kappa0, doc.gamma_max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("model document serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(s)?;
        ModelSpec::from_doc(&doc)
    }
}

pub(crate) fn is_zero(v: &[f64]) -> bool {
    v.iter().all(|x| x.abs() <= EXACT_TOL)
}

/// JSON form of a [`ModelSpec`]. Direction keys are signed-axis strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub d: usize,
    pub p0: BTreeMap<String, f64>,
    pub atoms: Vec<AtomDoc>,
    pub kappa0: f64,
    pub gamma_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub weight: f64,
    #[serde(rename = "U")]
    pub u: BTreeMap<String, f64>,
}
