//! Effect of randomizing a single site on the occupation of the origin.
//!
//! `p~` equals `p^gamma` except at the origin, where it is the kernel of one
//! atom. Because `p~ - p^gamma` is supported on row `0`, the resolvent
//! identity `G' = G + k G (P' - P) G'` collapses to
//! `G'(0,0) = G(0,0) / (1 - k A)` with `A = gamma sum_e xi_bar(e) G(e,0)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::green::finite::green_column;
use crate::green::Domain;
use crate::lattice::{directions, Site};
use crate::model::{vector_drift, ModelSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OnePointWeight {
    /// `1 - G^{p^gamma}(0,0) / G^{p~}(0,0)`.
    pub weight: f64,
    pub g_mean: f64,
    /// `G^{p~}(0,0)` from the rank-one update.
    pub g_modified: f64,
    /// `G^{p~}(0,0)` from a direct solve, for cross-checking.
    pub g_modified_direct: f64,
}

/// The one-site weight for atom `atom`, on the cube of radius `box_radius` with killing `k`.
pub fn one_point_green_ratio(
    model: &ModelSpec,
    gamma: f64,
    atom: usize,
    box_radius: i32,
    k: f64,
) -> Result<OnePointWeight> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::Precondition(format!("survival k = {k} not in (0, 1)")));
    }
    if atom >= model.nu().len() {
        return Err(Error::Precondition(format!("atom index {atom} out of range")));
    }
    if box_radius < 1 {
        return Err(Error::Precondition("box radius must be at least 1".into()));
    }
    let d = model.dim();
    let domain = Arc::new(Domain::cube(d, box_radius)?);
    let p = model.p_gamma(gamma)?;
    let mut kernels = vec![p; domain.len()];
    let col = green_column(&domain, k, &kernels, Site::ORIGIN)?;
    let at = |z: Site| col[domain.index_of(z).expect("site in box")];
    let g_mean = at(Site::ORIGIN);
    let xi_bar = model.nu().centered(atom);
    let a: f64 = gamma * directions(d).map(|e| xi_bar[e.index()] * at(e.unit())).sum::<f64>();
    let denom = 1.0 - k * a;
    if denom <= 0.0 {
        return Err(Error::Precondition(format!(
            "rank-one update denominator {denom} <= 0; the modified kernel is not elliptic"
        )));
    }
    let g_modified = g_mean / denom;

    let origin = domain.index_of(Site::ORIGIN).expect("origin in box");
    kernels[origin] = model.atom_kernel(gamma, atom)?;
    let direct = green_column(&domain, k, &kernels, Site::ORIGIN)?[origin];

    Ok(OnePointWeight { weight: 1.0 - g_mean / g_modified, g_mean, g_modified, g_modified_direct: direct })
}

/// `E[(gamma sum_e xi_bar(e) e) * weight(xi)]`, the one-site route to `gamma^2 d_{2,gamma}`.
pub fn one_point_second_order(model: &ModelSpec, gamma: f64, box_radius: i32, k: f64) -> Result<Vec<f64>> {
    let d = model.dim();
    let mut acc = vec![0.0; d];
    for (i, atom) in model.nu().atoms().iter().enumerate() {
        let w = one_point_green_ratio(model, gamma, i, box_radius, k)?.weight;
        let drift = vector_drift(d, &model.nu().centered(i));
        for (a, x) in acc.iter_mut().zip(drift) {
            *a += atom.weight() * gamma * x * w;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PerturbationAtom, PerturbationLaw, TransitionKernel};

    fn drifted() -> ModelSpec {
        let p0 = TransitionKernel::new(&[0.4, 0.1, 0.25, 0.25]).unwrap();
        let nu = PerturbationLaw::new(vec![
            PerturbationAtom::new(vec![1.0, 0.0, -1.0, 0.0], 0.5).unwrap(),
            PerturbationAtom::new(vec![-0.5, 0.5, 0.0, 0.0], 0.5).unwrap(),
        ])
        .unwrap();
        ModelSpec::new(p0, nu, 0.05, 0.1).unwrap()
    }

    #[test]
    fn zero_atom_has_zero_weight() {
        let p0 = TransitionKernel::new(&[0.4, 0.1, 0.25, 0.25]).unwrap();
        let nu = PerturbationLaw::new(vec![PerturbationAtom::new(vec![0.0; 4], 1.0).unwrap()]).unwrap();
        let m = ModelSpec::new(p0, nu, 0.05, 0.1).unwrap();
        let w = one_point_green_ratio(&m, 0.05, 0, 5, 0.99).unwrap();
        assert_eq!(w.weight, 0.0);
    }

    #[test]
    fn rank_one_update_matches_direct_solve() {
        let m = drifted();
        for atom in 0..2 {
            let w = one_point_green_ratio(&m, 0.08, atom, 6, 0.99).unwrap();
            assert!((w.g_modified - w.g_modified_direct).abs() < 1e-10 * w.g_modified);
        }
    }

    #[test]
    fn opposite_atoms_give_opposite_weights() {
        let p0 = TransitionKernel::new(&[0.4, 0.1, 0.25, 0.25]).unwrap();
        let nu = PerturbationLaw::symmetric_pair(vec![0.5, -0.5, 0.5, -0.5]).unwrap();
        let m = ModelSpec::new(p0, nu, 0.05, 0.1).unwrap();
        let gamma = 0.05;
        let a = one_point_green_ratio(&m, gamma, 0, 8, 0.999).unwrap().weight;
        let b = one_point_green_ratio(&m, gamma, 1, 8, 0.999).unwrap().weight;
        assert!((a + b).abs() <= 10.0 * gamma * gamma);
    }
}
