//! Environments: assignments of a transition kernel to every lattice site.
//!
//! Random environments are never stored. [`sample_site`] is a pure function
//! of `(master_seed, z)`, so an environment is just a seed plus the model.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lattice::Site;
use crate::model::{ModelSpec, TransitionKernel};
use crate::seed;

/// Anything that assigns a kernel to each site.
pub trait Environment: Sync {
    fn kernel(&self, z: Site) -> &TransitionKernel;
}

/// The kernel drawn at one site.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SiteEnvironment {
    pub z: Site,
    pub kernel: TransitionKernel,
    pub atom_index: usize,
}

/// Atom index at `z` for the environment labelled `master_seed`.
pub fn sample_atom(model: &ModelSpec, master_seed: u64, z: Site) -> Result<usize> {
    let bits = seed::mix(master_seed, z.pack()?);
    Ok(model.nu().atom_for_uniform(seed::unit_f64(bits)))
}

/// Draws `omega^gamma(z, .)` for the environment labelled `master_seed`.
pub fn sample_site(model: &ModelSpec, gamma: f64, master_seed: u64, z: Site) -> Result<SiteEnvironment> {
    model.check_gamma(gamma)?;
    let atom_index = sample_atom(model, master_seed, z)?;
    Ok(SiteEnvironment { z, kernel: model.atom_kernel(gamma, atom_index)?, atom_index })
}

/// Same kernel everywhere.
#[derive(Clone, Debug)]
pub struct HomogeneousEnvironment {
    kernel: TransitionKernel,
}

impl HomogeneousEnvironment {
    pub fn new(kernel: TransitionKernel) -> Self {
        HomogeneousEnvironment { kernel }
    }
}

impl Environment for HomogeneousEnvironment {
    fn kernel(&self, _z: Site) -> &TransitionKernel {
        &self.kernel
    }
}

/// Explicit kernels on finitely many sites, a default elsewhere.
#[derive(Clone, Debug)]
pub struct MapEnvironment {
    sites: HashMap<Site, TransitionKernel>,
    default: TransitionKernel,
}

impl MapEnvironment {
    pub fn new(default: TransitionKernel) -> Self {
        MapEnvironment { sites: HashMap::new(), default }
    }

    pub fn with_sites(default: TransitionKernel, sites: HashMap<Site, TransitionKernel>) -> Self {
        MapEnvironment { sites, default }
    }

    pub fn set(&mut self, z: Site, kernel: TransitionKernel) {
        self.sites.insert(z, kernel);
    }
}

impl Environment for MapEnvironment {
    fn kernel(&self, z: Site) -> &TransitionKernel {
        self.sites.get(&z).unwrap_or(&self.default)
    }
}

/// The random environment `omega^gamma` labelled by a seed, evaluated lazily.
///
/// Lookups for sites outside the packing box panic; walkers check the box
/// before stepping.
#[derive(Clone, Debug)]
pub struct SampledEnvironment<'m> {
    model: &'m ModelSpec,
    kernels: Vec<TransitionKernel>,
    master_seed: u64,
}

impl<'m> SampledEnvironment<'m> {
    pub fn new(model: &'m ModelSpec, gamma: f64, master_seed: u64) -> Result<Self> {
        Ok(SampledEnvironment { model, kernels: model.atom_kernels(gamma)?, master_seed })
    }

    pub fn atom(&self, z: Site) -> usize {
        sample_atom(self.model, self.master_seed, z).expect("site inside the packing box")
    }
}

impl Environment for SampledEnvironment<'_> {
    fn kernel(&self, z: Site) -> &TransitionKernel {
        &self.kernels[self.atom(z)]
    }
}

/// `inner` with the kernel at one site replaced.
#[derive(Clone, Debug)]
pub struct OnePointModified<'a, E: Environment + ?Sized> {
    inner: &'a E,
    site: Site,
    kernel: TransitionKernel,
}

impl<'a, E: Environment + ?Sized> OnePointModified<'a, E> {
    pub fn new(inner: &'a E, site: Site, kernel: TransitionKernel) -> Self {
        OnePointModified { inner, site, kernel }
    }
}

impl<E: Environment + ?Sized> Environment for OnePointModified<'_, E> {
    fn kernel(&self, z: Site) -> &TransitionKernel {
        if z == self.site {
            &self.kernel
        } else {
            self.inner.kernel(z)
        }
    }
}

/// `omega^{gamma,y}`: the environment with the kernel at `y` reset to the mean `p^gamma`.
pub fn one_point_modification<'a, E: Environment + ?Sized>(
    model: &ModelSpec,
    gamma: f64,
    env: &'a E,
    y: Site,
) -> Result<OnePointModified<'a, E>> {
    Ok(OnePointModified::new(env, y, model.p_gamma(gamma)?))
}

/// `p~^gamma`: the mean environment `p^gamma` with `omega^gamma(0, .)` for atom `k` at the origin.
pub fn mean_with_atom_at_origin(model: &ModelSpec, gamma: f64, k: usize) -> Result<MapEnvironment> {
    if k >= model.nu().len() {
        return Err(Error::Precondition(format!("atom index {k} out of range")));
    }
    let mut env = MapEnvironment::new(model.p_gamma(gamma)?);
    env.set(Site::ORIGIN, model.atom_kernel(gamma, k)?);
    Ok(env)
}
