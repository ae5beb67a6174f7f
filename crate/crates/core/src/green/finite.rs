//! Killed Green functions on bounded domains.
//!
//! `G_{U,delta}(z0, z)` is the expected number of visits to `z` before the walk
//! leaves `U`, each step surviving with probability `delta`. On `∂U` it is the
//! discounted probability of exiting there.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::green::Domain;
use crate::lattice::Site;
use crate::model::TransitionKernel;

/// Largest domain handled by the dense solver.
pub const DENSE_LIMIT: usize = 4000;

/// `z ↦ G_{U,delta}(z0, z)` on `U ∪ ∂U`.
#[derive(Clone, Debug)]
pub struct GreenTable {
    pub domain: Arc<Domain>,
    pub z0: Site,
    pub delta: f64,
    /// Indexed like [`Domain::closure`].
    pub values: Vec<f64>,
}

impl GreenTable {
    /// Value at `z`; zero off `U ∪ ∂U`.
    pub fn get(&self, z: Site) -> f64 {
        self.domain.index_of(z).map_or(0.0, |i| self.values[i])
    }

    /// Largest violation of the one-step balance identity
    /// `G(z0,z) = 1{z0=z} + sum_{e: z-e in U} G(z0,z-e) delta omega(z-e,e)`.
    pub fn balance_residual(&self, kernels: &[TransitionKernel]) -> f64 {
        let dom = &self.domain;
        let d = dom.dim();
        let mut rhs = vec![0.0; dom.closure().len()];
        rhs[dom.index_of(self.z0).expect("z0 in U")] = 1.0;
        for i in 0..dom.len() {
            for e in 0..2 * d {
                rhs[dom.neighbor(i, e)] += self.values[i] * self.delta * kernels[i].probs()[e];
            }
        }
        self.values.iter().zip(&rhs).map(|(g, r)| (g - r).abs()).fold(0.0, f64::max)
    }
}

/// Kernels of `env` at each interior site of `domain`, in site order.
pub fn domain_kernels<E: Environment + ?Sized>(domain: &Domain, env: &E) -> Vec<TransitionKernel> {
    domain.sites().iter().map(|&z| *env.kernel(z)).collect()
}

fn check_delta(delta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("delta = {delta} not in [0, 1]")))
    }
}

fn check_dense(domain: &Domain) -> Result<()> {
    if domain.len() > DENSE_LIMIT {
        return Err(Error::InvalidDomain(format!(
            "{} sites exceed the dense solver limit {DENSE_LIMIT}",
            domain.len()
        )));
    }
    Ok(())
}

/// `I - delta P_U`, the generator of the killed chain restricted to `U`.
fn killed_generator(domain: &Domain, delta: f64, kernels: &[TransitionKernel]) -> DMatrix<f64> {
    let n = domain.len();
    let mut m = DMatrix::<f64>::identity(n, n);
    for (i, kernel) in kernels.iter().enumerate().take(n) {
        for (e, &p) in kernel.probs().iter().enumerate() {
            let j = domain.neighbor(i, e);
            if j < n {
                m[(i, j)] -= delta * p;
            }
        }
    }
    m
}

/// Extends interior row values `g` to `∂U` by one step.
fn extend_row(domain: &Domain, delta: f64, kernels: &[TransitionKernel], g: &[f64]) -> Vec<f64> {
    let n = domain.len();
    let mut values = vec![0.0; domain.closure().len()];
    values[..n].copy_from_slice(g);
    for i in 0..n {
        for (e, &p) in kernels[i].probs().iter().enumerate() {
            let j = domain.neighbor(i, e);
            if j >= n {
                values[j] += g[i] * delta * p;
            }
        }
    }
    values
}

/// Row `z ↦ G(z0, z)` for kernels given per interior site.
pub fn green_row(domain: &Domain, delta: f64, kernels: &[TransitionKernel], z0: Site) -> Result<Vec<f64>> {
    check_delta(delta)?;
    check_dense(domain)?;
    let i0 = domain
        .index_of(z0)
        .filter(|&i| i < domain.len())
        .ok_or_else(|| Error::Precondition(format!("z0 = {} not in U", z0.display(domain.dim()))))?;
    let n = domain.len();
    let mt = killed_generator(domain, delta, kernels).transpose();
    let mut b = DVector::<f64>::zeros(n);
    b[i0] = 1.0;
    let g = mt.lu().solve(&b).ok_or_else(|| Error::SingularSystem("I - delta P_U^T is singular".into()))?;
    Ok(extend_row(domain, delta, kernels, g.as_slice()))
}

/// Column `x ↦ G(x, y)` over `U ∪ ∂U`, for `y` in `U` (zero on `∂U`).
pub fn green_column(domain: &Domain, delta: f64, kernels: &[TransitionKernel], y: Site) -> Result<Vec<f64>> {
    check_delta(delta)?;
    check_dense(domain)?;
    let iy = domain
        .index_of(y)
        .filter(|&i| i < domain.len())
        .ok_or_else(|| Error::Precondition(format!("y = {} not in U", y.display(domain.dim()))))?;
    let n = domain.len();
    let mut b = DVector::<f64>::zeros(n);
    b[iy] = 1.0;
    let h = killed_generator(domain, delta, kernels)
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::SingularSystem("I - delta P_U is singular".into()))?;
    let mut values = vec![0.0; domain.closure().len()];
    values[..n].copy_from_slice(h.as_slice());
    Ok(values)
}

/// `G_{U,delta}^omega(z0, .)` by a dense direct solve.
pub fn green_finite<E: Environment + ?Sized>(
    domain: &Arc<Domain>,
    delta: f64,
    env: &E,
    z0: Site,
) -> Result<GreenTable> {
    let kernels = domain_kernels(domain, env);
    let values = green_row(domain, delta, &kernels, z0)?;
    Ok(GreenTable { domain: Arc::clone(domain), z0, delta, values })
}

/// All values `G(x, y)` for `x, y` in `U ∪ ∂U`.
#[derive(Clone, Debug)]
pub struct GreenMatrix {
    domain: Arc<Domain>,
    /// `(I - delta P_U)^{-1}` on `U × U`.
    inner: DMatrix<f64>,
    /// `G(x, z')` for `x` in `U`, `z'` in `∂U`.
    exit: DMatrix<f64>,
}

impl GreenMatrix {
    pub fn new(domain: &Arc<Domain>, delta: f64, kernels: &[TransitionKernel]) -> Result<Self> {
        check_delta(delta)?;
        check_dense(domain)?;
        let n = domain.len();
        let nb = domain.boundary().len();
        let inner = killed_generator(domain, delta, kernels)
            .try_inverse()
            .ok_or_else(|| Error::SingularSystem("I - delta P_U is singular".into()))?;
        // One step into the boundary from the last interior site visited.
        let mut step = DMatrix::<f64>::zeros(n, nb);
        for (i, kernel) in kernels.iter().enumerate().take(n) {
            for (e, &p) in kernel.probs().iter().enumerate() {
                let j = domain.neighbor(i, e);
                if j >= n {
                    step[(i, j - n)] += delta * p;
                }
            }
        }
        let exit = &inner * step;
        Ok(GreenMatrix { domain: Arc::clone(domain), inner, exit })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// `G(x, y)`. Starting outside `U` the walk is stopped at once.
    pub fn get(&self, x: Site, y: Site) -> f64 {
        let n = self.domain.len();
        match (self.domain.index_of(x), self.domain.index_of(y)) {
            (Some(i), Some(j)) if i < n => {
                if j < n {
                    self.inner[(i, j)]
                } else {
                    self.exit[(i, j - n)]
                }
            }
            (Some(i), None) if i < n => 0.0,
            _ => (x == y) as u8 as f64,
        }
    }
}

/// Row solve by Gauss-Seidel sweeps, for domains too large for [`green_row`].
///
/// Converges for `delta < 1` (and for any `delta` when every site can exit).
/// Sweeps stop once the largest update falls below `tol`.
pub fn green_row_iterative(
    domain: &Domain,
    delta: f64,
    kernels: &[TransitionKernel],
    z0: Site,
    tol: f64,
    max_sweeps: usize,
) -> Result<Vec<f64>> {
    check_delta(delta)?;
    let n = domain.len();
    let d = domain.dim();
    let i0 = domain
        .index_of(z0)
        .filter(|&i| i < n)
        .ok_or_else(|| Error::Precondition(format!("z0 = {} not in U", z0.display(d))))?;
    // Incoming edges: g(z) = 1{z = z0} + sum over (x, e) with x + e = z of g(x) delta omega(x, e).
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, kernel) in kernels.iter().enumerate().take(n) {
        for (e, &p) in kernel.probs().iter().enumerate() {
            let j = domain.neighbor(i, e);
            if j < n {
                incoming[j].push((i, delta * p));
            }
        }
    }
    let mut g = vec![0.0; n];
    for _ in 0..max_sweeps {
        let mut change: f64 = 0.0;
        for z in 0..n {
            let mut v = if z == i0 { 1.0 } else { 0.0 };
            for &(x, w) in &incoming[z] {
                v += g[x] * w;
            }
            change = change.max((v - g[z]).abs());
            g[z] = v;
        }
        if change <= tol {
            return Ok(extend_row(domain, delta, kernels, &g));
        }
    }
    Err(Error::SingularSystem(format!("Gauss-Seidel did not reach {tol:e} within {max_sweeps} sweeps")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::HomogeneousEnvironment;

    fn dom(d: Domain) -> Arc<Domain> {
        Arc::new(d)
    }

    #[test]
    fn singleton_exits_at_first_step() {
        let u = dom(Domain::new(2, [Site::ORIGIN]).unwrap());
        let p = TransitionKernel::new(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let g = green_finite(&u, 1.0, &HomogeneousEnvironment::new(p), Site::ORIGIN).unwrap();
        assert_eq!(g.get(Site::ORIGIN), 1.0);
        for e in crate::lattice::directions(2) {
            assert!((g.get(e.unit()) - p.prob(e)).abs() < 1e-15);
        }
    }

    #[test]
    fn gamblers_ruin_exit_probabilities() {
        let u = dom(Domain::interval(1, 4).unwrap());
        let p = TransitionKernel::new(&[0.5, 0.5]).unwrap();
        let g = green_finite(&u, 1.0, &HomogeneousEnvironment::new(p), Site([1, 0, 0])).unwrap();
        // Fair ruin from 1 on {0,...,5}: P(hit 5 first) = 1/5.
        assert!((g.get(Site([0, 0, 0])) - 0.8).abs() < 1e-12);
        assert!((g.get(Site([5, 0, 0])) - 0.2).abs() < 1e-12);
        // Occupation of 1 from 1 on {1..4}: 2 * 1 * (5-1) / 5 = 8/5.
        assert!((g.get(Site([1, 0, 0])) - 1.6).abs() < 1e-12);
    }

    #[test]
    fn immediate_killing() {
        let u = dom(Domain::cube(2, 1).unwrap());
        let p = TransitionKernel::simple(2).unwrap();
        let g = green_finite(&u, 0.0, &HomogeneousEnvironment::new(p), Site::ORIGIN).unwrap();
        for (z, v) in u.closure().iter().zip(&g.values) {
            assert_eq!(*v, if *z == Site::ORIGIN { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn row_column_matrix_and_iterative_agree() {
        let u = dom(Domain::rect(&[-2, -1], &[3, 2]).unwrap());
        let p = TransitionKernel::new(&[0.4, 0.1, 0.3, 0.2]).unwrap();
        let kernels = vec![p; u.len()];
        let z0 = Site([1, 0, 0]);
        let row = green_row(&u, 0.93, &kernels, z0).unwrap();
        let iter = green_row_iterative(&u, 0.93, &kernels, z0, 1e-15, 10_000).unwrap();
        let mat = GreenMatrix::new(&u, 0.93, &kernels).unwrap();
        for (i, &z) in u.closure().iter().enumerate() {
            assert!((row[i] - mat.get(z0, z)).abs() < 1e-13);
            assert!((row[i] - iter[i]).abs() < 1e-12);
        }
        let y = Site([0, 1, 0]);
        let col = green_column(&u, 0.93, &kernels, y).unwrap();
        for (i, &x) in u.closure().iter().enumerate() {
            assert!((col[i] - mat.get(x, y)).abs() < 1e-13);
        }
        assert_eq!(mat.get(Site([9, 9, 0]), Site([9, 9, 0])), 1.0);
    }

    #[test]
    fn balance_identity_holds() {
        let u = dom(Domain::cube(2, 2).unwrap());
        let p = TransitionKernel::new(&[0.35, 0.15, 0.3, 0.2]).unwrap();
        let g = green_finite(&u, 0.97, &HomogeneousEnvironment::new(p), Site([1, -1, 0])).unwrap();
        assert!(g.balance_residual(&vec![p; u.len()]) < 1e-12);
        assert!(g.values.iter().all(|&v| v >= 0.0));
        assert!(u.boundary().iter().all(|&z| g.get(z) <= 1.0));
    }
}
