//! Annealed simulation: a fresh environment per replicate, `X_n / n` as the speed estimate.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::environment::sample_atom;
use crate::error::{Error, Result};
use crate::lattice::{Direction, Site, COORD_LIMIT, MAX_DIM};
use crate::model::{ModelSpec, MAX_STEPS};
use crate::report::{fmt_f64, CsvReport};
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct SimEstimate {
    pub gamma: f64,
    pub v_hat: Vec<f64>,
    /// Per component, from the replicate sample variance.
    pub stderr: Vec<f64>,
    pub n_steps: u64,
    pub n_replicates: u64,
    pub master_seed: u64,
    /// Whether the model satisfies `d0 != 0 or d1 != 0`; the estimate is reported either way.
    pub hypothesis_h: bool,
}

impl SimEstimate {
    /// `v_hat · l`.
    pub fn project(&self, l: &[f64]) -> f64 {
        self.v_hat.iter().zip(l).map(|(a, b)| a * b).sum()
    }

    /// Standard error of `v_hat · l`, treating components as independent.
    pub fn project_stderr(&self, l: &[f64]) -> f64 {
        self.stderr.iter().zip(l).map(|(s, b)| (s * b).powi(2)).sum::<f64>().sqrt()
    }

    /// One row per component.
    pub fn write_csv(&self, path: &Path, config: &str) -> Result<()> {
        let mut csv = CsvReport::create(
            path,
            config,
            &["gamma", "component", "v_hat", "stderr", "n_steps", "n_replicates", "master_seed"],
        )?;
        for (i, (v, s)) in self.v_hat.iter().zip(&self.stderr).enumerate() {
            csv.row(&[
                fmt_f64(self.gamma),
                (i + 1).to_string(),
                fmt_f64(*v),
                fmt_f64(*s),
                self.n_steps.to_string(),
                self.n_replicates.to_string(),
                self.master_seed.to_string(),
            ])?;
        }
        csv.finish()
    }
}

/// Everything a replicate needs, precomputed once.
struct Walker<'m> {
    model: &'m ModelSpec,
    d: usize,
    cumulative: Vec<[f64; MAX_STEPS]>,
}

impl<'m> Walker<'m> {
    fn new(model: &'m ModelSpec, gamma: f64) -> Result<Self> {
        let cumulative = model.atom_kernels(gamma)?.iter().map(|k| k.cumulative()).collect();
        Ok(Walker { model, d: model.dim(), cumulative })
    }

    /// Endpoint of replicate `r` after `n` steps. Kernels are drawn from the
    /// environment hash at each visit, so revisits see the same site.
    fn endpoint(&self, master_seed: u64, r: u64, n: u64) -> Result<Site> {
        let env_seed = seed::mix3(master_seed, r, seed::tag::ENVIRONMENT);
        let mut rng = ChaCha8Rng::seed_from_u64(seed::mix3(master_seed, r, seed::tag::WALK));
        let steps = 2 * self.d;
        let mut x = Site::ORIGIN;
        for _ in 0..n {
            let cum = &self.cumulative[sample_atom(self.model, env_seed, x)?];
            let u: f64 = rng.random();
            let e = cum[..steps].iter().position(|&c| u < c).unwrap_or(steps - 1);
            x = x.step(Direction::from_index(e));
        }
        Ok(x)
    }
}

/// Mean of `X_n / n` over `n_replicates` independent (environment, walk) pairs.
pub fn annealed_speed(
    model: &ModelSpec,
    gamma: f64,
    n_steps: u64,
    n_replicates: u64,
    master_seed: u64,
) -> Result<SimEstimate> {
    model.check_gamma(gamma)?;
    if n_steps == 0 || n_replicates == 0 {
        return Err(Error::Precondition("need n_steps >= 1 and n_replicates >= 1".into()));
    }
    if n_steps as i64 >= COORD_LIMIT {
        return Err(Error::Precondition(format!("n_steps {n_steps} can leave the packing box |z_i| < {COORD_LIMIT}")));
    }
    let walker = Walker::new(model, gamma)?;
    let d = model.dim();
    let ends: Vec<Site> =
        (0..n_replicates).into_par_iter().map(|r| walker.endpoint(master_seed, r, n_steps)).collect::<Result<_>>()?;
    let m = n_replicates as f64;
    let mut v_hat = vec![0.0; d];
    let mut stderr = vec![0.0; d];
    for i in 0..d {
        let xs: Vec<f64> = ends.iter().map(|z| z.0[i] as f64 / n_steps as f64).collect();
        let mean = xs.iter().sum::<f64>() / m;
        v_hat[i] = mean;
        if n_replicates > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
            stderr[i] = (var / m).sqrt();
        }
    }
    Ok(SimEstimate { gamma, v_hat, stderr, n_steps, n_replicates, master_seed, hypothesis_h: model.hypothesis_h() })
}

/// Counts of first steps per direction over `n_replicates` replicates.
pub fn first_step_counts(model: &ModelSpec, gamma: f64, n_replicates: u64, master_seed: u64) -> Result<Vec<u64>> {
    model.check_gamma(gamma)?;
    let walker = Walker::new(model, gamma)?;
    let ends: Vec<Site> =
        (0..n_replicates).into_par_iter().map(|r| walker.endpoint(master_seed, r, 1)).collect::<Result<_>>()?;
    let mut counts = vec![0u64; 2 * model.dim()];
    for z in ends {
        let e = (0..MAX_DIM).find(|&i| z.0[i] != 0).expect("one step moves");
        counts[2 * e + usize::from(z.0[e] < 0)] += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{PerturbationLaw, TransitionKernel};

    #[test]
    fn degenerate_law_recovers_the_mean_drift() {
        let p0 = TransitionKernel::new(&[0.4, 0.1, 0.25, 0.25]).unwrap();
        let m = ModelSpec::new(p0, PerturbationLaw::degenerate(2).unwrap(), 0.05, 0.1).unwrap();
        let est = annealed_speed(&m, 0.05, 2000, 400, 11).unwrap();
        assert!((est.v_hat[0] - 0.3).abs() <= 4.0 * est.stderr[0]);
        assert!(est.v_hat[1].abs() <= 4.0 * est.stderr[1]);
    }

    #[test]
    fn reruns_are_identical() {
        let m = fixtures::d1_twopoint().unwrap();
        let a = annealed_speed(&m, 0.1, 500, 64, 3).unwrap();
        let b = annealed_speed(&m, 0.1, 500, 64, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, annealed_speed(&m, 0.1, 500, 64, 4).unwrap());
    }

    #[test]
    fn first_steps_follow_the_mean_kernel() {
        let m = fixtures::drifted_2d().unwrap();
        let n = 20_000u64;
        let counts = first_step_counts(&m, 0.08, n, 5).unwrap();
        let p = m.p_gamma(0.08).unwrap();
        for (c, q) in counts.iter().zip(p.probs()) {
            let sigma = (n as f64 * q * (1.0 - q)).sqrt();
            assert!((*c as f64 - n as f64 * q).abs() <= 4.0 * sigma);
        }
    }
}
