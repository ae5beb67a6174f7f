//! Local drifts `hat_d(z) = sum_e hat_omega_{delta,0}(z,e) e` of the auxiliary walk on `Z^d`.
//!
//! The infinite-lattice kernel is approximated on a box around a window of
//! sites. The box extends `ceil(3 / (1 - delta))` beyond the window downstream
//! of the mean drift and `ceil(3 / sqrt(1 - delta))` elsewhere, which is where
//! the discounted walk spends nearly all its time. The environment average is
//! a Monte Carlo mean over environments; the truncation error is measured by
//! repeating with half the padding on the same environments.

use std::path::Path;

use rayon::prelude::*;

use crate::environment::sample_atom;
use crate::error::{Error, Result};
use crate::green::finite::green_row_iterative;
use crate::green::Domain;
use crate::kalikow::hull::Hull;
use crate::lattice::{Site, MAX_DIM};
use crate::model::{ModelSpec, TransitionKernel};
use crate::report::{fmt_f64, CsvReport};
use crate::seed;

/// One environment at one window site: `G(0, z)`, then `G(0, z)` times each drift component.
type Moment = [f64; MAX_DIM + 1];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftSettings {
    pub env_samples: usize,
    pub seed: u64,
    /// Largest box handled by the iterative solver.
    pub max_sites: usize,
    /// Gauss-Seidel stopping threshold.
    pub solver_tol: f64,
}

impl DriftSettings {
    pub fn new(env_samples: usize, seed: u64) -> Self {
        DriftSettings { env_samples, seed, max_sites: 200_000, solver_tol: 1e-13 }
    }
}

#[derive(Clone, Debug)]
pub struct DriftField {
    pub gamma: f64,
    pub delta: f64,
    /// Window sites `|z|_inf <= window_radius`, sorted.
    pub sites: Vec<Site>,
    pub drifts: Vec<Vec<f64>>,
    /// Per component, from the spread over sampled environments.
    pub stderr: Vec<Vec<f64>>,
    /// Largest change of any drift component when the padding is halved.
    pub slack: f64,
    /// `(downstream, elsewhere)` padding of the box.
    pub padding: (i32, i32),
    pub box_sites: usize,
    /// Convex hull of the drifts for `d <= 2`.
    pub hull: Option<Hull>,
    /// `d0 + gamma d1`.
    pub mean_drift: Vec<f64>,
}

impl DriftField {
    pub fn dim(&self) -> usize {
        self.mean_drift.len()
    }

    /// `min_z hat_d(z) · (d0 + gamma d1)`.
    pub fn min_alignment(&self) -> f64 {
        self.drifts
            .iter()
            .map(|v| v.iter().zip(&self.mean_drift).map(|(a, b)| a * b).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_stderr(&self) -> f64 {
        self.stderr.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Distance from `v` to the hull, or `None` when no hull was built.
    pub fn distance_to_hull(&self, v: &[f64]) -> Option<f64> {
        self.hull.as_ref().map(|h| h.distance(v))
    }

    /// One row per window site: coordinates, drift, method, per-component stderr, slack.
    pub fn write_csv(&self, path: &Path, config: &str) -> Result<()> {
        let d = self.dim();
        let mut header: Vec<String> = (1..=d).map(|i| format!("z{i}")).collect();
        header.extend((1..=d).map(|i| format!("drift{i}")));
        header.push("method".into());
        header.extend((1..=d).map(|i| format!("stderr{i}")));
        header.push("slack".into());
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut csv = CsvReport::create(path, config, &header)?;
        for ((z, v), s) in self.sites.iter().zip(&self.drifts).zip(&self.stderr) {
            let mut row: Vec<String> = z.coords(d).iter().map(|c| c.to_string()).collect();
            row.extend(v.iter().map(|x| fmt_f64(*x)));
            row.push("monte-carlo".into());
            row.extend(s.iter().map(|x| fmt_f64(*x)));
            row.push(fmt_f64(self.slack));
            csv.row(&row)?;
        }
        csv.finish()
    }
}

/// Box around the window, padded `long` downstream along `axis` and `short` elsewhere.
fn padded_box(d: usize, w: i32, axis: usize, downstream: i32, long: i32, short: i32) -> Result<Domain> {
    let mut lo = vec![-(w + short); d];
    let mut hi = vec![w + short; d];
    if downstream > 0 {
        hi[axis] = w + long;
    } else {
        lo[axis] = -(w + long);
    }
    Domain::rect(&lo, &hi)
}

fn box_size(d: usize, w: i32, long: i32, short: i32) -> usize {
    let side = (2 * (w + short) + 1) as usize;
    side.pow(d as u32 - 1) * (2 * w + short + long + 1) as usize
}

/// Per-environment sums over the window: `G(0,z)` and `G(0,z) drift(omega(z))`.
fn window_moments(
    model: &ModelSpec,
    atoms: &[TransitionKernel],
    domain: &Domain,
    window: &[Site],
    delta: f64,
    env_seed: u64,
    tol: f64,
) -> Result<Vec<Moment>> {
    let d = domain.dim();
    let kernels =
        domain.sites().iter().map(|&z| Ok(atoms[sample_atom(model, env_seed, z)?])).collect::<Result<Vec<_>>>()?;
    let row = green_row_iterative(domain, delta, &kernels, Site::ORIGIN, tol, 1_000_000)?;
    Ok(window
        .iter()
        .map(|&z| {
            let i = domain.index_of(z).expect("window inside box");
            let mut m = [0.0; MAX_DIM + 1];
            m[0] = row[i];
            for (a, x) in m[1..=d].iter_mut().zip(kernels[i].drift()) {
                *a = row[i] * x;
            }
            m
        })
        .collect())
}

/// Ratio estimates `sum G drift / sum G` and their delta-method stderr.
fn ratio_estimates(samples: &[Vec<Moment>], sites: usize, d: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m = samples.len() as f64;
    let mut drifts = vec![vec![0.0; d]; sites];
    let mut stderr = vec![vec![0.0; d]; sites];
    for i in 0..sites {
        let den: f64 = samples.iter().map(|s| s[i][0]).sum::<f64>() / m;
        for c in 0..d {
            let num: f64 = samples.iter().map(|s| s[i][c + 1]).sum::<f64>() / m;
            let r = if den > 0.0 { num / den } else { 0.0 };
            drifts[i][c] = r;
            if samples.len() > 1 && den > 0.0 {
                let ss: f64 = samples.iter().map(|s| (s[i][c + 1] - r * s[i][0]).powi(2)).sum();
                stderr[i][c] = (ss / (m * (m - 1.0))).sqrt() / den;
            }
        }
    }
    (drifts, stderr)
}

/// Drift field of the auxiliary walk started at the origin, on `|z|_inf <= window_radius`.
pub fn drift_field(
    model: &ModelSpec,
    gamma: f64,
    window_radius: i32,
    delta: f64,
    settings: DriftSettings,
) -> Result<DriftField> {
    model.check_gamma(gamma)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("drift field needs 0 < delta < 1, got {delta}")));
    }
    if window_radius < 0 || settings.env_samples == 0 {
        return Err(Error::Precondition("need window_radius >= 0 and at least one environment".into()));
    }
    let d = model.dim();
    let mean_drift = model.mean_drift(gamma);
    let axis = (0..d).max_by(|&a, &b| mean_drift[a].abs().total_cmp(&mean_drift[b].abs())).unwrap_or(0);
    let downstream = if mean_drift[axis] >= 0.0 { 1 } else { -1 };

    // The small offset keeps 3 / (1 - 0.9) from rounding up to 31.
    let short = (3.0 / (1.0 - delta).sqrt() - 1e-9).ceil() as i32;
    let mut long = (3.0 / (1.0 - delta) - 1e-9).ceil() as i32;
    while long > short && box_size(d, window_radius, long, short) > settings.max_sites {
        long = (long * 9 / 10).max(short);
    }
    if box_size(d, window_radius, long, short) > settings.max_sites {
        return Err(Error::InvalidDomain(format!(
            "window radius {window_radius} with delta {delta} needs more than {} sites",
            settings.max_sites
        )));
    }
    let full = padded_box(d, window_radius, axis, downstream, long, short)?;
    let half = padded_box(d, window_radius, axis, downstream, (long + 1) / 2, (short + 1) / 2)?;
    let window = Domain::cube(d, window_radius)?.sites().to_vec();
    let atoms = model.atom_kernels(gamma)?;

    let pairs: Vec<(Vec<Moment>, Vec<Moment>)> = (0..settings.env_samples as u64)
        .into_par_iter()
        .map(|s| -> Result<_> {
            let env_seed = seed::mix3(settings.seed, s, seed::tag::KALIKOW);
            Ok((
                window_moments(model, &atoms, &full, &window, delta, env_seed, settings.solver_tol)?,
                window_moments(model, &atoms, &half, &window, delta, env_seed, settings.solver_tol)?,
            ))
        })
        .collect::<Result<_>>()?;
    let (full_samples, half_samples): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let (drifts, stderr) = ratio_estimates(&full_samples, window.len(), d);
    let (coarse, _) = ratio_estimates(&half_samples, window.len(), d);
    let slack = drifts.iter().flatten().zip(coarse.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let hull = Hull::of(&drifts);
    Ok(DriftField {
        gamma,
        delta,
        sites: window,
        drifts,
        stderr,
        slack,
        padding: (long, short),
        box_sites: full.len(),
        hull,
        mean_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::PerturbationLaw;

    #[test]
    fn degenerate_law_gives_constant_drift() {
        let p0 = TransitionKernel::new(&[0.4, 0.1, 0.25, 0.25]).unwrap();
        let m = ModelSpec::new(p0, PerturbationLaw::degenerate(2).unwrap(), 0.05, 0.1).unwrap();
        let f = drift_field(&m, 0.05, 1, 0.9, DriftSettings::new(2, 1)).unwrap();
        for v in &f.drifts {
            assert!((v[0] - 0.3).abs() < 1e-12 && v[1].abs() < 1e-12);
        }
        let Some(Hull::Polygon(h)) = &f.hull else { panic!() };
        assert!(h.len() <= 2 && f.max_stderr() == 0.0);
    }

    #[test]
    fn drifts_point_along_the_mean_drift() {
        let m = fixtures::drifted_2d().unwrap();
        let f = drift_field(&m, 0.08, 2, 0.9, DriftSettings::new(32, 7)).unwrap();
        assert_eq!(f.sites.len(), 25);
        assert!(f.min_alignment() > 0.0);
        assert!(f.slack.is_finite() && f.max_stderr() > 0.0);
        assert_eq!(f.padding, (30, 10));
    }

    #[test]
    fn oversized_window_is_rejected() {
        let m = fixtures::drifted_2d().unwrap();
        let mut s = DriftSettings::new(1, 0);
        s.max_sites = 100;
        assert!(matches!(drift_field(&m, 0.05, 10, 0.9, s), Err(Error::InvalidDomain(_))));
    }
}
