//! How fast the truncated expansion approaches the true speed as `gamma -> 0`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::expansion::{solomon_speed, speed_expansion};
use crate::kalikow::lemma2::fit_slope;
use crate::model::ModelSpec;
use crate::montecarlo::annealed::annealed_speed;
use crate::report::{fmt_f64, CsvReport};
use crate::seed;

/// Errors below this are rounding, whatever the reference.
const ROUNDING_FLOOR: f64 = 1e-13;

/// Where the "true" speed comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpeedReference {
    /// The exact one-dimensional formula.
    Exact,
    /// Annealed simulation; replicate streams for the `i`-th gamma use `mix(master_seed, i)`.
    MonteCarlo { n_steps: u64, n_replicates: u64, master_seed: u64 },
}

impl SpeedReference {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpeedReference::Exact => "exact",
            SpeedReference::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub gamma: f64,
    /// Reference speed projected on the drift direction.
    pub v_ref: f64,
    pub stderr: f64,
    pub v_order: f64,
    pub err: f64,
    /// `err > 5 stderr` (and above rounding).
    pub resolved: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingReport {
    pub order: usize,
    pub reference: SpeedReference,
    pub rows: Vec<ScalingRow>,
    /// Slope of `log err` against `log gamma` over resolved rows.
    pub slope: Option<f64>,
    /// Set when some row's error is not resolved; the slope then uses the rest.
    pub noise_floor: bool,
}

impl ScalingReport {
    pub fn write_csv(&self, path: &Path, config: &str) -> Result<()> {
        let mut csv = CsvReport::create(
            path,
            config,
            &["gamma", "order", "reference", "v_ref", "stderr", "v_order", "err", "resolved", "slope", "noise_floor"],
        )?;
        let slope = self.slope.map(fmt_f64).unwrap_or_default();
        for r in &self.rows {
            csv.row(&[
                fmt_f64(r.gamma),
                self.order.to_string(),
                self.reference.as_str().into(),
                fmt_f64(r.v_ref),
                fmt_f64(r.stderr),
                fmt_f64(r.v_order),
                fmt_f64(r.err),
                r.resolved.to_string(),
                slope.clone(),
                self.noise_floor.to_string(),
            ])?;
        }
        csv.finish()
    }
}

/// Unit vector along `d0`, or along `d1` when `d0 = 0`.
pub fn drift_direction(model: &ModelSpec) -> Vec<f64> {
    let v = if model.d0_is_zero() { model.d1() } else { model.d0() };
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

/// Error of the order-`order` expansion against `reference` at each gamma, and its log-log slope.
pub fn order_scaling(
    model: &ModelSpec,
    gammas: &[f64],
    order: usize,
    reference: SpeedReference,
) -> Result<ScalingReport> {
    model.require_h()?;
    if gammas.is_empty() {
        return Err(Error::Precondition("empty gamma list".into()));
    }
    let l = drift_direction(model);
    let dot = |v: &[f64]| v.iter().zip(&l).map(|(a, b)| a * b).sum::<f64>();
    let mut rows = Vec::with_capacity(gammas.len());
    for (i, &gamma) in gammas.iter().enumerate() {
        model.check_gamma(gamma)?;
        let exp = speed_expansion(model, gamma, order)?;
        let v_order = dot(&exp.v_order[order]);
        let (v_ref, stderr) = match reference {
            SpeedReference::Exact => (dot(&[solomon_speed(model, gamma)?]), 0.0),
            SpeedReference::MonteCarlo { n_steps, n_replicates, master_seed } => {
                let est = annealed_speed(model, gamma, n_steps, n_replicates, seed::mix(master_seed, i as u64))?;
                (est.project(&l), est.project_stderr(&l))
            }
        };
        let err = (v_ref - v_order).abs();
        let resolved = err > 5.0 * stderr + ROUNDING_FLOOR;
        rows.push(ScalingRow { gamma, v_ref, stderr, v_order, err, resolved });
    }
    let points: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.resolved).map(|r| (r.gamma.abs().ln(), r.err.ln())).collect();
    let slope = if points.len() >= 2 { Some(fit_slope(&points)) } else { None };
    Ok(ScalingReport { order, reference, noise_floor: points.len() < rows.len(), rows, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn first_order_error_is_quadratic() {
        let m = fixtures::d1_twopoint().unwrap();
        let r = order_scaling(&m, &[0.08, 0.04, 0.02], 1, SpeedReference::Exact).unwrap();
        assert!(!r.noise_floor);
        assert!((r.slope.unwrap() - 2.0).abs() <= 0.4, "{r:?}");
    }

    #[test]
    fn exact_reference_needs_one_dimension() {
        let m = fixtures::drifted_2d().unwrap();
        assert!(order_scaling(&m, &[0.05], 1, SpeedReference::Exact).is_err());
    }

    #[test]
    fn unresolved_errors_raise_the_flag() {
        let m = fixtures::d1_twopoint().unwrap();
        let mc = SpeedReference::MonteCarlo { n_steps: 200, n_replicates: 16, master_seed: 1 };
        let r = order_scaling(&m, &[0.08, 0.04], 2, mc).unwrap();
        assert!(r.noise_floor && r.slope.is_none());
    }
}
