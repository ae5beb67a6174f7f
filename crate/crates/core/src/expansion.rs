//! The small-`gamma` expansion of the speed
//! `v^gamma = d0 + gamma d1 + gamma^2 d_{2,gamma} + gamma^3 d3 + ...`
//! and the exact one-dimensional speed used to check it.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::green::jtable::green_increments;
use crate::green::quadrature::{refine, torus_mean, Refined};
use crate::green::{j_closed_form_1d, j_exact, j_limit, JMethod, JTable, QuadSettings};
use crate::model::{vector_drift, ModelSpec};
use crate::report::{fmt_f64, CsvReport};

/// `p2(e) = sum_{e'} C(e,e') J_{e'}`.
pub fn p2(c: &[Vec<f64>], j: &JTable) -> Vec<f64> {
    c.iter().map(|row| row.iter().zip(&j.values).map(|(a, b)| a * b).sum()).collect()
}

/// `p3(e) = sum_{e',e''} T(e,e',e'') J_{e'} J_{e''}`.
pub fn p3(t: &[Vec<Vec<f64>>], j: &JTable) -> Vec<f64> {
    let jv = &j.values;
    t.iter()
        .map(|m| m.iter().zip(jv).map(|(row, a)| a * row.iter().zip(jv).map(|(x, b)| x * b).sum::<f64>()).sum())
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub gamma: f64,
    pub order: usize,
    pub d0: Vec<f64>,
    pub d1: Vec<f64>,
    /// `J^gamma` used for `d_{2,gamma}`.
    pub j_gamma: JTable,
    /// Gamma-independent `J` (`d >= 2`, or `d = 1` with `d0 != 0`).
    pub j_limit: Option<JTable>,
    pub d2_gamma: Vec<f64>,
    /// `sum_e p2(e) e` with the gamma-independent `J` (`d >= 2` only).
    pub d2: Option<Vec<f64>>,
    pub d3: Option<Vec<f64>>,
    /// `v_order[k]` for `k = 0..=order`.
    pub v_order: Vec<Vec<f64>>,
    pub j_source: JMethod,
}

impl ExpansionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per order: `order, v_1, ..., v_d`.
    pub fn write_csv(&self, path: &Path, config: &str) -> Result<()> {
        let d = self.d0.len();
        let mut header = vec!["gamma".to_string(), "order".to_string()];
        header.extend((1..=d).map(|i| format!("v{i}")));
        header.push("j_source".into());
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut csv = CsvReport::create(path, config, &header)?;
        for (k, v) in self.v_order.iter().enumerate() {
            let mut row = vec![fmt_f64(self.gamma), k.to_string()];
            row.extend(v.iter().map(|&x| fmt_f64(x)));
            row.push(self.j_source.as_str().into());
            csv.row(&row)?;
        }
        csv.finish()
    }
}

fn axpy(v: &[f64], a: f64, w: &[f64]) -> Vec<f64> {
    v.iter().zip(w).map(|(x, y)| x + a * y).collect()
}

/// Assembles the expansion of the speed up to `order` (at most 3).
pub fn speed_expansion(model: &ModelSpec, gamma: f64, order: usize) -> Result<ExpansionReport> {
    model.require_h()?;
    if order > 3 {
        return Err(Error::Precondition(format!("order {order} > 3")));
    }
    if order == 3 && model.d0_is_zero() {
        return Err(Error::Precondition("the third-order term needs d0 != 0".into()));
    }
    let d = model.dim();
    let p_gamma = model.p_gamma(gamma)?;
    let j_gamma = if d == 1 { j_closed_form_1d(&p_gamma)? } else { j_exact(&p_gamma, QuadSettings::default_for(d))? }
        .with_gamma(gamma);
    let j_lim = if d >= 2 {
        Some(j_limit(model)?)
    } else if !model.d0_is_zero() {
        Some(j_closed_form_1d(model.p0())?)
    } else {
        None
    };

    let c = model.nu().covariance();
    let d0 = model.d0();
    let d1 = model.d1();
    let d2_gamma = vector_drift(d, &p2(&c, &j_gamma));
    let d2 = if d >= 2 { j_lim.as_ref().map(|j| vector_drift(d, &p2(&c, j))) } else { None };
    let d3 = if model.d0_is_zero() {
        None
    } else {
        let j = j_lim.as_ref().expect("limit J exists when d0 != 0");
        Some(vector_drift(d, &p3(&model.nu().third_moments(), j)))
    };

    let mut v_order = vec![d0.clone()];
    if order >= 1 {
        v_order.push(axpy(&d0, gamma, &d1));
    }
    if order >= 2 {
        v_order.push(axpy(&v_order[1], gamma * gamma, &d2_gamma));
    }
    if order >= 3 {
        v_order.push(axpy(&v_order[2], gamma.powi(3), d3.as_ref().expect("d0 != 0")));
    }
    Ok(ExpansionReport {
        gamma,
        order,
        d0,
        d1,
        j_source: j_gamma.method,
        j_gamma,
        j_limit: j_lim,
        d2_gamma,
        d2,
        d3,
        v_order,
    })
}

/// Exact annealed speed in `d = 1`: `(1 - E rho)/(1 + E rho)` with `rho = omega(-e1)/omega(e1)`,
/// or its mirror image when the walk is transient to the left.
pub fn solomon_speed(model: &ModelSpec, gamma: f64) -> Result<f64> {
    if model.dim() != 1 {
        return Err(Error::Precondition("solomon_speed needs d = 1".into()));
    }
    let mut e_rho = 0.0;
    let mut e_inv = 0.0;
    for (k, atom) in model.nu().atoms().iter().enumerate() {
        let w = model.atom_kernel(gamma, k)?;
        let (r, l) = (w.probs()[0], w.probs()[1]);
        e_rho += atom.weight() * l / r;
        e_inv += atom.weight() * r / l;
    }
    if e_rho < 1.0 {
        Ok((1.0 - e_rho) / (1.0 + e_rho))
    } else if e_inv < 1.0 {
        Ok(-(1.0 - e_inv) / (1.0 + e_inv))
    } else {
        Err(Error::Precondition(format!("not ballistic: E rho = {e_rho}, E 1/rho = {e_inv}")))
    }
}

/// Mean over the torus of `2(cos u1 - cos u2) / ((1 - cos u2) + (1 - cos u1) + a(cos u2 - cos u1))`.
///
/// The integrand equals `(cos u1 - cos u2) / D` with `D = 1 - ((1+a) cos u1 + (1-a) cos u2)/2`,
/// i.e. `h_1 - h_2` for a driftless kernel, so the `u2` integral is done in closed form
/// and the `u1` integral by grid doubling. [`speedup_integral_grid`] is the plain 2-d rule.
pub fn speedup_integral(a: f64) -> Result<Refined> {
    check_a(a)?;
    let coeffs = [(1.0 + a) / 2.0, (1.0 - a) / 2.0];
    let settings = QuadSettings { n_start: 64, n_max: 1 << 22, tol: 1e-10 };
    let (_, h, n, est_error) = green_increments(&coeffs, 0.0, &[false, false], settings)?;
    Ok(Refined { value: h[0] - h[1], n, est_error })
}

/// [`speedup_integral`] on the full 2-d origin-excluded grid, doubled until changes are below `tol`.
pub fn speedup_integral_grid(a: f64, n_start: usize, n_max: usize, tol: f64) -> Result<Refined> {
    check_a(a)?;
    let f = move |u: &[f64]| {
        let v1 = 2.0 * (0.5 * u[0]).sin().powi(2);
        let v2 = 2.0 * (0.5 * u[1]).sin().powi(2);
        // cos u1 - cos u2 = v2 - v1.
        2.0 * (v2 - v1) / (v2 + v1 + a * (v1 - v2))
    };
    refine(|n| torus_mean(2, f, n, true), n_start, n_max, tol)
}

fn check_a(a: f64) -> Result<()> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(Error::Precondition(format!("a = {a} not in (0, 1)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{PerturbationAtom, PerturbationLaw, TransitionKernel};

    #[test]
    fn zero_covariance_gives_zero_p2() {
        let j = j_closed_form_1d(&TransitionKernel::new(&[0.7, 0.3]).unwrap()).unwrap();
        assert_eq!(p2(&[vec![0.0; 2], vec![0.0; 2]], &j), vec![0.0, 0.0]);
    }

    #[test]
    fn one_dimensional_second_order_term() {
        let m = fixtures::d1_twopoint().unwrap();
        let g = 0.1;
        let r = speed_expansion(&m, g, 2).unwrap();
        // sigma^2 = 1: d_{2,gamma} = -2 / p^gamma(e1).
        let expected = -2.0 / m.p_gamma(g).unwrap().probs()[0];
        assert!((r.d2_gamma[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn speedup_model_d2_from_four_j_values() {
        let m = fixtures::fixture("speedup-s2").unwrap();
        let r = speed_expansion(&m, 0.02, 2).unwrap();
        let j = &r.j_gamma.values;
        let formula = 2.0 * (j[1] + j[0]) - 4.0 * j[3];
        assert!(r.d2_gamma[0].abs() < 1e-12);
        assert!((r.d2_gamma[1] - formula).abs() < 1e-12);
        assert!(r.d2_gamma[1] > 0.0);
    }

    #[test]
    fn degenerate_law_stops_at_first_order() {
        let p0 = TransitionKernel::new(&[0.3, 0.2, 0.3, 0.2]).unwrap();
        let nu = PerturbationLaw::new(vec![PerturbationAtom::new(vec![0.1, -0.1, 0.0, 0.0], 1.0).unwrap()]).unwrap();
        let m = ModelSpec::new(p0, nu, 0.05, 0.5).unwrap();
        let r = speed_expansion(&m, 0.3, 3).unwrap();
        for k in 1..=3 {
            assert_eq!(r.v_order[k], r.v_order[1]);
        }
        assert!((r.v_order[1][0] - 0.16).abs() < 1e-15 && (r.v_order[1][1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn third_order_needs_drift() {
        let m = fixtures::sym_2d().unwrap();
        assert!(speed_expansion(&m, 0.1, 3).is_err());
        let r = speed_expansion(&m, 0.1, 2).unwrap();
        assert!(r.d3.is_none());
    }

    #[test]
    fn order_three_minus_order_two_is_gamma_cubed_d3() {
        let m = fixtures::skewed_1d().unwrap();
        let g = 0.05;
        let r = speed_expansion(&m, g, 3).unwrap();
        let d3 = r.d3.as_ref().unwrap();
        assert!((r.v_order[3][0] - r.v_order[2][0] - g.powi(3) * d3[0]).abs() < 1e-16);
        // m3 = -1/4, J_{e1} = -1/0.6, J_{-e1} = 0; xi_bar(-e1) = -xi_bar(e1):
        // p3(e1) = m3 J^2, p3(-e1) = -m3 J^2, d3 = 2 m3 J^2.
        assert!((d3[0] - 2.0 * -0.25 / 0.36).abs() < 1e-13);
    }

    #[test]
    fn deterministic_environment_solomon_is_drift() {
        let p0 = TransitionKernel::new(&[0.7, 0.3]).unwrap();
        let nu = PerturbationLaw::degenerate(1).unwrap();
        let m = ModelSpec::new(p0, nu, 0.05, 0.1).unwrap();
        assert!((solomon_speed(&m, 0.0).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn d1_twopoint_exact_speed() {
        let m = fixtures::d1_twopoint().unwrap();
        // omega(e1) in {0.7, 0.5}: E[1/omega] = (1/0.7 + 2)/2, v = 2/E - 1.
        let e = (1.0 / 0.7 + 2.0) / 2.0;
        assert!((solomon_speed(&m, 0.1).unwrap() - (2.0 / e - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn speedup_integral_is_positive_and_increasing() {
        let half = speedup_integral(0.5).unwrap();
        assert!(half.value > 0.0 && half.est_error <= 1e-6);
        let mut prev = 0.0;
        for i in 1..=9 {
            let v = speedup_integral(i as f64 / 10.0).unwrap().value;
            assert!(v > prev);
            prev = v;
        }
        let grid = speedup_integral_grid(0.5, 64, 4096, 1e-6).unwrap();
        assert!((grid.value - half.value).abs() < 2e-6, "{} vs {}", grid.value, half.value);
    }
}
