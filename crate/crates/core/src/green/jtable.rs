//! The Green-function increments `J_e = G^p(e,0) - G^p(0,0)`.
//!
//! For `d >= 2` the symmetrization gives
//! `J_{±e_i} = (phi(∓e_i) - 1) g_i + h_i` with
//! `g_i = mean cos(u_i) / D`, `h_i = mean (cos(u_i) - 1) / D` and
//! `D = 1 - sum_j a_j cos(u_j)`, `a_j = 2 sqrt(p(e_j) p(-e_j))`.
//! The last torus axis is integrated in closed form; the remaining `d - 1`
//! axes use the origin-excluded midpoint rule with grid doubling.

use std::path::Path;

use crate::error::{Error, Result};
use crate::green::quadrature::{refine_vec, torus_mean_vec};
use crate::green::symmetrize::{symmetrize, Symmetrization};
use crate::lattice::{directions, Direction};
use crate::model::{ModelSpec, TransitionKernel};
use crate::report::{fmt_f64, CsvReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JMethod {
    Quadrature,
    Series,
    ClosedForm1d,
}

impl JMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            JMethod::Quadrature => "quadrature",
            JMethod::Series => "series",
            JMethod::ClosedForm1d => "closed-form-1d",
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct JTable {
    pub d: usize,
    /// `None` for the gamma-independent limit.
    pub gamma: Option<f64>,
    /// Indexed by [`Direction::index`].
    pub values: Vec<f64>,
    pub method: JMethod,
    /// Final grid size or series horizon; zero for closed forms.
    pub grid_n: usize,
    pub est_error: f64,
}

impl JTable {
    pub fn get(&self, e: Direction) -> f64 {
        self.values[e.index()]
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn write_csv(&self, path: &Path, config: &str) -> Result<()> {
        let mut csv = CsvReport::create(path, config, &["direction", "value", "method", "grid_n", "est_error"])?;
        for e in directions(self.d) {
            csv.row(&[
                e.to_string(),
                fmt_f64(self.get(e)),
                self.method.as_str().to_string(),
                self.grid_n.to_string(),
                fmt_f64(self.est_error),
            ])?;
        }
        csv.finish()
    }
}

/// Grid-doubling settings for the reduced quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadSettings {
    pub n_start: usize,
    pub n_max: usize,
    pub tol: f64,
}

impl QuadSettings {
    /// 256 nodes per outer axis in `d = 2`, 64 in `d = 3`.
    pub fn default_for(d: usize) -> Self {
        match d {
            2 => QuadSettings { n_start: 256, n_max: 1 << 22, tol: 1e-11 },
            _ => QuadSettings { n_start: 64, n_max: 1 << 12, tol: 1e-9 },
        }
    }

    /// Looser settings for `k = 1`, where the integrands have kinks at the origin.
    pub fn critical_for(d: usize) -> Self {
        match d {
            2 => QuadSettings { n_start: 256, n_max: 1 << 22, tol: 1e-9 },
            _ => QuadSettings { n_start: 64, n_max: 1 << 13, tol: 1e-6 },
        }
    }
}

/// `(g, h)` per axis; `g_i` is only evaluated where `need_g[i]`.
pub(crate) fn green_increments(
    a: &[f64],
    one_minus_k: f64,
    need_g: &[bool],
    settings: QuadSettings,
) -> Result<(Vec<f64>, Vec<f64>, usize, f64)> {
    let d = a.len();
    let m = d - 1;
    let b = a[m];
    // Output layout: h_0..h_{d-1}, then g_i for each axis with need_g.
    let g_axes: Vec<usize> = (0..d).filter(|&i| need_g[i]).collect();
    let outputs = d + g_axes.len();
    let integrand = |u: &[f64], out: &mut [f64]| {
        let mut amb = one_minus_k;
        let mut half_vers = [0.0; 3];
        for j in 0..m {
            let s = (0.5 * u[j]).sin();
            half_vers[j] = 2.0 * s * s;
            amb += a[j] * half_vers[j];
        }
        let big_a = amb + b;
        let r = (amb * (amb + 2.0 * b)).sqrt();
        let i0 = 1.0 / r;
        let denom = r * (big_a + r);
        for j in 0..m {
            out[j] = -half_vers[j] * i0;
        }
        out[m] = -(amb + r) / denom;
        for (slot, &i) in g_axes.iter().enumerate() {
            out[d + slot] = if i == m { b / denom } else { (1.0 - half_vers[i]) * i0 };
        }
    };
    let (v, n, est) =
        refine_vec(|n| torus_mean_vec(m, outputs, integrand, n, true), settings.n_start, settings.n_max, settings.tol)?;
    let h = v[..d].to_vec();
    let mut g = vec![f64::NAN; d];
    for (slot, &i) in g_axes.iter().enumerate() {
        g[i] = v[d + slot];
    }
    Ok((g, h, n, est))
}

fn assemble(sym: &Symmetrization, g: &[f64], h: &[f64]) -> Vec<f64> {
    let d = h.len();
    let mut values = vec![0.0; 2 * d];
    for i in 0..d {
        let r = sym.phi_base[i];
        // phi(-e_i) = 1/r_i multiplies G^s(e_i, 0); phi(e_i) = r_i for -e_i.
        let (fp, fm) = if r == 1.0 { (0.0, 0.0) } else { ((1.0 / r - 1.0) * g[i], (r - 1.0) * g[i]) };
        values[2 * i] = fp + h[i];
        values[2 * i + 1] = fm + h[i];
    }
    values
}

fn a_coeffs(p: &TransitionKernel) -> Vec<f64> {
    let pr = p.probs();
    (0..p.dim()).map(|i| 2.0 * (pr[2 * i] * pr[2 * i + 1]).sqrt()).collect()
}

/// `J_e^gamma` for the homogeneous kernel `p` (`d >= 2`, `k < 1`).
pub fn j_exact(p: &TransitionKernel, settings: QuadSettings) -> Result<JTable> {
    let d = p.dim();
    if d < 2 {
        return Err(Error::Precondition("j_exact needs d >= 2; use j_closed_form_1d".into()));
    }
    let sym = symmetrize(p);
    if sym.one_minus_k <= 0.0 {
        return Err(Error::HypothesisViolated("k = 1: the kernel has no drift".into()));
    }
    let need_g: Vec<bool> = sym.phi_base.iter().map(|&r| r != 1.0).collect();
    let (g, h, n, est) = green_increments(&a_coeffs(p), sym.one_minus_k, &need_g, settings)?;
    Ok(JTable {
        d,
        gamma: None,
        values: assemble(&sym, &g, &h),
        method: JMethod::Quadrature,
        grid_n: n,
        est_error: est,
    })
}

/// The `gamma -> 0` limit of `J^gamma` (`d >= 2`).
///
/// With `d0 != 0` this is `J` of `p0`. With `d0 = 0` the kernel `p0` is
/// symmetric, the `phi - 1` terms vanish and `k = 1`.
pub fn j_limit(model: &ModelSpec) -> Result<JTable> {
    model.require_h()?;
    let d = model.dim();
    if d < 2 {
        return Err(Error::Precondition("j_limit needs d >= 2".into()));
    }
    let p0 = model.p0();
    if !model.d0_is_zero() {
        return j_exact(p0, QuadSettings::default_for(d));
    }
    let sym = symmetrize(p0);
    let (g, h, n, est) = green_increments(&a_coeffs(p0), 0.0, &vec![false; d], QuadSettings::critical_for(d))?;
    Ok(JTable {
        d,
        gamma: Some(0.0),
        values: assemble(&sym, &g, &h),
        method: JMethod::Quadrature,
        grid_n: n,
        est_error: est,
    })
}

/// `J` from the full `d`-dimensional midpoint rule with `n` nodes per axis.
///
/// Much slower than [`j_exact`]; kept as an independent route for tests.
pub fn j_full_grid(p: &TransitionKernel, n: usize) -> Result<JTable> {
    let d = p.dim();
    let sym = symmetrize(p);
    let a = a_coeffs(p);
    let integrand = |u: &[f64], out: &mut [f64]| {
        let den: f64 = 1.0 - a.iter().zip(u).map(|(aj, uj)| aj * uj.cos()).sum::<f64>();
        for i in 0..d {
            out[i] = u[i].cos() / den;
            out[d + i] = (u[i].cos() - 1.0) / den;
        }
    };
    let v = torus_mean_vec(d, 2 * d, integrand, n, true)?;
    Ok(JTable {
        d,
        gamma: None,
        values: assemble(&sym, &v[..d], &v[d..]),
        method: JMethod::Quadrature,
        grid_n: n,
        est_error: f64::NAN,
    })
}

/// Closed-form `d = 1` values: `J_{e} = -1/p(e)` along the drift, `0` against it.
pub fn j_closed_form_1d(p: &TransitionKernel) -> Result<JTable> {
    if p.dim() != 1 {
        return Err(Error::Precondition("j_closed_form_1d needs d = 1".into()));
    }
    let (right, left) = (p.probs()[0], p.probs()[1]);
    let values = if right > left {
        vec![-1.0 / right, 0.0]
    } else if left > right {
        vec![0.0, -1.0 / left]
    } else {
        return Err(Error::HypothesisViolated("zero drift in d = 1".into()));
    };
    Ok(JTable { d: 1, gamma: None, values, method: JMethod::ClosedForm1d, grid_n: 0, est_error: 0.0 })
}

/// `G^s_k(0,0)` for a symmetric `s` by the full-grid midpoint rule.
pub fn symmetric_green_origin(s: &TransitionKernel, k: f64, n: usize) -> Result<f64> {
    let d = s.dim();
    let w: Vec<f64> = (0..d).map(|i| 2.0 * k * s.probs()[2 * i]).collect();
    let f = |u: &[f64], out: &mut [f64]| {
        out[0] = 1.0 / (1.0 - w.iter().zip(u).map(|(wj, uj)| wj * uj.cos()).sum::<f64>());
    };
    Ok(torus_mean_vec(d, 1, f, n, true)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_along_and_against_drift() {
        let j = j_closed_form_1d(&TransitionKernel::new(&[0.7, 0.3]).unwrap()).unwrap();
        assert_eq!(j.values[1], 0.0);
        assert!((j.values[0] + 10.0 / 7.0).abs() < 1e-15);
        let j = j_closed_form_1d(&TransitionKernel::new(&[0.3, 0.7]).unwrap()).unwrap();
        assert_eq!(j.values[0], 0.0);
        assert!((j.values[1] + 10.0 / 7.0).abs() < 1e-15);
        assert!(j_closed_form_1d(&TransitionKernel::new(&[0.5, 0.5]).unwrap()).is_err());
    }

    #[test]
    fn reduced_route_matches_full_grid() {
        let p = TransitionKernel::new(&[0.4, 0.1, 0.25, 0.25]).unwrap();
        let a = j_exact(&p, QuadSettings::default_for(2)).unwrap();
        let b = j_full_grid(&p, 512).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
        let p3 = TransitionKernel::new(&[0.3, 0.1, 0.15, 0.15, 0.2, 0.1]).unwrap();
        let a = j_exact(&p3, QuadSettings::default_for(3)).unwrap();
        let b = j_full_grid(&p3, 128).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-7, "{x} vs {y}");
        }
    }

    #[test]
    fn symmetric_axis_gives_equal_values() {
        let p = TransitionKernel::new(&[0.4, 0.1, 0.25, 0.25]).unwrap();
        let j = j_exact(&p, QuadSettings::default_for(2)).unwrap();
        assert_eq!(j.values[2], j.values[3]);
        assert!(j.values.iter().all(|v| v.abs() <= 1.0 / 0.1));
        // One-step decomposition at the origin: sum_e p(e) J_e = -1.
        let s: f64 = (0..4).map(|i| p.probs()[i] * j.values[i]).sum();
        assert!((s + 1.0).abs() < 1e-10, "sum {s}");
    }

    #[test]
    fn driftless_kernel_is_rejected() {
        assert!(matches!(
            j_exact(&TransitionKernel::simple(2).unwrap(), QuadSettings::default_for(2)),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn simple_walk_limit_in_two_dimensions() {
        // Symmetric p0: sum_i 2 p0(e_i) J_{e_i} = -1 (one-step return identity).
        let p0 = TransitionKernel::new(&[0.3, 0.3, 0.2, 0.2]).unwrap();
        let nu = crate::model::PerturbationLaw::new(vec![
            crate::model::PerturbationAtom::new(vec![0.5, -0.5, 0.0, 0.0], 0.75).unwrap(),
            crate::model::PerturbationAtom::new(vec![-0.5, 0.5, 0.0, 0.0], 0.25).unwrap(),
        ])
        .unwrap();
        let m = ModelSpec::new(p0, nu, 0.05, 0.2).unwrap();
        let j = j_limit(&m).unwrap();
        let s: f64 = (0..4).map(|i| p0.probs()[i] * j.values[i]).sum();
        assert!((s + 1.0).abs() < 1e-8, "sum {s}");
    }
}
