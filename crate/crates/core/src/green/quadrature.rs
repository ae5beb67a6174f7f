//! Tensor-product midpoint rules on the torus `[0, 2pi)^d`.
//!
//! Work is split into slabs along the first axis and run in parallel; slab
//! sums come back in slab order and are combined by a fixed pairwise tree, so
//! results do not depend on the number of threads.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::MAX_DIM;

/// Sum in a fixed balanced-tree order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Grid coordinate `m` on an `n`-point grid, shifted by half a cell if `offset`.
#[inline]
pub fn node(m: usize, n: usize, offset: bool) -> f64 {
    let h = 2.0 * PI / n as f64;
    if offset {
        (m as f64 + 0.5) * h
    } else {
        m as f64 * h
    }
}

/// Points per parallel work unit; fixed so the summation tree never depends on scheduling.
const CHUNK: usize = 4096;

/// Componentwise mean of a vector-valued `f` over a uniform `n^dim` grid.
///
/// `f(u, out)` writes `outputs` values. With `exclude_origin` the grid is
/// offset by half a cell, so neither `u = 0` nor `u = (pi, ..., pi)` is sampled.
pub fn torus_mean_vec<F>(dim: usize, outputs: usize, f: F, n: usize, exclude_origin: bool) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Precondition(format!("torus dimension {dim} not in 1..={MAX_DIM}")));
    }
    if n == 0 {
        return Err(Error::Precondition("grid size must be positive".into()));
    }
    let total = n.checked_pow(dim as u32).ok_or_else(|| Error::MemoryBudget(format!("grid {n}^{dim} overflows")))?;
    let chunks: Vec<Result<Vec<f64>>> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; outputs];
            let mut out = vec![0.0; outputs];
            let mut u = [0.0; MAX_DIM];
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                let mut rem = idx;
                for ui in u.iter_mut().take(dim) {
                    *ui = node(rem % n, n, exclude_origin);
                    rem /= n;
                }
                f(&u[..dim], &mut out);
                for (a, &v) in acc.iter_mut().zip(&out) {
                    if !v.is_finite() {
                        return Err(Error::QuadratureUnstable(format!("integrand is {v} at u = {:?}", &u[..dim])));
                    }
                    *a += v;
                }
            }
            Ok(acc)
        })
        .collect();
    let chunks = chunks.into_iter().collect::<Result<Vec<_>>>()?;
    let scale = 1.0 / total as f64;
    Ok((0..outputs)
        .map(|j| {
            let col: Vec<f64> = chunks.iter().map(|c| c[j]).collect();
            pairwise_sum(&col) * scale
        })
        .collect())
}

/// Mean of `f` over a uniform `n^dim` grid; see [`torus_mean_vec`].
pub fn torus_mean<F>(dim: usize, f: F, n: usize, exclude_origin: bool) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    Ok(torus_mean_vec(dim, 1, |u, out| out[0] = f(u), n, exclude_origin)?[0])
}

/// `int_{[0,2pi)^dim} f`, midpoint rule with `n` nodes per axis.
pub fn torus_quadrature<F>(dim: usize, f: F, n: usize, exclude_origin: bool) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    Ok(torus_mean(dim, f, n, exclude_origin)? * (2.0 * PI).powi(dim as i32))
}

/// Result of a grid-doubling sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Refined {
    pub value: f64,
    /// Grid size of the returned value.
    pub n: usize,
    /// `|value(n) - value(n/2)|`.
    pub est_error: f64,
}

/// Doubles `n` from `n_start` until successive means differ by at most `tol`.
///
/// `eval` receives the grid size. Fails if `n_max` is reached first.
pub fn refine<F>(eval: F, n_start: usize, n_max: usize, tol: f64) -> Result<Refined>
where
    F: Fn(usize) -> Result<f64>,
{
    let (v, n, est_error) = refine_vec(|n| Ok(vec![eval(n)?]), n_start, n_max, tol)?;
    Ok(Refined { value: v[0], n, est_error })
}

/// [`refine`] for vector results; the change is the largest componentwise difference.
pub fn refine_vec<F>(eval: F, n_start: usize, n_max: usize, tol: f64) -> Result<(Vec<f64>, usize, f64)>
where
    F: Fn(usize) -> Result<Vec<f64>>,
{
    let mut n = n_start;
    let mut prev = eval(n)?;
    let mut last = f64::INFINITY;
    while 2 * n <= n_max {
        n *= 2;
        let cur = eval(n)?;
        let diff = cur.iter().zip(&prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if diff <= tol {
            return Ok((cur, n, diff));
        }
        prev = cur;
        last = diff;
    }
    Err(Error::QuadratureUnstable(format!("grid doubling stalled at n = {n}: last change {last:e} > {tol:e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrates_to_torus_volume() {
        for d in 1..=3 {
            let v = torus_quadrature(d, |_| 1.0, 8, true).unwrap();
            assert!((v - (2.0 * PI).powi(d as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn trigonometric_polynomials_are_exact() {
        let v = torus_quadrature(2, |u| u[0].cos(), 16, true).unwrap();
        assert!(v.abs() < 1e-12);
        let w = torus_mean(3, |u| (u[0] + 2.0 * u[2]).cos().powi(2), 16, false).unwrap();
        assert!((w - 0.5).abs() < 1e-14);
    }

    #[test]
    fn non_finite_values_are_reported() {
        let r = torus_quadrature(1, |u| 1.0 / u[0], 4, false);
        assert!(matches!(r, Err(Error::QuadratureUnstable(_))));
    }

    #[test]
    fn drifted_green_integrand_is_stable_under_doubling() {
        // G^s_k(0,0) for a symmetric kernel with killing k = 0.9.
        let f = |u: &[f64]| 1.0 / (1.0 - 0.9 * 0.5 * (u[0].cos() + u[1].cos()));
        let a = torus_mean(2, f, 64, true).unwrap();
        let b = torus_mean(2, f, 128, true).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_inputs() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }
}
