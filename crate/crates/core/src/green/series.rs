//! Green functions as truncated power series `sum_n k^n P^n(z, z')`.
//!
//! The law of `X_n` started at the origin is advanced by exact convolution on
//! a box that grows with `n`, so no boundary effects enter. This route shares
//! no code with the Fourier quadrature and serves as its oracle.

use crate::error::{Error, Result};
use crate::lattice::{Site, MAX_DIM};
use crate::model::TransitionKernel;

/// Largest number of cells per slice.
pub const MAX_CELLS: usize = 1 << 24;

/// Steps per stopping-rule block.
const BLOCK: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesResult {
    /// `G(z, z')` for each requested pair.
    pub values: Vec<f64>,
    /// Number of steps summed.
    pub horizon: usize,
    /// Bound on the neglected tail: rigorous for `k < 1`, a last-block estimate for `k = 1`.
    pub truncation: f64,
}

/// The law of `X_n` for the homogeneous walk `p`, on the cube of radius `r`.
#[derive(Clone, Debug)]
pub(crate) struct Distribution {
    d: usize,
    r: usize,
    side: usize,
    mass: Vec<f64>,
}

impl Distribution {
    pub(crate) fn point(d: usize, r: usize) -> Result<Self> {
        let side = 2 * r + 1;
        let cells = side
            .checked_pow(d as u32)
            .filter(|&c| c <= MAX_CELLS)
            .ok_or_else(|| Error::MemoryBudget(format!("radius {r} in d = {d} exceeds {MAX_CELLS} cells")))?;
        let mut mass = vec![0.0; cells];
        mass[Self::offset(d, r, side, Site::ORIGIN)] = 1.0;
        Ok(Distribution { d, r, side, mass })
    }

    #[inline]
    fn offset(d: usize, r: usize, side: usize, z: Site) -> usize {
        let mut idx = 0;
        for i in (0..d).rev() {
            idx = idx * side + (z.0[i] + r as i32) as usize;
        }
        idx
    }

    pub(crate) fn radius(&self) -> usize {
        self.r
    }

    pub(crate) fn get(&self, z: Site) -> f64 {
        if z.0[..self.d].iter().any(|&c| c.unsigned_abs() as usize > self.r) {
            return 0.0;
        }
        self.mass[Self::offset(self.d, self.r, self.side, z)]
    }

    /// Re-embeds into a cube of radius `r_new >= r`.
    pub(crate) fn grow(&self, r_new: usize) -> Result<Self> {
        let mut out = Distribution::point(self.d, r_new)?;
        out.mass.iter_mut().for_each(|m| *m = 0.0);
        let shift = r_new - self.r;
        let d = self.d;
        for (idx, &m) in self.mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let mut rem = idx;
            let mut new_idx = 0;
            let mut stride = 1;
            for _ in 0..d {
                new_idx += (rem % self.side + shift) * stride;
                rem /= self.side;
                stride *= out.side;
            }
            out.mass[new_idx] = m;
        }
        Ok(out)
    }

    /// One convolution step, `next(z) = sum_e p(e) cur(z - e)`, restricted to `|z|_inf <= reach`.
    ///
    /// A buffer of the right size is only overwritten inside the reach cube, so
    /// its previous contents must vanish outside it.
    pub(crate) fn step_into(&self, p: &TransitionKernel, reach: usize, next: &mut Vec<f64>) {
        let d = self.d;
        let side = self.side;
        if next.len() != self.mass.len() {
            next.clear();
            next.resize(self.mass.len(), 0.0);
        }
        let reach = reach.min(self.r);
        let lo = self.r - reach;
        let hi = self.r + reach;
        let probs = p.probs();
        let mut strides = [0usize; MAX_DIM];
        let mut s = 1;
        for st in strides.iter_mut().take(d) {
            *st = s;
            s *= side;
        }
        let mut c = [lo; MAX_DIM];
        loop {
            let idx: usize = (0..d).map(|i| c[i] * strides[i]).sum();
            let mut acc = 0.0;
            for i in 0..d {
                // +e_i arrives from c - e_i, -e_i from c + e_i. Each axis pair is
                // added as a unit so a symmetric kernel keeps p_n(z) = p_n(-z) exactly.
                let from_below = if c[i] > 0 { probs[2 * i] * self.mass[idx - strides[i]] } else { 0.0 };
                let from_above = if c[i] + 1 < side { probs[2 * i + 1] * self.mass[idx + strides[i]] } else { 0.0 };
                acc += from_below + from_above;
            }
            next[idx] = acc;
            let mut i = 0;
            loop {
                if i == d {
                    return;
                }
                c[i] += 1;
                if c[i] <= hi {
                    break;
                }
                c[i] = lo;
                i += 1;
            }
        }
    }

    pub(crate) fn replace_mass(&mut self, mass: &mut Vec<f64>) {
        std::mem::swap(&mut self.mass, mass);
    }

    pub(crate) fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub(crate) fn side(&self) -> usize {
        self.side
    }

    pub(crate) fn total(&self) -> f64 {
        self.mass.iter().sum()
    }
}

/// `G_k(z, z') = sum_{n <= N} k^n P^n(z, z')` for each pair.
///
/// Summation stops once the tail is below `tol` (see [`SeriesResult::truncation`]);
/// reaching `horizon` first is an error.
pub fn series_oracle(
    p: &TransitionKernel,
    pairs: &[(Site, Site)],
    horizon: usize,
    survival: f64,
    tol: f64,
) -> Result<SeriesResult> {
    if !(0.0..=1.0).contains(&survival) {
        return Err(Error::Precondition(format!("survival k = {survival} not in [0, 1]")));
    }
    let d = p.dim();
    let offsets: Vec<Site> = pairs.iter().map(|(z, zp)| zp.sub(*z)).collect();
    let mut dist = Distribution::point(d, BLOCK)?;
    let mut scratch = Vec::new();
    let mut sums: Vec<f64> = offsets.iter().map(|&o| dist.get(o)).collect();
    let mut weight = 1.0;
    let mut block = vec![0.0; offsets.len()];
    let mut prev_block = f64::INFINITY;
    // No early exit before every target has had time to receive mass.
    let min_n = 2 * offsets.iter().map(|o| o.l1() as usize).max().unwrap_or(0) + 2 * BLOCK;
    let mut n = 0;
    while n < horizon {
        if n + 1 > dist.radius() {
            dist = dist.grow(2 * dist.radius())?;
        }
        dist.step_into(p, n + 1, &mut scratch);
        dist.replace_mass(&mut scratch);
        n += 1;
        weight *= survival;
        for ((s, b), &o) in sums.iter_mut().zip(block.iter_mut()).zip(&offsets) {
            let t = weight * dist.get(o);
            *s += t;
            *b += t;
        }
        if weight == 0.0 {
            return Ok(SeriesResult { values: sums, horizon: n, truncation: 0.0 });
        }
        if survival < 1.0 {
            let tail = weight * survival / (1.0 - survival);
            if tail <= tol {
                return Ok(SeriesResult { values: sums, horizon: n, truncation: tail });
            }
        }
        if n % BLOCK == 0 {
            let cur = block.iter().copied().fold(0.0, f64::max);
            block.iter_mut().for_each(|b| *b = 0.0);
            if n >= min_n && prev_block.is_finite() && cur < prev_block && cur <= tol {
                let ratio = cur / prev_block;
                let tail = cur * ratio / (1.0 - ratio);
                if tail <= tol {
                    return Ok(SeriesResult { values: sums, horizon: n, truncation: tail });
                }
            }
            prev_block = cur;
        }
    }
    Err(Error::HorizonTooSmall(format!("tail still above {tol:e} after {horizon} steps")))
}
