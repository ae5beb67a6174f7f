//! Decay of `sum_z |p_{n+1}(0,z) - p_n(e,z)|` for a symmetric kernel.
//!
//! `p_n` is computed by exact convolution, keeping only the slices `n` and
//! `n + 1`. Mass farther than a Hoeffding radius from the origin is dropped;
//! the dropped total is reported (about `1e-13` after 4096 steps in `d = 2`).

use std::path::Path;

use crate::error::{Error, Result};
use crate::green::series::{Distribution, MAX_CELLS};
use crate::kalikow::lemma2::fit_slope;
use crate::lattice::{Direction, MAX_DIM};
use crate::model::TransitionKernel;
use crate::report::{fmt_f64, CsvReport};

/// Per-axis tail probability allowed outside the truncation radius.
const TAIL: f64 = 1e-16;

#[derive(Clone, Debug, PartialEq)]
pub struct DecayRow {
    pub n: usize,
    pub direction: Direction,
    pub l1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    /// Largest (least negative) log-log slope over the directions.
    pub fitted_exponent: f64,
    /// Probability mass dropped by the truncation at the last step.
    pub truncated_mass: f64,
}

impl DecayTable {
    pub fn write_csv(&self, path: &Path, config: &str) -> Result<()> {
        let mut csv = CsvReport::create(path, config, &["n", "direction", "l1", "fitted_exponent", "truncated_mass"])?;
        for r in &self.rows {
            csv.row(&[
                r.n.to_string(),
                r.direction.to_string(),
                fmt_f64(r.l1),
                fmt_f64(self.fitted_exponent),
                fmt_f64(self.truncated_mass),
            ])?;
        }
        csv.finish()
    }
}

/// Radius outside which a walk of `n` steps has probability below `TAIL` per axis (Hoeffding).
fn hoeffding_radius(n: usize) -> usize {
    ((2.0 * n as f64 * (2.0 / TAIL).ln()).sqrt().ceil() as usize).min(n)
}

/// `sum_z |p_{n+1}(0,z) - p_n(0,z-e)|` from the two slices on the same box.
///
/// With `parity_only`, only sites with `|z|_1 = n + 1 (mod 2)` are summed.
/// Terms at `z` and `-z` are added first, so `e` and `-e` give bit-identical sums.
fn l1_difference(d: usize, side: usize, next: &[f64], cur: &[f64], e: Direction, parity_only: bool, n: usize) -> f64 {
    let r = (side / 2) as i64;
    let mut stride = 1usize;
    for _ in 0..e.axis0() {
        stride *= side;
    }
    let mut terms = vec![0.0; next.len()];
    let mut c = [0usize; MAX_DIM];
    for (idx, t) in terms.iter_mut().enumerate() {
        if idx > 0 {
            let mut i = 0;
            loop {
                c[i] += 1;
                if c[i] < side {
                    break;
                }
                c[i] = 0;
                i += 1;
            }
        }
        if parity_only {
            let l1: i64 = c[..d].iter().map(|&x| (x as i64 - r).abs()).sum();
            if (l1 - n as i64 - 1).rem_euclid(2) != 0 {
                continue;
            }
        }
        // p_n(0, z - e): one cell back along e.
        let ca = c[e.axis0()];
        let shifted = if e.is_positive() {
            if ca > 0 {
                cur[idx - stride]
            } else {
                0.0
            }
        } else if ca + 1 < side {
            cur[idx + stride]
        } else {
            0.0
        };
        *t = (next[idx] - shifted).abs();
    }
    let len = terms.len();
    let mut total = terms[len / 2];
    for i in 0..len / 2 {
        total += terms[i] + terms[len - 1 - i];
    }
    total
}

/// Largest `n` whose truncated box fits in memory for dimension `d`.
pub fn max_steps(d: usize) -> usize {
    let mut n = 1;
    while (2 * hoeffding_radius(2 * n + 1) + 3).pow(d as u32) <= MAX_CELLS {
        n *= 2;
    }
    n
}

fn run(s: &TransitionKernel, n_list: &[usize], directions: &[Direction], parity_only: bool) -> Result<DecayTable> {
    if !s.is_symmetric() {
        return Err(Error::Precondition("lemma4_decay needs a kernel with s(e) = s(-e)".into()));
    }
    let d = s.dim();
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let n_max = *ns.last().ok_or_else(|| Error::Precondition("empty n list".into()))?;
    if directions.is_empty() || directions.iter().any(|e| e.axis0() >= d) {
        return Err(Error::Precondition("directions must be non-empty and within the dimension".into()));
    }
    // One cell of slack so the shifted slice fits.
    let radius = hoeffding_radius(n_max + 1) + 1;
    let mut dist = Distribution::point(d, radius)?;
    let mut next = Vec::new();
    let mut rows = Vec::new();
    let mut targets = ns.iter().peekable();
    for n in 0..=n_max {
        dist.step_into(s, hoeffding_radius(n + 1), &mut next);
        if targets.peek() == Some(&&n) {
            targets.next();
            for &e in directions {
                let l1 = l1_difference(d, dist.side(), &next, dist.mass(), e, parity_only, n);
                rows.push(DecayRow { n, direction: e, l1 });
            }
        }
        dist.replace_mass(&mut next);
    }
    let truncated_mass = (1.0 - dist.total()).max(0.0);
    let mut fitted_exponent = f64::NEG_INFINITY;
    for &e in directions {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.direction == e && r.n > 0 && r.l1 > 0.0)
            .map(|r| ((r.n as f64).ln(), r.l1.ln()))
            .collect();
        if points.len() >= 2 {
            fitted_exponent = fitted_exponent.max(fit_slope(&points));
        }
    }
    if !fitted_exponent.is_finite() {
        fitted_exponent = f64::NAN;
    }
    Ok(DecayTable { rows, fitted_exponent, truncated_mass })
}

/// L1 distance between `p_{n+1}(0, .)` and `p_n(e, .)` for each `n` and `e`, with the log-log slope.
pub fn lemma4_decay(s: &TransitionKernel, n_list: &[usize], directions: &[Direction]) -> Result<DecayTable> {
    run(s, n_list, directions, false)
}

/// Same table summing only over the parity class where both terms can be non-zero.
pub fn lemma4_decay_parity(s: &TransitionKernel, n_list: &[usize], directions: &[Direction]) -> Result<DecayTable> {
    run(s, n_list, directions, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(axis: usize, sign: i32) -> Direction {
        Direction::new(axis, sign).unwrap()
    }

    #[test]
    fn one_step_from_the_origin() {
        // n = 0: p_1(0,.) is the kernel and p_0(e,.) a unit mass at e.
        let s = TransitionKernel::simple(2).unwrap();
        let t = lemma4_decay(&s, &[0], &[e(1, 1)]).unwrap();
        assert!((t.rows[0].l1 - 1.5).abs() < 1e-15);
    }

    #[test]
    fn opposite_directions_agree() {
        let s = TransitionKernel::symmetric(&[0.3, 0.2]).unwrap();
        let ns = [4, 16, 64];
        let a = lemma4_decay(&s, &ns, &[e(1, 1)]).unwrap();
        let b = lemma4_decay(&s, &ns, &[e(1, -1)]).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.l1, y.l1);
        }
    }

    #[test]
    fn off_parity_terms_vanish() {
        let s = TransitionKernel::symmetric(&[0.3, 0.2]).unwrap();
        let ns = [3, 10, 33];
        let dirs = [e(1, 1), e(2, -1)];
        let full = lemma4_decay(&s, &ns, &dirs).unwrap();
        let parity = lemma4_decay_parity(&s, &ns, &dirs).unwrap();
        for (x, y) in full.rows.iter().zip(&parity.rows) {
            assert_eq!(x.l1, y.l1);
        }
    }

    #[test]
    fn asymmetric_kernel_is_rejected() {
        let p = TransitionKernel::new(&[0.3, 0.2, 0.25, 0.25]).unwrap();
        assert!(lemma4_decay(&p, &[4], &[e(1, 1)]).is_err());
    }

    #[test]
    fn line_decays_like_inverse_square_root() {
        let s = TransitionKernel::simple(1).unwrap();
        let t = lemma4_decay(&s, &[64, 256, 1024, 4096], &[e(1, 1)]).unwrap();
        assert!((t.fitted_exponent + 0.5).abs() < 0.05, "{t:?}");
        assert!(t.truncated_mass < 1e-13);
        assert!(t.rows.iter().all(|r| (0.0..=2.0).contains(&r.l1)));
    }
}
