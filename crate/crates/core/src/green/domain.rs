use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::lattice::{directions, Site, MAX_DIM};
use crate::model::MAX_STEPS;

/// A finite connected set `U` of lattice sites together with its outer boundary.
///
/// Sites are indexed `0..len()` for `U` (sorted) followed by the boundary
/// sites, so a single index space covers `U ∪ ∂U`.
#[derive(Clone, Debug)]
pub struct Domain {
    d: usize,
    all: Vec<Site>,
    n_interior: usize,
    index: HashMap<Site, usize>,
    neighbors: Vec<[usize; MAX_STEPS]>,
}

impl Domain {
    pub fn new(d: usize, sites: impl IntoIterator<Item = Site>) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::InvalidDomain(format!("dimension {d} not in 1..={MAX_DIM}")));
        }
        let interior: BTreeSet<Site> = sites.into_iter().collect();
        if interior.is_empty() {
            return Err(Error::InvalidDomain("empty domain".into()));
        }
        if let Some(z) = interior.iter().find(|z| z.0[d..].iter().any(|&c| c != 0)) {
            return Err(Error::InvalidDomain(format!("site {z:?} has coordinates beyond d = {d}")));
        }
        let mut all: Vec<Site> = interior.iter().copied().collect();
        let n_interior = all.len();
        let mut index: HashMap<Site, usize> = all.iter().enumerate().map(|(i, &z)| (z, i)).collect();

        let mut boundary = BTreeSet::new();
        for z in &interior {
            for e in directions(d) {
                let y = z.step(e);
                if !interior.contains(&y) {
                    boundary.insert(y);
                }
            }
        }
        for y in boundary {
            index.insert(y, all.len());
            all.push(y);
        }

        let mut neighbors = vec![[usize::MAX; MAX_STEPS]; n_interior];
        for (i, nb) in neighbors.iter_mut().enumerate() {
            for e in directions(d) {
                nb[e.index()] = index[&all[i].step(e)];
            }
        }

        let dom = Domain { d, all, n_interior, index, neighbors };
        dom.check_connected()?;
        Ok(dom)
    }

    /// `{lo, ..., hi}` in `d = 1`.
    pub fn interval(lo: i32, hi: i32) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidDomain(format!("empty interval [{lo}, {hi}]")));
        }
        Domain::new(1, (lo..=hi).map(|x| Site([x, 0, 0])))
    }

    /// Axis-parallel box `lo <= z <= hi` (componentwise).
    pub fn rect(lo: &[i32], hi: &[i32]) -> Result<Self> {
        let d = lo.len();
        if d != hi.len() || d == 0 || d > MAX_DIM || lo.iter().zip(hi).any(|(a, b)| a > b) {
            return Err(Error::InvalidDomain(format!("bad box bounds {lo:?}..{hi:?}")));
        }
        let mut sites = Vec::new();
        let mut c = lo.to_vec();
        loop {
            sites.push(Site::from_coords(&c)?);
            let mut i = 0;
            loop {
                if i == d {
                    return Domain::new(d, sites);
                }
                c[i] += 1;
                if c[i] <= hi[i] {
                    break;
                }
                c[i] = lo[i];
                i += 1;
            }
        }
    }

    /// `{-r, ..., r}^d`.
    pub fn cube(d: usize, r: i32) -> Result<Self> {
        Domain::rect(&vec![-r; d], &vec![r; d])
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.n_interior];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &self.neighbors[i][..2 * self.d] {
                if j < self.n_interior && !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        if count == self.n_interior {
            Ok(())
        } else {
            Err(Error::InvalidDomain(format!(
                "domain is not connected ({count} of {} sites reachable)",
                self.n_interior
            )))
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of sites in `U`.
    pub fn len(&self) -> usize {
        self.n_interior
    }

    pub fn is_empty(&self) -> bool {
        self.n_interior == 0
    }

    pub fn sites(&self) -> &[Site] {
        &self.all[..self.n_interior]
    }

    pub fn boundary(&self) -> &[Site] {
        &self.all[self.n_interior..]
    }

    /// `U` followed by `∂U`.
    pub fn closure(&self) -> &[Site] {
        &self.all
    }

    pub fn contains(&self, z: Site) -> bool {
        self.index.get(&z).is_some_and(|&i| i < self.n_interior)
    }

    /// Position of `z` in [`Domain::closure`].
    pub fn index_of(&self, z: Site) -> Option<usize> {
        self.index.get(&z).copied()
    }

    /// Closure index of the neighbour of interior site `i` in direction index `e`.
    #[inline]
    pub fn neighbor(&self, i: usize, e: usize) -> usize {
        self.neighbors[i][e]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_boundary() {
        let u = Domain::interval(1, 4).unwrap();
        assert_eq!(u.len(), 4);
        assert_eq!(u.boundary(), &[Site([0, 0, 0]), Site([5, 0, 0])]);
        assert!(u.contains(Site([2, 0, 0])));
        assert!(!u.contains(Site([5, 0, 0])));
    }

    #[test]
    fn box_boundary_excludes_corners() {
        let u = Domain::cube(2, 1).unwrap();
        assert_eq!(u.len(), 9);
        assert_eq!(u.boundary().len(), 12);
        for z in u.boundary() {
            assert!(!u.contains(*z));
        }
    }

    #[test]
    fn disconnected_sets_are_rejected() {
        let r = Domain::new(1, [Site([0, 0, 0]), Site([2, 0, 0])]);
        assert!(matches!(r, Err(Error::InvalidDomain(_))));
    }
}
