//! Lattice points and unit steps of `Z^d`.
//!
//! Dimensions up to [`MAX_DIM`] are supported. Sites are stored as fixed-size
//! arrays so they are `Copy` and hash cheaply; coordinates beyond `d` stay zero.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 3;

/// Coordinates must satisfy `|z_i| < COORD_LIMIT` to be packed into a `u64`.
pub const COORD_LIMIT: i64 = 1 << 20;

const COORD_BITS: u32 = 21;

/// A unit step `±e_axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction {
    axis: usize,
    negative: bool,
}

impl Direction {
    /// `axis` is 1-based, as in `e_1, ..., e_d`.
    pub fn new(axis: usize, sign: i32) -> Result<Self> {
        if axis == 0 || axis > MAX_DIM {
            return Err(Error::InvalidDirection(format!("axis {axis} not in 1..={MAX_DIM}")));
        }
        match sign {
            1 => Ok(Direction { axis: axis - 1, negative: false }),
            -1 => Ok(Direction { axis: axis - 1, negative: true }),
            _ => Err(Error::InvalidDirection(format!("sign {sign} is not +1 or -1"))),
        }
    }

    /// Inverse of [`Direction::index`].
    pub fn from_index(index: usize) -> Self {
        Direction { axis: index / 2, negative: index % 2 == 1 }
    }

    /// Position in the canonical order `+e1, -e1, +e2, -e2, ...`.
    #[inline]
    pub fn index(self) -> usize {
        2 * self.axis + self.negative as usize
    }

    /// 1-based axis.
    pub fn axis(self) -> usize {
        self.axis + 1
    }

    /// 0-based axis, for indexing coordinate arrays.
    #[inline]
    pub fn axis0(self) -> usize {
        self.axis
    }

    pub fn sign(self) -> i32 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn is_positive(self) -> bool {
        !self.negative
    }

    #[inline]
    pub fn negate(self) -> Self {
        Direction { axis: self.axis, negative: !self.negative }
    }

    /// The step as a site.
    pub fn unit(self) -> Site {
        let mut c = [0; MAX_DIM];
        c[self.axis] = self.sign();
        Site(c)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.negative { '-' } else { '+' }, self.axis + 1)
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDirection(format!("cannot parse {s:?}; expected e.g. \"+1\" or \"-2\""));
        let (sign, rest) = match s.as_bytes().first() {
            Some(b'+') => (1, &s[1..]),
            Some(b'-') => (-1, &s[1..]),
            _ => return Err(bad()),
        };
        let axis: usize = rest.parse().map_err(|_| bad())?;
        Direction::new(axis, sign)
    }
}

/// All `2d` directions in canonical order.
pub fn directions(d: usize) -> impl Iterator<Item = Direction> + Clone {
    (0..2 * d).map(Direction::from_index)
}

/// A point of `Z^d`, `d <= MAX_DIM`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site(pub [i32; MAX_DIM]);

impl Site {
    pub const ORIGIN: Site = Site([0; MAX_DIM]);

    /// Builds a site from up to `MAX_DIM` coordinates.
    pub fn from_coords(coords: &[i32]) -> Result<Self> {
        if coords.len() > MAX_DIM {
            return Err(Error::InvalidDomain(format!(
                "site has {} coordinates, at most {MAX_DIM} supported",
                coords.len()
            )));
        }
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Site(c))
    }

    #[inline]
    pub fn step(self, e: Direction) -> Site {
        let mut c = self.0;
        c[e.axis0()] += e.sign();
        Site(c)
    }

    pub fn sub(self, other: Site) -> Site {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(other.0) {
            *a -= b;
        }
        Site(c)
    }

    pub fn add(self, other: Site) -> Site {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(other.0) {
            *a += b;
        }
        Site(c)
    }

    pub fn neg(self) -> Site {
        Site(self.0.map(|x| -x))
    }

    pub fn l1(self) -> i64 {
        self.0.iter().map(|&x| (x as i64).abs()).sum()
    }

    pub fn coords(&self, d: usize) -> &[i32] {
        &self.0[..d]
    }

    /// Packs the coordinates into 64 bits, 21 bits per axis.
    pub fn pack(self) -> Result<u64> {
        let mut packed = 0u64;
        for (i, &x) in self.0.iter().enumerate() {
            let x = x as i64;
            if x.abs() >= COORD_LIMIT {
                return Err(Error::CoordinateOutOfRange(x));
            }
            packed |= ((x + COORD_LIMIT) as u64) << (COORD_BITS * i as u32);
        }
        Ok(packed)
    }

    /// Formats the first `d` coordinates as `(x,y)`.
    pub fn display(&self, d: usize) -> String {
        let parts: Vec<String> = self.0[..d].iter().map(|x| x.to_string()).collect();
        format!("({})", parts.join(","))
    }
}
