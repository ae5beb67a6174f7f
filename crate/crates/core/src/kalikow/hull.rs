//! Convex hulls of drift vectors in `d = 1` and `d = 2`.

/// Convex hull of a point set, as an interval (`d = 1`) or a counter-clockwise polygon (`d = 2`).
#[derive(Clone, Debug, PartialEq)]
pub enum Hull {
    Interval {
        lo: f64,
        hi: f64,
    },
    /// Vertices without repeated or collinear points; may have one or two entries.
    Polygon(Vec<[f64; 2]>),
}

impl Hull {
    /// Hull of `points`, each of length `d`; `None` for `d > 2` or no points.
    pub fn of(points: &[Vec<f64>]) -> Option<Hull> {
        let d = points.first()?.len();
        match d {
            1 => {
                let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
                let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
                Some(Hull::Interval { lo, hi })
            }
            2 => Some(Hull::Polygon(convex_hull(&points.iter().map(|p| [p[0], p[1]]).collect::<Vec<_>>()))),
            _ => None,
        }
    }

    /// Euclidean distance from `v` to the hull; zero inside.
    pub fn distance(&self, v: &[f64]) -> f64 {
        match self {
            Hull::Interval { lo, hi } => (lo - v[0]).max(v[0] - hi).max(0.0),
            Hull::Polygon(poly) => distance_to_polygon(poly, [v[0], v[1]]),
        }
    }

    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match self {
            Hull::Interval { lo, hi } => vec![vec![*lo], vec![*hi]],
            Hull::Polygon(poly) => poly.iter().map(|p| p.to_vec()).collect(),
        }
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; returns the hull counter-clockwise.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn segment_distance(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 { ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let q = [a[0] + t * ab[0] - p[0], a[1] + t * ab[1] - p[1]];
    q[0].hypot(q[1])
}

fn distance_to_polygon(poly: &[[f64; 2]], p: [f64; 2]) -> f64 {
    match poly.len() {
        0 => f64::INFINITY,
        1 => segment_distance(poly[0], poly[0], p),
        2 => segment_distance(poly[0], poly[1], p),
        n => {
            let inside = (0..n).all(|i| cross(poly[i], poly[(i + 1) % n], p) >= 0.0);
            if inside {
                0.0
            } else {
                (0..n).map(|i| segment_distance(poly[i], poly[(i + 1) % n], p)).fold(f64::INFINITY, f64::min)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_with_interior_point() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5], [0.5, 0.0]];
        let h = convex_hull(&pts);
        assert_eq!(h, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let hull = Hull::Polygon(h);
        assert_eq!(hull.distance(&[0.3, 0.7]), 0.0);
        assert!((hull.distance(&[2.0, 0.5]) - 1.0).abs() < 1e-15);
        assert!((hull.distance(&[2.0, 2.0]) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_hulls() {
        let point = Hull::of(&[vec![0.2, 0.1], vec![0.2, 0.1]]).unwrap();
        assert_eq!(point, Hull::Polygon(vec![[0.2, 0.1]]));
        assert!((point.distance(&[0.2, 0.4]) - 0.3).abs() < 1e-15);
        let line = Hull::of(&[vec![0.1], vec![0.3], vec![0.2]]).unwrap();
        assert_eq!(line.distance(&[0.25]), 0.0);
        assert!((line.distance(&[0.0]) - 0.1).abs() < 1e-15);
        assert!(Hull::of(&[vec![0.0; 3]]).is_none());
    }
}
