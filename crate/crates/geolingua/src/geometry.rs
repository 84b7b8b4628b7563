//! 2D geometric primitives shared by the scene resolvers and the constraint
//! evaluator.
//!
//! Operations that can degenerate (parallel intersections, zero-length
//! hosts) return `Option` so callers can flag the configuration instead of
//! aborting.

use std::ops::{Add, Mul, Sub};

/// Threshold below which a direction or denominator counts as degenerate.
pub const DEGENERACY_EPS: f64 = 1e-9;

/// Threshold below which a measured length counts as zero when scoring.
pub const LENGTH_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Counterclockwise quarter turn.
    pub fn rot90(self) -> Point {
        Point::new(-self.y, self.x)
    }

    /// Counterclockwise rotation by `deg` degrees.
    pub fn rotate_deg(self, deg: f64) -> Point {
        let (s, c) = deg.to_radians().sin_cos();
        Point::new(self.x * c - self.y * s, self.x * s + self.y * c)
    }

    pub fn normalized(self) -> Option<Point> {
        let n = self.norm();
        if n < DEGENERACY_EPS {
            None
        } else {
            Some(Point::new(self.x / n, self.y / n))
        }
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Unit direction vector for an angle in degrees.
pub fn dir_deg(deg: f64) -> Point {
    let (s, c) = deg.to_radians().sin_cos();
    Point::new(c, s)
}

/// Angle of a vector in degrees, in [0, 360).
pub fn angle_of(v: Point) -> f64 {
    let a = v.y.atan2(v.x).to_degrees();
    if a < 0.0 {
        a + 360.0
    } else {
        a
    }
}

/// Euclidean distance between two points.
pub fn segment_length(a: Point, b: Point) -> f64 {
    a.dist(b)
}

/// Interior angle at `vertex` between rays to `a` and `c`, in degrees in
/// [0, 180]. Returns 0 when either ray is shorter than [`LENGTH_EPS`].
pub fn angle_at(a: Point, vertex: Point, c: Point) -> f64 {
    let u = a - vertex;
    let v = c - vertex;
    let nu = u.norm();
    let nv = v.norm();
    if nu <= LENGTH_EPS || nv <= LENGTH_EPS {
        return 0.0;
    }
    let cos = (u.dot(v) / (nu * nv)).clamp(-1.0, 1.0);
    cos.acos().to_degrees()
}

/// Intersection of the infinite lines through `a`..`b` and `c`..`d`.
/// `None` when the directions are parallel (normalized cross product below
/// [`DEGENERACY_EPS`]) or either host segment has (near-)zero length.
pub fn line_intersection(a: Point, b: Point, c: Point, d: Point) -> Option<Point> {
    let r = (b - a).normalized()?;
    let s = (d - c).normalized()?;
    let denom = r.cross(s);
    if denom.abs() < DEGENERACY_EPS {
        return None;
    }
    let t = (c - a).cross(s) / denom;
    Some(a + r * t)
}

/// Foot of the perpendicular from `p` onto the infinite line through
/// `a`..`b`. `None` when the host segment has (near-)zero length.
pub fn perpendicular_foot(p: Point, a: Point, b: Point) -> Option<Point> {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 < DEGENERACY_EPS * DEGENERACY_EPS {
        return None;
    }
    let t = (p - a).dot(ab) / len2;
    Some(a + ab * t)
}

/// Distance from `p` to the infinite line through `a`..`b`.
pub fn point_line_distance(p: Point, a: Point, b: Point) -> Option<f64> {
    let dir = (b - a).normalized()?;
    Some((p - a).cross(dir).abs())
}

/// Boundary-inclusive point-in-polygon test (even-odd rule, with an
/// epsilon band around edges so boundary points count as inside).
pub fn point_in_polygon(p: Point, polygon: &[Point]) -> bool {
    if polygon.len() < 3 {
        return false;
    }
    // On-edge check first.
    for i in 0..polygon.len() {
        let a = polygon[i];
        let b = polygon[(i + 1) % polygon.len()];
        let ab = b - a;
        let len = ab.norm();
        if len < DEGENERACY_EPS {
            if p.dist(a) < DEGENERACY_EPS {
                return true;
            }
            continue;
        }
        let t = ((p - a).dot(ab) / (len * len)).clamp(0.0, 1.0);
        if p.dist(a + ab * t) < DEGENERACY_EPS {
            return true;
        }
    }
    let mut inside = false;
    let mut j = polygon.len() - 1;
    for i in 0..polygon.len() {
        let pi = polygon[i];
        let pj = polygon[j];
        if (pi.y > p.y) != (pj.y > p.y) {
            let x_cross = pj.x + (p.y - pj.y) / (pi.y - pj.y) * (pi.x - pj.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_lengths() {
        assert_eq!(segment_length(Point::new(0.0, 0.0), Point::new(3.0, 4.0)), 5.0);
        assert_eq!(segment_length(Point::new(1.0, 1.0), Point::new(1.0, 1.0)), 0.0);
        assert_eq!(segment_length(Point::new(0.0, 0.0), Point::new(1.0, 0.0)), 1.0);
    }

    #[test]
    fn angles() {
        let o = Point::new(0.0, 0.0);
        assert!((angle_at(Point::new(1.0, 0.0), o, Point::new(0.0, 1.0)) - 90.0).abs() < 1e-12);
        assert!((angle_at(Point::new(1.0, 0.0), o, Point::new(1.0, 0.0))).abs() < 1e-12);
        assert!((angle_at(Point::new(1.0, 0.0), o, Point::new(-1.0, 0.0)) - 180.0).abs() < 1e-12);
        // Degenerate ray.
        assert_eq!(angle_at(o, o, Point::new(1.0, 0.0)), 0.0);
    }

    #[test]
    fn intersections() {
        let p = line_intersection(
            Point::new(0.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(0.0, 2.0),
            Point::new(2.0, 0.0),
        )
        .unwrap();
        assert!((p.x - 1.0).abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12);
        assert!(line_intersection(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
        )
        .is_none());
    }

    #[test]
    fn feet_and_distances() {
        let f = perpendicular_foot(Point::new(3.0, 4.0), Point::new(0.0, 0.0), Point::new(10.0, 0.0))
            .unwrap();
        assert!((f.x - 3.0).abs() < 1e-12 && f.y.abs() < 1e-12);
        let d = point_line_distance(Point::new(3.0, 4.0), Point::new(0.0, 0.0), Point::new(10.0, 0.0))
            .unwrap();
        assert!((d - 4.0).abs() < 1e-12);
        assert!(perpendicular_foot(Point::new(1.0, 1.0), Point::new(2.0, 2.0), Point::new(2.0, 2.0))
            .is_none());
    }

    #[test]
    fn polygon_containment() {
        let square = [
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.0),
            Point::new(4.0, 4.0),
            Point::new(0.0, 4.0),
        ];
        assert!(point_in_polygon(Point::new(2.0, 2.0), &square));
        assert!(point_in_polygon(Point::new(0.0, 2.0), &square)); // boundary
        assert!(point_in_polygon(Point::new(4.0, 4.0), &square)); // corner
        assert!(!point_in_polygon(Point::new(5.0, 2.0), &square));
        assert!(!point_in_polygon(Point::new(-0.1, 2.0), &square));
    }
}
