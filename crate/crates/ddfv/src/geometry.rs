//! Exact small-scale geometric primitives shared by the mesh builder:
//! points, circumcenters, simplex measures, diameters.
//!
//! All routines work on a uniform 3-component point type; planar meshes
//! simply keep `z = 0`, which lets every downstream consumer (operators,
//! quadrature, output) stay dimension-agnostic.

use std::ops::{Add, Mul, Neg, Sub};

/// A point or vector in 2 or 3 dimensions (`z = 0` for planar meshes).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point {
    pub const ZERO: Point = Point { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new2(x: f64, y: f64) -> Point {
        Point { x, y, z: 0.0 }
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Point {
        Point { x, y, z }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Point) -> Point {
        Point {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the same direction; `None` for (near-)zero input.
    pub fn unit(self) -> Option<Point> {
        let n = self.norm();
        if n == 0.0 {
            None
        } else {
            Some(self * (1.0 / n))
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn coord(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point { x: self.x + o.x, y: self.y + o.y, z: self.z + o.z }
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point { x: self.x - o.x, y: self.y - o.y, z: self.z - o.z }
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point { x: self.x * s, y: self.y * s, z: self.z * s }
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        self * -1.0
    }
}

pub fn midpoint(a: Point, b: Point) -> Point {
    (a + b) * 0.5
}

pub fn centroid(pts: &[Point]) -> Point {
    let mut c = Point::ZERO;
    for &p in pts {
        c = c + p;
    }
    c * (1.0 / pts.len() as f64)
}

/// Signed area of a planar triangle (positive when counterclockwise).
pub fn triangle_area_signed(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

/// Unsigned area of a triangle in 2 or 3 dimensions.
pub fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * (b - a).cross(c - a).norm()
}

/// Signed volume of a tetrahedron (positive for a right-handed vertex order).
pub fn tet_volume_signed(a: Point, b: Point, c: Point, d: Point) -> f64 {
    (b - a).cross(c - a).dot(d - a) / 6.0
}

/// Shoelace area of a simple planar polygon given in order.
pub fn polygon_area_signed(pts: &[Point]) -> f64 {
    let mut s = 0.0;
    for i in 0..pts.len() {
        let p = pts[i];
        let q = pts[(i + 1) % pts.len()];
        s += p.x * q.y - q.x * p.y;
    }
    0.5 * s
}

/// Circumcenter of a planar triangle: the unique point equidistant from the
/// three vertices. `None` when the vertices are (near-)collinear.
pub fn circumcenter_triangle_2d(a: Point, b: Point, c: Point) -> Option<Point> {
    // Solve 2 (b-a)·p = |b|^2-|a|^2 ; 2 (c-a)·p = |c|^2-|a|^2 relative to a.
    let ab = b - a;
    let ac = c - a;
    let det = ab.x * ac.y - ac.x * ab.y;
    let scale = ab.norm().max(ac.norm());
    if det.abs() <= 1e-14 * scale * scale {
        return None;
    }
    let rb = 0.5 * ab.dot(ab);
    let rc = 0.5 * ac.dot(ac);
    let px = (rb * ac.y - rc * ab.y) / det;
    let py = (ab.x * rc - ac.x * rb) / det;
    Some(Point::new2(a.x + px, a.y + py))
}

/// Circumcenter of a triangle embedded in 3-space (lies in the triangle's
/// plane, equidistant from the vertices).
pub fn circumcenter_triangle_3d(a: Point, b: Point, c: Point) -> Option<Point> {
    let ab = b - a;
    let ac = c - a;
    // Solve in the (ab, ac) basis: center = a + s ab + t ac with
    //   (s ab + t ac)·ab = |ab|^2/2,  (s ab + t ac)·ac = |ac|^2/2.
    let g11 = ab.dot(ab);
    let g12 = ab.dot(ac);
    let g22 = ac.dot(ac);
    let det = g11 * g22 - g12 * g12;
    if det.abs() <= 1e-28 * (g11 * g22).max(1e-300) || det <= 0.0 {
        return None;
    }
    let r1 = 0.5 * g11;
    let r2 = 0.5 * g22;
    let s = (r1 * g22 - r2 * g12) / det;
    let t = (g11 * r2 - g12 * r1) / det;
    Some(a + ab * s + ac * t)
}

/// Circumcenter of a tetrahedron: equidistant from the four vertices.
pub fn circumcenter_tet(a: Point, b: Point, c: Point, d: Point) -> Option<Point> {
    let ab = b - a;
    let ac = c - a;
    let ad = d - a;
    let det = ab.cross(ac).dot(ad);
    let scale = ab.norm().max(ac.norm()).max(ad.norm());
    if det.abs() <= 1e-14 * scale * scale * scale {
        return None;
    }
    let rb = 0.5 * ab.dot(ab);
    let rc = 0.5 * ac.dot(ac);
    let rd = 0.5 * ad.dot(ad);
    // Cramer on the 3x3 system with rows ab, ac, ad and right side (rb, rc, rd).
    let detm = |m0: Point, m1: Point, m2: Point| m0.dot(m1.cross(m2));
    let full = detm(ab, ac, ad);
    let sub = |k: usize| {
        let row = |v: Point, r: f64| match k {
            0 => Point::new3(r, v.y, v.z),
            1 => Point::new3(v.x, r, v.z),
            _ => Point::new3(v.x, v.y, r),
        };
        detm(row(ab, rb), row(ac, rc), row(ad, rd))
    };
    let p = Point::new3(sub(0) / full, sub(1) / full, sub(2) / full);
    Some(a + p)
}

/// Largest pairwise distance in a point set (the diameter of its hull).
pub fn diameter(pts: &[Point]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(pts[i].dist(pts[j]));
        }
    }
    d
}

/// Barycentric point-in-triangle test (closed triangle, planar).
pub fn point_in_triangle_2d(p: Point, a: Point, b: Point, c: Point, tol: f64) -> bool {
    let total = triangle_area_signed(a, b, c);
    let s0 = triangle_area_signed(p, b, c) / total;
    let s1 = triangle_area_signed(a, p, c) / total;
    let s2 = triangle_area_signed(a, b, p) / total;
    s0 >= -tol && s1 >= -tol && s2 >= -tol
}

/// Barycentric point-in-tetrahedron test (closed tet).
pub fn point_in_tet(p: Point, a: Point, b: Point, c: Point, d: Point, tol: f64) -> bool {
    let total = tet_volume_signed(a, b, c, d);
    let s0 = tet_volume_signed(p, b, c, d) / total;
    let s1 = tet_volume_signed(a, p, c, d) / total;
    let s2 = tet_volume_signed(a, b, p, d) / total;
    let s3 = tet_volume_signed(a, b, c, p) / total;
    s0 >= -tol && s1 >= -tol && s2 >= -tol && s3 >= -tol
}

/// Barycentric containment test for a triangle embedded in 3-space;
/// `p` is assumed to lie in (or near) the triangle's plane.
pub fn point_in_triangle_3d(p: Point, a: Point, b: Point, c: Point, tol: f64) -> bool {
    let n = (b - a).cross(c - a);
    let total = n.dot(n);
    let s0 = (b - p).cross(c - p).dot(n) / total;
    let s1 = (c - p).cross(a - p).dot(n) / total;
    let s2 = (a - p).cross(b - p).dot(n) / total;
    s0 >= -tol && s1 >= -tol && s2 >= -tol
}
