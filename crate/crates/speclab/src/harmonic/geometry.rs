//! Planar geometry helpers for convex polygonal domains, with points as
//! complex numbers (poles are spectral parameters).

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Complex64,
    pub b: Complex64,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    /// Point at parameter `t ∈ [0, 1]`.
    pub fn point_at(&self, t: f64) -> Complex64 {
        self.a + (self.b - self.a) * Complex64::from(t)
    }

    /// Closest point to `p`: returns (distance, point, parameter).
    pub fn closest_point(&self, p: Complex64) -> (f64, Complex64, f64) {
        let d = self.b - self.a;
        let len_sq = d.norm_sqr();
        let t = if len_sq == 0.0 {
            0.0
        } else {
            (((p - self.a).re * d.re + (p - self.a).im * d.im) / len_sq).clamp(0.0, 1.0)
        };
        let q = self.point_at(t);
        ((p - q).norm(), q, t)
    }

    /// Unit inward normal for a CCW-oriented boundary edge (interior on the
    /// left of `a → b`).
    pub fn inward_normal(&self) -> Complex64 {
        let d = self.b - self.a;
        Complex64::i() * d / Complex64::from(d.norm())
    }

    /// Intersection with the segment `p → p + step·dir` (axis direction):
    /// returns `(s, point)` with `s ∈ (0, 1]` scaled so `s = 1` means the
    /// full step.
    pub fn intersect_ray_step(&self, p: Complex64, dir: Complex64, step: f64) -> Option<(f64, Complex64)> {
        // solve p + s·step·dir = a + t·(b-a), s ∈ (0,1], t ∈ [0,1]
        let e = self.b - self.a;
        let r = dir * Complex64::from(step);
        let denom = r.re * (-e.im) + r.im * e.re; // cross(r, -e) style 2x2 det
        if denom.abs() < 1e-300 {
            return None;
        }
        let rhs = self.a - p;
        // [ r.re  -e.re ] [s]   [rhs.re]
        // [ r.im  -e.im ] [t] = [rhs.im]
        let s = (rhs.re * (-e.im) - (-e.re) * rhs.im) / denom;
        let t = (r.re * rhs.im - r.im * rhs.re) / denom;
        if s > 1e-12 && s <= 1.0 + 1e-12 && (-1e-12..=1.0 + 1e-12).contains(&t) {
            Some((s.min(1.0), self.point_at(t.clamp(0.0, 1.0))))
        } else {
            None
        }
    }
}

/// Strict interior test for a convex CCW polygon.
pub fn inside_convex(vertices: &[Complex64], p: Complex64, tol: f64) -> bool {
    let n = vertices.len();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let e = b - a;
        let w = p - a;
        let cross = e.re * w.im - e.im * w.re;
        if cross <= tol {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn closest_point_on_segment() {
        let s = Segment { a: c(0.0, 0.0), b: c(2.0, 0.0) };
        let (d, q, t) = s.closest_point(c(1.0, 1.0));
        assert!((d - 1.0).abs() < 1e-14);
        assert!((q - c(1.0, 0.0)).norm() < 1e-14);
        assert!((t - 0.5).abs() < 1e-14);
        let (d2, q2, _) = s.closest_point(c(-1.0, 1.0));
        assert!((q2 - c(0.0, 0.0)).norm() < 1e-14);
        assert!((d2 - 2.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn inward_normal_of_ccw_bottom_edge_points_up() {
        let s = Segment { a: c(0.0, 0.0), b: c(1.0, 0.0) };
        let n = s.inward_normal();
        assert!((n - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn ray_step_intersection() {
        let s = Segment { a: c(1.0, -1.0), b: c(1.0, 1.0) };
        let hit = s.intersect_ray_step(c(0.4, 0.0), c(1.0, 0.0), 1.0).unwrap();
        assert!((hit.0 - 0.6).abs() < 1e-12);
        assert!((hit.1 - c(1.0, 0.0)).norm() < 1e-12);
        assert!(s.intersect_ray_step(c(0.4, 0.0), c(1.0, 0.0), 0.5).is_none());
    }

    #[test]
    fn convex_interior_test() {
        let square = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)];
        assert!(inside_convex(&square, c(0.5, 0.5), 1e-12));
        assert!(!inside_convex(&square, c(0.5, 0.0), 1e-12)); // on the edge
        assert!(!inside_convex(&square, c(1.5, 0.5), 1e-12));
    }
}
