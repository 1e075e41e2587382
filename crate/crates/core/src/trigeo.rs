//! Exact per-triangle geometry: edge lengths, area, diameter, inradius,
//! circumradius, extreme angles and Kobayashi's interpolation constant.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Relative collinearity threshold: a triangle is rejected when
/// `|2 * area| <= DEGENERACY_TOL * h_K^2`.
pub const DEGENERACY_TOL: f64 = 1e-14;

/// Negative radicands of magnitude below this (relative to `R_K^2`) are
/// rounding noise and get clamped to zero.
pub const RADICAND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub p1: Point,
    pub p2: Point,
    pub p3: Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleMetrics {
    /// |p2 - p3|, opposite p1.
    pub edge_a: f64,
    /// |p3 - p1|, opposite p2.
    pub edge_b: f64,
    /// |p1 - p2|, opposite p3.
    pub edge_c: f64,
    pub area_s: f64,
    pub h_diam: f64,
    pub rho_in: f64,
    pub r_circ: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub c_kobayashi: f64,
}

impl TriangleMetrics {
    /// Diameter over inradius, the regularity ratio.
    pub fn aspect(&self) -> f64 {
        self.h_diam / self.rho_in
    }
}

#[inline]
pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// `atan2(|u x v|, u . v)`; unlike `acos` of the normalised dot product it
/// keeps full relative accuracy for angles near 0 and π.
fn angle_between(u: Point, v: Point) -> f64 {
    cross(u, v).abs().atan2(u[0] * v[0] + u[1] * v[1])
}

impl Triangle {
    pub fn new(p1: Point, p2: Point, p3: Point) -> Self {
        Self { p1, p2, p3 }
    }

    pub fn vertices(&self) -> [Point; 3] {
        [self.p1, self.p2, self.p3]
    }

    /// Shoelace area, positive for counterclockwise vertex order.
    pub fn signed_area(&self) -> f64 {
        0.5 * cross(sub(self.p2, self.p1), sub(self.p3, self.p1))
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Self {
        Self::new(f(self.p1), f(self.p2), f(self.p3))
    }

    /// Isosceles triangle with horizontal base of length `base` centred at the
    /// origin and apex at height `height`.
    pub fn isosceles(base: f64, height: f64) -> Self {
        Self::new([-0.5 * base, 0.0], [0.5 * base, 0.0], [0.0, height])
    }

    pub fn metrics(&self) -> Result<TriangleMetrics> {
        metrics(self)
    }
}

pub fn metrics(t: &Triangle) -> Result<TriangleMetrics> {
    let ea = sub(t.p3, t.p2);
    let eb = sub(t.p1, t.p3);
    let ec = sub(t.p2, t.p1);
    let a = norm(ea);
    let b = norm(eb);
    let c = norm(ec);
    let h = a.max(b).max(c);

    let twice_area = cross(ec, sub(t.p3, t.p1)).abs();
    if !(twice_area > DEGENERACY_TOL * h * h) {
        return Err(Error::DegenerateTriangle {
            twice_area,
            h_squared: h * h,
            tol: DEGENERACY_TOL,
        });
    }
    let s = 0.5 * twice_area;

    let r_circ = a * b * c / (4.0 * s);
    let rho_in = 2.0 * s / (a + b + c);

    let angles = [
        angle_between(ec, sub(t.p3, t.p1)),
        angle_between(sub(t.p1, t.p2), ea),
        angle_between(eb, sub(t.p2, t.p3)),
    ];
    let theta_min = angles.iter().copied().fold(f64::INFINITY, f64::min);
    let theta_max = angles.iter().copied().fold(0.0, f64::max);

    let c_kobayashi = kobayashi_constant(a, b, c, s, r_circ)?;

    Ok(TriangleMetrics {
        edge_a: a,
        edge_b: b,
        edge_c: c,
        area_s: s,
        h_diam: h,
        rho_in,
        r_circ,
        theta_min,
        theta_max,
        c_kobayashi,
    })
}

/// C(K)^2 = A^2B^2C^2/(16S^2) - (A^2+B^2+C^2)/30 - S^2/5 (1/A^2 + 1/B^2 + 1/C^2),
/// with the first term written as R_K^2.
fn kobayashi_constant(a: f64, b: f64, c: f64, s: f64, r_circ: f64) -> Result<f64> {
    let (a2, b2, c2) = (a * a, b * b, c * c);
    let radicand =
        r_circ * r_circ - (a2 + b2 + c2) / 30.0 - s * s / 5.0 * (1.0 / a2 + 1.0 / b2 + 1.0 / c2);
    if radicand >= 0.0 {
        Ok(radicand.sqrt())
    } else if radicand >= -RADICAND_TOL * (r_circ * r_circ).max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand(radicand))
    }
}

/// Circumradius of an isosceles triangle with the given base and height.
pub fn isosceles_circumradius(base: f64, height: f64) -> f64 {
    0.5 * height + base * base / (8.0 * height)
}

/// Circumradius `h^alpha/2 + h^(2-alpha)/8` of the isosceles triangle with
/// base `h` and height `h^alpha`.
pub fn aniso_circumradius(h: f64, alpha: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!("base length h = {h} must lie in (0, 1)")));
    }
    if !(alpha >= 1.0) {
        return Err(Error::Domain(format!("exponent alpha = {alpha} must be >= 1")));
    }
    Ok(h.powf(alpha) / 2.0 + h.powf(2.0 - alpha) / 8.0)
}

/// Lower bound on the minimum angle implied by `h/rho <= sigma`.
///
/// Every angle satisfies `sin(theta/2) >= rho/h` (the incircle touches both
/// sides of the angle within distance h of the vertex), so
/// `theta_min >= 2 asin(1/sigma)`.
pub fn min_angle_from_regularity(sigma: f64) -> f64 {
    if sigma <= 1.0 {
        return PI / 3.0;
    }
    2.0 * (1.0 / sigma).min(1.0).asin()
}

/// Smallest area accepted by [`random_triangles`].
pub const RANDOM_MIN_AREA: f64 = 1e-6;

/// `count` triangles with vertices uniform in the unit square, reoriented
/// counterclockwise; draws with area below [`RANDOM_MIN_AREA`] are rejected.
pub fn random_triangles(count: usize, seed: u64) -> Vec<Triangle> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut p = || [rng.gen::<f64>(), rng.gen::<f64>()];
        let (a, b, c) = (p(), p(), p());
        let t = Triangle::new(a, b, c);
        let s = t.signed_area();
        if s.abs() < RANDOM_MIN_AREA {
            continue;
        }
        out.push(if s > 0.0 { t } else { Triangle::new(a, c, b) });
    }
    out
}
