//! Quadrature on triangles (barycentric, weights normalised to sum 1) and
//! Gauss-Legendre rules on intervals.

use crate::error::{Error, Result};
use crate::trigeo::Point;

#[derive(Debug, Clone)]
pub struct TriangleRule {
    degree: usize,
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

fn orbit3(a: f64) -> [[f64; 3]; 3] {
    let b = 1.0 - 2.0 * a;
    [[a, a, b], [a, b, a], [b, a, a]]
}

impl TriangleRule {
    /// Symmetric rule exact for polynomials of total degree `degree`.
    /// Supported: 1 (centroid), 2 (3 points), 4 (6 points), 5 (7 points).
    pub fn with_degree(degree: usize) -> Result<Self> {
        // (a, weight) orbits of (a, a, 1 - 2a), plus an optional centroid weight.
        let (orbits, centroid): (Vec<(f64, f64)>, Option<f64>) = match degree {
            1 => (vec![], Some(1.0)),
            2 => (vec![(1.0 / 6.0, 1.0 / 3.0)], None),
            4 => (
                vec![
                    (0.445_948_490_915_964_9, 0.223_381_589_678_011_47),
                    (0.091_576_213_509_770_74, 0.109_951_743_655_321_87),
                ],
                None,
            ),
            5 => {
                let s15 = 15f64.sqrt();
                (
                    vec![
                        ((6.0 - s15) / 21.0, (155.0 - s15) / 1200.0),
                        ((6.0 + s15) / 21.0, (155.0 + s15) / 1200.0),
                    ],
                    Some(9.0 / 40.0),
                )
            }
            _ => return Err(Error::QuadratureDegree(degree)),
        };
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (a, w) in orbits {
            for p in orbit3(a) {
                points.push(p);
                weights.push(w);
            }
        }
        if let Some(w) = centroid {
            points.push([1.0 / 3.0; 3]);
            weights.push(w);
        }
        Ok(Self {
            degree,
            points,
            weights,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Barycentric points and weights (weights sum to one).
    pub fn iter(&self) -> impl Iterator<Item = ([f64; 3], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    /// Integral of `f` over the triangle with the given vertices.
    pub fn integrate(&self, vertices: &[Point; 3], f: impl Fn(Point, [f64; 3]) -> f64) -> f64 {
        let area = 0.5
            * ((vertices[1][0] - vertices[0][0]) * (vertices[2][1] - vertices[0][1])
                - (vertices[2][0] - vertices[0][0]) * (vertices[1][1] - vertices[0][1]))
                .abs();
        let mut acc = 0.0;
        for (bary, w) in self.iter() {
            acc += w * f(from_barycentric(vertices, bary), bary);
        }
        area * acc
    }
}

impl Default for TriangleRule {
    fn default() -> Self {
        Self::with_degree(4).expect("degree 4 rule")
    }
}

#[inline]
pub fn from_barycentric(v: &[Point; 3], l: [f64; 3]) -> Point {
    [
        l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
        l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
    ]
}

/// Gauss-Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integral of `f` over [a, b].
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Exact integral of x^i y^j over the reference triangle (0,0),(1,0),(0,1).
    fn monomial_exact(i: u32, j: u32) -> f64 {
        factorial(i) * factorial(j) / factorial(i + j + 2)
    }

    const REF: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn triangle_rules_are_exact_to_their_degree() {
        for degree in [1, 2, 4, 5] {
            let rule = TriangleRule::with_degree(degree).unwrap();
            assert!((rule.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs() < 1e-15);
            for i in 0..=degree as u32 {
                for j in 0..=(degree as u32 - i) {
                    let q = rule.integrate(&REF, |p, _| p[0].powi(i as i32) * p[1].powi(j as i32));
                    let exact = monomial_exact(i, j);
                    assert!(
                        (q - exact).abs() < 1e-15,
                        "degree {degree} rule fails on x^{i} y^{j}: {q} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn degree_four_is_not_degree_five() {
        let rule = TriangleRule::with_degree(4).unwrap();
        let q = rule.integrate(&REF, |p, _| p[0].powi(5));
        assert!((q - monomial_exact(5, 0)).abs() > 1e-8);
    }

    #[test]
    fn unsupported_degree() {
        assert!(matches!(TriangleRule::with_degree(3), Err(Error::QuadratureDegree(3))));
    }

    #[test]
    fn gauss_legendre_polynomials() {
        let gl = GaussLegendre::new(64);
        assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        for k in 0..128 {
            let q = gl.integrate(-1.0, 1.0, |x| x.powi(k));
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-13, "x^{k}: {q} vs {exact}");
        }
        let small = GaussLegendre::new(3);
        assert!((small.integrate(0.0, 2.0, |x| x.powi(5)) - 64.0 / 6.0).abs() < 1e-12);
    }
}
