//! Analytic scalar fields on the plane: values, gradients and (optionally)
//! Hessians of the exact solutions and interpolands used in the studies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::Rect;
use crate::trigeo::Point;

pub type Hessian = [[f64; 2]; 2];

pub trait ScalarField: Sync {
    fn name(&self) -> &str;

    fn value(&self, p: Point) -> f64;

    fn gradient(&self, p: Point) -> [f64; 2];

    fn hessian(&self, _p: Point) -> Option<Hessian> {
        None
    }

    fn has_hessian(&self) -> bool {
        false
    }

    /// Rejects domains on which the field is not finite.
    fn check_domain(&self, _domain: &Rect) -> Result<()> {
        Ok(())
    }

    /// Closed-form graph area over `domain`, when one is known.
    fn graph_area(&self, _domain: &Rect) -> Option<f64> {
        None
    }
}

/// `c + gx*x + gy*y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub c: f64,
    pub gx: f64,
    pub gy: f64,
}

impl Affine {
    pub fn new(c: f64, gx: f64, gy: f64) -> Self {
        Self { c, gx, gy }
    }
}

impl ScalarField for Affine {
    fn name(&self) -> &str {
        "affine"
    }
    fn value(&self, p: Point) -> f64 {
        self.c + self.gx * p[0] + self.gy * p[1]
    }
    fn gradient(&self, _p: Point) -> [f64; 2] {
        [self.gx, self.gy]
    }
    fn hessian(&self, _p: Point) -> Option<Hessian> {
        Some([[0.0; 2]; 2])
    }
    fn has_hessian(&self) -> bool {
        true
    }
    fn graph_area(&self, d: &Rect) -> Option<f64> {
        Some(d.area() * (1.0 + self.gx * self.gx + self.gy * self.gy).sqrt())
    }
}

/// `(x^2 + y^2) / 2`, the constant-Hessian field used for the bound audit.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Paraboloid;

impl ScalarField for Paraboloid {
    fn name(&self) -> &str {
        "paraboloid"
    }
    fn value(&self, p: Point) -> f64 {
        0.5 * (p[0] * p[0] + p[1] * p[1])
    }
    fn gradient(&self, p: Point) -> [f64; 2] {
        p
    }
    fn hessian(&self, _p: Point) -> Option<Hessian> {
        Some([[1.0, 0.0], [0.0, 1.0]])
    }
    fn has_hessian(&self) -> bool {
        true
    }
}

/// `sqrt(a^2 - x^2)`: a piece of the cylinder of radius `a` with axis along y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub a: f64,
}

impl Cylinder {
    pub fn new(a: f64) -> Self {
        Self { a }
    }
}

impl ScalarField for Cylinder {
    fn name(&self) -> &str {
        "cylinder"
    }
    fn value(&self, p: Point) -> f64 {
        (self.a * self.a - p[0] * p[0]).sqrt()
    }
    fn gradient(&self, p: Point) -> [f64; 2] {
        [-p[0] / self.value(p), 0.0]
    }
    fn hessian(&self, p: Point) -> Option<Hessian> {
        let q = self.a * self.a - p[0] * p[0];
        Some([[-self.a * self.a / (q * q.sqrt()), 0.0], [0.0, 0.0]])
    }
    fn has_hessian(&self) -> bool {
        true
    }
    fn check_domain(&self, d: &Rect) -> Result<()> {
        if d.x0.abs().max(d.x1.abs()) >= self.a {
            return Err(Error::Domain(format!(
                "cylinder field with a = {} is singular on [{}, {}] x [{}, {}]",
                self.a, d.x0, d.x1, d.y0, d.y1
            )));
        }
        Ok(())
    }
    /// Integrand `a / sqrt(a^2 - x^2)`, antiderivative `a asin(x/a)`.
    fn graph_area(&self, d: &Rect) -> Option<f64> {
        if self.check_domain(d).is_err() {
            return None;
        }
        Some((d.y1 - d.y0) * self.a * ((d.x1 / self.a).asin() - (d.x0 / self.a).asin()))
    }
}

/// `a^2 / (a^2 - x^2)^(3/2)`, the source term whose Poisson solution with
/// matching Dirichlet data is [`Cylinder`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderSource {
    pub a: f64,
}

impl ScalarField for CylinderSource {
    fn name(&self) -> &str {
        "cylinder-source"
    }
    fn value(&self, p: Point) -> f64 {
        let q = self.a * self.a - p[0] * p[0];
        self.a * self.a / (q * q.sqrt())
    }
    fn gradient(&self, p: Point) -> [f64; 2] {
        let q = self.a * self.a - p[0] * p[0];
        [3.0 * self.a * self.a * p[0] / (q * q * q.sqrt()), 0.0]
    }
    fn check_domain(&self, d: &Rect) -> Result<()> {
        Cylinder::new(self.a).check_domain(d)
    }
}

/// Outcome of the finite-difference consistency check.
#[derive(Debug, Clone, Copy)]
pub struct ConsistencyReport {
    pub max_err_coarse: f64,
    pub max_err_fine: f64,
    /// log2 of the error ratio between the two step sizes; `None` when both
    /// errors are at rounding level (polynomial fields are differenced exactly).
    pub observed_order: Option<f64>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        match self.observed_order {
            Some(order) => order >= 1.8,
            None => true,
        }
    }
}

const FD_NOISE_FLOOR: f64 = 1e-9;

fn finish(coarse: f64, fine: f64) -> ConsistencyReport {
    let observed_order = if coarse < FD_NOISE_FLOOR && fine < FD_NOISE_FLOOR {
        None
    } else {
        Some((coarse / fine).log2())
    };
    ConsistencyReport {
        max_err_coarse: coarse,
        max_err_fine: fine,
        observed_order,
    }
}

fn sample_points(domain: &Rect, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| [rng.gen_range(domain.x0..domain.x1), rng.gen_range(domain.y0..domain.y1)])
        .collect()
}

/// Compares the gradient with central differences at `n` random points of
/// `domain`, at steps `step` and `step / 2`.
pub fn check_gradient(
    field: &dyn ScalarField,
    domain: &Rect,
    n: usize,
    step: f64,
    seed: u64,
) -> ConsistencyReport {
    let pts = sample_points(&domain.shrink(2.0 * step), n, seed);
    let err_at = |h: f64| {
        pts.iter()
            .map(|&p| {
                let g = field.gradient(p);
                let dx = (field.value([p[0] + h, p[1]]) - field.value([p[0] - h, p[1]])) / (2.0 * h);
                let dy = (field.value([p[0], p[1] + h]) - field.value([p[0], p[1] - h])) / (2.0 * h);
                (g[0] - dx).abs().max((g[1] - dy).abs())
            })
            .fold(0.0, f64::max)
    };
    finish(err_at(step), err_at(0.5 * step))
}

/// Same test for the Hessian against differenced gradients.
pub fn check_hessian(
    field: &dyn ScalarField,
    domain: &Rect,
    n: usize,
    step: f64,
    seed: u64,
) -> Result<ConsistencyReport> {
    if !field.has_hessian() {
        return Err(Error::MissingHessian);
    }
    let pts = sample_points(&domain.shrink(2.0 * step), n, seed);
    let err_at = |h: f64| {
        pts.iter()
            .map(|&p| {
                let hs = field.hessian(p).expect("has_hessian");
                let gxp = field.gradient([p[0] + h, p[1]]);
                let gxm = field.gradient([p[0] - h, p[1]]);
                let gyp = field.gradient([p[0], p[1] + h]);
                let gym = field.gradient([p[0], p[1] - h]);
                let fd = [
                    [(gxp[0] - gxm[0]) / (2.0 * h), (gyp[0] - gym[0]) / (2.0 * h)],
                    [(gxp[1] - gxm[1]) / (2.0 * h), (gyp[1] - gym[1]) / (2.0 * h)],
                ];
                let mut e: f64 = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        e = e.max((hs[i][j] - fd[i][j]).abs());
                    }
                }
                e
            })
            .fold(0.0, f64::max)
    };
    Ok(finish(err_at(step), err_at(0.5 * step)))
}
