//! Graph areas: the elementary area of a piecewise linear interpolant and the
//! exact area `∫ sqrt(1 + |∇f|^2)` it should approach on refinement.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::interp::{interp_error, interpolate, InterpOptions, NormExponent, PiecewiseLinearField};
use crate::mesh::{gen_aniso_capped, Mesh, Rect, DEFAULT_TRIANGLE_CAP};
use crate::quadrature::GaussLegendre;
use crate::rate::{fit_finest_half, RateFit};

/// Gauss-Legendre points per direction for the tensor reference area.
pub const AREA_GL_POINTS: usize = 64;

/// `Σ_K |K| sqrt(1 + |∇f_h|_K|^2)`, exact for piecewise affine `f_h`.
pub fn elementary_area(f_h: &PiecewiseLinearField, mesh: &Mesh) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..mesh.num_triangles() {
        let g = f_h.element_gradient(mesh, k)?;
        total += mesh.triangle(k).signed_area().abs() * (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt();
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AreaProvenance {
    ClosedForm,
    GaussLegendre { points: usize },
}

impl fmt::Display for AreaProvenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AreaProvenance::ClosedForm => write!(f, "closed-form"),
            AreaProvenance::GaussLegendre { points } => write!(f, "gauss-legendre-{points}x{points}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactArea {
    pub value: f64,
    pub provenance: AreaProvenance,
}

/// Tensor Gauss-Legendre quadrature of `sqrt(1 + |∇f|^2)` over `domain`.
pub fn graph_area_quadrature(f: &dyn ScalarField, domain: &Rect, points: usize) -> Result<f64> {
    f.check_domain(domain)?;
    let gl = GaussLegendre::new(points);
    let bad = std::cell::Cell::new(None);
    let total = gl.integrate(domain.y0, domain.y1, |y| {
        gl.integrate(domain.x0, domain.x1, |x| {
            let g = f.gradient([x, y]);
            let v = (1.0 + g[0] * g[0] + g[1] * g[1]).sqrt();
            if !v.is_finite() && bad.get().is_none() {
                bad.set(Some((x, y, v)));
            }
            v
        })
    });
    match bad.get() {
        Some((x, y, value)) => Err(Error::NonFinite { x, y, value }),
        None => Ok(total),
    }
}

/// Closed form when the field provides one, otherwise 64x64 Gauss-Legendre.
pub fn exact_graph_area(f: &dyn ScalarField, domain: &Rect) -> Result<ExactArea> {
    f.check_domain(domain)?;
    if let Some(value) = f.graph_area(domain) {
        return Ok(ExactArea {
            value,
            provenance: AreaProvenance::ClosedForm,
        });
    }
    Ok(ExactArea {
        value: graph_area_quadrature(f, domain, AREA_GL_POINTS)?,
        provenance: AreaProvenance::GaussLegendre { points: AREA_GL_POINTS },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaRecord {
    pub field: String,
    pub alpha: f64,
    pub n: usize,
    pub r_max: f64,
    pub a_e: f64,
    pub exact: f64,
    /// `|A_E - exact|`.
    pub gap: f64,
    /// `|f - I_tau f|_{1,1,Omega}`, the bound on `gap`.
    pub w11_error: f64,
}

impl AreaRecord {
    /// `gap <= |f - I f|_{1,1} (1 + 1e-9)`, plus summation roundoff of
    /// `GAP_FLOOR * exact` so that exactly reproduced fields pass.
    pub fn within_bound(&self) -> bool {
        self.gap <= self.w11_error * (1.0 + 1e-9) + GAP_FLOOR * self.exact
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AreaVerdict {
    /// Gap decreasing on the finest half of the schedule.
    Converges,
    NoConvergence,
    /// Affine field: the interpolant reproduces the graph.
    Exact,
    Inconclusive,
}

impl fmt::Display for AreaVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AreaVerdict::Converges => "converges",
            AreaVerdict::NoConvergence => "no-convergence",
            AreaVerdict::Exact => "exact",
            AreaVerdict::Inconclusive => "inconclusive",
        })
    }
}

/// A field and an `(alpha, N)` schedule of [`gen_aniso`](crate::mesh::gen_aniso) meshes.
pub struct AreaStudy<'a> {
    pub field: &'a dyn ScalarField,
    pub alpha: f64,
    pub ns: Vec<usize>,
    pub triangle_cap: u64,
}

impl<'a> AreaStudy<'a> {
    pub fn new(field: &'a dyn ScalarField, alpha: f64, ns: Vec<usize>) -> Self {
        Self {
            field,
            alpha,
            ns,
            triangle_cap: DEFAULT_TRIANGLE_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AreaStudyReport {
    pub exact: ExactArea,
    pub records: Vec<AreaRecord>,
    /// Slope of gap against `R_max`, finest half.
    pub gap_vs_r: Option<RateFit>,
    /// Slope of gap against `N`, finest half.
    pub gap_vs_n: Option<RateFit>,
    pub verdict: AreaVerdict,
}

/// Gaps below this are treated as exact reproduction.
const GAP_FLOOR: f64 = 1e-12;
const SLOPE_TOL: f64 = 0.02;

pub fn area_convergence_study(study: &AreaStudy<'_>) -> Result<AreaStudyReport> {
    let domain = Rect::symmetric_square();
    let exact = exact_graph_area(study.field, &domain)?;
    let opts = InterpOptions::without_bound();
    let mut records = Vec::with_capacity(study.ns.len());
    for &n in &study.ns {
        let mesh = gen_aniso_capped(n, study.alpha, study.triangle_cap)?;
        let quality = mesh.quality()?;
        let f_h = interpolate(study.field, &mesh)?;
        let a_e = elementary_area(&f_h, &mesh)?;
        let w11 = interp_error(study.field, &mesh, NormExponent::One, &opts)?.seminorm_w1p_error;
        records.push(AreaRecord {
            field: study.field.name().to_string(),
            alpha: study.alpha,
            n,
            r_max: quality.r_max,
            a_e,
            exact: exact.value,
            gap: (a_e - exact.value).abs(),
            w11_error: w11,
        });
    }

    let gaps: Vec<f64> = records.iter().map(|r| r.gap).collect();
    let rs: Vec<f64> = records.iter().map(|r| r.r_max).collect();
    let ns: Vec<f64> = records.iter().map(|r| r.n as f64).collect();
    let gap_vs_r = fit_finest_half(&rs, &gaps);
    let gap_vs_n = fit_finest_half(&ns, &gaps);
    let verdict = if !gaps.is_empty() && gaps.iter().all(|&g| g <= GAP_FLOOR * exact.value) {
        AreaVerdict::Exact
    } else {
        match gap_vs_n {
            Some(fit) if fit.slope < -SLOPE_TOL => AreaVerdict::Converges,
            Some(_) => AreaVerdict::NoConvergence,
            None => AreaVerdict::Inconclusive,
        }
    };
    Ok(AreaStudyReport {
        exact,
        records,
        gap_vs_r,
        gap_vs_n,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Affine, Cylinder, Paraboloid};
    use crate::mesh::{gen_aniso, gen_uniform};

    #[test]
    fn flat_and_tilted_planes() {
        let mesh = gen_uniform(Rect::unit_square(), 3, 5);
        let zero = interpolate(&Affine::new(0.0, 0.0, 0.0), &mesh).unwrap();
        assert!((elementary_area(&zero, &mesh).unwrap() - 1.0).abs() < 1e-14);
        let tilt = interpolate(&Affine::new(0.0, 1.0, 0.0), &mesh).unwrap();
        assert!((elementary_area(&tilt, &mesh).unwrap() - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn exact_area_examples() {
        let unit = Rect::unit_square();
        assert!((exact_graph_area(&Affine::new(0.0, 0.0, 0.0), &unit).unwrap().value - 1.0).abs() < 1e-15);
        assert!((graph_area_quadrature(&Affine::new(0.0, 1.0, 0.0), &unit, 64).unwrap() - 2f64.sqrt()).abs() < 1e-13);

        let sq = Rect::symmetric_square();
        let closed = 4.4 * (10.0f64 / 11.0).asin();
        let ex = exact_graph_area(&Cylinder::new(1.1), &sq).unwrap();
        assert_eq!(ex.provenance, AreaProvenance::ClosedForm);
        assert!((ex.value - closed).abs() < 1e-14);
        let gl = graph_area_quadrature(&Cylinder::new(1.1), &sq, AREA_GL_POINTS).unwrap();
        assert!((gl - closed).abs() < 1e-10);
        assert!(ex.value > sq.area());
    }

    #[test]
    fn paraboloid_area_by_quadrature() {
        // Unit disk-free check: on (0,1)^2 the integrand is sqrt(1 + x^2 + y^2),
        // compared against a fine midpoint sum.
        let ex = exact_graph_area(&Paraboloid, &Rect::unit_square()).unwrap();
        assert_eq!(ex.provenance, AreaProvenance::GaussLegendre { points: 64 });
        let m = 2000;
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                let (x, y) = ((i as f64 + 0.5) / m as f64, (j as f64 + 0.5) / m as f64);
                s += (1.0 + x * x + y * y).sqrt();
            }
        }
        assert!((ex.value - s / (m * m) as f64).abs() < 1e-7);
    }

    #[test]
    fn singular_field_is_rejected() {
        assert!(exact_graph_area(&Cylinder::new(1.0), &Rect::symmetric_square()).is_err());
    }

    #[test]
    fn cylinder_interpolant_area_at_n64() {
        let mesh = gen_aniso(64, 1.5).unwrap();
        let f = Cylinder::new(1.1);
        let a_e = elementary_area(&interpolate(&f, &mesh).unwrap(), &mesh).unwrap();
        let exact = exact_graph_area(&f, &mesh.domain).unwrap().value;
        assert!((a_e - exact).abs() < 1e-2);
        assert!(a_e >= mesh.domain.area());
    }

    #[test]
    fn affine_study_is_exact() {
        let f = Affine::new(1.0, 0.3, -0.2);
        let rep = area_convergence_study(&AreaStudy::new(&f, 1.5, vec![4, 8, 16])).unwrap();
        assert_eq!(rep.verdict, AreaVerdict::Exact);
        assert!(rep.records.iter().all(|r| r.within_bound()));
    }
}
