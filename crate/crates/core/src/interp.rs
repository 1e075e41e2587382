//! Nodal P1 interpolation and Sobolev (semi)norms of the interpolation error.
//!
//! Seminorm conventions (orders 1 and 2, `e = v - I v`):
//!
//! | p   | `|e|_{1,p}` integrand  | `|v|_{2,p}` integrand                    |
//! |-----|------------------------|------------------------------------------|
//! | 1   | `|e_x| + |e_y|`        | `|v_xx| + 2|v_xy| + |v_yy|`              |
//! | 2   | `e_x^2 + e_y^2`        | `v_xx^2 + 2 v_xy^2 + v_yy^2`             |
//! | inf | `max(|e_x|, |e_y|)`    | `max(|v_xx|, |v_xy|, |v_yy|)`            |
//!
//! p = inf is approximated by sampling (quadrature points plus a barycentric
//! lattice, by default vertices and edge midpoints), so it can only
//! underestimate the true maximum.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::mesh::Mesh;
use crate::quadrature::{from_barycentric, TriangleRule};
use crate::trigeo::{Point, Triangle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormExponent {
    One,
    Two,
    Inf,
}

impl NormExponent {
    pub const ALL: [NormExponent; 3] = [NormExponent::One, NormExponent::Two, NormExponent::Inf];
}

impl fmt::Display for NormExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::One => "1",
            Self::Two => "2",
            Self::Inf => "inf",
        })
    }
}

impl FromStr for NormExponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Self::One),
            "2" => Ok(Self::Two),
            "inf" | "Inf" | "infinity" | "∞" => Ok(Self::Inf),
            other => Err(Error::Domain(format!("norm exponent must be 1, 2 or inf, got {other:?}"))),
        }
    }
}

/// Constant data of an affine triangle: area and gradients of the three
/// barycentric coordinates.
#[derive(Debug, Clone, Copy)]
pub struct P1Element {
    pub area: f64,
    pub grads: [[f64; 2]; 3],
}

impl P1Element {
    pub fn new(v: &[Point; 3]) -> Result<Self> {
        let twice = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
        let h2 = (0..3)
            .map(|i| {
                let (p, q) = (v[i], v[(i + 1) % 3]);
                (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)
            })
            .fold(0.0, f64::max);
        if !(twice.abs() > crate::trigeo::DEGENERACY_TOL * h2) {
            return Err(Error::DegenerateTriangle {
                twice_area: twice.abs(),
                h_squared: h2,
                tol: crate::trigeo::DEGENERACY_TOL,
            });
        }
        let mut grads = [[0.0; 2]; 3];
        for (i, g) in grads.iter_mut().enumerate() {
            let (p, q) = (v[(i + 1) % 3], v[(i + 2) % 3]);
            *g = [(p[1] - q[1]) / twice, (q[0] - p[0]) / twice];
        }
        Ok(Self {
            area: 0.5 * twice.abs(),
            grads,
        })
    }

    /// Gradient of the affine function with the given vertex values.
    pub fn gradient_of(&self, nodal: [f64; 3]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for i in 0..3 {
            g[0] += nodal[i] * self.grads[i][0];
            g[1] += nodal[i] * self.grads[i][1];
        }
        g
    }

    /// Element stiffness matrix `area * grad(l_i) . grad(l_j)`.
    pub fn stiffness(&self) -> [[f64; 3]; 3] {
        let mut k = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] = self.area * (self.grads[i][0] * self.grads[j][0] + self.grads[i][1] * self.grads[j][1]);
            }
        }
        k
    }
}

/// Continuous piecewise-affine function given by its vertex values.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearField {
    pub nodal: Vec<f64>,
}

impl PiecewiseLinearField {
    pub fn element_values(&self, mesh: &Mesh, k: usize) -> [f64; 3] {
        let [i, j, l] = mesh.triangles[k];
        [self.nodal[i], self.nodal[j], self.nodal[l]]
    }

    pub fn element_gradient(&self, mesh: &Mesh, k: usize) -> Result<[f64; 2]> {
        Ok(P1Element::new(&mesh.corners(k))?.gradient_of(self.element_values(mesh, k)))
    }

    /// Value at barycentric coordinates `bary` of element `k`.
    pub fn eval(&self, mesh: &Mesh, k: usize, bary: [f64; 3]) -> f64 {
        let v = self.element_values(mesh, k);
        bary[0] * v[0] + bary[1] * v[1] + bary[2] * v[2]
    }
}

fn finite_value(v: &dyn ScalarField, p: Point) -> Result<f64> {
    let value = v.value(p);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { x: p[0], y: p[1], value })
    }
}

/// Nodal interpolant `I_tau v`.
pub fn interpolate(v: &dyn ScalarField, mesh: &Mesh) -> Result<PiecewiseLinearField> {
    v.check_domain(&mesh.domain)?;
    let nodal = mesh.vertices.iter().map(|&p| finite_value(v, p)).collect::<Result<_>>()?;
    Ok(PiecewiseLinearField { nodal })
}

#[derive(Debug, Clone)]
pub struct InterpOptions {
    pub rule: TriangleRule,
    /// Order of the barycentric sampling lattice added to the quadrature
    /// points for p = inf (2 = vertices and edge midpoints).
    pub inf_lattice: usize,
    /// Compute `|v|_{2,p,K}` (needs a Hessian).
    pub with_bound: bool,
}

impl Default for InterpOptions {
    fn default() -> Self {
        Self {
            rule: TriangleRule::default(),
            inf_lattice: 2,
            with_bound: true,
        }
    }
}

impl InterpOptions {
    pub fn without_bound() -> Self {
        Self {
            with_bound: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementError {
    pub elem: usize,
    /// `|v - I_K v|_{1,p,K}`.
    pub semi: f64,
    /// `||v - I_K v||_{1,p,K}`.
    pub norm: f64,
    /// `||v - I_K v||_{0,p,K}`.
    pub l_p: f64,
    pub r_circ: f64,
    pub c_kobayashi: f64,
    /// `|v|_{2,p,K}`, when requested.
    pub semi2: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct InterpErrorReport {
    pub p: NormExponent,
    pub seminorm_w1p_error: f64,
    pub norm_w1p_error: f64,
    pub per_element: Vec<ElementError>,
}

impl InterpErrorReport {
    /// Aggregates local values the same way the global seminorm is formed.
    pub fn aggregate(p: NormExponent, local: impl Iterator<Item = f64>) -> f64 {
        match p {
            NormExponent::One => local.sum(),
            NormExponent::Two => local.map(|x| x * x).sum::<f64>().sqrt(),
            NormExponent::Inf => local.fold(0.0, f64::max),
        }
    }

    /// `|v|_{2,p,Omega}` from the per-element column.
    pub fn seminorm2(&self) -> Option<f64> {
        let locals: Option<Vec<f64>> = self.per_element.iter().map(|e| e.semi2).collect();
        locals.map(|l| Self::aggregate(self.p, l.into_iter()))
    }
}

fn lattice(order: usize) -> Vec<[f64; 3]> {
    let n = order.max(1);
    let mut pts = Vec::new();
    for i in 0..=n {
        for j in 0..=(n - i) {
            let (a, b) = (i as f64 / n as f64, j as f64 / n as f64);
            pts.push([a, b, 1.0 - a - b]);
        }
    }
    pts
}

fn hessian_measure(p: NormExponent, h: [[f64; 2]; 2]) -> f64 {
    let (xx, xy, yy) = (h[0][0], 0.5 * (h[0][1] + h[1][0]), h[1][1]);
    match p {
        NormExponent::One => xx.abs() + 2.0 * xy.abs() + yy.abs(),
        NormExponent::Two => xx * xx + 2.0 * xy * xy + yy * yy,
        NormExponent::Inf => xx.abs().max(xy.abs()).max(yy.abs()),
    }
}

/// Interpolation error on a single triangle with vertices `corners`.
pub fn element_error(
    v: &dyn ScalarField,
    corners: &[Point; 3],
    p: NormExponent,
    opts: &InterpOptions,
) -> Result<ElementError> {
    if opts.with_bound && !v.has_hessian() {
        return Err(Error::MissingHessian);
    }
    let metrics = Triangle::new(corners[0], corners[1], corners[2]).metrics()?;
    let el = P1Element::new(corners)?;
    let nodal = [
        finite_value(v, corners[0])?,
        finite_value(v, corners[1])?,
        finite_value(v, corners[2])?,
    ];
    let g_k = el.gradient_of(nodal);

    // (|e|, |grad e| measure, hessian measure) at barycentric point `bary`
    let sample = |bary: [f64; 3]| -> Result<(f64, f64, f64)> {
        let x = from_barycentric(corners, bary);
        let ev = finite_value(v, x)? - (bary[0] * nodal[0] + bary[1] * nodal[1] + bary[2] * nodal[2]);
        let gv = v.gradient(x);
        let (ex, ey) = (gv[0] - g_k[0], gv[1] - g_k[1]);
        let grad = match p {
            NormExponent::One => ex.abs() + ey.abs(),
            NormExponent::Two => ex * ex + ey * ey,
            NormExponent::Inf => ex.abs().max(ey.abs()),
        };
        let hess = if opts.with_bound {
            hessian_measure(p, v.hessian(x).ok_or(Error::MissingHessian)?)
        } else {
            0.0
        };
        let ev = match p {
            NormExponent::Two => ev * ev,
            _ => ev.abs(),
        };
        Ok((ev, grad, hess))
    };

    let (l_p, semi, semi2) = match p {
        NormExponent::One | NormExponent::Two => {
            let (mut acc_v, mut acc_g, mut acc_h) = (0.0, 0.0, 0.0);
            for (bary, w) in opts.rule.iter() {
                let (a, b, c) = sample(bary)?;
                acc_v += w * a;
                acc_g += w * b;
                acc_h += w * c;
            }
            let (acc_v, acc_g, acc_h) = (el.area * acc_v, el.area * acc_g, el.area * acc_h);
            if p == NormExponent::Two {
                (acc_v.sqrt(), acc_g.sqrt(), acc_h.sqrt())
            } else {
                (acc_v, acc_g, acc_h)
            }
        }
        NormExponent::Inf => {
            let (mut m_v, mut m_g, mut m_h): (f64, f64, f64) = (0.0, 0.0, 0.0);
            for bary in opts.rule.iter().map(|(b, _)| b).chain(lattice(opts.inf_lattice)) {
                let (a, b, c) = sample(bary)?;
                m_v = m_v.max(a);
                m_g = m_g.max(b);
                m_h = m_h.max(c);
            }
            (m_v, m_g, m_h)
        }
    };
    let norm = match p {
        NormExponent::One => semi + l_p,
        NormExponent::Two => (semi * semi + l_p * l_p).sqrt(),
        NormExponent::Inf => semi.max(l_p),
    };
    Ok(ElementError {
        elem: 0,
        semi,
        norm,
        l_p,
        r_circ: metrics.r_circ,
        c_kobayashi: metrics.c_kobayashi,
        semi2: opts.with_bound.then_some(semi2),
    })
}

/// `|v - I_tau v|_{1,p,Omega}` and `||v - I_tau v||_{1,p,Omega}` with the
/// per-element breakdown.
pub fn interp_error(
    v: &dyn ScalarField,
    mesh: &Mesh,
    p: NormExponent,
    opts: &InterpOptions,
) -> Result<InterpErrorReport> {
    v.check_domain(&mesh.domain)?;
    let per_element = (0..mesh.num_triangles())
        .map(|k| {
            let mut e = element_error(v, &mesh.corners(k), p, opts)?;
            e.elem = k;
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;
    let seminorm_w1p_error = InterpErrorReport::aggregate(p, per_element.iter().map(|e| e.semi));
    let norm_w1p_error = InterpErrorReport::aggregate(p, per_element.iter().map(|e| e.norm));
    Ok(InterpErrorReport {
        p,
        seminorm_w1p_error,
        norm_w1p_error,
        per_element,
    })
}

/// A mesh taking part in a bound audit.
#[derive(Debug, Clone)]
pub struct AuditMesh {
    pub id: String,
    pub alpha: Option<f64>,
    pub n: Option<usize>,
    pub mesh: Mesh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub mesh_id: String,
    pub alpha: Option<f64>,
    pub n: Option<usize>,
    pub elem: usize,
    pub p: NormExponent,
    pub err_w1p: f64,
    pub r_circ: f64,
    pub c_kobayashi: f64,
    pub semi2: f64,
    /// `err / (C(K) |v|_{2,2,K})`, p = 2 only.
    pub ratio_c: Option<f64>,
    pub ratio_r: f64,
}

#[derive(Debug, Clone, Default)]
pub struct AuditTable {
    pub rows: Vec<AuditRow>,
}

impl AuditTable {
    pub fn max_ratio_c(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.ratio_c).reduce(f64::max)
    }

    pub fn max_ratio_r(&self) -> f64 {
        self.rows.iter().map(|r| r.ratio_r).fold(0.0, f64::max)
    }

    /// Whether `C(K) < R_K` held on every audited element.
    pub fn kobayashi_below_circumradius(&self) -> bool {
        self.rows.iter().all(|r| r.c_kobayashi < r.r_circ)
    }
}

fn ratio(err: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        err / scale
    } else if err == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn audit_row(e: &ElementError, p: NormExponent, mesh_id: &str, alpha: Option<f64>, n: Option<usize>) -> AuditRow {
    let semi2 = e.semi2.expect("audit runs with the bound columns");
    AuditRow {
        mesh_id: mesh_id.to_string(),
        alpha,
        n,
        elem: e.elem,
        p,
        err_w1p: e.semi,
        r_circ: e.r_circ,
        c_kobayashi: e.c_kobayashi,
        semi2,
        ratio_c: (p == NormExponent::Two).then(|| ratio(e.semi, e.c_kobayashi * semi2)),
        ratio_r: ratio(e.semi, e.r_circ * semi2),
    }
}

/// Per-element ratios of the interpolation error to the `C(K)` and `R_K`
/// bounds over every element of every mesh.
pub fn bound_audit(v: &dyn ScalarField, meshes: &[AuditMesh], p: NormExponent, opts: &InterpOptions) -> Result<AuditTable> {
    if !v.has_hessian() {
        return Err(Error::MissingHessian);
    }
    let opts = InterpOptions {
        with_bound: true,
        ..opts.clone()
    };
    let mut table = AuditTable::default();
    for am in meshes {
        let report = interp_error(v, &am.mesh, p, &opts)?;
        table
            .rows
            .extend(report.per_element.iter().map(|e| audit_row(e, p, &am.id, am.alpha, am.n)));
    }
    Ok(table)
}

/// Same audit for loose triangles (each treated as its own one-element mesh).
pub fn bound_audit_triangles(
    v: &dyn ScalarField,
    triangles: &[Triangle],
    mesh_id: &str,
    p: NormExponent,
    opts: &InterpOptions,
) -> Result<AuditTable> {
    if !v.has_hessian() {
        return Err(Error::MissingHessian);
    }
    let opts = InterpOptions {
        with_bound: true,
        ..opts.clone()
    };
    let mut table = AuditTable::default();
    for (k, t) in triangles.iter().enumerate() {
        let mut e = element_error(v, &t.vertices(), p, &opts)?;
        e.elem = k;
        table.rows.push(audit_row(&e, p, mesh_id, None, None));
    }
    Ok(table)
}
