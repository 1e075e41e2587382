//! Conforming triangulations of rectangles, the anisotropic strip generator,
//! the conformity validator and the plain-text mesh format.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{ConformityViolation, Error, Result};
use crate::trigeo::{Point, Triangle, TriangleMetrics};

/// Axis-aligned rectangle `(x0, x1) x (y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    /// The experiment domain (-1, 1)^2.
    pub fn symmetric_square() -> Self {
        Self::new(-1.0, 1.0, -1.0, 1.0)
    }

    pub fn unit_square() -> Self {
        Self::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn diameter(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0)
    }

    pub fn shrink(&self, d: f64) -> Self {
        Self::new(self.x0 + d, self.x1 - d, self.y0 + d, self.y1 - d)
    }

    /// Distance from `p` (assumed inside) to the boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        (p[0] - self.x0)
            .abs()
            .min((self.x1 - p[0]).abs())
            .min((p[1] - self.y0).abs())
            .min((self.y1 - p[1]).abs())
    }

    fn contains(&self, p: Point, tol: f64) -> bool {
        p[0] >= self.x0 - tol && p[0] <= self.x1 + tol && p[1] >= self.y0 - tol && p[1] <= self.y1 + tol
    }

    /// Index of a boundary side (0 left, 1 right, 2 bottom, 3 top) that both
    /// points lie on.
    fn common_side(&self, p: Point, q: Point, tol: f64) -> Option<usize> {
        let on = |p: Point| {
            [
                (p[0] - self.x0).abs() < tol,
                (p[0] - self.x1).abs() < tol,
                (p[1] - self.y0).abs() < tol,
                (p[1] - self.y1).abs() < tol,
            ]
        };
        let (a, b) = (on(p), on(q));
        (0..4).find(|&i| a[i] && b[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counterclockwise vertex-index triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    pub domain: Rect,
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, k: usize) -> Triangle {
        let [i, j, l] = self.triangles[k];
        Triangle::new(self.vertices[i], self.vertices[j], self.vertices[l])
    }

    pub fn corners(&self, k: usize) -> [Point; 3] {
        let [i, j, l] = self.triangles[k];
        [self.vertices[i], self.vertices[j], self.vertices[l]]
    }

    /// Flags vertices within `1e-12 * diam` of the domain boundary.
    pub fn boundary_flags_from_geometry(vertices: &[Point], domain: &Rect) -> Vec<bool> {
        let tol = BOUNDARY_TOL * domain.diameter();
        vertices.iter().map(|&p| domain.boundary_distance(p) < tol).collect()
    }

    /// Quality summary without conformity checks.
    pub fn quality(&self) -> Result<MeshQuality> {
        let metrics = self.element_metrics()?;
        Ok(MeshQuality::from_metrics(&metrics))
    }

    pub fn element_metrics(&self) -> Result<Vec<TriangleMetrics>> {
        (0..self.num_triangles()).map(|k| self.triangle(k).metrics()).collect()
    }
}

const BOUNDARY_TOL: f64 = 1e-12;
const COVERAGE_TOL: f64 = 1e-10;

/// Global shape indicators of a triangulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshQuality {
    /// Largest element diameter `|tau|`.
    pub h_max: f64,
    /// Largest circumradius `R_tau`.
    pub r_max: f64,
    pub theta_max_global: f64,
    pub theta_min_global: f64,
    /// Largest `h_K / rho_K`.
    pub rho_ratio_max: f64,
}

impl MeshQuality {
    pub fn from_metrics(metrics: &[TriangleMetrics]) -> Self {
        let mut q = MeshQuality {
            h_max: 0.0,
            r_max: 0.0,
            theta_max_global: 0.0,
            theta_min_global: f64::INFINITY,
            rho_ratio_max: 0.0,
        };
        for m in metrics {
            q.h_max = q.h_max.max(m.h_diam);
            q.r_max = q.r_max.max(m.r_circ);
            q.theta_max_global = q.theta_max_global.max(m.theta_max);
            q.theta_min_global = q.theta_min_global.min(m.theta_min);
            q.rho_ratio_max = q.rho_ratio_max.max(m.aspect());
        }
        q
    }
}

/// Nearest-rank percentiles of one per-element quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Percentiles {
    pub min: f64,
    pub p05: f64,
    pub p50: f64,
    pub p95: f64,
    pub max: f64,
}

impl Percentiles {
    pub fn of(values: impl Iterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = values.collect();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| {
            if v.is_empty() {
                return f64::NAN;
            }
            let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
            v[idx]
        };
        Self {
            min: at(0.0),
            p05: at(0.05),
            p50: at(0.5),
            p95: at(0.95),
            max: at(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub quality: MeshQuality,
    pub circumradius: Percentiles,
    pub aspect: Percentiles,
    pub theta_max: Percentiles,
    pub c_kobayashi: Percentiles,
}

/// Checks orientation, conformity, coverage and boundary flags, returning the
/// first violation found.
pub fn validate(mesh: &Mesh) -> Result<QualityReport> {
    let nv = mesh.num_vertices();
    let conformity = |v| Err(Error::Conformity(v));
    if mesh.boundary.len() != nv {
        return Err(Error::Parse {
            line: 0,
            message: format!("{} boundary flags for {} vertices", mesh.boundary.len(), nv),
        });
    }
    let diam = mesh.domain.diameter();
    let tol = BOUNDARY_TOL * diam;

    for (v, &p) in mesh.vertices.iter().enumerate() {
        if !mesh.domain.contains(p, tol) {
            return conformity(ConformityViolation::VertexOutsideDomain { vertex: v });
        }
        let on_boundary = mesh.domain.boundary_distance(p) < tol;
        if on_boundary != mesh.boundary[v] {
            return conformity(ConformityViolation::BoundaryFlag {
                vertex: v,
                flagged: mesh.boundary[v],
            });
        }
    }

    let mut metrics = Vec::with_capacity(mesh.num_triangles());
    let mut covered = 0.0;
    for (k, tri) in mesh.triangles.iter().enumerate() {
        if let Some(&index) = tri.iter().find(|&&i| i >= nv) {
            return conformity(ConformityViolation::IndexOutOfRange { triangle: k, index });
        }
        let t = mesh.triangle(k);
        let signed_area = t.signed_area();
        if signed_area <= 0.0 {
            return conformity(ConformityViolation::NonPositiveArea {
                triangle: k,
                signed_area,
            });
        }
        metrics.push(t.metrics()?);
        covered += signed_area;
    }

    // Each oriented edge may occur once; an undirected edge at most twice,
    // and then with opposite orientations.
    let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * mesh.num_triangles());
    for (k, tri) in mesh.triangles.iter().enumerate() {
        for e in 0..3 {
            let (i, j) = (tri[e], tri[(e + 1) % 3]);
            if let Some(&other) = directed.get(&(i, j)) {
                return conformity(ConformityViolation::EdgeOverused {
                    edge: (i.min(j), i.max(j)),
                    first: other,
                    second: k,
                });
            }
            directed.insert((i, j), k);
        }
    }
    let mut open: Vec<((usize, usize), usize)> = directed
        .iter()
        .filter(|(&(i, j), _)| !directed.contains_key(&(j, i)))
        .map(|(&e, &k)| (e, k))
        .collect();
    open.sort_unstable();
    for ((i, j), k) in open {
        if mesh.domain.common_side(mesh.vertices[i], mesh.vertices[j], tol).is_none() {
            return conformity(ConformityViolation::OpenEdge {
                edge: (i.min(j), i.max(j)),
                triangle: k,
            });
        }
    }

    let expected = mesh.domain.area();
    if ((covered - expected) / expected).abs() > COVERAGE_TOL {
        return conformity(ConformityViolation::Coverage { covered, expected });
    }

    Ok(QualityReport {
        quality: MeshQuality::from_metrics(&metrics),
        circumradius: Percentiles::of(metrics.iter().map(|m| m.r_circ)),
        aspect: Percentiles::of(metrics.iter().map(|m| m.aspect())),
        theta_max: Percentiles::of(metrics.iter().map(|m| m.theta_max)),
        c_kobayashi: Percentiles::of(metrics.iter().map(|m| m.c_kobayashi)),
    })
}

pub const DEFAULT_TRIANGLE_CAP: u64 = 10_000_000;

/// Layout of the anisotropic strip mesh on (-1, 1)^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisoLayout {
    pub n: usize,
    pub alpha: f64,
    /// Number of horizontal strips.
    pub strips: usize,
    /// Base length `h = 2/N`.
    pub base: f64,
    /// Strip height `2/M`.
    pub height: f64,
}

impl AnisoLayout {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("N = {n} must be at least 2")));
        }
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha = {alpha} must be >= 1")));
        }
        let h = 2.0 / n as f64;
        let target = if alpha == 1.0 { 0.5 * h } else { h.powf(alpha) };
        // floor(2 / target), nudged so that exact integers are not lost to rounding.
        let m = (2.0 / target * (1.0 + 1e-12)).floor();
        if !(m >= 1.0) || m > 1e12 {
            return Err(Error::TooFine {
                triangles: u64::MAX,
                cap: DEFAULT_TRIANGLE_CAP,
            });
        }
        let m = m as usize;
        Ok(Self {
            n,
            alpha,
            strips: m,
            base: h,
            height: 2.0 / m as f64,
        })
    }

    /// `(2N + 1) M`: per strip, N full triangles on the regular row, N - 1 on
    /// the offset row and two half-base closers.
    pub fn triangle_count(&self) -> u64 {
        (2 * self.n as u64 + 1) * self.strips as u64
    }

    /// Circumradius of the interior (full) triangles.
    pub fn interior_circumradius(&self) -> f64 {
        crate::trigeo::isosceles_circumradius(self.base, self.height)
    }

    fn row_len(&self, j: usize) -> usize {
        if j % 2 == 0 {
            self.n + 1
        } else {
            self.n + 2
        }
    }
}

/// Strip triangulation of (-1, 1)^2 with base `h = 2/N` and height
/// `2/floor(2/h^alpha)` (`h/2` targets for `alpha = 1`).
pub fn gen_aniso(n: usize, alpha: f64) -> Result<Mesh> {
    gen_aniso_capped(n, alpha, DEFAULT_TRIANGLE_CAP)
}

pub fn gen_aniso_capped(n: usize, alpha: f64, cap: u64) -> Result<Mesh> {
    let layout = AnisoLayout::new(n, alpha)?;
    let count = layout.triangle_count();
    if count > cap {
        return Err(Error::TooFine {
            triangles: count,
            cap,
        });
    }
    Ok(build_strips(&layout))
}

fn build_strips(layout: &AnisoLayout) -> Mesh {
    let n = layout.n;
    let m = layout.strips;
    let nf = n as f64;
    let mf = m as f64;

    let mut row_start = Vec::with_capacity(m + 2);
    let mut total = 0;
    for j in 0..=m {
        row_start.push(total);
        total += layout.row_len(j);
    }

    let mut vertices = Vec::with_capacity(total);
    let mut boundary = Vec::with_capacity(total);
    for j in 0..=m {
        let y = if j == m { 1.0 } else { -1.0 + 2.0 * j as f64 / mf };
        let len = layout.row_len(j);
        for i in 0..len {
            let x = if j % 2 == 0 {
                -1.0 + 2.0 * i as f64 / nf
            } else if i == 0 {
                -1.0
            } else if i == len - 1 {
                1.0
            } else {
                -1.0 + (2 * i - 1) as f64 / nf
            };
            vertices.push([x, y]);
            boundary.push(j == 0 || j == m || i == 0 || i == len - 1);
        }
    }

    let mut triangles = Vec::with_capacity(layout.triangle_count() as usize);
    for j in 0..m {
        let b = |i: usize| row_start[j] + i;
        let t = |i: usize| row_start[j + 1] + i;
        if j % 2 == 0 {
            // regular row below, offset row above
            triangles.push([b(0), t(1), t(0)]);
            for i in 0..n {
                triangles.push([b(i), b(i + 1), t(i + 1)]);
                if i + 1 < n {
                    triangles.push([t(i + 1), b(i + 1), t(i + 2)]);
                }
            }
            triangles.push([b(n), t(n + 1), t(n)]);
        } else {
            // offset row below, regular row above
            triangles.push([b(0), b(1), t(0)]);
            for i in 0..n {
                triangles.push([b(i + 1), t(i + 1), t(i)]);
                if i + 1 < n {
                    triangles.push([b(i + 1), b(i + 2), t(i + 1)]);
                }
            }
            triangles.push([b(n), b(n + 1), t(n)]);
        }
    }

    Mesh {
        vertices,
        triangles,
        boundary,
        domain: Rect::symmetric_square(),
    }
}

/// Uniform right-triangle mesh of a rectangle, split along the diagonal of
/// each cell. Handy for tests on other domains.
pub fn gen_uniform(domain: Rect, nx: usize, ny: usize) -> Mesh {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { domain.x1 } else { domain.x0 + (domain.x1 - domain.x0) * i as f64 / nx as f64 };
            let y = if j == ny { domain.y1 } else { domain.y0 + (domain.y1 - domain.y0) * j as f64 / ny as f64 };
            vertices.push([x, y]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let boundary = Mesh::boundary_flags_from_geometry(&vertices, &domain);
    Mesh {
        vertices,
        triangles,
        boundary,
        domain,
    }
}

pub const MESH_MAGIC: &str = "CFEM-MESH";
pub const MESH_VERSION: &str = "1";

/// Serialises in the `CFEM-MESH 1` text format. Coordinates use the shortest
/// representation that parses back to the identical `f64`.
pub fn write_mesh<W: Write>(mesh: &Mesh, mut out: W) -> Result<()> {
    let mut buf = String::with_capacity(32 * (mesh.num_vertices() + mesh.num_triangles()));
    writeln!(buf, "{MESH_MAGIC} {MESH_VERSION}").unwrap();
    writeln!(buf, "{} {}", mesh.num_vertices(), mesh.num_triangles()).unwrap();
    for (p, &b) in mesh.vertices.iter().zip(&mesh.boundary) {
        writeln!(buf, "{:?} {:?} {}", p[0], p[1], u8::from(b)).unwrap();
    }
    for t in &mesh.triangles {
        writeln!(buf, "{} {} {}", t[0], t[1], t[2]).unwrap();
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

pub fn save_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_mesh(mesh, std::io::BufWriter::new(file))
}

/// Parses the `CFEM-MESH 1` format. The domain is the bounding box of the
/// vertices.
pub fn read_mesh<R: BufRead>(input: R) -> Result<Mesh> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((no, Ok(text))) => Ok((no, text)),
            Some((_, Err(e))) => Err(Error::Io(e)),
            None => Err(Error::Parse {
                line: 0,
                message: format!("unexpected end of file, expected {what}"),
            }),
        }
    };
    let perr = |line: usize, message: String| Error::Parse { line, message };

    let (no, header) = next("header")?;
    let mut parts = header.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(MESH_MAGIC), Some(MESH_VERSION), None) => {}
        (Some(MESH_MAGIC), Some(v), None) => return Err(Error::FormatVersion(v.to_string())),
        _ => return Err(perr(no, format!("bad header {header:?}"))),
    }

    let (no, counts) = next("vertex and triangle counts")?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| perr(no, format!("bad count {t:?}"))))
        .collect::<Result<_>>()?;
    let [nv, nt] = counts[..] else {
        return Err(perr(no, "expected \"<nv> <nt>\"".into()));
    };

    let mut vertices = Vec::with_capacity(nv);
    let mut boundary = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, line) = next("vertex line")?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(perr(no, format!("expected \"x y b\", got {line:?}")));
        }
        let x: f64 = f[0].parse().map_err(|_| perr(no, format!("bad coordinate {:?}", f[0])))?;
        let y: f64 = f[1].parse().map_err(|_| perr(no, format!("bad coordinate {:?}", f[1])))?;
        let b = match f[2] {
            "0" => false,
            "1" => true,
            other => return Err(perr(no, format!("boundary flag must be 0 or 1, got {other:?}"))),
        };
        vertices.push([x, y]);
        boundary.push(b);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (no, line) = next("triangle line")?;
        let idx: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr(no, format!("bad index {t:?}"))))
            .collect::<Result<_>>()?;
        let [i, j, k] = idx[..] else {
            return Err(perr(no, format!("expected \"i j k\", got {line:?}")));
        };
        if i.max(j).max(k) >= nv {
            return Err(perr(no, format!("vertex index out of range (nv = {nv})")));
        }
        triangles.push([i, j, k]);
    }
    for (no, line) in lines {
        let line = line?;
        if !line.trim().is_empty() {
            return Err(perr(no, format!("trailing content {line:?} beyond header counts")));
        }
    }

    let domain = bounding_box(&vertices);
    Ok(Mesh {
        vertices,
        triangles,
        boundary,
        domain,
    })
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let file = std::fs::File::open(path)?;
    read_mesh(std::io::BufReader::new(file))
}

fn bounding_box(vertices: &[Point]) -> Rect {
    let mut r = Rect::new(f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in vertices {
        r.x0 = r.x0.min(p[0]);
        r.x1 = r.x1.max(p[0]);
        r.y0 = r.y0.min(p[1]);
        r.y1 = r.y1.max(p[1]);
    }
    r
}
