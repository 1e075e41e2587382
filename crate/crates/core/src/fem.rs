//! P1 Lagrange finite elements for `-Δu = f` in Ω, `u = g` on ∂Ω, with
//! Dirichlet data eliminated from the system, and error norms against an
//! exact solution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Cylinder, CylinderSource, ScalarField};
use crate::interp::P1Element;
use crate::mesh::{gen_aniso_capped, Mesh, MeshQuality, Rect, DEFAULT_TRIANGLE_CAP};
use crate::quadrature::{from_barycentric, TriangleRule};
use crate::sparse::{banded_cholesky_solve, dense_cholesky_solve, pcg_jacobi, CgConfig, CgStats, CsrMatrix};

/// Radius parameter of the cylinder test problem.
pub const CYLINDER_A: f64 = 1.1;

pub struct PoissonProblem {
    pub f: Box<dyn ScalarField>,
    pub g: Box<dyn ScalarField>,
    pub u_exact: Option<Box<dyn ScalarField>>,
    pub domain: Rect,
}

impl PoissonProblem {
    /// `f = a^2/(a^2-x^2)^(3/2)`, `g = u = (a^2-x^2)^(1/2)` on (-1, 1)^2.
    pub fn cylinder(a: f64) -> Self {
        Self {
            f: Box::new(CylinderSource { a }),
            g: Box::new(Cylinder::new(a)),
            u_exact: Some(Box::new(Cylinder::new(a))),
            domain: Rect::symmetric_square(),
        }
    }

    /// Laplace problem whose solution is the given affine function.
    pub fn patch(c: f64, gx: f64, gy: f64, domain: Rect) -> Self {
        use crate::field::Affine;
        Self {
            f: Box::new(Affine::new(0.0, 0.0, 0.0)),
            g: Box::new(Affine::new(c, gx, gy)),
            u_exact: Some(Box::new(Affine::new(c, gx, gy))),
            domain,
        }
    }

    /// Spot-checks `-Δu = f` at `n` interior points and `u = g` at `n`
    /// boundary points; returns the largest relative residual.
    pub fn check_exact(&self, n: usize, seed: u64) -> Result<f64> {
        let u = self.u_exact.as_deref().ok_or(Error::MissingExact)?;
        if !u.has_hessian() {
            return Err(Error::MissingHessian);
        }
        let d = &self.domain;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
        let mut worst: f64 = 0.0;
        for _ in 0..n {
            let p = [rng.gen_range(d.x0..d.x1), rng.gen_range(d.y0..d.y1)];
            let h = u.hessian(p).expect("has_hessian");
            worst = worst.max(rel(-(h[0][0] + h[1][1]), self.f.value(p)));

            let t: f64 = rng.gen();
            let q = match rng.gen_range(0..4) {
                0 => [d.x0, d.y0 + t * (d.y1 - d.y0)],
                1 => [d.x1, d.y0 + t * (d.y1 - d.y0)],
                2 => [d.x0 + t * (d.x1 - d.x0), d.y0],
                _ => [d.x0 + t * (d.x1 - d.x0), d.y1],
            };
            worst = worst.max(rel(u.value(q), self.g.value(q)));
        }
        Ok(worst)
    }
}

/// Reduced system over the free (interior) vertices.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Vertex index of each unknown.
    pub free_vertices: Vec<usize>,
    /// Dirichlet value at boundary vertices, 0 elsewhere.
    pub boundary_values: Vec<f64>,
    pub boundary: Vec<bool>,
}

impl SparseSystem {
    pub fn ndof(&self) -> usize {
        self.free_vertices.len()
    }

    /// Full nodal vector from the unknowns.
    pub fn scatter(&self, x: &[f64]) -> Vec<f64> {
        let mut nodal = self.boundary_values.clone();
        for (&v, &xi) in self.free_vertices.iter().zip(x) {
            nodal[v] = xi;
        }
        nodal
    }
}

/// Unconstrained stiffness matrix over all vertices.
pub fn stiffness_matrix(mesh: &Mesh) -> Result<CsrMatrix> {
    let mut triplets = Vec::with_capacity(9 * mesh.num_triangles());
    for (k, tri) in mesh.triangles.iter().enumerate() {
        let ke = P1Element::new(&mesh.corners(k))?.stiffness();
        for a in 0..3 {
            for b in 0..3 {
                triplets.push((tri[a], tri[b], ke[a][b]));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.num_vertices(), triplets))
}

/// Stiffness from exact constant gradients, load vector by quadrature,
/// Dirichlet values eliminated into the right-hand side.
pub fn assemble(problem: &PoissonProblem, mesh: &Mesh, rule: &TriangleRule) -> Result<SparseSystem> {
    problem.f.check_domain(&mesh.domain)?;
    problem.g.check_domain(&mesh.domain)?;
    let nv = mesh.num_vertices();
    let mut dof = vec![usize::MAX; nv];
    let mut free_vertices = Vec::new();
    let mut boundary_values = vec![0.0; nv];
    for v in 0..nv {
        if mesh.boundary[v] {
            let p = mesh.vertices[v];
            let g = problem.g.value(p);
            if !g.is_finite() {
                return Err(Error::NonFinite { x: p[0], y: p[1], value: g });
            }
            boundary_values[v] = g;
        } else {
            dof[v] = free_vertices.len();
            free_vertices.push(v);
        }
    }
    let ndof = free_vertices.len();
    let mut rhs = vec![0.0; ndof];
    let mut triplets = Vec::with_capacity(9 * mesh.num_triangles());

    for (k, tri) in mesh.triangles.iter().enumerate() {
        let corners = mesh.corners(k);
        let el = P1Element::new(&corners)?;
        let ke = el.stiffness();
        let mut fe = [0.0; 3];
        for (bary, w) in rule.iter() {
            let x = from_barycentric(&corners, bary);
            let fx = problem.f.value(x);
            if !fx.is_finite() {
                return Err(Error::NonFinite { x: x[0], y: x[1], value: fx });
            }
            for a in 0..3 {
                fe[a] += w * fx * bary[a];
            }
        }
        for a in 0..3 {
            let row = dof[tri[a]];
            if row == usize::MAX {
                continue;
            }
            rhs[row] += el.area * fe[a];
            for b in 0..3 {
                let col = dof[tri[b]];
                if col == usize::MAX {
                    rhs[row] -= ke[a][b] * boundary_values[tri[b]];
                } else {
                    triplets.push((row, col, ke[a][b]));
                }
            }
        }
    }

    Ok(SparseSystem {
        matrix: CsrMatrix::from_triplets(ndof, triplets),
        rhs,
        free_vertices,
        boundary_values,
        boundary: mesh.boundary.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FemSolution {
    pub nodal: Vec<f64>,
    pub stats: CgStats,
}

/// Jacobi-preconditioned CG solve; boundary values are copied from `g`.
pub fn solve(system: &SparseSystem, cfg: &CgConfig) -> Result<FemSolution> {
    let (x, stats) = pcg_jacobi(&system.matrix, &system.rhs, cfg)?;
    Ok(FemSolution {
        nodal: system.scatter(&x),
        stats,
    })
}

/// Band Cholesky direct solve. The vertex numbering of the strip meshes is
/// row by row, so the bandwidth is about one mesh row.
pub fn solve_banded(system: &SparseSystem) -> Result<FemSolution> {
    let (x, stats) = banded_cholesky_solve(&system.matrix, &system.rhs)?;
    Ok(FemSolution {
        nodal: system.scatter(&x),
        stats,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    /// Jacobi-preconditioned conjugate gradients.
    #[default]
    Cg,
    /// Band Cholesky factorisation.
    Banded,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cg" => Ok(SolverKind::Cg),
            "banded" => Ok(SolverKind::Banded),
            _ => Err(Error::Domain(format!("unknown solver '{s}' (expected cg or banded)"))),
        }
    }
}

pub fn solve_with(system: &SparseSystem, kind: SolverKind, cfg: &CgConfig) -> Result<FemSolution> {
    match kind {
        SolverKind::Cg => solve(system, cfg),
        SolverKind::Banded => solve_banded(system),
    }
}

/// Dense Cholesky reference solve for small systems.
pub fn solve_dense(system: &SparseSystem) -> Result<FemSolution> {
    let x = dense_cholesky_solve(&system.matrix.to_dense(), &system.rhs)?;
    Ok(FemSolution {
        nodal: system.scatter(&x),
        stats: CgStats {
            iterations: 0,
            relative_residual: 0.0,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FemErrors {
    pub h1_semi: f64,
    pub h1: f64,
    pub l2: f64,
}

/// `|u - u_h|_{1,2}`, `||u - u_h||_{1,2}` and `||u - u_h||_{0,2}` by
/// per-element quadrature.
pub fn fem_error(sol: &FemSolution, problem: &PoissonProblem, mesh: &Mesh, rule: &TriangleRule) -> Result<FemErrors> {
    let u = problem.u_exact.as_deref().ok_or(Error::MissingExact)?;
    nodal_error(&sol.nodal, u, mesh, rule)
}

/// Error norms of an arbitrary nodal vector against `u`.
pub fn nodal_error(nodal: &[f64], u: &dyn ScalarField, mesh: &Mesh, rule: &TriangleRule) -> Result<FemErrors> {
    let mut semi2 = 0.0;
    let mut l2sq = 0.0;
    for (k, tri) in mesh.triangles.iter().enumerate() {
        let corners = mesh.corners(k);
        let el = P1Element::new(&corners)?;
        let vals = [nodal[tri[0]], nodal[tri[1]], nodal[tri[2]]];
        let gh = el.gradient_of(vals);
        let (mut s, mut l) = (0.0, 0.0);
        for (bary, w) in rule.iter() {
            let x = from_barycentric(&corners, bary);
            let g = u.gradient(x);
            let e = u.value(x) - (bary[0] * vals[0] + bary[1] * vals[1] + bary[2] * vals[2]);
            s += w * ((g[0] - gh[0]).powi(2) + (g[1] - gh[1]).powi(2));
            l += w * e * e;
        }
        semi2 += el.area * s;
        l2sq += el.area * l;
    }
    Ok(FemErrors {
        h1_semi: semi2.sqrt(),
        h1: (semi2 + l2sq).sqrt(),
        l2: l2sq.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub a: f64,
    pub quad_degree: usize,
    pub cg: CgConfig,
    pub solver: SolverKind,
    pub triangle_cap: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            a: CYLINDER_A,
            quad_degree: 4,
            cg: CgConfig::default(),
            solver: SolverKind::Cg,
            triangle_cap: DEFAULT_TRIANGLE_CAP,
        }
    }
}

/// One row of the convergence experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub alpha: f64,
    pub n: usize,
    pub h_max: f64,
    pub r_max: f64,
    pub ndof: usize,
    pub h1_semi: f64,
    pub h1: f64,
    pub l2: f64,
    /// Zero for the direct solver.
    pub cg_iters: usize,
}

/// Generates, assembles, solves and measures one `(alpha, N)` instance.
pub fn run_instance(alpha: f64, n: usize, cfg: &SweepConfig) -> Result<(ConvergenceRecord, Mesh, FemSolution)> {
    let mesh = gen_aniso_capped(n, alpha, cfg.triangle_cap)?;
    let problem = PoissonProblem::cylinder(cfg.a);
    let rule = TriangleRule::with_degree(cfg.quad_degree)?;
    let quality: MeshQuality = mesh.quality()?;
    let system = assemble(&problem, &mesh, &rule)?;
    let sol = solve_with(&system, cfg.solver, &cfg.cg)?;
    let err = fem_error(&sol, &problem, &mesh, &rule)?;
    let rec = ConvergenceRecord {
        alpha,
        n,
        h_max: quality.h_max,
        r_max: quality.r_max,
        ndof: system.ndof(),
        h1_semi: err.h1_semi,
        h1: err.h1,
        l2: err.l2,
        cg_iters: sol.stats.iterations,
    };
    Ok((rec, mesh, sol))
}

/// The cylinder experiment over all `(alpha, N)` pairs, alpha-major.
pub fn experiment_sweep(alphas: &[f64], ns: &[usize], cfg: &SweepConfig) -> Result<Vec<ConvergenceRecord>> {
    let mut out = Vec::with_capacity(alphas.len() * ns.len());
    for &alpha in alphas {
        for &n in ns {
            out.push(run_instance(alpha, n, cfg)?.0);
        }
    }
    Ok(out)
}
