use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate triangle: |2*area| = {twice_area:e} <= {tol:e} * h^2 (h^2 = {h_squared:e})")]
    DegenerateTriangle {
        twice_area: f64,
        h_squared: f64,
        tol: f64,
    },

    /// The Kobayashi radicand came out clearly negative. This cannot happen
    /// for a valid triangle and points at a formula bug.
    #[error("negative radicand in interpolation constant: {0:e}")]
    NegativeRadicand(f64),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("mesh too fine: {triangles} triangles requested, cap is {cap}")]
    TooFine { triangles: u64, cap: u64 },

    #[error("conformity violation: {0}")]
    Conformity(ConformityViolation),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported mesh format header {0:?}")]
    FormatVersion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("field has no Hessian, required for the bound columns")]
    MissingHessian,

    #[error("problem has no exact solution attached")]
    MissingExact,

    #[error("conjugate gradient hit {iterations} iterations (relative residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("size cap exceeded: {size} > {cap}")]
    SizeCap { size: u64, cap: u64 },

    #[error("inconclusive limit estimate: {0}")]
    Inconclusive(String),

    #[error("non-finite value {value} at ({x}, {y})")]
    NonFinite { x: f64, y: f64, value: f64 },

    #[error("unsupported quadrature degree {0}")]
    QuadratureDegree(usize),
}

/// First offending item found by the mesh validator.
#[derive(Debug, Clone, PartialEq)]
pub enum ConformityViolation {
    IndexOutOfRange { triangle: usize, index: usize },
    NonPositiveArea { triangle: usize, signed_area: f64 },
    /// An oriented edge appears twice, or an edge is shared by more than two triangles.
    EdgeOverused { edge: (usize, usize), first: usize, second: usize },
    /// An edge used by a single triangle that does not lie on the domain boundary.
    OpenEdge { edge: (usize, usize), triangle: usize },
    Coverage { covered: f64, expected: f64 },
    BoundaryFlag { vertex: usize, flagged: bool },
    VertexOutsideDomain { vertex: usize },
}

impl fmt::Display for ConformityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IndexOutOfRange { triangle, index } => {
                write!(f, "triangle {triangle} references missing vertex {index}")
            }
            Self::NonPositiveArea {
                triangle,
                signed_area,
            } => write!(f, "triangle {triangle} has signed area {signed_area:e} (negative area or clockwise)"),
            Self::EdgeOverused {
                edge,
                first,
                second,
            } => write!(
                f,
                "edge ({}, {}) shared by >2 triangles or overlapping orientation (triangles {first} and {second})",
                edge.0, edge.1
            ),
            Self::OpenEdge { edge, triangle } => write!(
                f,
                "edge ({}, {}) of triangle {triangle} has no neighbour and is not on the boundary",
                edge.0, edge.1
            ),
            Self::Coverage { covered, expected } => {
                write!(f, "triangles cover area {covered} but the domain has area {expected}")
            }
            Self::BoundaryFlag { vertex, flagged } => {
                write!(f, "vertex {vertex} has boundary flag {flagged}, which disagrees with its position")
            }
            Self::VertexOutsideDomain { vertex } => write!(f, "vertex {vertex} lies outside the domain"),
        }
    }
}
