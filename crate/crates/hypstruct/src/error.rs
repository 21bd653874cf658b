use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid triangulation: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("cusp {cusp} has Euler characteristic {chi}, expected a torus")]
    CuspNotTorus { cusp: usize, chi: i64 },
    #[error("continued fraction {0} has fewer than two twist regions")]
    NotHyperbolic(String),
    #[error("tetrahedron {tet} is degenerate")]
    DegenerateShape { tet: usize },
    #[error("slope ({p},{q}) is not a pair of coprime integers")]
    BadSlope { p: i64, q: i64 },
    #[error("newton iteration did not converge after {iters} steps (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("jacobian is singular and the least-squares step stalled")]
    SingularJacobian,
    #[error("tetrahedron {tet} approached a degenerate shape")]
    DegenerateApproach { tet: usize },
    #[error("the angle structure polytope is empty")]
    Infeasible,
    #[error("starting point is not in the interior of the polytope")]
    NotInterior,
    #[error("matrix fixes infinity")]
    FixesInfinity,
    #[error("missing data: {0}")]
    Missing(String),
}

pub type Result<T> = std::result::Result<T, Error>;
