//! Hyperbolic structures on ideally triangulated 3-manifolds.
//!
//! The crate solves gluing, completeness and Dehn filling equations by
//! Newton's method, maximizes volume over angle structures, builds layered
//! triangulations of 2-bridge link complements, evaluates volumes through
//! the Lobachevsky function and computes isometric spheres for Ford domains.

pub mod angles;
pub mod error;
pub mod ford;
pub mod lobachevsky;
pub mod shapes;
pub mod triangulation;
pub mod twobridge;

pub use angles::{
    feasible_point, leading_trailing, maximize, polytope, shapes_from_angles, AnglePoint, AnglePolytope,
    MaxReport, MaxStatus, TangentVector,
};
pub use num_complex::Complex64;
pub use error::{Error, Result};
pub use ford::{
    dual_edges, enumerate, figure8_group, ford_svg, isometric_sphere, visible, CuspLattice, IsometricSphere,
    MoebiusMatrix, Window,
};
pub use lobachevsky::{lob, tet_volume, tet_volume_z, total_volume, AngleTriple};
pub use shapes::{
    complete_system, edge_rows, filling_system, holonomy_h, jacobian, newton_solve, residual,
    EquationSystem, NewtonOptions, Orientation, ShapeAssignment, SolveReport,
};
pub use triangulation::{
    cusps, edge_classes, parse, serialize, validate, CuspTriangulation, EdgeClass, NormalCurve,
    Tetrahedron, Triangulation,
};
