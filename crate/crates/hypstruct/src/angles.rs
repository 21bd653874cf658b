//! Angle structures and the volume functional.
//!
//! An angle structure assigns one dihedral angle to each pair of opposite
//! edges of every tetrahedron, so a point is a `3n`-vector ordered as
//! `(α, β, γ)` per tetrahedron for the edge pairs `01/23`, `02/13`, `03/12`.
//! The angles of each tetrahedron sum to π and the angles around each edge
//! class sum to 2π; the open polytope of such points with every angle in
//! `(0, π)` is where the volume `V = Σ Λ(a_i)` is maximized.

use std::f64::consts::PI;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lobachevsky::{lob, AngleTriple};
use crate::shapes::ShapeAssignment;
use crate::triangulation::{edge_classes, edge_index, NormalCurve, Triangulation, EDGE_ANGLE_SLOT};

/// Equalities cutting out the angle structures of a triangulation, with an
/// orthonormal basis of their homogeneous solutions.
#[derive(Debug, Clone)]
pub struct AnglePolytope {
    pub n: usize,
    /// One row per tetrahedron followed by one row per edge class.
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// Columns span the tangent space; `3n × dimension`.
    pub basis: DMatrix<f64>,
    pinv: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnglePoint {
    pub a: Vec<f64>,
}

/// A direction inside the tangent space of the polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub w: Vec<f64>,
}

impl AnglePoint {
    pub fn new(a: Vec<f64>) -> Self {
        Self { a }
    }

    pub fn triple(&self, tet: usize) -> AngleTriple {
        AngleTriple::new(self.a[3 * tet], self.a[3 * tet + 1], self.a[3 * tet + 2])
    }

    /// Distance of the nearest coordinate to 0 or π.
    pub fn min_slack(&self) -> f64 {
        self.a.iter().map(|&x| x.min(PI - x)).fold(f64::INFINITY, f64::min)
    }

    pub fn is_interior(&self) -> bool {
        self.min_slack() > 0.0
    }
}

impl AnglePolytope {
    pub fn dimension(&self) -> usize {
        self.basis.ncols()
    }

    pub fn rank(&self) -> usize {
        3 * self.n - self.dimension()
    }

    /// Largest violation of an equality constraint.
    pub fn residual(&self, p: &AnglePoint) -> f64 {
        let r = &self.matrix * DVector::from_column_slice(&p.a) - &self.rhs;
        r.amax()
    }

    /// Nearest point of the affine solution space.
    pub fn project(&self, a: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(a);
        let r = &self.matrix * &x - &self.rhs;
        (x - &self.pinv * r).iter().copied().collect()
    }

    /// Equalities satisfied to `tol` and every angle strictly inside `(0, π)`.
    pub fn contains_interior(&self, p: &AnglePoint, tol: f64) -> bool {
        p.a.len() == 3 * self.n && p.is_interior() && self.residual(p) <= tol
    }

    /// The tangent vector with coordinates `x` in the basis.
    pub fn tangent(&self, x: &[f64]) -> TangentVector {
        let w = &self.basis * DVector::from_column_slice(x);
        TangentVector { w: w.iter().copied().collect() }
    }

    pub fn tangent_residual(&self, w: &TangentVector) -> f64 {
        (&self.matrix * DVector::from_column_slice(&w.w)).amax()
    }
}

pub fn polytope(t: &Triangulation) -> AnglePolytope {
    let n = t.len();
    let classes = edge_classes(t);
    let m = n + classes.len();
    let mut matrix = DMatrix::zeros(m, 3 * n);
    let mut rhs = DVector::zeros(m);
    for i in 0..n {
        for k in 0..3 {
            matrix[(i, 3 * i + k)] = 1.0;
        }
        rhs[i] = PI;
    }
    for (e, class) in classes.iter().enumerate() {
        for side in &class.sides {
            matrix[(n + e, 3 * side.tet + EDGE_ANGLE_SLOT[side.edge])] += 1.0;
        }
        rhs[n + e] = 2.0 * PI;
    }

    // Pad to a square matrix so the SVD returns a full set of right
    // singular vectors.
    let size = m.max(3 * n);
    let mut padded = DMatrix::zeros(size, 3 * n);
    padded.view_mut((0, 0), (m, 3 * n)).copy_from(&matrix);
    let svd = padded.svd(true, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax: f64 = svd.singular_values.max();
    let smax = smax.max(1.0);
    let null: Vec<usize> = (0..3 * n)
        .filter(|&i| svd.singular_values[i] <= 1e-10 * smax)
        .collect();
    let mut basis = DMatrix::zeros(3 * n, null.len());
    for (j, &i) in null.iter().enumerate() {
        basis.set_column(j, &v_t.row(i).transpose());
    }
    let pinv = matrix
        .clone()
        .svd(true, true)
        .pseudo_inverse(1e-10 * smax)
        .expect("singular vectors requested");
    AnglePolytope { n, matrix, rhs, basis, pinv }
}

/// The point maximizing the smallest distance of any angle to 0 or π.
///
/// Fails with `Infeasible` when no point has every angle strictly inside
/// `(0, π)`.
pub fn feasible_point(p: &AnglePolytope) -> Result<AnglePoint> {
    let nv = 3 * p.n;
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..nv).map(|_| lp.add_var(0.0, (0.0, PI))).collect();
    let s = lp.add_var(1.0, (0.0, PI / 3.0));
    for r in 0..p.matrix.nrows() {
        let expr: Vec<_> = (0..nv)
            .filter(|&c| p.matrix[(r, c)] != 0.0)
            .map(|c| (vars[c], p.matrix[(r, c)]))
            .collect();
        lp.add_constraint(expr, ComparisonOp::Eq, p.rhs[r]);
    }
    for &v in &vars {
        lp.add_constraint([(v, 1.0), (s, -1.0)], ComparisonOp::Ge, 0.0);
        lp.add_constraint([(v, 1.0), (s, 1.0)], ComparisonOp::Le, PI);
    }
    let sol = lp.solve().map_err(|_| Error::Infeasible)?;
    if sol[s] <= 1e-9 {
        return Err(Error::Infeasible);
    }
    let raw: Vec<f64> = vars.iter().map(|&v| sol[v]).collect();
    let point = AnglePoint::new(p.project(&raw));
    if !point.is_interior() {
        return Err(Error::Infeasible);
    }
    Ok(point)
}

/// `V = Σ Λ(a_i)`.
pub fn volume(p: &AnglePoint) -> f64 {
    p.a.iter().map(|&x| lob(x)).sum()
}

/// Partial derivatives `−log(2 sin a_i)` and whether all of them are finite.
///
/// Along a tangent vector the constant `log 2` cancels within each
/// tetrahedron, which leaves `Σ −w_i log sin a_i`.
pub fn gradient(p: &AnglePoint) -> (Vec<f64>, bool) {
    let g: Vec<f64> = p.a.iter().map(|&x| -(2.0 * x.sin()).ln()).collect();
    let bounded = g.iter().all(|v| v.is_finite());
    (g, bounded)
}

/// Derivative of `V` at `p` along `w`.
pub fn directional_derivative(p: &AnglePoint, w: &TangentVector) -> f64 {
    p.a.iter().zip(&w.w).map(|(&x, &wi)| -wi * x.sin().ln()).sum()
}

/// The leading–trailing deformation of a normal curve: in each triangle the
/// curve crosses, +1 on the corner opposite the side it enters and −1 on the
/// corner opposite the side it leaves.
pub fn leading_trailing(curve: &NormalCurve, n: usize) -> TangentVector {
    let mut w = vec![0.0; 3 * n];
    for st in &curve.steps {
        let (entry, exit) = st.entry_exit();
        w[3 * st.tet + EDGE_ANGLE_SLOT[edge_index(st.vertex, entry)]] += 1.0;
        w[3 * st.tet + EDGE_ANGLE_SLOT[edge_index(st.vertex, exit)]] -= 1.0;
    }
    TangentVector { w }
}

/// Shapes `z = (sin γ / sin β) e^{iα}` of an interior angle structure.
pub fn shapes_from_angles(p: &AnglePoint) -> Result<ShapeAssignment> {
    let n = p.a.len() / 3;
    let mut z = Vec::with_capacity(n);
    for tet in 0..n {
        let t = p.triple(tet);
        if [t.alpha, t.beta, t.gamma].iter().any(|&x| x <= 0.0 || x >= PI) {
            return Err(Error::DegenerateShape { tet });
        }
        z.push(Complex64::from_polar(t.gamma.sin() / t.beta.sin(), t.alpha));
    }
    Ok(ShapeAssignment::new(z))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MaxStatus {
    InteriorMax,
    BoundaryMax,
}

/// A tetrahedron flattened at a boundary maximum, with its limiting angles
/// rounded to 0 or π.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatTet {
    pub tet: usize,
    pub angles: [f64; 3],
    pub pattern: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxReport {
    pub status: MaxStatus,
    pub volume: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub min_angle: f64,
    pub flat: Vec<FlatTet>,
}

const BOUNDARY_ANGLE: f64 = 1e-7;

/// Maximize `V` from the interior point `p0`.
///
/// Steps are Newton steps in the coordinates of the tangent basis, falling
/// back to the reduced gradient when the reduced Hessian is not negative
/// definite, and halved until the new point is interior and `V` does not
/// drop. The maximum is interior once the reduced gradient is below `tol`,
/// and on the boundary once some angle falls below 1e-7 first.
pub fn maximize(p0: &AnglePoint, pol: &AnglePolytope, tol: f64) -> Result<(AnglePoint, MaxReport)> {
    if !pol.contains_interior(p0, 1e-9) {
        return Err(Error::NotInterior);
    }
    let basis = &pol.basis;
    let mut a = pol.project(&p0.a);
    let mut v = volume(&AnglePoint::new(a.clone()));
    let mut iterations = 0;
    let mut gnorm: f64;
    let max_iter = 500;
    let status = loop {
        let point = AnglePoint::new(a.clone());
        let (g, _) = gradient(&point);
        let gr = basis.transpose() * DVector::from_vec(g);
        gnorm = gr.norm();
        if gnorm <= tol || basis.ncols() == 0 {
            break MaxStatus::InteriorMax;
        }
        if point.min_slack() < BOUNDARY_ANGLE {
            break MaxStatus::BoundaryMax;
        }
        if iterations >= max_iter {
            return Err(Error::NoConvergence { iters: iterations, residual: gnorm });
        }
        iterations += 1;

        let d = DVector::from_iterator(a.len(), a.iter().map(|&x| 1.0 / x.tan()));
        let mut neg_hess = basis.transpose() * DMatrix::from_diagonal(&d) * basis;
        neg_hess.fill_lower_triangle_with_upper_triangle();
        let newton = neg_hess.cholesky().map(|c| c.solve(&gr));
        let mut directions = Vec::with_capacity(2);
        if let Some(dx) = newton {
            if dx.iter().all(|x| x.is_finite()) {
                directions.push(dx);
            }
        }
        directions.push(gr.clone());

        let mut moved = false;
        'dirs: for dx in &directions {
            let da = basis * dx;
            let mut step = 1.0;
            for _ in 0..80 {
                let trial: Vec<f64> = a.iter().zip(da.iter()).map(|(x, d)| x + step * d).collect();
                if trial.iter().all(|&x| x > 0.0 && x < PI) {
                    let tv = volume(&AnglePoint::new(trial.clone()));
                    if tv >= v - 1e-15 {
                        a = trial;
                        v = tv;
                        moved = true;
                        break 'dirs;
                    }
                }
                step *= 0.5;
            }
        }
        if !moved {
            break if AnglePoint::new(a.clone()).min_slack() < 1e-5 {
                MaxStatus::BoundaryMax
            } else {
                MaxStatus::InteriorMax
            };
        }
        if iterations % 20 == 0 {
            let projected = pol.project(&a);
            if projected.iter().all(|&x| x > 0.0 && x < PI) {
                a = projected;
            }
        }
    };
    let point = AnglePoint::new(a);
    let flat = (0..pol.n)
        .filter_map(|tet| {
            let t = point.triple(tet);
            let angles = [t.alpha, t.beta, t.gamma];
            if angles.iter().all(|&x| x.min(PI - x) > 1e-5) {
                return None;
            }
            let pattern = angles.map(|x| if x > PI / 2.0 { PI } else { 0.0 });
            Some(FlatTet { tet, angles, pattern })
        })
        .collect();
    let report = MaxReport {
        status,
        volume: volume(&point),
        iterations,
        gradient_norm: gnorm,
        min_angle: point.a.iter().copied().fold(f64::INFINITY, f64::min),
        flat,
    };
    Ok((point, report))
}
