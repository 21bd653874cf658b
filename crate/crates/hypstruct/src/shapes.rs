//! Shape parameters and the gluing, completeness and Dehn filling equations.
//!
//! Every equation is kept in logarithmic form
//! `Σ a_i log z_i + Σ b_i log(1 − z_i) = target · πi` with integer
//! coefficients. The companion invariants are rewritten with
//! `log z′ = −log(1 − z)` and `log z″ = log(1 − z) − log z + πi`, so the
//! constant πi terms end up in the target.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lobachevsky::total_volume;
use crate::triangulation::{
    cusps, edge_classes, edge_index, peripheral_basis, NormalCurve, Triangulation, EDGE_KIND,
};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// One edge invariant per tetrahedron, with logarithms tracked continuously.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeAssignment {
    pub z: Vec<Complex64>,
    pub logz: Vec<Complex64>,
    pub log1mz: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Positive,
    Flat,
    Negative,
}

fn nearest_branch(value: Complex64, previous: Complex64) -> Complex64 {
    let k = ((previous.im - value.im) / TWO_PI).round();
    value + Complex64::new(0.0, TWO_PI * k)
}

impl ShapeAssignment {
    /// Shapes with principal logarithms.
    pub fn new(z: Vec<Complex64>) -> Self {
        let logz = z.iter().map(|z| z.ln()).collect();
        let log1mz = z.iter().map(|z| (one() - z).ln()).collect();
        Self { z, logz, log1mz }
    }

    pub fn uniform(n: usize, z: Complex64) -> Self {
        Self::new(vec![z; n])
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Move to new shapes, choosing each logarithm closest to its old value.
    pub fn moved_to(&self, z: Vec<Complex64>) -> Self {
        let logz = z.iter().zip(&self.logz).map(|(z, l)| nearest_branch(z.ln(), *l)).collect();
        let log1mz = z
            .iter()
            .zip(&self.log1mz)
            .map(|(z, l)| nearest_branch((one() - z).ln(), *l))
            .collect();
        Self { z, logz, log1mz }
    }

    /// `z′ = 1/(1 − z)`.
    pub fn z_prime(&self, i: usize) -> Complex64 {
        one() / (one() - self.z[i])
    }

    /// `z″ = (z − 1)/z`.
    pub fn z_double_prime(&self, i: usize) -> Complex64 {
        (self.z[i] - one()) / self.z[i]
    }

    /// Invariant of kind 0, 1 or 2 (`z`, `z′`, `z″`) of tetrahedron `i`.
    pub fn invariant(&self, i: usize, kind: usize) -> Complex64 {
        match kind {
            0 => self.z[i],
            1 => self.z_prime(i),
            _ => self.z_double_prime(i),
        }
    }

    pub fn classify(&self) -> Vec<Orientation> {
        self.z
            .iter()
            .map(|z| {
                if z.im > 0.0 {
                    Orientation::Positive
                } else if z.im < 0.0 {
                    Orientation::Negative
                } else {
                    Orientation::Flat
                }
            })
            .collect()
    }

    pub fn is_geometric(&self) -> bool {
        self.z.iter().all(|z| z.im > 0.0)
    }

    fn check_nondegenerate(&self, eps: f64) -> Result<()> {
        for (tet, z) in self.z.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() || z.norm() < eps || (one() - z).norm() < eps {
                return Err(Error::DegenerateShape { tet });
            }
        }
        Ok(())
    }
}

/// Integer coefficients of a log-linear expression
/// `Σ a_i log z_i + Σ b_i log(1 − z_i) + c · πi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogForm {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub c: i64,
}

impl LogForm {
    pub fn zero(n: usize) -> Self {
        Self { a: vec![0; n], b: vec![0; n], c: 0 }
    }

    /// Add `mult` copies of the log of invariant `kind` of tetrahedron `tet`.
    pub fn add_invariant(&mut self, tet: usize, kind: usize, mult: i64) {
        match kind {
            0 => self.a[tet] += mult,
            1 => self.b[tet] -= mult,
            _ => {
                self.a[tet] -= mult;
                self.b[tet] += mult;
                self.c += mult;
            }
        }
    }

    pub fn scaled_add(&mut self, other: &LogForm, k: i64) {
        for i in 0..self.a.len() {
            self.a[i] += k * other.a[i];
            self.b[i] += k * other.b[i];
        }
        self.c += k * other.c;
    }

    pub fn eval(&self, s: &ShapeAssignment) -> Complex64 {
        let mut v = Complex64::new(0.0, self.c as f64 * std::f64::consts::PI);
        for i in 0..self.a.len() {
            v += self.a[i] as f64 * s.logz[i] + self.b[i] as f64 * s.log1mz[i];
        }
        v
    }
}

/// The log-linear form of `log H(curve)`.
pub fn holonomy_form(curve: &NormalCurve, n: usize) -> LogForm {
    let mut f = LogForm::zero(n);
    for st in &curve.steps {
        let kind = EDGE_KIND[edge_index(st.vertex, st.corner)];
        f.add_invariant(st.tet, kind, st.eps as i64);
    }
    f
}

/// `H(curve) = Π z(corner)^ε` over the corners cut by the curve.
pub fn holonomy_h(curve: &NormalCurve, s: &ShapeAssignment) -> Result<Complex64> {
    let mut h = one();
    for st in &curve.steps {
        let kind = EDGE_KIND[edge_index(st.vertex, st.corner)];
        let w = s.invariant(st.tet, kind);
        if !(w.norm() > 0.0) || !w.norm().is_finite() {
            return Err(Error::DegenerateShape { tet: st.tet });
        }
        h *= if st.eps > 0 { w } else { one() / w };
    }
    Ok(h)
}

/// `log H(curve)` on the tracked branches.
pub fn log_holonomy(curve: &NormalCurve, s: &ShapeAssignment) -> Complex64 {
    holonomy_form(curve, s.len()).eval(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RowKind {
    Edge { edge: usize },
    Meridian { cusp: usize },
    Longitude { cusp: usize },
    Filling { cusp: usize, p: i64, q: i64 },
}

/// `Σ a_i log z_i + Σ b_i log(1 − z_i) = target · πi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub target: i64,
    pub kind: RowKind,
}

impl Row {
    fn from_form(form: LogForm, rhs: i64, kind: RowKind) -> Self {
        Row { a: form.a, b: form.b, target: rhs - form.c, kind }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquationSystem {
    pub n: usize,
    pub rows: Vec<Row>,
    /// Rows of the square subsystem handed to Newton's method.
    pub solve_rows: Vec<usize>,
}

/// One row per edge class.
pub fn edge_rows(t: &Triangulation) -> EquationSystem {
    let n = t.tets.len();
    let rows: Vec<Row> = edge_classes(t)
        .iter()
        .map(|class| {
            let mut f = LogForm::zero(n);
            for side in &class.sides {
                f.add_invariant(side.tet, EDGE_KIND[side.edge], 1);
            }
            Row::from_form(f, 2, RowKind::Edge { edge: class.id })
        })
        .collect();
    let solve_rows = (0..rows.len()).collect();
    EquationSystem { n, rows, solve_rows }
}

/// Meridian and longitude of each cusp: attached curves when present, a
/// spanning-tree basis otherwise.
pub fn peripheral_curves(t: &Triangulation) -> Result<Vec<(NormalCurve, NormalCurve)>> {
    let cs = cusps(t)?;
    Ok(cs
        .iter()
        .map(|c| match t.peripheral_for(c.id) {
            Some(p) => (p.meridian.clone(), p.longitude.clone()),
            None => peripheral_basis(t, c),
        })
        .collect())
}

/// Edge rows dropped for redundancy, one per cusp.
///
/// Around cusp `k` the edge rows satisfy `Σ_e m_{e,k} E_e = const`, where
/// `m_{e,k}` counts the ends of edge `e` at cusp `k`. For each cusp in turn we
/// drop the lowest edge touching it that keeps the matrix of end counts over
/// the dropped edges nonsingular, so the remaining rows stay independent.
fn dropped_edges(t: &Triangulation) -> Result<Vec<usize>> {
    let cs = cusps(t)?;
    let mut ends = vec![vec![0.0f64; cs.len()]; edge_classes(t).len()];
    for c in &cs {
        // Each end of an edge at a cusp is one vertex of the cusp triangulation.
        let mut seen = vec![false; c.num_vertices];
        for (i, tri) in c.triangles.iter().enumerate() {
            for u in (0..4u8).filter(|&u| u != tri.vertex) {
                let vx = c.corner_vertex[i][u as usize];
                if !seen[vx] {
                    seen[vx] = true;
                    ends[c.corner_edge[i][u as usize]][c.id] += 1.0;
                }
            }
        }
    }
    let mut dropped: Vec<usize> = Vec::new();
    for k in 0..cs.len() {
        for e in 0..ends.len() {
            if ends[e][k] == 0.0 || dropped.contains(&e) {
                continue;
            }
            let mut rows: Vec<Vec<f64>> = dropped.iter().map(|&d| ends[d][..=k].to_vec()).collect();
            rows.push(ends[e][..=k].to_vec());
            if full_rank(rows) {
                dropped.push(e);
                break;
            }
        }
    }
    Ok(dropped)
}

fn full_rank(mut m: Vec<Vec<f64>>) -> bool {
    let n = m.len();
    for col in 0..n {
        let Some(piv) = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())) else {
            return false;
        };
        if m[piv][col].abs() < 1e-9 {
            return false;
        }
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    true
}

/// Edge rows plus `log H = 0` for the meridian and longitude of every cusp.
pub fn complete_system(t: &Triangulation) -> Result<EquationSystem> {
    filling_system(t, &[])
}

/// Edge rows plus, per cusp, either a filling row for slope `(p, q)` or the
/// two completeness rows when the slope is `None` or absent.
pub fn filling_system(t: &Triangulation, slopes: &[Option<(i64, i64)>]) -> Result<EquationSystem> {
    for &(p, q) in slopes.iter().flatten() {
        if gcd(p, q) != 1 {
            return Err(Error::BadSlope { p, q });
        }
    }
    let mut sys = edge_rows(t);
    let n = sys.n;
    let dropped = dropped_edges(t)?;
    let mut solve_rows: Vec<usize> = (0..sys.rows.len()).filter(|e| !dropped.contains(e)).collect();
    for (cusp, (mer, lon)) in peripheral_curves(t)?.iter().enumerate() {
        let fm = holonomy_form(mer, n);
        let fl = holonomy_form(lon, n);
        match slopes.get(cusp).copied().flatten() {
            Some((p, q)) => {
                let mut f = LogForm::zero(n);
                f.scaled_add(&fm, p);
                f.scaled_add(&fl, q);
                solve_rows.push(sys.rows.len());
                sys.rows.push(Row::from_form(f, 2, RowKind::Filling { cusp, p, q }));
            }
            None => {
                solve_rows.push(sys.rows.len());
                sys.rows.push(Row::from_form(fm, 0, RowKind::Meridian { cusp }));
                sys.rows.push(Row::from_form(fl, 0, RowKind::Longitude { cusp }));
            }
        }
    }
    sys.solve_rows = solve_rows;
    Ok(sys)
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn row_value(row: &Row, s: &ShapeAssignment) -> Complex64 {
    let mut v = Complex64::new(0.0, -(row.target as f64) * std::f64::consts::PI);
    for i in 0..row.a.len() {
        if row.a[i] != 0 {
            v += row.a[i] as f64 * s.logz[i];
        }
        if row.b[i] != 0 {
            v += row.b[i] as f64 * s.log1mz[i];
        }
    }
    v
}

/// Row values `lhs − target · πi` on the tracked branches.
pub fn residual(sys: &EquationSystem, s: &ShapeAssignment) -> Result<Vec<Complex64>> {
    s.check_nondegenerate(1e-300)?;
    Ok(sys.rows.iter().map(|r| row_value(r, s)).collect())
}

/// Analytic derivatives `a_i / z_i − b_i / (1 − z_i)`, one row per equation.
pub fn jacobian(sys: &EquationSystem, s: &ShapeAssignment) -> Result<DMatrix<Complex64>> {
    s.check_nondegenerate(1e-300)?;
    let mut j = DMatrix::zeros(sys.rows.len(), sys.n);
    for (r, row) in sys.rows.iter().enumerate() {
        for i in 0..sys.n {
            let z = s.z[i];
            j[(r, i)] = row.a[i] as f64 / z - row.b[i] as f64 / (one() - z);
        }
    }
    Ok(j)
}

fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn two_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 100 }
    }
}

/// Outcome of a converged solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Max-norm of the residual over all rows, including dropped ones.
    pub residual: f64,
    pub classification: Vec<Orientation>,
    pub geometric: bool,
    pub volume: f64,
    pub shapes: Vec<[f64; 2]>,
}

impl SolveReport {
    fn new(iterations: usize, residual: f64, s: &ShapeAssignment) -> Self {
        Self {
            iterations,
            residual,
            classification: s.classify(),
            geometric: s.is_geometric(),
            volume: total_volume(s),
            shapes: s.z.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Solve the square subsystem with damped Newton steps, then check every row.
pub fn newton_solve(
    sys: &EquationSystem,
    start: &ShapeAssignment,
    opts: NewtonOptions,
) -> Result<(ShapeAssignment, SolveReport)> {
    let sub = EquationSystem {
        n: sys.n,
        rows: sys.solve_rows.iter().map(|&r| sys.rows[r].clone()).collect(),
        solve_rows: (0..sys.solve_rows.len()).collect(),
    };
    let mut s = start.clone();
    s.check_nondegenerate(1e-9).map_err(|e| match e {
        Error::DegenerateShape { tet } => Error::DegenerateApproach { tet },
        other => other,
    })?;
    let mut r = residual(&sub, &s)?;
    let mut iterations = 0;
    loop {
        let rn = inf_norm(&r);
        if rn <= opts.tol * 1e-2 {
            break;
        }
        if iterations >= opts.max_iter {
            if rn <= opts.tol {
                break;
            }
            return Err(Error::NoConvergence { iters: iterations, residual: rn });
        }
        let j = jacobian(&sub, &s)?;
        let rhs = DVector::from_iterator(r.len(), r.iter().map(|x| -x));
        let mut directions = Vec::with_capacity(2);
        if j.nrows() == j.ncols() {
            if let Some(dz) = j.clone().lu().solve(&rhs) {
                if dz.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
                    directions.push(dz);
                }
            }
        }
        directions.push(least_squares(&j, &rhs));

        let base = two_norm(&r);
        let mut accepted = None;
        'dirs: for dz in &directions {
            let mut step = 1.0;
            for _ in 0..=30 {
                let z: Vec<Complex64> = s.z.iter().zip(dz.iter()).map(|(z, d)| z + d * step).collect();
                let trial = s.moved_to(z);
                if let Ok(tr) = residual(&sub, &trial) {
                    if two_norm(&tr) < base {
                        accepted = Some((trial, tr));
                        break 'dirs;
                    }
                }
                step *= 0.5;
            }
        }
        iterations += 1;
        match accepted {
            Some((trial, tr)) => {
                if let Some(tet) = trial
                    .z
                    .iter()
                    .position(|z| z.norm() < 1e-9 || (one() - z).norm() < 1e-9)
                {
                    return Err(Error::DegenerateApproach { tet });
                }
                s = trial;
                r = tr;
            }
            None => {
                // No descent at all: fine if already within tolerance.
                if rn <= opts.tol {
                    break;
                }
                return Err(Error::SingularJacobian);
            }
        }
    }
    let full = inf_norm(&residual(sys, &s)?);
    if full > opts.tol {
        return Err(Error::NoConvergence { iters: iterations, residual: full });
    }
    let report = SolveReport::new(iterations, full, &s);
    Ok((s, report))
}

fn least_squares(j: &DMatrix<Complex64>, rhs: &DVector<Complex64>) -> DVector<Complex64> {
    let jh = j.adjoint();
    let mut normal = &jh * j;
    for i in 0..normal.nrows() {
        normal[(i, i)] += Complex64::new(1e-14, 0.0);
    }
    let b = &jh * rhs;
    normal
        .clone()
        .lu()
        .solve(&b)
        .unwrap_or_else(|| DVector::zeros(j.ncols()))
}
