#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use hypstruct::triangulation::{parse, Triangulation};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture readable")
}

pub fn fixture(name: &str) -> Triangulation {
    parse(&fixture_text(name)).expect("fixture parses")
}

/// `−∫₀^θ log|2 sin u| du` by tanh-sinh quadrature, for `θ ∈ (0, π)`.
///
/// The substitution `u = θ/2 · (1 + tanh(π/2 · sinh s))` clusters nodes at
/// both ends, which absorbs the logarithmic singularity at `u = 0`. The
/// distance to the left end is formed directly so it keeps full relative
/// precision as `u → 0`.
pub fn lob_quadrature(theta: f64) -> f64 {
    assert!(theta > 0.0 && theta < PI);
    let h = 1.0 / 64.0;
    let half = theta / 2.0;
    let f = |u: f64| -(2.0 * u.sin()).abs().ln();
    let mut sum = 0.0;
    let mut k = 0i64;
    loop {
        let s = k as f64 * h;
        let q = 0.5 * PI * s.sinh();
        let w = 0.5 * PI * s.cosh() / q.cosh().powi(2);
        // 1 − tanh q and 1 + tanh q without cancellation.
        let left = 2.0 / (1.0 + (2.0 * q).exp());
        let right = 2.0 / (1.0 + (-2.0 * q).exp());
        let mut term = w * f(half * left);
        if k > 0 {
            term += w * f(half * right);
        }
        if !term.is_finite() {
            break;
        }
        sum += term;
        if k > 0 && term.abs() < 1e-20 {
            break;
        }
        k += 1;
        if k > 10_000 {
            break;
        }
    }
    sum * half * h
}

use std::collections::BTreeMap;

use hypstruct::triangulation::{ccw_next, NormalCurve};

/// A triangle side `(tet, vertex, face)` in canonical form, with the sign
/// relating its counterclockwise direction to the canonical one.
fn canonical_side(t: &Triangulation, tet: usize, v: u8, f: u8) -> ((usize, u8, u8), i64) {
    let (nt, p) = t.glue(tet, f);
    let other = (nt, p[v as usize], p[f as usize]);
    if (tet, v, f) <= other {
        ((tet, v, f), 1)
    } else {
        // Orientation reversing gluings make the two triangles traverse the
        // shared side in opposite directions.
        (other, -1)
    }
}

/// Algebraic intersection number of two normal curves on a cusp torus,
/// counted by brute force.
///
/// Each arc of `a` cutting off a corner is slid into that corner, turning `a`
/// into a closed path along triangle sides. The crossings of `b` with every
/// side are then summed against that edge path.
pub fn brute_intersection(t: &Triangulation, a: &NormalCurve, b: &NormalCurve) -> i64 {
    let mut path: BTreeMap<(usize, u8, u8), i64> = BTreeMap::new();
    let m = a.steps.len();
    for j in 0..m {
        let s = a.steps[j];
        let next = a.steps[(j + 1) % m];
        let (_, exit) = s.entry_exit();
        let (nt, p) = t.glue(s.tet, exit);
        assert_eq!((nt, p[s.vertex as usize]), (next.tet, next.vertex), "curve does not chain");
        if p[s.corner as usize] == next.corner {
            continue;
        }
        let start = ccw_next(s.vertex, exit);
        let dir = if s.corner == start { 1 } else { -1 };
        let (key, sign) = canonical_side(t, s.tet, s.vertex, exit);
        *path.entry(key).or_insert(0) += dir * sign;
    }
    // Leaving a triangle crosses its counterclockwise side from left to
    // right, which counts negatively when `(a, b)` is to be positive.
    let mut total = 0;
    for s in &b.steps {
        let (_, exit) = s.entry_exit();
        let (key, sign) = canonical_side(t, s.tet, s.vertex, exit);
        total -= sign * path.get(&key).copied().unwrap_or(0);
    }
    total
}

use hypstruct::angles::{feasible_point, maximize, polytope, shapes_from_angles};
use hypstruct::shapes::{complete_system, newton_solve, NewtonOptions, ShapeAssignment, SolveReport};

/// Complete structure by Newton's method, started from the shapes of the
/// volume maximizing angle structure.
pub fn solve_complete(t: &Triangulation) -> (ShapeAssignment, SolveReport) {
    let pol = polytope(t);
    let p0 = feasible_point(&pol).expect("angle structure exists");
    let (p, _) = maximize(&p0, &pol, 1e-10).expect("maximizer");
    let start = shapes_from_angles(&p).expect("interior maximizer");
    let sys = complete_system(t).expect("torus cusps");
    newton_solve(&sys, &start, NewtonOptions::default()).expect("newton converges")
}

pub fn two_bridge(code: &[i64]) -> Triangulation {
    use hypstruct::twobridge::{build, normalize_cf};
    build(&normalize_cf(code).unwrap()).unwrap().triangulation
}
