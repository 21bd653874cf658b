//! Normal curves on cusp triangulations.
//!
//! A curve is a cyclic list of corner cuts. In the triangle at vertex `v` of
//! tetrahedron `tet`, the step cuts off corner `corner`. With `(corner, x, y)`
//! in counterclockwise order, a step with `eps = +1` enters through side `y`
//! and leaves through side `x`, so the cut corner lies on its left; `eps = −1`
//! runs the other way.

use std::collections::{BTreeMap, VecDeque};

use super::cusp::CuspTriangulation;
use super::{ccw_next, Triangulation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step {
    pub tet: usize,
    pub vertex: u8,
    pub corner: u8,
    pub eps: i8,
}

impl Step {
    /// Faces through which the step enters and leaves.
    pub fn entry_exit(&self) -> (u8, u8) {
        let x = ccw_next(self.vertex, self.corner);
        let y = ccw_next(self.vertex, x);
        if self.eps > 0 {
            (y, x)
        } else {
            (x, y)
        }
    }

    fn from_faces(tet: usize, vertex: u8, entry: u8, exit: u8) -> Step {
        let corner = (0..4u8).find(|&u| u != vertex && u != entry && u != exit).unwrap();
        let eps = if ccw_next(vertex, corner) == exit { 1 } else { -1 };
        Step { tet, vertex, corner, eps }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalCurve {
    pub cusp: usize,
    pub steps: Vec<Step>,
}

/// One crossing of a walk in the dual graph: leave triangle `(tet, vertex)`
/// through side `exit`.
type Crossing = (usize, u8, u8);

impl NormalCurve {
    /// Why the curve is not a closed normal curve on `t`, if it is not.
    pub fn check(&self, t: &Triangulation) -> Result<(), String> {
        let k = self.steps.len();
        if k == 0 {
            return Err("curve has no steps".into());
        }
        for (i, s) in self.steps.iter().enumerate() {
            if s.tet >= t.tets.len() || s.vertex > 3 || s.corner > 3 || s.corner == s.vertex {
                return Err(format!("step {i} is not a corner of a tetrahedron"));
            }
            if s.eps != 1 && s.eps != -1 {
                return Err(format!("step {i} has sign {} (must be ±1)", s.eps));
            }
        }
        for i in 0..k {
            let s = self.steps[i];
            let next = self.steps[(i + 1) % k];
            let (_, exit) = s.entry_exit();
            let (nt, p) = t.glue(s.tet, exit);
            let (entry, _) = next.entry_exit();
            if next.tet != nt || next.vertex != p[s.vertex as usize] || entry != p[exit as usize] {
                return Err(format!("steps {i} and {} do not cross a common side", (i + 1) % k));
            }
        }
        Ok(())
    }

    /// The same curve traversed backwards.
    pub fn reversed(&self) -> NormalCurve {
        let steps = self.steps.iter().rev().map(|s| Step { eps: -s.eps, ..*s }).collect();
        NormalCurve { cusp: self.cusp, steps }
    }

    /// Build a curve from a closed walk in the dual graph, cancelling
    /// immediate backtracks.
    pub(crate) fn from_walk(t: &Triangulation, cusp: usize, walk: &[Crossing]) -> NormalCurve {
        let entry_after = |c: &Crossing| -> (usize, u8, u8) {
            let (nt, p) = t.glue(c.0, c.2);
            (nt, p[c.1 as usize], p[c.2 as usize])
        };
        let backtracks = |a: &Crossing, b: &Crossing| -> bool {
            let (nt, nv, entry) = entry_after(a);
            b.0 == nt && b.1 == nv && b.2 == entry
        };
        let mut stack: Vec<Crossing> = Vec::with_capacity(walk.len());
        for c in walk {
            if let Some(top) = stack.last() {
                if backtracks(top, c) {
                    stack.pop();
                    continue;
                }
            }
            stack.push(*c);
        }
        let mut dq: VecDeque<Crossing> = stack.into();
        while dq.len() >= 2 && backtracks(dq.back().unwrap(), dq.front().unwrap()) {
            dq.pop_back();
            dq.pop_front();
        }
        let cs: Vec<Crossing> = dq.into();
        let k = cs.len();
        let mut steps = Vec::with_capacity(k);
        for i in 0..k {
            let prev = cs[(i + k - 1) % k];
            let (_, _, entry) = entry_after(&prev);
            let c = cs[i];
            steps.push(Step::from_faces(c.0, c.1, entry, c.2));
        }
        NormalCurve { cusp, steps }
    }
}

/// Walk once around a closed path of triangle sides, just to its left.
///
/// `path` lists sides `(tet, vertex, face)` oriented counterclockwise in
/// their own triangle, so the named triangle lies on the left; consecutive
/// sides share the cusp vertex where one ends and the next begins. Returns
/// `None` if the sides do not chain up.
pub fn push_off_left(
    t: &Triangulation,
    cusp: &CuspTriangulation,
    path: &[(usize, u8, u8)],
) -> Option<NormalCurve> {
    let m = path.len();
    if m == 0 {
        return None;
    }
    let limit = 4 * cusp.len() + 4;
    let mut walk: Vec<Crossing> = Vec::new();
    for j in 0..m {
        let (tt, v, f) = path[j];
        let x = ccw_next(v, f);
        let y = ccw_next(v, x);
        let target = path[(j + 1) % m];
        // Rotate clockwise about the end corner `y`, starting inside this
        // triangle, until the next side appears as the far side at that corner.
        let (mut ct, mut cv, mut corner, mut cross) = (tt, v, y, x);
        let mut steps = 0;
        loop {
            if (ct, cv) == (target.0, target.1)
                && corner == ccw_next(target.1, target.2)
                && cross == target.2
            {
                break;
            }
            walk.push((ct, cv, cross));
            let (nt, p) = t.glue(ct, cross);
            let (nv, ncorner, entry) = (p[cv as usize], p[corner as usize], p[cross as usize]);
            cross = (0..4u8).find(|&w| w != nv && w != ncorner && w != entry).unwrap();
            ct = nt;
            cv = nv;
            corner = ncorner;
            steps += 1;
            if steps > limit {
                return None;
            }
        }
    }
    Some(NormalCurve::from_walk(t, cusp.id, &walk))
}

/// Signed intersection number of two curves on the same cusp.
///
/// `a` is pushed to its left onto the triangle sides and the crossings of `b`
/// with that edge path are counted with sign.
pub fn intersection_number(t: &Triangulation, a: &NormalCurve, b: &NormalCurve) -> i64 {
    // traversals[(tet, vertex, face)] counts how often the pushed path runs
    // along that side with the triangle on its right.
    let mut traversals: BTreeMap<(usize, u8, u8), i64> = BTreeMap::new();
    for s in &a.steps {
        if s.eps < 0 {
            *traversals.entry((s.tet, s.vertex, s.corner)).or_insert(0) += 1;
        }
    }
    let mut total = 0;
    for s in &b.steps {
        let (_, exit) = s.entry_exit();
        let (nt, p) = t.glue(s.tet, exit);
        total += traversals.get(&(s.tet, s.vertex, exit)).copied().unwrap_or(0);
        total -= traversals
            .get(&(nt, p[s.vertex as usize], p[exit as usize]))
            .copied()
            .unwrap_or(0);
    }
    total
}

fn reverse_walk(t: &Triangulation, w: &[Crossing]) -> Vec<Crossing> {
    w.iter()
        .rev()
        .map(|&(tt, v, f)| {
            let (n2, p) = t.glue(tt, f);
            (n2, p[v as usize], p[f as usize])
        })
        .collect()
}

/// Closed dual walks based at the first triangle, one per side outside a
/// breadth first spanning tree.
fn fundamental_cycles(t: &Triangulation, cusp: &CuspTriangulation) -> Vec<Vec<Crossing>> {
    let nt = cusp.len();
    let mut parent: Vec<Option<Crossing>> = vec![None; nt];
    let mut visited = vec![false; nt];
    let mut tree_side = vec![[false; 4]; nt];
    let mut queue = VecDeque::from([0usize]);
    visited[0] = true;
    while let Some(i) = queue.pop_front() {
        let c = cusp.triangles[i];
        for f in (0..4u8).filter(|&f| f != c.vertex) {
            let (j, g) = cusp.neighbors[i][f as usize].unwrap();
            if !visited[j] {
                visited[j] = true;
                parent[j] = Some((c.tet, c.vertex, f));
                tree_side[i][f as usize] = true;
                tree_side[j][g as usize] = true;
                queue.push_back(j);
            }
        }
    }
    let path_from_root = |mut i: usize| -> Vec<Crossing> {
        let mut rev = Vec::new();
        while let Some(c) = parent[i] {
            rev.push(c);
            i = cusp.index_of(c.0, c.1).unwrap();
        }
        rev.reverse();
        rev
    };
    let mut cycles = Vec::new();
    for i in 0..nt {
        let c = cusp.triangles[i];
        for f in (0..4u8).filter(|&f| f != c.vertex) {
            if tree_side[i][f as usize] {
                continue;
            }
            let (j, g) = cusp.neighbors[i][f as usize].unwrap();
            if (j, g) < (i, f) {
                continue;
            }
            let mut w = path_from_root(i);
            w.push((c.tet, c.vertex, f));
            w.extend(reverse_walk(t, &path_from_root(j)));
            cycles.push(w);
        }
    }
    cycles
}

fn realize(t: &Triangulation, cusp: usize, cycles: &[Vec<Crossing>], combo: &[i64]) -> NormalCurve {
    let mut w = Vec::new();
    for (c, &m) in combo.iter().enumerate() {
        let piece = if m >= 0 { cycles[c].clone() } else { reverse_walk(t, &cycles[c]) };
        for _ in 0..m.abs() {
            w.extend_from_slice(&piece);
        }
    }
    NormalCurve::from_walk(t, cusp, &w)
}

/// Integer combinations of `vals` reduced by the Euclidean algorithm: returns
/// the gcd and the coefficients reaching it.
fn gcd_combination(vals: &[i64]) -> (i64, Vec<i64>) {
    let k = vals.len();
    let mut rows: Vec<(i64, Vec<i64>)> = (0..k)
        .map(|i| {
            let mut c = vec![0; k];
            c[i] = 1;
            (vals[i], c)
        })
        .collect();
    loop {
        let mut live: Vec<usize> = (0..k).filter(|&r| rows[r].0 != 0).collect();
        if live.len() <= 1 {
            return match live.first() {
                Some(&r) => rows[r].clone(),
                None => (0, vec![0; k]),
            };
        }
        live.sort_by_key(|&r| (rows[r].0.abs(), r));
        let pivot = live[0];
        let (pv, pc) = rows[pivot].clone();
        for &r in &live[1..] {
            let q = rows[r].0 / pv;
            rows[r].0 -= q * pv;
            for (x, y) in rows[r].1.iter_mut().zip(&pc) {
                *x -= q * y;
            }
        }
    }
}

/// A curve `λ` on the cusp of `mu` with intersection number `I(mu, λ) = 1`.
///
/// Returns `None` when `mu` is not primitive in homology.
pub fn transverse_curve(t: &Triangulation, cusp: &CuspTriangulation, mu: &NormalCurve) -> Option<NormalCurve> {
    let cycles = fundamental_cycles(t, cusp);
    let curves: Vec<NormalCurve> = cycles.iter().map(|w| NormalCurve::from_walk(t, cusp.id, w)).collect();
    let vals: Vec<i64> = curves
        .iter()
        .map(|c| if c.steps.is_empty() { 0 } else { intersection_number(t, mu, c) })
        .collect();
    let direct = (0..curves.len())
        .filter(|&k| vals[k].abs() == 1)
        .min_by_key(|&k| (curves[k].steps.len(), k));
    if let Some(k) = direct {
        let c = curves[k].clone();
        return Some(if vals[k] == 1 { c } else { c.reversed() });
    }
    let (g, combo) = gcd_combination(&vals);
    if g.abs() != 1 {
        return None;
    }
    let c = realize(t, cusp.id, &cycles, &combo);
    Some(if g == 1 { c } else { c.reversed() })
}

/// A homology basis of a torus cusp from a spanning tree of its dual graph.
///
/// Fundamental cycles of the tree are rooted at the first triangle; the first
/// pair in order with intersection number ±1 is returned, and integer
/// combinations are formed when no single pair qualifies.
pub fn peripheral_basis(t: &Triangulation, cusp: &CuspTriangulation) -> (NormalCurve, NormalCurve) {
    let cycles = fundamental_cycles(t, cusp);
    let curves: Vec<NormalCurve> = cycles.iter().map(|w| NormalCurve::from_walk(t, cusp.id, w)).collect();
    let k = curves.len();
    let mut form = vec![vec![0i64; k]; k];
    for a in 0..k {
        for b in 0..k {
            if a != b && !curves[a].steps.is_empty() && !curves[b].steps.is_empty() {
                form[a][b] = intersection_number(t, &curves[a], &curves[b]);
            }
        }
    }
    for a in 0..k {
        for b in (a + 1)..k {
            if form[a][b].abs() == 1 {
                return (curves[a].clone(), curves[b].clone());
            }
        }
    }
    // Otherwise a primitive cycle or a small combination of two cycles,
    // completed by a transverse partner.
    for a in 0..k {
        if let Some(lam) = transverse_curve(t, cusp, &curves[a]) {
            return (curves[a].clone(), lam);
        }
    }
    let mut best = None;
    'outer: for a in 0..k {
        for b in 0..k {
            for m in 1..=4i64 {
                if b == a {
                    continue;
                }
                let mut combo = vec![0i64; k];
                combo[a] = 1;
                combo[b] = m;
                let mu = realize(t, cusp.id, &cycles, &combo);
                if mu.steps.is_empty() {
                    continue;
                }
                if let Some(lam) = transverse_curve(t, cusp, &mu) {
                    best = Some((mu, lam));
                    break 'outer;
                }
            }
        }
    }
    best.expect("a torus cusp has a primitive cycle")
}
