//! Combinatorial ideal triangulations.
//!
//! A tetrahedron has vertices `0..4`; face `f` is the face opposite vertex `f`.
//! Each face carries a gluing `(target, perm)` where `perm` sends the vertices
//! of this tetrahedron to those of `target`, so face `f` is glued to face
//! `perm[f]` of the target. Edges are numbered `0..6` by the vertex pairs
//! `01, 02, 03, 12, 13, 23`, which makes the opposite of edge `e` equal `5 − e`.
//!
//! A consistently oriented triangulation uses odd permutations throughout.
//! Under that convention the far vertices `(a, b, c)` of vertex `v` are in
//! counterclockwise order, seen from the cusp, when `[v, a, c, b]` is an even
//! permutation.

mod curves;
mod cusp;
mod io;
mod svg;

pub use curves::{
    intersection_number, peripheral_basis, push_off_left, transverse_curve, NormalCurve, Step,
};
pub use cusp::{cusp_components, cusps, CornerTriangle, CuspTriangulation};
pub use io::{parse, serialize};
pub use svg::{cusp_svg, develop};

pub type Perm = [u8; 4];

pub const IDENTITY: Perm = [0, 1, 2, 3];

/// Vertex pairs of the six edges.
pub const EDGE_VERTS: [(u8, u8); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Index of the edge joining vertices `a` and `b`.
pub fn edge_index(a: u8, b: u8) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => panic!("no edge between {a} and {b}"),
    }
}

/// Which edge invariant sits on an edge: 0 for `z`, 1 for `z′ = 1/(1−z)`,
/// 2 for `z″ = (z−1)/z`.
pub const EDGE_KIND: [usize; 6] = [0, 2, 1, 1, 2, 0];

/// Slot of an edge in the per-tetrahedron angle triple `(α, β, γ)`, which
/// belongs to the edge pairs `(01/23, 02/13, 03/12)`.
pub const EDGE_ANGLE_SLOT: [usize; 6] = [0, 1, 2, 2, 1, 0];

pub fn perm_inverse(p: &Perm) -> Perm {
    let mut q = [0u8; 4];
    for i in 0..4 {
        q[p[i] as usize] = i as u8;
    }
    q
}

pub fn perm_compose(p: &Perm, q: &Perm) -> Perm {
    // (p ∘ q)(i) = p[q[i]]
    [p[q[0] as usize], p[q[1] as usize], p[q[2] as usize], p[q[3] as usize]]
}

pub fn is_perm(p: &Perm) -> bool {
    let mut seen = [false; 4];
    for &x in p {
        if x > 3 || seen[x as usize] {
            return false;
        }
        seen[x as usize] = true;
    }
    true
}

/// True for even permutations.
pub fn perm_is_even(p: &Perm) -> bool {
    let mut inversions = 0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 0
}

/// Far vertices of `v` in counterclockwise order, starting from the smallest.
pub fn ccw(v: u8) -> [u8; 3] {
    let far: Vec<u8> = (0..4).filter(|&x| x != v).collect();
    let (a, b, c) = (far[0], far[1], far[2]);
    if perm_is_even(&[v, a, c, b]) {
        [a, b, c]
    } else {
        [a, c, b]
    }
}

/// The far vertex of `v` that follows `u` counterclockwise.
pub fn ccw_next(v: u8, u: u8) -> u8 {
    let order = ccw(v);
    let i = order.iter().position(|&x| x == u).expect("u must be a far vertex of v");
    order[(i + 1) % 3]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tetrahedron {
    pub gluings: [(usize, Perm); 4],
}

/// One position of a tetrahedron edge in the cyclic list around an edge class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeSide {
    pub tet: usize,
    pub edge: usize,
    /// +1 when the edge is traversed from its lower to its higher vertex.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeClass {
    pub id: usize,
    pub sides: Vec<EdgeSide>,
}

/// Meridian and longitude attached to one cusp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Peripheral {
    pub meridian: NormalCurve,
    pub longitude: NormalCurve,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    pub name: String,
    pub tets: Vec<Tetrahedron>,
    /// Peripheral curves, one entry per cusp in cusp order. May be empty.
    pub peripheral: Vec<Peripheral>,
}

impl Triangulation {
    pub fn new(name: impl Into<String>, tets: Vec<Tetrahedron>) -> Self {
        Self { name: name.into(), tets, peripheral: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.tets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tets.is_empty()
    }

    /// The tetrahedron and permutation across face `f` of tetrahedron `t`.
    pub fn glue(&self, t: usize, f: u8) -> (usize, Perm) {
        self.tets[t].gluings[f as usize]
    }

    /// Two copies side by side; tetrahedra of `other` are renumbered after ours.
    pub fn disjoint_union(&self, other: &Triangulation) -> Triangulation {
        let shift = self.tets.len();
        let mut tets = self.tets.clone();
        for tet in &other.tets {
            let mut g = tet.gluings;
            for entry in g.iter_mut() {
                entry.0 += shift;
            }
            tets.push(Tetrahedron { gluings: g });
        }
        Triangulation::new(format!("{}+{}", self.name, other.name), tets)
    }

    /// Curves attached to cusp `cusp`, if any.
    pub fn peripheral_for(&self, cusp: usize) -> Option<&Peripheral> {
        self.peripheral.get(cusp)
    }
}

/// The mirror image: every tetrahedron has vertices 2 and 3 swapped.
///
/// Gluing permutations are conjugated, so parities are unchanged, and curve
/// steps are relabeled with their signs reversed.
pub fn mirror(t: &Triangulation) -> Triangulation {
    let s: Perm = [0, 1, 3, 2];
    let tets = t
        .tets
        .iter()
        .map(|tet| {
            let mut g = [(0usize, IDENTITY); 4];
            for f in 0..4 {
                let (target, p) = tet.gluings[f];
                g[s[f] as usize] = (target, perm_compose(&s, &perm_compose(&p, &s)));
            }
            Tetrahedron { gluings: g }
        })
        .collect();
    let flip = |c: &NormalCurve| NormalCurve {
        cusp: c.cusp,
        steps: c
            .steps
            .iter()
            .map(|st| Step { tet: st.tet, vertex: s[st.vertex as usize], corner: s[st.corner as usize], eps: -st.eps })
            .collect(),
    };
    let peripheral = t
        .peripheral
        .iter()
        .map(|p| Peripheral { meridian: flip(&p.meridian), longitude: flip(&p.longitude) })
        .collect();
    Triangulation { name: t.name.clone(), tets, peripheral }
}

/// Every violated invariant, each naming the tetrahedron and face involved.
pub fn validate(t: &Triangulation) -> Vec<String> {
    let mut out = Vec::new();
    let n = t.tets.len();
    if n == 0 {
        out.push("triangulation has no tetrahedra".to_string());
    }
    for (i, tet) in t.tets.iter().enumerate() {
        for f in 0..4u8 {
            let (target, perm) = tet.gluings[f as usize];
            if target >= n {
                out.push(format!("tet {i} face {f}: face unmatched (target {target} does not exist)"));
                continue;
            }
            if !is_perm(&perm) {
                out.push(format!("tet {i} face {f}: {perm:?} is not a permutation"));
                continue;
            }
            let g = perm[f as usize];
            if target == i && g == f {
                out.push(format!("tet {i} face {f}: non-involutive/self-identical gluing"));
                continue;
            }
            let (back_t, back_p) = t.tets[target].gluings[g as usize];
            if back_t != i || back_p != perm_inverse(&perm) {
                out.push(format!(
                    "tet {i} face {f}: non-involutive gluing (tet {target} face {g} does not glue back)"
                ));
                continue;
            }
            if perm_is_even(&perm) {
                out.push(format!("tet {i} face {f}: gluing is orientation preserving"));
            }
        }
    }
    out
}

/// Orbits of tetrahedron edges under the face gluings.
///
/// Classes are numbered by their first tetrahedron edge in `(tet, edge)`
/// order, and each cyclic list starts there.
pub fn edge_classes(t: &Triangulation) -> Vec<EdgeClass> {
    let n = t.tets.len();
    let mut seen = vec![[false; 6]; n];
    let mut classes = Vec::new();
    for t0 in 0..n {
        for e0 in 0..6 {
            if seen[t0][e0] {
                continue;
            }
            let (a0, b0) = EDGE_VERTS[e0];
            let others: Vec<u8> = (0..4).filter(|&x| x != a0 && x != b0).collect();
            let start = (t0, a0, b0, others[0], others[1]);
            let mut state = start;
            let mut sides = Vec::new();
            loop {
                let (tt, a, b, c, d) = state;
                let e = edge_index(a, b);
                seen[tt][e] = true;
                sides.push(EdgeSide { tet: tt, edge: e, sign: if a < b { 1 } else { -1 } });
                // Cross the face opposite c, which contains a, b and d.
                let (nt, p) = t.glue(tt, c);
                state = (nt, p[a as usize], p[b as usize], p[d as usize], p[c as usize]);
                if state == start || sides.len() > 6 * n {
                    break;
                }
            }
            classes.push(EdgeClass { id: classes.len(), sides });
        }
    }
    classes
}

/// Edge class id of every tetrahedron edge.
pub fn edge_class_lookup(t: &Triangulation, classes: &[EdgeClass]) -> Vec<[usize; 6]> {
    let mut table = vec![[usize::MAX; 6]; t.tets.len()];
    for class in classes {
        for s in &class.sides {
            table[s.tet][s.edge] = class.id;
        }
    }
    table
}
