//! Layered ideal triangulations of 2-bridge link complements.
//!
//! The 4-punctured sphere is modelled as the pillowcase `(R² ∖ Z²)/Γ` with
//! `Γ = {z ↦ ±z + 2m}`. Punctures fall into four classes by parity,
//! `k = (x mod 2) + 2 (y mod 2)`, and a straight triangulation of the
//! pillowcase by three lattice slopes has four triangles, each missing one
//! puncture class.
//!
//! Reading the code from the innermost twist region outward gives a word in
//! `R` and `L`, one letter per level sphere `S_2, …, S_{C−1}`. A frame
//! `(H, V)` of lattice vectors starts at `((1,0), (0,1))`; an `L` level adds
//! `H` to `V` and an `R` level adds `V` to `H`. Between `S_i` and `S_{i+1}`
//! sit two tetrahedra, the parallelograms spanned by `H_i` and `V_i` at
//! offsets `0` and `H_i`, each flipping one diagonal. The two ends are closed
//! off by folding the innermost and outermost level spheres onto themselves.

use std::fmt;

use crate::error::{Error, Result};
use crate::triangulation::{
    cusps, edge_index, mirror, push_off_left, transverse_curve, validate, Perm, Peripheral,
    Tetrahedron, Triangulation, EDGE_ANGLE_SLOT, IDENTITY,
};

/// A continued fraction code `[a_{n−1}, …, a_1]`, stored left to right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfCode {
    pub a: Vec<i64>,
}

impl CfCode {
    /// Crossing number of the standard diagram, `C = Σ |a_i|`.
    pub fn crossings(&self) -> i64 {
        self.a.iter().map(|x| x.abs()).sum()
    }

    pub fn is_negative(&self) -> bool {
        self.a[0] < 0
    }

    /// Entries from the innermost region outward: `a_1, a_2, …, a_{n−1}`.
    fn inner_to_outer(&self) -> impl Iterator<Item = i64> + '_ {
        self.a.iter().rev().map(|x| x.abs())
    }
}

impl fmt::Display for CfCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.a.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Letter {
    R,
    L,
}

/// Labels of the level spheres `S_2, …, S_{C−1}` and the hinge tetrahedra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RlWord {
    pub letters: Vec<Letter>,
    /// Layer indices `i` whose spheres `S_i` and `S_{i+1}` carry different letters.
    pub hinges: Vec<usize>,
}

impl RlWord {
    /// Letter of sphere `S_i`.
    pub fn letter(&self, i: usize) -> Letter {
        self.letters[i - 2]
    }
}

impl fmt::Display for RlWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", if *l == Letter::R { 'R' } else { 'L' })?;
        }
        Ok(())
    }
}

/// Value of `[a_{n−1}, …, a_1] = a_{n−1} + 1/(a_{n−2} + … + 1/a_1)` as a
/// fraction `p/q`, with `q = 0` for infinity.
pub fn cf_value(a: &[i64]) -> (i128, i128) {
    let mut p: i128 = 1;
    let mut q: i128 = 0;
    for &x in a.iter().rev() {
        (p, q) = (x as i128 * p + q, p);
    }
    if q < 0 {
        (p, q) = (-p, -q);
    }
    (p, q)
}

fn regular_cf(mut p: i128, mut q: i128) -> Vec<i64> {
    let mut out = Vec::new();
    while q != 0 {
        let b = p.div_euclid(q);
        out.push(b as i64);
        (p, q) = (q, p - b * q);
    }
    out
}

fn merge_trailing_one(v: &mut Vec<i64>) {
    while v.len() >= 2 && *v.last().unwrap() == 1 {
        v.pop();
        *v.last_mut().unwrap() += 1;
    }
}

fn is_normal(a: &[i64]) -> bool {
    a.len() >= 2
        && a.iter().all(|&x| x != 0)
        && (a.iter().all(|&x| x > 0) || a.iter().all(|&x| x < 0))
        && a[0].abs() >= 2
        && a[a.len() - 1].abs() >= 2
}

/// Bring a code to same-sign form with both end entries at least 2 in
/// absolute value.
///
/// A code that is already normal is returned unchanged. Otherwise the value
/// is re-expanded as a regular continued fraction, which preserves it. If the
/// expansion still starts with 0 or 1, the link is re-read from an equivalent
/// code: a leading 0 makes the next entry a removable outer twist, and a
/// leading 1 is removed by reading the code backwards.
pub fn normalize_cf(raw: &[i64]) -> Result<CfCode> {
    let not_hyp = || Error::NotHyperbolic(format!("{raw:?}"));
    if raw.is_empty() {
        return Err(not_hyp());
    }
    if is_normal(raw) {
        return Ok(CfCode { a: raw.to_vec() });
    }
    let (p, q) = cf_value(raw);
    if q == 0 || p == 0 {
        return Err(not_hyp());
    }
    let sign = if p < 0 { -1 } else { 1 };
    let mut b = regular_cf(p.abs(), q);
    merge_trailing_one(&mut b);
    for _ in 0..4 {
        if b.len() >= 2 && b[0] == 0 {
            b.drain(0..2);
            merge_trailing_one(&mut b);
        }
        if b.len() >= 2 && b[0] == 1 {
            b.reverse();
            merge_trailing_one(&mut b);
        }
    }
    if !is_normal(&b) {
        return Err(not_hyp());
    }
    Ok(CfCode { a: b.into_iter().map(|x| x * sign).collect() })
}

/// The word of level labels for a code.
pub fn rl_word(cf: &CfCode) -> RlWord {
    let entries: Vec<i64> = cf.inner_to_outer().collect();
    let m = entries.len();
    let mut letters = Vec::new();
    for (idx, &a) in entries.iter().enumerate() {
        // The outermost region is always L, letters alternate inward.
        let letter = if (m - 1 - idx) % 2 == 0 { Letter::L } else { Letter::R };
        let count = if idx == 0 || idx == m - 1 { a - 1 } else { a };
        for _ in 0..count {
            letters.push(letter);
        }
    }
    let hinges = (2..letters.len() + 1)
        .filter(|&i| letters[i - 2] != letters[i - 1])
        .collect();
    RlWord { letters, hinges }
}

type Vec2 = (i64, i64);

fn add(u: Vec2, v: Vec2) -> Vec2 {
    (u.0 + v.0, u.1 + v.1)
}

fn class(p: Vec2) -> u8 {
    (p.0.rem_euclid(2) + 2 * p.1.rem_euclid(2)) as u8
}

/// Angle labels of the edges of one layered tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerTet {
    /// Layer `i`: the tetrahedron lies between `S_i` and `S_{i+1}`.
    pub layer: usize,
    /// 0 for the copy at offset 0, 1 for the copy at offset `H_i`.
    pub copy: u8,
    /// Puncture class of each vertex.
    pub classes: [u8; 4],
    /// Edge index carrying each of the angles `x`, `y`, `z`.
    pub x_edge: usize,
    pub y_edge: usize,
    pub z_edge: usize,
    /// Faces lying on `S_i` and on `S_{i+1}`.
    pub bottom_faces: [u8; 2],
    pub top_faces: [u8; 2],
}

/// A built 2-bridge triangulation with its layering data.
#[derive(Debug, Clone)]
pub struct TwoBridge {
    pub code: CfCode,
    pub triangulation: Triangulation,
    pub word: RlWord,
    pub layers: Vec<LayerTet>,
    /// Number of corner cuts in each attached meridian.
    pub meridian_segments: Vec<usize>,
}

fn tet_index(layer: usize, copy: u8) -> usize {
    2 * (layer - 2) + copy as usize
}

/// Build the layered triangulation of the complement of `K[a_{n−1}, …, a_1]`.
pub fn build(cf: &CfCode) -> Result<TwoBridge> {
    if !is_normal(&cf.a) {
        return Err(Error::NotHyperbolic(cf.to_string()));
    }
    let word = rl_word(cf);
    let c = cf.crossings() as usize;
    let last_layer = c - 2;

    // Frames F_1 … F_{C−1}.
    let mut frames: Vec<(Vec2, Vec2)> = vec![((0, 0), (0, 0)); c];
    frames[1] = ((1, 0), (0, 1));
    for i in 2..c {
        let (h, v) = frames[i - 1];
        frames[i] = match word.letter(i) {
            Letter::L => (h, add(v, h)),
            Letter::R => (add(h, v), v),
        };
    }

    let mut layers = Vec::new();
    for i in 2..=last_layer {
        let (a, b) = frames[i];
        for copy in 0..2u8 {
            let p = if copy == 0 { (0, 0) } else { a };
            let pts = [p, add(p, a), add(p, b), add(add(p, a), b)];
            // Top diagonal p → p+a+b sits at height 1, bottom diagonal at 0.
            let height = [1i64, 0, 0, 1];
            let mut by_class = [(0i64, 0i64, 0i64); 4];
            for (k, pt) in pts.iter().enumerate() {
                by_class[class(*pt) as usize] = (pt.0, pt.1, height[k]);
            }
            let d = |i: usize| {
                let (x, y, h) = by_class[i];
                let (x0, y0, h0) = by_class[0];
                (x - x0, y - y0, h - h0)
            };
            let (u, v, w) = (d(1), d(2), d(3));
            let det = u.0 * (v.1 * w.2 - v.2 * w.1) - u.1 * (v.0 * w.2 - v.2 * w.0)
                + u.2 * (v.0 * w.1 - v.1 * w.0);
            let classes: [u8; 4] = if det > 0 { [0, 1, 2, 3] } else { [0, 1, 3, 2] };
            let vert = |cl: u8| classes.iter().position(|&x| x == cl).unwrap() as u8;
            let cp = |pt: Vec2| vert(class(pt));
            // The angle called x sits on edges parallel to V_i, y on edges
            // parallel to H_i.
            let x_edge = edge_index(cp(pts[0]), cp(pts[2]));
            let y_edge = edge_index(cp(pts[0]), cp(pts[1]));
            let z_edge = edge_index(cp(pts[1]), cp(pts[2]));
            layers.push(LayerTet {
                layer: i,
                copy,
                classes,
                x_edge,
                y_edge,
                z_edge,
                bottom_faces: [cp(pts[0]), cp(pts[3])],
                top_faces: [cp(pts[1]), cp(pts[2])],
            });
        }
    }

    let n = layers.len();
    let mut gluings = vec![[(usize::MAX, IDENTITY); 4]; n];
    let vertex_of = |t: usize, cl: u8| layers[t].classes.iter().position(|&x| x == cl).unwrap() as u8;
    // Owner of the face of level sphere `S_j` missing puncture class `k`, seen
    // from below (a top face of layer j−1) or above (a bottom face of layer j).
    let owner = |level: usize, from_above: bool, k: u8| -> (usize, u8) {
        let layer = if from_above { level } else { level - 1 };
        for copy in 0..2u8 {
            let t = tet_index(layer, copy);
            let faces = if from_above { layers[t].bottom_faces } else { layers[t].top_faces };
            for f in faces {
                if layers[t].classes[f as usize] == k {
                    return (t, f);
                }
            }
        }
        unreachable!("every triangle of a level sphere has an owner")
    };
    let mut glue = |(ta, fa): (usize, u8), (tb, fb): (usize, u8), sigma: [u8; 4]| {
        let mut perm: Perm = [0; 4];
        for u in 0..4u8 {
            perm[u as usize] = vertex_of(tb, sigma[layers[ta].classes[u as usize] as usize]);
        }
        debug_assert_eq!(perm[fa as usize], fb);
        gluings[ta][fa as usize] = (tb, perm);
    };

    // Interior levels: faces meet with matching classes.
    for i in 3..=last_layer {
        for k in 0..4u8 {
            let below = owner(i, false, k);
            let above = owner(i, true, k);
            glue(below, above, IDENTITY);
            glue(above, below, IDENTITY);
        }
    }
    // Innermost level S_2, folded along the slope H_1 + V_1.
    let fold_in = |k: u8| -> [u8; 4] {
        if k == 1 || k == 2 {
            [0, 2, 1, 3]
        } else {
            [3, 1, 2, 0]
        }
    };
    for k in 0..4u8 {
        let sigma = fold_in(k);
        let a = owner(2, true, k);
        let b = owner(2, true, sigma[k as usize]);
        glue(a, b, sigma);
    }
    // Outermost level S_{C−1}, folded along the slope V_{C−2}.
    let (u, _) = frames[c - 1];
    let (_, v) = frames[c - 2];
    let swap = |x: u8, y: u8| -> [u8; 4] {
        let mut s = [0, 1, 2, 3];
        s[x as usize] = y;
        s[y as usize] = x;
        s
    };
    let s1 = swap(class(u), class(add(u, v)));
    let s2 = swap(0, class(v));
    for k in 0..4u8 {
        let sigma = if s1[k as usize] != k { s1 } else { s2 };
        let a = owner(c - 1, false, k);
        let b = owner(c - 1, false, sigma[k as usize]);
        glue(a, b, sigma);
    }

    let tets: Vec<Tetrahedron> = gluings.into_iter().map(|g| Tetrahedron { gluings: g }).collect();
    let mut tri = Triangulation::new(format!("K{}", cf), tets);
    let problems = validate(&tri);
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }

    // Meridians: a loop around the strand at the inner hairpin.
    let cusp_list = cusps(&tri)?;
    let mut peripheral = Vec::new();
    let mut meridian_segments = Vec::new();
    for cusp in &cusp_list {
        let mut found = None;
        'search: for k in 0..4u8 {
            for j in (0..4u8).filter(|&j| j != k) {
                let (t, f) = owner(2, true, j);
                let vtx = vertex_of(t, k);
                let Some(i) = cusp.index_of(t, vtx) else { continue };
                let others: Vec<u8> = (0..4u8).filter(|&w| w != vtx && w != f).collect();
                if cusp.corner_vertex[i][others[0] as usize] == cusp.corner_vertex[i][others[1] as usize] {
                    found = Some((t, vtx, f));
                    break 'search;
                }
            }
        }
        let side = found.ok_or_else(|| Error::Missing(format!("hairpin loop on cusp {}", cusp.id)))?;
        let mu = push_off_left(&tri, cusp, &[side])
            .ok_or_else(|| Error::Missing(format!("meridian on cusp {}", cusp.id)))?;
        let lam = transverse_curve(&tri, cusp, &mu)
            .ok_or_else(|| Error::Missing(format!("longitude on cusp {}", cusp.id)))?;
        meridian_segments.push(1);
        peripheral.push(Peripheral { meridian: mu, longitude: lam });
    }
    tri.peripheral = peripheral;

    if cf.is_negative() {
        tri = mirror(&tri);
        for l in layers.iter_mut() {
            let s = [0u8, 1, 3, 2];
            let relabel = |e: usize| {
                let (x, y) = crate::triangulation::EDGE_VERTS[e];
                edge_index(s[x as usize], s[y as usize])
            };
            l.x_edge = relabel(l.x_edge);
            l.y_edge = relabel(l.y_edge);
            l.z_edge = relabel(l.z_edge);
            l.bottom_faces = l.bottom_faces.map(|f| s[f as usize]);
            l.top_faces = l.top_faces.map(|f| s[f as usize]);
            let c = l.classes;
            l.classes = [c[0], c[1], c[3], c[2]];
        }
    }
    Ok(TwoBridge { code: cf.clone(), triangulation: tri, word, layers, meridian_segments })
}

/// The `z` sequence `z_1, …, z_{C−1}`: zero at both ends, π/3 at hinges,
/// convex in between.
pub fn z_sequence(word: &RlWord) -> Vec<f64> {
    use std::f64::consts::PI;
    let c = word.letters.len() + 2;
    // Index 0 is unused so that z[i] is z_i.
    let mut z = vec![0.0; c];
    let hinges = &word.hinges;
    for &h in hinges {
        z[h] = PI / 3.0;
    }
    for w in hinges.windows(2) {
        let (j, k) = (w[0] as f64, w[1] as f64);
        for i in w[0] + 1..w[1] {
            let x = i as f64;
            z[i] = PI / 3.0 - 2.0 * (x - j) * (k - x) / ((k - j) * (k - j));
        }
    }
    // Ends: a convex ramp from z_1 = 0 up to the first hinge, and its mirror
    // image down to z_{C−1} = 0 after the last.
    if let (Some(&first), Some(&last)) = (hinges.first(), hinges.last()) {
        for i in 2..first {
            let t = (i - 1) as f64 / (first - 1) as f64;
            z[i] = PI / 3.0 * t * t;
        }
        for i in last + 1..c - 1 {
            let t = (c - 1 - i) as f64 / (c - 1 - last) as f64;
            z[i] = PI / 3.0 * t * t;
        }
    }
    z[1] = 0.0;
    z[c - 1] = 0.0;
    z
}

/// The explicit angle structure built from the `z` sequence and the label
/// table, as a `3n`-vector of `(α, β, γ)` triples.
pub fn initial_angles(tb: &TwoBridge) -> Vec<f64> {
    use std::f64::consts::PI;
    let z = z_sequence(&tb.word);
    let mut out = vec![0.0; 3 * tb.layers.len()];
    for (t, l) in tb.layers.iter().enumerate() {
        let i = l.layer;
        let (zm, zi, zp) = (z[i - 1], z[i], z[i + 1]);
        let (x, y) = match (tb.word.letter(i), tb.word.letter(i + 1)) {
            (Letter::L, Letter::L) => (0.5 * (2.0 * PI - zm - zp), 0.5 * (zm - 2.0 * zi + zp)),
            (Letter::R, Letter::R) => (0.5 * (zm - 2.0 * zi + zp), 0.5 * (2.0 * PI - zm - zp)),
            (Letter::L, Letter::R) => (0.5 * (PI - zm - zi + zp), 0.5 * (PI + zm - zi - zp)),
            (Letter::R, Letter::L) => (0.5 * (PI + zm - zi - zp), 0.5 * (PI - zm - zi + zp)),
        };
        out[3 * t + EDGE_ANGLE_SLOT[l.x_edge]] = x;
        out[3 * t + EDGE_ANGLE_SLOT[l.y_edge]] = y;
        out[3 * t + EDGE_ANGLE_SLOT[l.z_edge]] = zi;
    }
    out
}
