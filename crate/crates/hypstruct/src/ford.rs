//! Isometric spheres and cross-sections of equivariant Ford domains.
//!
//! Spheres come from reduced words in a finite list of generators of a
//! Kleinian group with a rank-two parabolic subgroup fixing ∞. Each sphere is
//! moved by the cusp lattice into a window on ℂ; the visible spheres are those
//! that form part of the upper envelope over the window, found by sampling.

use std::fmt::Write as _;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SAME: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `ω = 1/2 + i√3/2`.
pub fn omega() -> Complex64 {
    c(0.5, 3f64.sqrt() / 2.0)
}

/// An element of PSL(2, ℂ), scaled to determinant 1 with the sign fixed so
/// that the first nonzero entry has argument in `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoebiusMatrix {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MoebiusMatrix {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() < 1e-14 {
            return Err(Error::Validation(vec!["matrix is singular".into()]));
        }
        let s = det.sqrt();
        Ok(Self { a: a / s, b: b / s, c: c / s, d: d / s }.canonical())
    }

    pub fn identity() -> Self {
        Self { a: c(1.0, 0.0), b: c(0.0, 0.0), c: c(0.0, 0.0), d: c(1.0, 0.0) }
    }

    fn canonical(self) -> Self {
        let first = [self.a, self.b, self.c, self.d].into_iter().find(|z| z.norm() > 1e-14);
        match first {
            Some(z) if z.arg() < 0.0 || z.arg() >= std::f64::consts::PI => {
                Self { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
            }
            _ => self,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }.canonical()
    }

    /// Equality in PSL(2, ℂ).
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let close = |s: f64| {
            [(self.a, other.a), (self.b, other.b), (self.c, other.c), (self.d, other.d)]
                .iter()
                .all(|(x, y)| (x - y * s).norm() < tol)
        };
        close(1.0) || close(-1.0)
    }

    /// Image of ∞, or `None` when it is fixed.
    pub fn at_infinity(&self) -> Option<Complex64> {
        (self.c.norm() >= 1e-14).then(|| self.a / self.c)
    }

    /// Action on the upper half-space, with points written `(z, t)`.
    pub fn apply(&self, z: Complex64, t: f64) -> (Complex64, f64) {
        let w = self.c * z + self.d;
        let den = w.norm_sqr() + self.c.norm_sqr() * t * t;
        let num = (self.a * z + self.b) * w.conj() + self.a * self.c.conj() * t * t;
        (num / den, t / den)
    }
}

impl Mul for MoebiusMatrix {
    type Output = MoebiusMatrix;

    fn mul(self, o: MoebiusMatrix) -> MoebiusMatrix {
        MoebiusMatrix {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
        .canonical()
    }
}

/// Translations generating the stabilizer of ∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CuspLattice {
    pub tau1: Complex64,
    pub tau2: Complex64,
}

impl CuspLattice {
    pub fn new(tau1: Complex64, tau2: Complex64) -> Result<Self> {
        if (tau2 / tau1).im.abs() < 1e-12 {
            return Err(Error::Validation(vec!["lattice translations are parallel".into()]));
        }
        Ok(Self { tau1, tau2 })
    }

    /// Real coordinates of `z` in the basis `τ₁, τ₂`.
    fn coords(&self, z: Complex64) -> (f64, f64) {
        let (a, b, cc, d) = (self.tau1.re, self.tau2.re, self.tau1.im, self.tau2.im);
        let det = a * d - b * cc;
        ((d * z.re - b * z.im) / det, (a * z.im - cc * z.re) / det)
    }

    fn point(&self, m: i64, n: i64) -> Complex64 {
        self.tau1 * m as f64 + self.tau2 * n as f64
    }

    /// Lattice translates of `z` landing in the closed window grown by `margin`.
    fn translates_into(&self, z: Complex64, w: &Window, margin: f64) -> Vec<Complex64> {
        let corners = w.corners();
        let pad = margin + self.tau1.norm() + self.tau2.norm();
        let mut mmin = f64::INFINITY;
        let mut mmax = f64::NEG_INFINITY;
        let mut nmin = f64::INFINITY;
        let mut nmax = f64::NEG_INFINITY;
        for corner in corners {
            for d in [c(pad, pad), c(pad, -pad), c(-pad, pad), c(-pad, -pad)] {
                let (m, n) = self.coords(corner + d - z);
                mmin = mmin.min(m);
                mmax = mmax.max(m);
                nmin = nmin.min(n);
                nmax = nmax.max(n);
            }
        }
        let mut out = Vec::new();
        for m in mmin.floor() as i64..=mmax.ceil() as i64 {
            for n in nmin.floor() as i64..=nmax.ceil() as i64 {
                let p = z + self.point(m, n);
                if w.distance(p) <= margin + 1e-9 {
                    out.push(p);
                }
            }
        }
        out
    }

    /// True when `a − b` lies in the lattice.
    fn equivalent(&self, a: Complex64, b: Complex64) -> bool {
        let (m, n) = self.coords(a - b);
        (m - m.round()).abs() < 1e-9 && (n - n.round()).abs() < 1e-9
    }
}

/// The parallelogram `origin + s·u + t·v` with `s, t ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub origin: Complex64,
    pub u: Complex64,
    pub v: Complex64,
}

impl Window {
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { origin: c(x0, y0), u: c(x1 - x0, 0.0), v: c(0.0, y1 - y0) }
    }

    pub fn corners(&self) -> [Complex64; 4] {
        [self.origin, self.origin + self.u, self.origin + self.u + self.v, self.origin + self.v]
    }

    pub fn at(&self, s: f64, t: f64) -> Complex64 {
        self.origin + self.u * s + self.v * t
    }

    fn coords(&self, z: Complex64) -> (f64, f64) {
        let d = z - self.origin;
        let det = self.u.re * self.v.im - self.v.re * self.u.im;
        ((self.v.im * d.re - self.v.re * d.im) / det, (self.u.re * d.im - self.u.im * d.re) / det)
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.distance(z) <= tol
    }

    /// Euclidean distance from `z` to the closed window.
    pub fn distance(&self, z: Complex64) -> f64 {
        let (s, t) = self.coords(z);
        if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t) {
            return 0.0;
        }
        let k = self.corners();
        (0..4)
            .map(|i| segment_distance(z, k[i], k[(i + 1) % 4]))
            .fold(f64::INFINITY, f64::min)
    }
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = (((z - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometricSphere {
    pub center: Complex64,
    pub radius: f64,
    pub word: String,
    pub matrix: MoebiusMatrix,
}

impl IsometricSphere {
    /// Height of the hemisphere over `z`, if `z` lies under it.
    pub fn height(&self, z: Complex64) -> Option<f64> {
        let h2 = self.radius * self.radius - (z - self.center).norm_sqr();
        (h2 >= 0.0).then(|| h2.sqrt())
    }

    fn translated(&self, center: Complex64) -> Self {
        Self { center, ..self.clone() }
    }
}

/// The sphere of `g`, centered at `g(∞) = a/c` with radius `1/|c|`.
///
/// This is the hemisphere equidistant from the horoball at ∞ of height 1 and
/// its image under `g`.
pub fn isometric_sphere(g: &MoebiusMatrix) -> Result<IsometricSphere> {
    isometric_sphere_named(g, String::new())
}

fn isometric_sphere_named(g: &MoebiusMatrix, word: String) -> Result<IsometricSphere> {
    let center = g.at_infinity().ok_or(Error::FixesInfinity)?;
    Ok(IsometricSphere { center, radius: 1.0 / g.c.norm(), word, matrix: *g })
}

/// A named generator.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub name: String,
    pub matrix: MoebiusMatrix,
}

/// Generators, cusp lattice and default window of a Kleinian group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupData {
    pub generators: Vec<Generator>,
    pub lattice: CuspLattice,
    pub window: Window,
}

/// The figure-8 knot group: face pairings `T_B`, `T_C`, `T_D`, the cusp
/// lattice spanned by 4 and ω, and the window with corners 0, 4, ω, 4 + ω.
pub fn figure8_group() -> GroupData {
    let w = omega();
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    // i/√ω equals ω, so T_B = ω·[[1, 1], [1, −ω²]] = [[ω, ω], [ω, 1]].
    let tb = MoebiusMatrix::new(w, w, w, one).expect("det 1");
    let tc = MoebiusMatrix::new(one, w, zero, one).expect("det 1");
    let td = MoebiusMatrix::new(c(2.0, 0.0), -one, one, zero).expect("det 1");
    GroupData {
        generators: vec![
            Generator { name: "B".into(), matrix: tb },
            Generator { name: "C".into(), matrix: tc },
            Generator { name: "D".into(), matrix: td },
        ],
        lattice: CuspLattice { tau1: c(4.0, 0.0), tau2: w },
        window: Window { origin: zero, u: c(4.0, 0.0), v: w },
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    generators: Vec<[[f64; 2]; 4]>,
    #[serde(default)]
    names: Vec<String>,
    lattice: [[f64; 2]; 2],
    #[serde(default)]
    window: Option<[[f64; 2]; 3]>,
}

/// Read a generator file.
///
/// The JSON object has `generators` (each `[a, b, c, d]` with entries
/// `[re, im]`), `lattice` (two translations) and optionally `names` and
/// `window` (origin and the two sides).
pub fn parse_group(text: &str) -> Result<GroupData> {
    let raw: RawGroup = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    let z = |p: [f64; 2]| c(p[0], p[1]);
    let mut generators = Vec::with_capacity(raw.generators.len());
    for (i, m) in raw.generators.iter().enumerate() {
        let name = raw.names.get(i).cloned().unwrap_or_else(|| format!("g{i}"));
        let matrix = MoebiusMatrix::new(z(m[0]), z(m[1]), z(m[2]), z(m[3]))?;
        generators.push(Generator { name, matrix });
    }
    let lattice = CuspLattice::new(z(raw.lattice[0]), z(raw.lattice[1]))?;
    let window = match raw.window {
        Some([o, u, v]) => Window { origin: z(o), u: z(u), v: z(v) },
        None => Window { origin: c(0.0, 0.0), u: lattice.tau1, v: lattice.tau2 },
    };
    Ok(GroupData { generators, lattice, window })
}

/// Freely reduced words of length `1..=max_len`, by length and then in
/// generator order with each generator followed by its inverse.
fn words(gens: &[Generator], max_len: usize) -> Vec<(String, MoebiusMatrix)> {
    let letters: Vec<(String, MoebiusMatrix, usize)> = gens
        .iter()
        .enumerate()
        .flat_map(|(i, g)| {
            [(g.name.clone(), g.matrix, 2 * i), (format!("{}^-1", g.name), g.matrix.inverse(), 2 * i + 1)]
        })
        .collect();
    let mut out = Vec::new();
    let mut layer: Vec<(String, MoebiusMatrix, usize)> = vec![(String::new(), MoebiusMatrix::identity(), usize::MAX)];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (w, m, last) in &layer {
            for (name, g, id) in &letters {
                if *last != usize::MAX && *last ^ 1 == *id {
                    continue;
                }
                let word = if w.is_empty() { name.clone() } else { format!("{w} {name}") };
                next.push((word, *m * *g, *id));
            }
        }
        out.extend(next.iter().map(|(w, m, _)| (w.clone(), *m)));
        layer = next;
    }
    out
}

/// Distinct isometric spheres of words up to length `max_len`, with every
/// lattice translate whose center lies in the closed window, sorted by
/// decreasing radius.
pub fn enumerate(gens: &[Generator], lattice: &CuspLattice, max_len: usize, window: &Window) -> Vec<IsometricSphere> {
    let mut reps: Vec<IsometricSphere> = Vec::new();
    for (word, m) in words(gens, max_len) {
        let Ok(s) = isometric_sphere_named(&m, word) else {
            continue;
        };
        let seen = reps
            .iter()
            .any(|r| (r.radius - s.radius).abs() < SAME && lattice.equivalent(r.center, s.center));
        if !seen {
            reps.push(s);
        }
    }
    let mut out: Vec<IsometricSphere> = reps
        .iter()
        .flat_map(|s| {
            lattice
                .translates_into(s.center, window, 0.0)
                .into_iter()
                .map(|p| s.translated(p))
                .collect::<Vec<_>>()
        })
        .collect();
    sort_spheres(&mut out);
    out
}

fn sort_key(s: &IsometricSphere) -> (i64, i64, i64) {
    let r = |x: f64| (x * 1e9).round() as i64;
    (-r(s.radius), r(s.center.im), r(s.center.re))
}

fn sort_spheres(v: &mut [IsometricSphere]) {
    v.sort_by_key(sort_key);
}

/// A sphere on the upper envelope, and whether some other sphere rises above
/// its apex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibleSphere {
    pub sphere: IsometricSphere,
    pub apex_covered: bool,
}

/// Every lattice translate of the spheres that reaches over the window.
fn neighborhood(spheres: &[IsometricSphere], lattice: &CuspLattice, window: &Window) -> Vec<IsometricSphere> {
    let mut out: Vec<IsometricSphere> = Vec::new();
    for s in spheres {
        for p in lattice.translates_into(s.center, window, s.radius) {
            if !out.iter().any(|o| (o.center - p).norm() < SAME && (o.radius - s.radius).abs() < SAME) {
                out.push(s.translated(p));
            }
        }
    }
    out
}

/// Spheres that are strictly highest over some point of a `grid × grid`
/// sample of the window.
pub fn visible(
    spheres: &[IsometricSphere],
    lattice: &CuspLattice,
    window: &Window,
    grid: usize,
) -> Vec<VisibleSphere> {
    let all = neighborhood(spheres, lattice, window);
    let mut top = vec![false; all.len()];
    for i in 0..grid {
        for j in 0..grid {
            let z = window.at((i as f64 + 0.5) / grid as f64, (j as f64 + 0.5) / grid as f64);
            let mut best: Option<(usize, f64)> = None;
            let mut second = f64::NEG_INFINITY;
            for (k, s) in all.iter().enumerate() {
                if let Some(h) = s.height(z) {
                    match best {
                        Some((_, bh)) if h <= bh => second = second.max(h),
                        Some((_, bh)) => {
                            second = bh;
                            best = Some((k, h));
                        }
                        None => best = Some((k, h)),
                    }
                }
            }
            if let Some((k, h)) = best {
                if h > second + 1e-9 {
                    top[k] = true;
                }
            }
        }
    }
    let winners: Vec<&IsometricSphere> = all.iter().zip(&top).filter(|(_, &t)| t).map(|(s, _)| s).collect();
    let mut out: Vec<VisibleSphere> = spheres
        .iter()
        .filter(|s| {
            winners
                .iter()
                .any(|w| (w.radius - s.radius).abs() < SAME && lattice.equivalent(w.center, s.center))
        })
        .map(|s| {
            let apex_covered = all.iter().any(|o| {
                (o.center - s.center).norm() > SAME
                    && o.height(s.center).is_some_and(|h| h > s.radius + 1e-9)
            });
            VisibleSphere { sphere: s.clone(), apex_covered }
        })
        .collect();
    out.sort_by_key(|v| sort_key(&v.sphere));
    out
}

/// The vertical geodesic from a face center of the Ford domain to ∞.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualEdge {
    pub center: Complex64,
    pub word: String,
    pub covered: bool,
}

pub fn dual_edges(visible: &[VisibleSphere]) -> Vec<DualEdge> {
    visible
        .iter()
        .map(|v| DualEdge { center: v.sphere.center, word: v.sphere.word.clone(), covered: v.apex_covered })
        .collect()
}

/// Whether two sphere lists hold the same spheres in the same order.
pub fn same_spheres(a: &[VisibleSphere], b: &[VisibleSphere]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            (x.sphere.center - y.sphere.center).norm() < SAME && (x.sphere.radius - y.sphere.radius).abs() < SAME
        })
}

const SCALE: f64 = 100.0;

/// Circles for the visible spheres, the window, the face boundaries where
/// pairs of spheres meet on the envelope, and dots at the dual edges.
pub fn ford_svg(visible: &[VisibleSphere], lattice: &CuspLattice, window: &Window) -> String {
    let spheres: Vec<IsometricSphere> = visible.iter().map(|v| v.sphere.clone()).collect();
    let rmax = spheres.iter().map(|s| s.radius).fold(0.0, f64::max);
    let corners = window.corners();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for k in corners {
        x0 = x0.min(k.re - rmax);
        x1 = x1.max(k.re + rmax);
        y0 = y0.min(k.im - rmax);
        y1 = y1.max(k.im + rmax);
    }
    let pt = |z: Complex64| ((z.re - x0) * SCALE, (y1 - z.im) * SCALE);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.1}" height="{:.1}" viewBox="0 0 {:.1} {:.1}">"#,
        (x1 - x0) * SCALE,
        (y1 - y0) * SCALE,
        (x1 - x0) * SCALE,
        (y1 - y0) * SCALE
    );
    let poly: Vec<String> = corners
        .iter()
        .map(|&k| {
            let (x, y) = pt(k);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    let _ = writeln!(svg, r#"  <polygon class="window" points="{}" fill="none" stroke="black"/>"#, poly.join(" "));
    for s in &spheres {
        let (x, y) = pt(s.center);
        let _ = writeln!(
            svg,
            r##"  <circle class="sphere" cx="{x:.3}" cy="{y:.3}" r="{:.3}" fill="none" stroke="#3060c0"><title>{}</title></circle>"##,
            s.radius * SCALE,
            s.word
        );
    }
    let all = neighborhood(&spheres, lattice, window);
    let mut segments: Vec<(Complex64, Complex64)> = Vec::new();
    for a in &spheres {
        for b in all.iter().filter(|b| (b.center - a.center).norm() > SAME) {
            for (p, q) in face_boundary(a, b, &all) {
                let dup = segments.iter().any(|&(s, t)| {
                    ((s - p).norm() < 1e-6 && (t - q).norm() < 1e-6) || ((s - q).norm() < 1e-6 && (t - p).norm() < 1e-6)
                });
                if !dup {
                    segments.push((p, q));
                }
            }
        }
    }
    for (p, q) in segments {
        let (px, py) = pt(p);
        let (qx, qy) = pt(q);
        let _ = writeln!(
            svg,
            r##"  <line class="face" x1="{px:.3}" y1="{py:.3}" x2="{qx:.3}" y2="{qy:.3}" stroke="#c03030"/>"##
        );
    }
    for e in dual_edges(visible) {
        let (x, y) = pt(e.center);
        let fill = if e.covered { "white" } else { "black" };
        let _ = writeln!(svg, r#"  <circle class="dual" cx="{x:.3}" cy="{y:.3}" r="3" fill="{fill}" stroke="black"/>"#);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Pieces of the radical line of two spheres along which they meet on top
/// of every other sphere.
fn face_boundary(a: &IsometricSphere, b: &IsometricSphere, all: &[IsometricSphere]) -> Vec<(Complex64, Complex64)> {
    let d = b.center - a.center;
    let dist = d.norm();
    if dist >= a.radius + b.radius || dist <= (a.radius - b.radius).abs() {
        return Vec::new();
    }
    let along = (dist * dist + a.radius * a.radius - b.radius * b.radius) / (2.0 * dist);
    let half = (a.radius * a.radius - along * along).max(0.0).sqrt();
    let dir = d / dist;
    let mid = a.center + dir * along;
    let perp = dir * c(0.0, 1.0);
    let (p0, p1) = (mid - perp * half, mid + perp * half);
    let samples = 64;
    let on_top = |z: Complex64| {
        let h = a.height(z).unwrap_or(0.0);
        all.iter()
            .filter(|o| (o.center - a.center).norm() > SAME && (o.center - b.center).norm() > SAME)
            .all(|o| o.height(z).is_none_or(|oh| oh <= h + 1e-12))
    };
    let mut out = Vec::new();
    let mut start: Option<Complex64> = None;
    for k in 0..=samples {
        let z = p0 + (p1 - p0) * (k as f64 / samples as f64);
        match (on_top(z), start) {
            (true, None) => start = Some(z),
            (false, Some(s)) => {
                out.push((s, z));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, p1));
    }
    out
}
