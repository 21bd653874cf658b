//! SVG pictures of cusp triangulations.

use std::collections::VecDeque;
use std::fmt::Write;

use num_complex::Complex64;

use super::cusp::CuspTriangulation;
use super::{ccw, ccw_next, edge_index, Triangulation, EDGE_KIND};
use crate::error::{Error, Result};
use crate::shapes::ShapeAssignment;

fn corner_value(z: Complex64, v: u8, u: u8) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    match EDGE_KIND[edge_index(v, u)] {
        0 => z,
        1 => one / (one - z),
        _ => (z - one) / z,
    }
}

/// Develop a fundamental domain of the cusp into the plane.
///
/// Triangles are laid out along a breadth first spanning tree, so the result
/// is a disk. Without shapes every triangle is drawn equilateral; with shapes
/// each triangle is similar to the Euclidean triangle its corner invariants
/// describe.
pub fn develop(
    t: &Triangulation,
    cusp: &CuspTriangulation,
    shapes: Option<&ShapeAssignment>,
) -> Result<Vec<[Complex64; 4]>> {
    let regular = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
    let shape_of = |tet: usize| shapes.map(|s| s.z[tet]).unwrap_or(regular);
    if let Some(s) = shapes {
        for c in &cusp.triangles {
            let z = s.z[c.tet];
            if !(z.im > 0.0) {
                return Err(Error::DegenerateShape { tet: c.tet });
            }
        }
    }
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let mut pos = vec![[nan; 4]; cusp.len()];
    let mut placed = vec![false; cusp.len()];
    if cusp.is_empty() {
        return Ok(pos);
    }
    let first = cusp.triangles[0];
    let [a, b, c] = ccw(first.vertex);
    pos[0][a as usize] = Complex64::new(0.0, 0.0);
    pos[0][b as usize] = Complex64::new(1.0, 0.0);
    pos[0][c as usize] = corner_value(shape_of(first.tet), first.vertex, a);
    placed[0] = true;
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let tri = cusp.triangles[i];
        for f in (0..4u8).filter(|&f| f != tri.vertex) {
            let (j, g) = cusp.neighbors[i][f as usize].unwrap();
            if placed[j] {
                continue;
            }
            let nb = cusp.triangles[j];
            let (_, perm) = t.glue(tri.tet, f);
            for u in (0..4u8).filter(|&u| u != tri.vertex && u != f) {
                pos[j][perm[u as usize] as usize] = pos[i][u as usize];
            }
            // The new corner is the one opposite the shared side.
            let w = g;
            let a = ccw_next(nb.vertex, w);
            let b = ccw_next(nb.vertex, a);
            let za = corner_value(shape_of(nb.tet), nb.vertex, a);
            pos[j][w as usize] = pos[j][a as usize] + za * (pos[j][b as usize] - pos[j][a as usize]);
            placed[j] = true;
            queue.push_back(j);
        }
    }
    Ok(pos)
}

/// SVG drawing of a fundamental domain of the cusp torus.
pub fn cusp_svg(
    t: &Triangulation,
    cusp: &CuspTriangulation,
    shapes: Option<&ShapeAssignment>,
) -> Result<String> {
    let pos = develop(t, cusp, shapes)?;
    let pts: Vec<Complex64> = pos.iter().flat_map(|p| p.iter().copied()).filter(|z| z.re.is_finite()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in &pts {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let scale = 560.0 / span;
    let map = |z: Complex64| ((z.re - x0) * scale + 20.0, (y1 - z.im) * scale + 20.0);
    let width = (x1 - x0) * scale + 40.0;
    let height = (y1 - y0) * scale + 40.0;

    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}">"#
    )
    .unwrap();
    writeln!(s, r#"<title>cusp {} of {}</title>"#, cusp.id, xml_escape(&t.name)).unwrap();
    for (i, tri) in cusp.triangles.iter().enumerate() {
        let corners: Vec<u8> = ccw(tri.vertex).to_vec();
        let coords: Vec<String> = corners
            .iter()
            .map(|&u| {
                let (x, y) = map(pos[i][u as usize]);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        writeln!(
            s,
            r##"<polygon points="{}" fill="#dde8f4" stroke="#203040" stroke-width="1"/>"##,
            coords.join(" ")
        )
        .unwrap();
        let centroid = corners.iter().map(|&u| pos[i][u as usize]).sum::<Complex64>() / 3.0;
        let (cx, cy) = map(centroid);
        writeln!(
            s,
            r#"<text x="{cx:.3}" y="{cy:.3}" font-size="10" text-anchor="middle">{}.{}</text>"#,
            tri.tet, tri.vertex
        )
        .unwrap();
        for &u in &corners {
            let p = pos[i][u as usize] * 0.75 + centroid * 0.25;
            let (x, y) = map(p);
            writeln!(
                s,
                r##"<text x="{x:.3}" y="{y:.3}" font-size="8" fill="#a03020" text-anchor="middle">e{}</text>"##,
                cusp.corner_edge[i][u as usize]
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
