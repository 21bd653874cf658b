mod common;

use hypstruct::triangulation::{cusp_svg, cusps, develop};
use hypstruct::{Complex64, Error, ShapeAssignment};

use common::{fixture, solve_complete, two_bridge};

fn regular() -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::PI / 3.0)
}

fn corners(p: &[Complex64; 4], vertex: u8) -> Vec<Complex64> {
    (0..4).filter(|&u| u != vertex as usize).map(|u| p[u]).collect()
}

#[test]
fn complete_figure8_cusp_is_equilateral() {
    let t = fixture("figure8.tri");
    let c = &cusps(&t).unwrap()[0];
    let s = ShapeAssignment::uniform(2, regular());
    let pos = develop(&t, c, Some(&s)).unwrap();
    assert_eq!(pos.len(), 8);
    for (i, p) in pos.iter().enumerate() {
        let q = corners(p, c.triangles[i].vertex);
        let sides = [(q[0] - q[1]).norm(), (q[1] - q[2]).norm(), (q[2] - q[0]).norm()];
        for s in sides {
            assert!((s - 1.0).abs() < 1e-12, "triangle {i}: {sides:?}");
        }
    }
}

#[test]
fn glued_sides_have_equal_length_at_the_complete_structure() {
    for t in [two_bridge(&[2, 3]), fixture("octahedron.tri")] {
        let (s, _) = solve_complete(&t);
        for c in cusps(&t).unwrap() {
            let pos = develop(&t, &c, Some(&s)).unwrap();
            let len = |i: usize, f: u8| {
                let v = c.triangles[i].vertex;
                let ends: Vec<Complex64> = (0..4u8).filter(|&u| u != v && u != f).map(|u| pos[i][u as usize]).collect();
                (ends[0] - ends[1]).norm()
            };
            for i in 0..c.len() {
                for f in (0..4u8).filter(|&f| f != c.triangles[i].vertex) {
                    let (j, g) = c.neighbors[i][f as usize].unwrap();
                    // Holonomy is a pure translation, so no side is rescaled.
                    let (a, b) = (len(i, f), len(j, g));
                    assert!((a - b).abs() < 1e-9 * a.max(1.0), "{}: {a} vs {b}", t.name);
                }
            }
        }
    }
}

#[test]
fn triangles_are_positively_oriented() {
    let t = two_bridge(&[2, 2, 2]);
    let (s, _) = solve_complete(&t);
    for c in cusps(&t).unwrap() {
        for (i, p) in develop(&t, &c, Some(&s)).unwrap().iter().enumerate() {
            let [a, b, cc] = hypstruct::triangulation::ccw(c.triangles[i].vertex);
            let (pa, pb, pc) = (p[a as usize], p[b as usize], p[cc as usize]);
            assert!(((pb - pa).conj() * (pc - pa)).im > 0.0);
        }
    }
}

#[test]
fn svg_without_shapes() {
    let t = fixture("figure8.tri");
    let c = &cusps(&t).unwrap()[0];
    let svg = cusp_svg(&t, c, None).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert_eq!(svg.matches("<polygon").count(), 8);
    // Every triangle labels its three corners with edge classes.
    assert_eq!(svg.matches(">e0<").count() + svg.matches(">e1<").count(), 24);
}

#[test]
fn flat_shape_is_rejected() {
    let t = fixture("figure8.tri");
    let c = &cusps(&t).unwrap()[0];
    let s = ShapeAssignment::new(vec![regular(), Complex64::new(2.0, 0.0)]);
    assert_eq!(cusp_svg(&t, c, Some(&s)), Err(Error::DegenerateShape { tet: 1 }));
}
