use std::collections::HashSet;
use std::time::Instant;

use hypstruct::ford::{omega, parse_group, same_spheres, Generator, VisibleSphere};
use hypstruct::{
    dual_edges, enumerate, figure8_group, ford_svg, isometric_sphere, visible, Complex64, CuspLattice, Error,
    IsometricSphere, MoebiusMatrix, Window,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn m(a: Complex64, b: Complex64, cc: Complex64, d: Complex64) -> MoebiusMatrix {
    MoebiusMatrix::new(a, b, cc, d).unwrap()
}

fn generator(name: &str) -> MoebiusMatrix {
    figure8_group().generators.into_iter().find(|g| g.name == name).unwrap().matrix
}

/// A sphere with the given center and radius, from a matrix with `c = 1/r`.
fn sphere(center: Complex64, radius: f64, word: &str) -> IsometricSphere {
    let k = c(1.0 / radius, 0.0);
    let g = m(center * k, -c(1.0, 0.0) / k, k, c(0.0, 0.0));
    let mut s = isometric_sphere(&g).unwrap();
    s.word = word.to_string();
    s
}

fn random_matrix(rng: &mut ChaCha8Rng) -> MoebiusMatrix {
    let mut z = || c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    m(z(), z(), z(), z())
}

#[test]
fn spheres_of_the_face_pairings() {
    let td = generator("D");
    let s = isometric_sphere(&td).unwrap();
    assert!((s.center - c(2.0, 0.0)).norm() < 1e-12);
    assert!((s.radius - 1.0).abs() < 1e-12);
    let s = isometric_sphere(&td.inverse()).unwrap();
    assert!(s.center.norm() < 1e-12);
    assert!((s.radius - 1.0).abs() < 1e-12);
    // The spheres of T_B and its inverse sit over 1 and ω².
    let tb = generator("B");
    let centers = [isometric_sphere(&tb).unwrap().center, isometric_sphere(&tb.inverse()).unwrap().center];
    assert!((centers[0] - c(1.0, 0.0)).norm() < 1e-12);
    assert!((centers[1] - omega() * omega()).norm() < 1e-12);
}

#[test]
fn stabilizer_of_infinity_has_no_sphere() {
    assert_eq!(isometric_sphere(&MoebiusMatrix::identity()), Err(Error::FixesInfinity));
    assert_eq!(isometric_sphere(&generator("C")), Err(Error::FixesInfinity));
}

#[test]
fn radius_is_reciprocal_of_lower_left_entry() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for _ in 0..100 {
        let g = random_matrix(&mut rng);
        let s = isometric_sphere(&g).unwrap();
        assert!((g.det() - 1.0).norm() < 1e-10);
        assert!((s.radius * g.c.norm() - 1.0).abs() < 1e-10);
        assert!((s.center - g.a / g.c).norm() < 1e-10 * s.center.norm().max(1.0));
    }
}

#[test]
fn sphere_is_where_height_is_preserved() {
    // Points of the sphere of g are equally far from the horoball at ∞ and
    // from its image under g, so g⁻¹ keeps their height.
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..50 {
        let g = random_matrix(&mut rng);
        let s = isometric_sphere(&g).unwrap();
        let inv = g.inverse();
        for _ in 0..10 {
            let theta: f64 = rng.gen_range(0.05..1.5);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let z = s.center + Complex64::from_polar(s.radius * theta.cos(), phi);
            let t = s.radius * theta.sin();
            let (_, t2) = inv.apply(z, t);
            assert!((t2 - t).abs() < 1e-9 * t.max(1.0), "{t} -> {t2}");
            // Above the sphere heights shrink, below they grow.
            let (_, up) = inv.apply(z, 1.5 * t + 0.1 * s.radius);
            assert!(up < 1.5 * t + 0.1 * s.radius);
        }
    }
}

#[test]
fn translating_a_matrix_translates_its_sphere() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let lattice = [c(4.0, 0.0), omega()];
    for _ in 0..50 {
        let g = random_matrix(&mut rng);
        let s = isometric_sphere(&g).unwrap();
        for tau in lattice {
            let t = m(c(1.0, 0.0), tau, c(0.0, 0.0), c(1.0, 0.0));
            let moved = isometric_sphere(&(t * g)).unwrap();
            assert!((moved.center - (s.center + tau)).norm() < 1e-10);
            assert!((moved.radius - s.radius).abs() < 1e-10);
            // Precomposing with a translation does not move the sphere.
            let same = isometric_sphere(&(g * t)).unwrap();
            assert!((same.center - s.center).norm() < 1e-10);
        }
    }
}

#[test]
fn matrices_form_a_group() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..20 {
        let (g, h) = (random_matrix(&mut rng), random_matrix(&mut rng));
        assert!((g * g.inverse()).approx_eq(&MoebiusMatrix::identity(), 1e-10));
        assert!((g * h).inverse().approx_eq(&(h.inverse() * g.inverse()), 1e-9));
        // The action is compatible with multiplication.
        let (z, t) = (c(0.3, -0.2), 0.7);
        let (z1, t1) = h.apply(z, t);
        let (z2, t2) = g.apply(z1, t1);
        let (z3, t3) = (g * h).apply(z, t);
        assert!((z2 - z3).norm() < 1e-8 && (t2 - t3).abs() < 1e-8);
    }
}

fn preset() -> (Vec<Generator>, CuspLattice, Window) {
    let g = figure8_group();
    (g.generators, g.lattice, g.window)
}

#[test]
fn no_words_no_spheres() {
    let (gens, lattice, window) = preset();
    assert!(enumerate(&gens, &lattice, 0, &window).is_empty());
}

#[test]
fn enumeration_only_grows() {
    let (gens, lattice, window) = preset();
    let mut previous: Vec<IsometricSphere> = Vec::new();
    for len in 1..=4 {
        let now = enumerate(&gens, &lattice, len, &window);
        for s in &previous {
            assert!(
                now.iter().any(|t| (t.center - s.center).norm() < 1e-9 && (t.radius - s.radius).abs() < 1e-9),
                "length {len} lost {s:?}"
            );
        }
        assert!(now.len() >= previous.len());
        previous = now;
    }
}

#[test]
fn short_words_give_the_unit_spheres() {
    let (gens, lattice, window) = preset();
    let spheres = enumerate(&gens, &lattice, 2, &window);
    let w = omega();
    for center in [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), w * w + 1.0, w * w + 2.0] {
        assert!(
            spheres.iter().any(|s| (s.center - center).norm() < 1e-9 && (s.radius - 1.0).abs() < 1e-12),
            "missing {center}"
        );
    }
    assert!(spheres.iter().all(|s| s.radius <= 1.0 + 1e-12));
    assert!(spheres.iter().all(|s| window.contains(s.center, 1e-9)));
}

fn figure8_visible(grid: usize) -> Vec<VisibleSphere> {
    let (gens, lattice, window) = preset();
    let spheres = enumerate(&gens, &lattice, 3, &window);
    visible(&spheres, &lattice, &window, grid)
}

#[test]
fn ten_faces() {
    let start = Instant::now();
    let vis = figure8_visible(256);
    assert_eq!(vis.len(), 10);
    assert!(vis.iter().all(|v| (v.sphere.radius - 1.0).abs() < 1e-10));
    // Centers 0, 1, 2, 3, 4 on the bottom side of the window and their
    // translates by ω on the top side.
    let key = |z: Complex64| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64);
    let got: HashSet<_> = vis.iter().map(|v| key(v.sphere.center)).collect();
    let want: HashSet<_> = (0..5).flat_map(|k| [key(c(k as f64, 0.0)), key(c(k as f64, 0.0) + omega())]).collect();
    assert_eq!(got, want);
    assert!(start.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn visible_set_is_stable_under_refinement() {
    let a = figure8_visible(256);
    let b = figure8_visible(512);
    assert!(same_spheres(&a, &b));
}

#[test]
fn longer_words_add_no_faces() {
    let (gens, lattice, window) = preset();
    let three = visible(&enumerate(&gens, &lattice, 3, &window), &lattice, &window, 128);
    let four = visible(&enumerate(&gens, &lattice, 4, &window), &lattice, &window, 128);
    assert!(same_spheres(&three, &four));
}

fn big_lattice() -> CuspLattice {
    CuspLattice::new(c(100.0, 0.0), c(0.0, 100.0)).unwrap()
}

#[test]
fn hidden_sphere_is_removed() {
    let window = Window::rectangle(-2.0, -2.0, 2.0, 2.0);
    let spheres = vec![sphere(c(0.0, 0.0), 1.0, "big"), sphere(c(0.2, 0.1), 0.1, "small")];
    let vis = visible(&spheres, &big_lattice(), &window, 128);
    assert_eq!(vis.len(), 1);
    assert_eq!(vis[0].sphere.word, "big");
}

#[test]
fn single_sphere_is_kept() {
    let window = Window::rectangle(-2.0, -2.0, 2.0, 2.0);
    let vis = visible(&[sphere(c(0.5, 0.0), 0.7, "g")], &big_lattice(), &window, 64);
    assert_eq!(vis.len(), 1);
    assert!(!vis[0].apex_covered);
}

#[test]
fn dual_edges_of_figure8() {
    let vis = figure8_visible(256);
    let edges = dual_edges(&vis);
    assert_eq!(edges.len(), 10);
    assert!(edges.iter().all(|e| !e.covered));
    for (e, v) in edges.iter().zip(&vis) {
        assert_eq!(e.center, v.sphere.center);
    }
    assert!(dual_edges(&[]).is_empty());
}

#[test]
fn covered_apex_is_flagged() {
    // The small sphere pokes out past the rim of the big one, but the big one
    // is higher over the small one's center: at 0.8 it has height 0.6.
    let window = Window::rectangle(-2.0, -2.0, 3.0, 2.0);
    let spheres = vec![sphere(c(0.0, 0.0), 1.0, "big"), sphere(c(0.8, 0.0), 0.5, "small")];
    let vis = visible(&spheres, &big_lattice(), &window, 256);
    assert_eq!(vis.len(), 2);
    let edges = dual_edges(&vis);
    let small = edges.iter().find(|e| e.word == "small").unwrap();
    assert!(small.covered);
    let big = edges.iter().find(|e| e.word == "big").unwrap();
    assert!(!big.covered);
    // Envelope check: over the small center the big sphere is higher.
    assert!(spheres[0].height(c(0.8, 0.0)).unwrap() > spheres[1].radius);
}

#[test]
fn figure8_svg() {
    let (_, lattice, window) = preset();
    let svg = ford_svg(&figure8_visible(256), &lattice, &window);
    assert_eq!(svg.matches(r#"class="sphere""#).count(), 10);
    assert_eq!(svg.matches(r#"class="dual""#).count(), 10);
    assert_eq!(svg.matches("<polygon").count(), 1);
    assert!(svg.matches(r#"class="face""#).count() > 0);
    assert!(svg.contains(r#"class="window""#));
}

#[test]
fn empty_and_single_svg() {
    let window = Window::rectangle(0.0, 0.0, 1.0, 1.0);
    let svg = ford_svg(&[], &big_lattice(), &window);
    assert_eq!(svg.matches("<polygon").count(), 1);
    assert_eq!(svg.matches("<circle").count(), 0);
    let vis = visible(&[sphere(c(0.5, 0.5), 0.3, "g")], &big_lattice(), &window, 32);
    let svg = ford_svg(&vis, &big_lattice(), &window);
    assert_eq!(svg.matches(r#"class="sphere""#).count(), 1);
    assert_eq!(svg.matches("<line").count(), 0);
}

#[test]
fn generator_file_matches_preset() {
    let s3 = 3f64.sqrt() / 2.0;
    let text = format!(
        r#"{{"generators": [[[0.5, {s3}], [0.5, {s3}], [0.5, {s3}], [1, 0]],
                            [[1, 0], [0.5, {s3}], [0, 0], [1, 0]],
                            [[2, 0], [-1, 0], [1, 0], [0, 0]]],
             "names": ["B", "C", "D"],
             "lattice": [[4, 0], [0.5, {s3}]]}}"#
    );
    let g = parse_group(&text).unwrap();
    let p = figure8_group();
    for (a, b) in g.generators.iter().zip(&p.generators) {
        assert_eq!(a.name, b.name);
        assert!(a.matrix.approx_eq(&b.matrix, 1e-12));
    }
    let vis = visible(&enumerate(&g.generators, &g.lattice, 3, &g.window), &g.lattice, &g.window, 128);
    assert_eq!(vis.len(), 10);
    assert!(matches!(parse_group("{\"generators\": []}"), Err(Error::Parse { .. })));
}
