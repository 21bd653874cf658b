mod common;

use std::f64::consts::PI;

use hypstruct::{lob, tet_volume, tet_volume_z, AngleTriple, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::lob_quadrature;

fn random_args(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect()
}

#[test]
fn series_matches_quadrature() {
    for k in 1..40 {
        let theta = k as f64 * PI / 40.0;
        let q = lob_quadrature(theta);
        assert!((lob(theta) - q).abs() < 1e-12, "theta {theta}: {} vs {q}", lob(theta));
    }
}

#[test]
fn quadrature_reproduces_known_constants() {
    // Catalan's constant: Λ(π/4) = G/2.
    let catalan = 0.915_965_594_177_219;
    assert!((lob_quadrature(PI / 4.0) - catalan / 2.0).abs() < 1e-13);
    assert!((lob(PI / 4.0) - catalan / 2.0).abs() < 1e-13);
}

#[test]
fn zeros_and_maximum() {
    assert_eq!(lob(0.0), 0.0);
    assert!(lob(PI / 2.0).abs() < 1e-14);
    assert!(lob(PI).abs() < 1e-14);
    // The maximum sits at π/6, where the integrand changes sign.
    let m = lob(PI / 6.0);
    for d in [-1e-3, 1e-3] {
        assert!(lob(PI / 6.0 + d) < m);
    }
}

#[test]
fn oddness() {
    for t in random_args(10_000, 1) {
        assert!((lob(-t) + lob(t)).abs() < 1e-12, "t = {t}");
    }
}

#[test]
fn periodicity() {
    for t in random_args(10_000, 2) {
        assert!((lob(t + PI) - lob(t)).abs() < 1e-12, "t = {t}");
    }
}

#[test]
fn duplication() {
    for t in random_args(10_000, 3) {
        let lhs = lob(2.0 * t);
        let rhs = 2.0 * lob(t) + 2.0 * lob(t + PI / 2.0);
        assert!((lhs - rhs).abs() < 1e-12, "t = {t}");
    }
}

#[test]
fn kubert_three() {
    for t in random_args(10_000, 4) {
        let lhs = lob(3.0 * t);
        let rhs = 3.0 * (lob(t) + lob(t + PI / 3.0) + lob(t + 2.0 * PI / 3.0));
        assert!((lhs - rhs).abs() < 1e-12, "t = {t}");
    }
}

#[test]
fn regular_tetrahedron_volume() {
    let v = tet_volume(AngleTriple::new(PI / 3.0, PI / 3.0, PI / 3.0));
    assert!((v - 3.0 * lob_quadrature(PI / 3.0)).abs() < 1e-12);
    assert!((v - 1.014_941_606_409_653_6).abs() < 1e-13);
}

#[test]
fn flat_tetrahedra_have_zero_volume() {
    assert!(tet_volume(AngleTriple::new(0.0, 0.0, PI)).abs() < 1e-14);
    assert!(tet_volume(AngleTriple::new(PI, 0.0, 0.0)).abs() < 1e-14);
    assert!(tet_volume_z(Complex64::new(2.0, 0.0)).abs() < 1e-14);
    assert!(tet_volume_z(Complex64::new(0.0, 0.0)).abs() < 1e-14);
}

#[test]
fn shape_volume_agrees_with_angles() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.01..3.0));
        let one = Complex64::new(1.0, 0.0);
        let a = z.arg();
        let b = (one / (one - z)).arg();
        let c = ((z - one) / z).arg();
        assert!((a + b + c - PI).abs() < 1e-12);
        let v = tet_volume_z(z);
        assert!((v - tet_volume(AngleTriple::new(a, b, c))).abs() < 1e-12);
        // The mirror image has the opposite signed volume.
        assert!((tet_volume_z(z.conj()) + v).abs() < 1e-12);
        // The three edge invariants describe the same tetrahedron.
        assert!((tet_volume_z(one / (one - z)) - v).abs() < 1e-12);
    }
}

#[test]
fn angle_triple_helpers() {
    let t = AngleTriple::new(PI / 2.0, PI / 4.0, PI / 4.0);
    assert!(t.sum_defect().abs() < 1e-15);
    assert!(!t.is_degenerate());
    assert!(AngleTriple::new(0.0, PI / 2.0, PI / 2.0).is_degenerate());
}

#[test]
fn non_finite_input() {
    assert!(lob(f64::NAN).is_nan());
    assert!(lob(f64::INFINITY).is_nan());
}
