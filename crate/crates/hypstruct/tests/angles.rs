mod common;

use std::f64::consts::PI;

use hypstruct::angles::{directional_derivative, gradient, volume};
use hypstruct::shapes::{log_holonomy, peripheral_curves};
use hypstruct::triangulation::{cusps, NormalCurve, Step, Tetrahedron, Triangulation};
use hypstruct::twobridge::{build, initial_angles, normalize_cf};
use hypstruct::{
    edge_rows, feasible_point, leading_trailing, maximize, polytope, residual, shapes_from_angles,
    AnglePoint, AnglePolytope, Error, MaxStatus,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{fixture, lob_quadrature, solve_complete, two_bridge};

fn test_triangulations() -> Vec<Triangulation> {
    vec![
        fixture("figure8.tri"),
        fixture("octahedron.tri"),
        fixture("octahedron_flat.tri"),
        two_bridge(&[2, 3]),
        two_bridge(&[2, 2, 2]),
        two_bridge(&[3, 1, 2]),
    ]
}

/// Random interior points: steps from the feasible point along random
/// tangent directions, shortened until every angle keeps some room.
fn random_interior(pol: &AnglePolytope, count: usize, seed: u64) -> Vec<AnglePoint> {
    let center = feasible_point(pol).unwrap();
    let room = center.min_slack();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x: Vec<f64> = (0..pol.dimension()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w = pol.tangent(&x);
            let size = w.w.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let step = rng.gen_range(0.1..0.8) * room / size;
            AnglePoint::new(center.a.iter().zip(&w.w).map(|(a, d)| a + step * d).collect())
        })
        .collect()
}

/// Corner cuts around one cusp vertex, all turning the same way.
fn vertex_loop(t: &Triangulation, tet: usize, vertex: u8, corner: u8) -> NormalCurve {
    let mut steps = Vec::new();
    let (mut ct, mut cv, mut cc) = (tet, vertex, corner);
    loop {
        let st = Step { tet: ct, vertex: cv, corner: cc, eps: 1 };
        steps.push(st);
        let (_, exit) = st.entry_exit();
        let (nt, p) = t.glue(ct, exit);
        (ct, cv, cc) = (nt, p[cv as usize], p[cc as usize]);
        if (ct, cv, cc) == (tet, vertex, corner) {
            break;
        }
    }
    NormalCurve { cusp: 0, steps }
}

#[test]
fn dimension_is_tets_plus_cusps() {
    for t in test_triangulations() {
        let pol = polytope(&t);
        let c = cusps(&t).unwrap().len();
        assert_eq!(pol.dimension(), t.len() + c, "{}", t.name);
        assert_eq!(pol.rank() + pol.dimension(), 3 * t.len());
        for k in 0..pol.dimension() {
            let mut x = vec![0.0; pol.dimension()];
            x[k] = 1.0;
            assert!(pol.tangent_residual(&pol.tangent(&x)) < 1e-12);
        }
    }
}

#[test]
fn figure8_angle_equations() {
    // Each edge of the figure-8 triangulation sees two of one angle and one
    // of another from each tetrahedron.
    let pol = polytope(&fixture("figure8.tri"));
    for r in 2..4 {
        let row: Vec<f64> = pol.matrix.row(r).iter().copied().collect();
        assert_eq!(row.iter().sum::<f64>(), 6.0);
        for tet in 0..2 {
            let mut part: Vec<f64> = row[3 * tet..3 * tet + 3].to_vec();
            part.sort_by(f64::total_cmp);
            assert_eq!(part, vec![0.0, 1.0, 2.0]);
        }
    }
    // The regular point with every angle π/3 solves them.
    let p = AnglePoint::new(vec![PI / 3.0; 6]);
    assert!(pol.residual(&p) < 1e-14);
}

#[test]
fn figure8_feasible_point_dominates_regular() {
    let pol = polytope(&fixture("figure8.tri"));
    let p = feasible_point(&pol).unwrap();
    assert!(pol.residual(&p) < 1e-10);
    assert!(p.min_slack() >= PI / 3.0 - 1e-9);
}

#[test]
fn feasible_point_dominates_explicit_construction() {
    for code in [vec![2, 3], vec![3, 3], vec![2, 2, 2], vec![4, 1, 3]] {
        let tb = build(&normalize_cf(&code).unwrap()).unwrap();
        let pol = polytope(&tb.triangulation);
        let explicit = AnglePoint::new(initial_angles(&tb));
        let p = feasible_point(&pol).unwrap();
        assert!(pol.contains_interior(&p, 1e-10));
        assert!(p.min_slack() >= explicit.min_slack() - 1e-9, "{code:?}");
    }
}

/// A single tetrahedron with faces 0, 1 paired and faces 2, 3 paired. Its
/// edge 01 forms a class by itself, so that one angle would have to be 2π.
fn valence_one() -> Triangulation {
    let g = [(0, [1, 0, 2, 3]), (0, [1, 0, 2, 3]), (0, [0, 1, 3, 2]), (0, [0, 1, 3, 2])];
    Triangulation::new("valence-one", vec![Tetrahedron { gluings: g }])
}

#[test]
fn valence_one_edge_is_infeasible() {
    let t = valence_one();
    assert!(hypstruct::validate(&t).is_empty());
    let classes = hypstruct::edge_classes(&t);
    assert!(classes.iter().any(|c| c.sides.len() == 1));
    assert_eq!(feasible_point(&polytope(&t)), Err(Error::Infeasible));
}

#[test]
fn regular_volume() {
    let p = AnglePoint::new(vec![PI / 3.0; 6]);
    assert!((volume(&p) - 6.0 * lob_quadrature(PI / 3.0)).abs() < 1e-12);
}

#[test]
fn flat_tetrahedron_contributes_nothing() {
    let p = AnglePoint::new(vec![0.0, 0.0, PI, PI / 3.0, PI / 3.0, PI / 3.0]);
    assert!((volume(&p) - 3.0 * lob_quadrature(PI / 3.0)).abs() < 1e-12);
    let (_, bounded) = gradient(&p);
    assert!(!bounded);
}

#[test]
fn directional_derivative_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    for t in test_triangulations() {
        let pol = polytope(&t);
        for p in random_interior(&pol, 5, 31) {
            let x: Vec<f64> = (0..pol.dimension()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w = pol.tangent(&x);
            let h = 1e-5;
            let at = |s: f64| volume(&AnglePoint::new(p.a.iter().zip(&w.w).map(|(a, d)| a + s * d).collect()));
            let fd = (at(h) - at(-h)) / (2.0 * h);
            assert!((fd - directional_derivative(&p, &w)).abs() < 1e-6, "{}", t.name);
        }
    }
}

#[test]
fn leading_trailing_is_tangent() {
    for t in test_triangulations() {
        let pol = polytope(&t);
        for (mu, lam) in peripheral_curves(&t).unwrap() {
            for c in [&mu, &lam] {
                let w = leading_trailing(c, t.len());
                assert!(pol.tangent_residual(&w) < 1e-12, "{}", t.name);
            }
        }
    }
}

#[test]
fn figure8_meridian_deformation() {
    let t = fixture("figure8.tri");
    let mu = &t.peripheral[0].meridian;
    let w = leading_trailing(mu, t.len());
    for st in &mu.steps {
        let part = &w.w[3 * st.tet..3 * st.tet + 3];
        let mut sorted = part.to_vec();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(sorted, vec![-1.0, 0.0, 1.0]);
    }
}

#[test]
fn vertex_loop_deformation_is_tangent() {
    let t = fixture("figure8.tri");
    let pol = polytope(&t);
    let sigma = vertex_loop(&t, 0, 0, 1);
    assert!(sigma.check(&t).is_ok());
    let w = leading_trailing(&sigma, t.len());
    assert!(pol.tangent_residual(&w) < 1e-12);
    // The loop links the edge through that corner, so its holonomy is the
    // edge product, whose modulus is the volume derivative.
    for p in random_interior(&pol, 3, 32) {
        let s = shapes_from_angles(&p).unwrap();
        let re = log_holonomy(&sigma, &s).re;
        assert!((directional_derivative(&p, &w) - re).abs() < 1e-9);
    }
}

#[test]
fn volume_derivative_is_log_modulus_of_holonomy() {
    for t in test_triangulations() {
        let pol = polytope(&t);
        let curves = peripheral_curves(&t).unwrap();
        for p in random_interior(&pol, 10, 33) {
            let s = shapes_from_angles(&p).unwrap();
            for (mu, lam) in &curves {
                for c in [mu, lam] {
                    let w = leading_trailing(c, t.len());
                    let h = 1e-6;
                    let at = |k: f64| volume(&AnglePoint::new(p.a.iter().zip(&w.w).map(|(a, d)| a + k * d).collect()));
                    let fd = (at(h) - at(-h)) / (2.0 * h);
                    let re = log_holonomy(c, &s).re;
                    assert!((fd - re).abs() < 1e-8, "{}: {fd} vs {re}", t.name);
                }
            }
        }
    }
}

#[test]
fn regular_angles_give_regular_shapes() {
    let s = shapes_from_angles(&AnglePoint::new(vec![PI / 3.0; 6])).unwrap();
    for z in &s.z {
        assert!((z - hypstruct::Complex64::from_polar(1.0, PI / 3.0)).norm() < 1e-15);
    }
}

#[test]
fn shape_argument_is_alpha() {
    let pol = polytope(&two_bridge(&[2, 3]));
    for p in random_interior(&pol, 5, 34) {
        let s = shapes_from_angles(&p).unwrap();
        for (i, z) in s.z.iter().enumerate() {
            assert!((z.arg() - p.a[3 * i]).abs() < 1e-14);
            // The other two angles are the arguments of the companions.
            assert!((s.z_double_prime(i).arg() - p.a[3 * i + 1]).abs() < 1e-12);
            assert!((s.z_prime(i).arg() - p.a[3 * i + 2]).abs() < 1e-12);
        }
    }
}

#[test]
fn figure8_maximum() {
    let t = fixture("figure8.tri");
    let pol = polytope(&t);
    let p0 = random_interior(&pol, 1, 35).remove(0);
    let (p, report) = maximize(&p0, &pol, 1e-10).unwrap();
    assert_eq!(report.status, MaxStatus::InteriorMax);
    assert!(p.a.iter().all(|a| (a - PI / 3.0).abs() < 1e-8));
    assert!((report.volume - 2.029883212819307).abs() < 1e-10);
    let s = shapes_from_angles(&p).unwrap();
    let r = residual(&edge_rows(&t), &s).unwrap();
    assert!(r.iter().all(|x| x.norm() < 1e-9));
}

#[test]
fn five_two_maximum_is_the_complete_structure() {
    let t = two_bridge(&[2, 3]);
    let pol = polytope(&t);
    let (p, report) = maximize(&feasible_point(&pol).unwrap(), &pol, 1e-10).unwrap();
    assert_eq!(report.status, MaxStatus::InteriorMax);
    let (s, solved) = solve_complete(&t);
    assert!(s.is_geometric());
    assert!((report.volume - solved.volume).abs() < 1e-8);
    // The maximizing angles are the arguments of the solved shapes.
    let angles = shapes_from_angles(&p).unwrap();
    for (a, b) in angles.z.iter().zip(&s.z) {
        assert!((a - b).norm() < 1e-6);
    }
}

#[test]
fn maximizer_is_unique() {
    for t in [fixture("figure8.tri"), two_bridge(&[2, 2, 2]), fixture("octahedron.tri")] {
        let pol = polytope(&t);
        let starts = random_interior(&pol, 2, 36);
        let (a, ra) = maximize(&starts[0], &pol, 1e-10).unwrap();
        let (b, rb) = maximize(&starts[1], &pol, 1e-10).unwrap();
        assert_eq!(ra.status, MaxStatus::InteriorMax);
        assert_eq!(rb.status, MaxStatus::InteriorMax);
        let gap = a.a.iter().zip(&b.a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(gap < 1e-7, "{}: {gap}", t.name);
    }
}

#[test]
fn volume_is_concave() {
    for t in test_triangulations() {
        let pol = polytope(&t);
        let pts = random_interior(&pol, 8, 37);
        for pair in pts.windows(2) {
            let (p, q) = (&pair[0], &pair[1]);
            let (vp, vq) = (volume(p), volume(q));
            for k in 1..10 {
                let u = k as f64 / 10.0;
                let m = AnglePoint::new(p.a.iter().zip(&q.a).map(|(x, y)| (1.0 - u) * x + u * y).collect());
                assert!(volume(&m) >= (1.0 - u) * vp + u * vq - 1e-12, "{}", t.name);
            }
        }
    }
}

#[test]
fn boundary_maximum() {
    let t = fixture("octahedron_flat.tri");
    let pol = polytope(&t);
    let (p, report) = maximize(&feasible_point(&pol).unwrap(), &pol, 1e-10).unwrap();
    assert_eq!(report.status, MaxStatus::BoundaryMax);
    assert!(!report.flat.is_empty());
    for f in &report.flat {
        let mut pattern = f.pattern.to_vec();
        pattern.sort_by(f64::total_cmp);
        assert_eq!(pattern, vec![0.0, 0.0, PI]);
    }
    // The other tetrahedra approach the regular octahedron's angles, so the
    // volume approaches that of the octahedron.
    assert!((report.volume - 8.0 * lob_quadrature(PI / 4.0)).abs() < 1e-6);
    assert!(p.min_slack() < 1e-6);
}

#[test]
fn non_interior_start_is_rejected() {
    let t = fixture("figure8.tri");
    let pol = polytope(&t);
    let bad = AnglePoint::new(vec![0.0, 0.0, PI, PI, 0.0, 0.0]);
    assert_eq!(maximize(&bad, &pol, 1e-10).unwrap_err(), Error::NotInterior);
    let off = AnglePoint::new(vec![1.0; 6]);
    assert_eq!(maximize(&off, &pol, 1e-10).unwrap_err(), Error::NotInterior);
}
