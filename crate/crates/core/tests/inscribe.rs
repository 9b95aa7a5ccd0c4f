mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use simpose_core::inscribe::*;
use simpose_core::polar::Pose;
use simpose_core::simspace::{normalize_reference, pose, SimilarityClass, SimplexConfig};
use simpose_core::spheres::{RadialEmbedding, SpherePoint};

fn class(points: Vec<Vec<f64>>) -> SimilarityClass {
    normalize_reference(&SimplexConfig::new(points).unwrap()).unwrap()
}

fn equilateral() -> SimilarityClass {
    class(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]])
}

fn scalene() -> SimilarityClass {
    class(vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 4.0]])
}

fn tetrahedron() -> SimilarityClass {
    class(vec![vec![1.0, 1.0, 1.0], vec![1.0, -1.0, -1.0], vec![-1.0, 1.0, -1.0], vec![-1.0, -1.0, 1.0]])
}

fn reference_triangle(cls: &SimilarityClass) -> [[f64; 2]; 3] {
    let p = &cls.delta_hat.points;
    [[p[0][0], p[0][1]], [p[1][0], p[1][1]], [p[2][0], p[2][1]]]
}

fn sin3(t: f64) -> f64 {
    1.0 + 0.3 * (3.0 * t).sin()
}

fn wobble(t: f64) -> f64 {
    1.0 + 0.2 * (2.0 * t).sin() + 0.1 * (5.0 * t).cos()
}

#[test]
fn loop_census_matches_zero_set_oracle() {
    let ellipse = ellipse_radius(1.2, 1.0);
    let curves: Vec<(RadialEmbedding, &dyn Fn(f64) -> f64)> = vec![
        (RadialEmbedding::ellipse(1.2, 1.0).unwrap(), &ellipse),
        (RadialEmbedding::from_expr(2, "1 + 0.3*sin(3*theta)").unwrap(), &sin3),
        (RadialEmbedding::from_expr(2, "1 + 0.2*sin(2*theta) + 0.1*cos(5*theta)").unwrap(), &wobble),
    ];
    for (gamma, r) in &curves {
        for cls in [equilateral(), scalene()] {
            let census = find_all_loops(&cls, gamma, &MultiStart::default()).unwrap();
            let problem = PlanarProblem { r: *r, tri: reference_triangle(&cls) };
            assert_eq!(census.loops.len(), problem.loop_count(600, 0.05));
            assert_eq!(degree_sum(&census.loops).unwrap(), 1);
            for (s, got) in census.pose_grid.iter().zip(&census.crossings_per_pose) {
                assert_eq!(*got, problem.solutions_at_pose(*s, 3.0).len(), "pose {s}");
            }
        }
    }
}

#[test]
fn ellipse_solutions_at_identity_match_brute_force() {
    let gamma = RadialEmbedding::ellipse(1.2, 1.0).unwrap();
    let cls = scalene();
    let r = ellipse_radius(1.2, 1.0);
    let problem = PlanarProblem { r: &r, tri: reference_triangle(&cls) };
    let want = problem.solutions_at_pose(0.0, 3.0);
    assert!(!want.is_empty());
    let pose = Pose::identity(2);
    let mut found: Vec<InscribedSolution> = Vec::new();
    for a in 0..48 {
        for scale in [0.4, 0.8, 1.2] {
            let theta = 2.0 * PI * a as f64 / 48.0;
            let x = radial_seed(&cls, &gamma, &pose, &SpherePoint::from_angle(theta), scale * cls.base_edge()).unwrap();
            if let Ok(sol) = newton_solve(&x, &pose, &cls, &gamma, &NewtonOptions::default()) {
                if !found.iter().any(|f| f.distance(&sol) < 1e-7) {
                    found.push(sol);
                }
            }
        }
    }
    assert_eq!(found.len(), want.len());
    for w in &want {
        let hit = found.iter().any(|f| f.vertices.iter().zip(w).all(|(a, b)| dist(a, b) < 1e-8));
        assert!(hit, "missing {w:?}");
    }
}

#[test]
fn round_sweep_is_stationary() {
    let cls = tetrahedron();
    let pose = Pose::from_matrix(random_orthogonal(&mut rng(4), 3, 1)).unwrap();
    let path = sweep_homotopy(&pose, &cls, &RadialEmbedding::round(3), &HomotopyOptions::default()).unwrap();
    let first = &path[0];
    assert!(path.iter().all(|p| p.distance(first) < 1e-12));
    assert_eq!(path.last().unwrap().t, 1.0);
}

#[test]
fn seeded_solve_recovers_round_solution() {
    let cls = tetrahedron();
    let gamma = RadialEmbedding::round(3);
    let u = random_orthogonal(&mut rng(8), 3, 1);
    let exact = initial_guess_round(&Pose::from_matrix(u).unwrap(), &cls);
    let seed: Vec<SpherePoint> = exact.points.iter().map(|p| p.exp(&[0.01, -0.02])).collect();
    let got = solve_from_points(&cls, &gamma, &seed, &NewtonOptions::default()).unwrap();
    assert!(got.direct);
    assert!(got.seed_deviation < 0.05);
    let edges = got.solution.edge_lengths();
    assert!(edges.iter().all(|e| (e - edges[0]).abs() < 1e-10));
    assert!((edges[0] - (8.0f64 / 3.0).sqrt()).abs() < 1e-10);
}

#[test]
fn three_dimensional_pose_loop_closes() {
    let cls = tetrahedron();
    let gamma =
        RadialEmbedding::new(3, simpose_core::spheres::RadialShape::Ellipsoid { a: 1.1, b: 1.0, c: 0.95 }).unwrap();
    let path = PosePath::Axis { axis: [0.3, -0.5, 0.8], base: Pose::identity(3) };
    let start = sweep_homotopy(&path.pose(0.0), &cls, &gamma, &HomotopyOptions::default()).unwrap();
    let tr = trace_pose_loop(&cls, &gamma, &path, start.last().unwrap(), 0.0, &TraceOptions::default()).unwrap();
    assert!(tr.closed);
    assert_eq!(tr.pose_winding, 1);
    assert!(degree_sum(&[tr]).is_err());
}

#[test]
fn pose_of_solution_is_the_prescribed_pose() {
    let cls = scalene();
    let gamma = RadialEmbedding::from_expr(2, "1 + 0.3*sin(3*theta)").unwrap();
    for s in [0.2, 1.9, 4.4] {
        let p = Pose::planar(s, -1);
        let sol = sweep_homotopy(&p, &cls, &gamma, &HomotopyOptions::default()).unwrap().pop().unwrap();
        let q = SimplexConfig::new(sol.vertices.clone()).unwrap();
        assert!(pose(&q, &cls).unwrap().u.sub(&p.u).max_abs() < 1e-8);
    }
}

fn random_state(seed: u64, k: usize) -> (Unknowns, Pose) {
    let mut g = rng(seed);
    let points = (0..=k)
        .map(|_| {
            let v: Vec<f64> = (0..k).map(|_| g.gen_range(-1.0..1.0)).collect();
            SpherePoint::from_vector(&v).unwrap()
        })
        .collect();
    let x =
        Unknowns { points, lambda: g.gen_range(0.2..2.0), center: (0..k).map(|_| g.gen_range(-1.0..1.0)).collect() };
    let sign = if g.gen_bool(0.5) { 1 } else { -1 };
    (x, Pose::from_matrix(random_orthogonal(&mut g, k, sign)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analytic_jacobian_matches_fd(seed in any::<u64>(), k in 2usize..=3) {
        let (cls, gamma) = if k == 2 {
            (scalene(), RadialEmbedding::from_expr(2, "1 + 0.2*sin(2*theta) + 0.1*cos(5*theta)").unwrap())
        } else {
            (tetrahedron(), RadialEmbedding::from_expr(3, "1 + sin(phi)^3*sin(3*theta)/5 - abs(cos(phi))^7").unwrap())
        };
        let (x, pose) = random_state(seed, k);
        let a = jacobian(&x, &pose, &cls, &gamma);
        prop_assume!(a.is_ok());
        let a = a.unwrap();
        let fd = jacobian_fd(&x, &pose, &cls, &gamma, 1e-6).unwrap();
        prop_assert!(jacobian_discrepancy(&a, &fd) < 1e-5);
        prop_assert_eq!(a.rows(), unknown_count(k));
    }

    #[test]
    fn residual_vanishes_on_embedded_similar_simplices(seed in any::<u64>()) {
        let cls = scalene();
        let gamma = RadialEmbedding::round(2);
        let s = rng(seed).gen_range(0.0..2.0 * PI);
        let pose = Pose::planar(s, 1);
        let f = residual(&initial_guess_round(&pose, &cls), &pose, &cls, &gamma).unwrap();
        prop_assert!(f.iter().all(|v| v.abs() < 1e-12));
    }
}
