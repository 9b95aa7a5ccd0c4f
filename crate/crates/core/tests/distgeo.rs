mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use simpose_core::distgeo::*;

#[test]
fn cm_matches_permutation_expansion() {
    let mut rng = rng(1);
    for n in 2..=5 {
        for _ in 0..20 {
            let p = random_points(&mut rng, n, 4);
            let d = distances_of(&p).unwrap();
            let want = leibniz_det(&cm_matrix(&p));
            let got = cm_det_full(&d);
            assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "n = {n}: {got} vs {want}");
        }
    }
}

#[test]
fn regular_tetrahedron() {
    let d = DistanceSet::from_pairs(4, &[1.0; 6]).unwrap();
    assert!((cm_det_full(&d) - 4.0).abs() < 1e-12);
    assert!((simplex_volume(&d).unwrap() - 2f64.sqrt() / 12.0).abs() < 1e-12);
    assert!((circumradius(&d).unwrap() - (3.0f64 / 8.0).sqrt()).abs() < 1e-12);
}

#[test]
fn circumradius_agrees_with_linear_system() {
    let mut rng = rng(2);
    for k in 2..=4 {
        for _ in 0..50 {
            let p = random_simplex(&mut rng, k);
            let (c, r) = circumcenter_oracle(&p);
            let det_r = circumradius(&distances_of(&p).unwrap()).unwrap();
            assert!((det_r - r).abs() < 1e-9 * r);
            let sphere = circumcenter(&p).unwrap();
            assert!(dist(&sphere.center, &c) < 1e-9 * r);
        }
    }
}

#[test]
fn degenerate_inputs_name_the_subset() {
    let d = DistanceSet::triangle(1.0, 2.0, 3.0).unwrap();
    let report = is_constructible(&d);
    assert!(!report.constructible);
    let bad: Vec<_> = report.failures().map(|r| r.subset.clone()).collect();
    assert_eq!(bad, vec![vec![0, 1, 2]]);

    let flat =
        distances_of(&[vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 0.0]]).unwrap();
    let report = is_constructible(&flat);
    assert_eq!(report.failures().map(|r| r.subset.len()).collect::<Vec<_>>(), vec![4]);
    assert!(realize(&flat).is_err());
}

#[test]
fn realize_then_measure_round_trips() {
    let mut rng = rng(3);
    for k in 2..=4 {
        let p = random_simplex(&mut rng, k);
        let d = distances_of(&p).unwrap();
        let q = realize(&d).unwrap();
        let e = distances_of(&q).unwrap();
        for i in 0..=k {
            for j in 0..=k {
                assert!((d.get(i, j) - e.get(i, j)).abs() < 1e-9);
            }
        }
    }
}

fn simplex_strategy(k: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    any::<u64>().prop_map(move |s| random_simplex(&mut rng(s), k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subset_signs_alternate(p in (2usize..=4).prop_flat_map(simplex_strategy)) {
        let report = is_constructible(&distances_of(&p).unwrap());
        prop_assert!(report.constructible);
        for r in &report.records {
            prop_assert_eq!(r.det.signum() as i8, if r.subset.len() % 2 == 0 { 1 } else { -1 });
        }
    }

    #[test]
    fn volume_squared_is_normalized_cm(p in (2usize..=4).prop_flat_map(simplex_strategy)) {
        let k = p.len() - 1;
        let d = distances_of(&p).unwrap();
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        let v = simplex_volume(&d).unwrap();
        let cm = cm_det_full(&d).abs();
        prop_assert!((v * v * 2f64.powi(k as i32) * fact * fact - cm).abs() < 1e-10 * cm);
    }

    #[test]
    fn heron_is_area(p in simplex_strategy(2)) {
        let d = distances_of(&p).unwrap();
        let h = heron_area(d.get(0, 1), d.get(0, 2), d.get(1, 2)).unwrap();
        let v = simplex_volume(&d).unwrap();
        prop_assert!((h - v).abs() < 1e-10 * v);
    }

    #[test]
    fn distances_scale_under_similarity(p in simplex_strategy(3), seed in any::<u64>(), s in 0.1f64..10.0) {
        let mut g = rng(seed);
        let r = random_orthogonal(&mut g, 3, 1);
        let t: Vec<f64> = (0..3).map(|_| g.gen_range(-5.0..5.0)).collect();
        let moved: Vec<Vec<f64>> =
            p.iter().map(|x| r.mul_vec(x).iter().zip(&t).map(|(a, b)| s * a + b).collect()).collect();
        let (d, e) = (distances_of(&p).unwrap(), distances_of(&moved).unwrap());
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((e.get(i, j) - s * d.get(i, j)).abs() < 1e-10 * s * d.max_distance());
            }
        }
    }
}
