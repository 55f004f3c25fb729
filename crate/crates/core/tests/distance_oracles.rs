mod support;

use std::f64::consts::TAU;

use leafdens_core::{
    dist_hellinger_sq, dist_l1, dist_moment_euclidean, dist_sup, distance_matrix,
    merge_breakpoints, normalize_leaf, rotate_density, DistanceKind, StepDensity,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn refinement_reintegrates_both_densities() {
    let mut rng = rng(1);
    for _ in 0..50 {
        let f = support::random_density(&mut rng, 2, 200);
        let g = support::random_density(&mut rng, 2, 200);
        let r = merge_breakpoints(&f, &g);
        assert_eq!(r.breakpoints[0], 0.0);
        assert_eq!(*r.breakpoints.last().unwrap(), TAU);
        let lengths: f64 = r.pieces().map(|(len, _, _)| len).sum();
        assert!((lengths - TAU).abs() < 1e-12);
        let mf: f64 = r.pieces().map(|(len, a, _)| a * len).sum();
        let mg: f64 = r.pieces().map(|(len, _, b)| b * len).sum();
        assert!((mf - 1.0).abs() < 1e-12 && (mg - 1.0).abs() < 1e-12);
        // Each refined interval lies inside one piece of each density.
        for (w, &(hf, hg)) in r.breakpoints.windows(2).zip(&r.heights) {
            let mid = 0.5 * (w[0] + w[1]);
            assert_eq!(hf, support::step_at(f.breakpoints(), f.heights(), mid));
            assert_eq!(hg, support::step_at(g.breakpoints(), g.heights(), mid));
        }
    }
}

#[test]
fn exact_distances_match_grid_oracle() {
    let mut rng = rng(2);
    for _ in 0..8 {
        let f = support::random_density(&mut rng, 2, 400);
        let g = support::random_density(&mut rng, 2, 400);
        let (l1, sup, hel) = support::grid_distances(&f, &g);
        assert!((dist_l1(&f, &g) - l1).abs() < 1e-6);
        assert!((dist_sup(&f, &g) - sup).abs() < 1e-6);
        assert!((dist_hellinger_sq(&f, &g) - hel).abs() < 1e-6);
    }
}

#[test]
fn metric_axioms_on_random_triples() {
    let mut rng = rng(3);
    let mut hellinger_violations = 0;
    for _ in 0..200 {
        let d: Vec<StepDensity> = (0..3).map(|_| support::random_density(&mut rng, 2, 50)).collect();
        for kind in DistanceKind::all(5) {
            let dist = |a: &StepDensity, b: &StepDensity| kind.distance(a, b).unwrap();
            for x in &d {
                assert_eq!(dist(x, x), 0.0);
            }
            let (ab, ba) = (dist(&d[0], &d[1]), dist(&d[1], &d[0]));
            assert_eq!(ab.to_bits(), ba.to_bits());
            let bc = dist(&d[1], &d[2]);
            let ac = dist(&d[0], &d[2]);
            assert!(ab >= 0.0 && bc >= 0.0 && ac >= 0.0);
            let ok = ac <= ab + bc + 1e-12;
            if kind == DistanceKind::HellingerSq {
                hellinger_violations += usize::from(!ok);
            } else {
                assert!(ok, "{kind}: {ac} > {ab} + {bc}");
            }
        }
    }
    println!("squared-Hellinger triangle violations: {hellinger_violations}/200");
}

#[test]
fn bounds() {
    let mut rng = rng(4);
    for _ in 0..100 {
        let f = support::random_density(&mut rng, 2, 30);
        let g = support::random_density(&mut rng, 2, 30);
        assert!(dist_l1(&f, &g) <= 2.0 + 1e-12);
        assert!(dist_hellinger_sq(&f, &g) <= 2.0 + 1e-12);
        for r in [1, 5, 9] {
            assert!(dist_moment_euclidean(&f, &g, r).unwrap() <= 2.0 * (2.0 * r as f64).sqrt());
        }
    }
}

#[test]
fn common_rotation_preserves_integral_distances() {
    let mut rng = rng(5);
    for _ in 0..50 {
        let f = support::random_density(&mut rng, 2, 100);
        let g = support::random_density(&mut rng, 2, 100);
        let mu = rng.random_range(0.0..TAU);
        let (fr, gr) = (rotate_density(&f, mu), rotate_density(&g, mu));
        assert!((dist_l1(&f, &g) - dist_l1(&fr, &gr)).abs() < 1e-12);
        assert!((dist_sup(&f, &g) - dist_sup(&fr, &gr)).abs() < 1e-12);
        assert!((dist_hellinger_sq(&f, &g) - dist_hellinger_sq(&fr, &gr)).abs() < 1e-12);
    }
}

#[test]
fn moment_distance_is_rotation_free_after_normalization() {
    let mut rng = rng(6);
    for _ in 0..30 {
        let a = support::random_sequence(&mut rng, 20, 200);
        let b = support::random_sequence(&mut rng, 20, 200);
        let sa = rng.random_range(0..a.len());
        let sb = rng.random_range(0..b.len());
        let d0 = dist_moment_euclidean(&normalize_leaf(&a), &normalize_leaf(&b), 5).unwrap();
        let d1 = dist_moment_euclidean(
            &normalize_leaf(&a.cyclic_shift(sa)),
            &normalize_leaf(&b.cyclic_shift(sb)),
            5,
        )
        .unwrap();
        assert!((d0 - d1).abs() < 1e-9);
    }
}

#[test]
fn matrix_matches_pairwise_recomputation() {
    let mut rng = rng(7);
    let densities: Vec<StepDensity> = (0..10).map(|_| support::random_density(&mut rng, 2, 300)).collect();
    let labels: Vec<String> = (0..10).map(|i| format!("d{i}")).collect();
    for kind in DistanceKind::all(5) {
        let dm = distance_matrix(&densities, &labels, kind).unwrap();
        assert_eq!(dm.kind(), Some(kind));
        for i in 0..10 {
            assert_eq!(dm.get(i, i), 0.0);
            for k in 0..10 {
                assert_eq!(dm.get(i, k), dm.get(k, i));
                if i != k {
                    let direct = kind.distance(&densities[i], &densities[k]).unwrap();
                    assert!((dm.get(i, k) - direct).abs() <= 1e-15);
                }
            }
        }
    }
}
