use ecs_tda::geometry::{
    alpha_filtration, cech_oracle_chi, circumball, delaunay_triangulation, min_enclosing_ball,
    PointCloud,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointCloud {
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    PointCloud::new(&pts).unwrap()
}

#[test]
fn alpha_chi_equals_cech_oracle_on_random_clouds() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    for case in 0..200 {
        let d = 2 + case % 3;
        let n = rng.random_range(d + 1..=10);
        let cloud = random_cloud(&mut rng, n, d);
        let tri = delaunay_triangulation(&cloud, case as u64).unwrap();
        let filt = alpha_filtration(&tri, &cloud).unwrap();
        let diam = cloud.diameter();
        for i in 0..20 {
            let r = diam * i as f64 / 19.0;
            assert_eq!(
                filt.euler_characteristic(r),
                cech_oracle_chi(&cloud, r, 12).unwrap(),
                "case {case}, d={d}, n={n}, r={r}"
            );
        }
        assert_eq!(filt.euler_characteristic(0.0), n as i64);
        assert_eq!(filt.euler_characteristic(filt.max_radius()), 1);
    }
}

#[test]
fn delaunay_cells_have_empty_circumspheres() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..60 {
        let d = 2 + case % 3;
        let n = rng.random_range(d + 1..=15);
        let cloud = random_cloud(&mut rng, n, d);
        let tri = delaunay_triangulation(&cloud, 0).unwrap();
        assert!(!tri.cells().is_empty());
        for cell in tri.cells() {
            let pts: Vec<&[f64]> = cell.vertices().iter().map(|&i| cloud.point(i)).collect();
            let ball = circumball(&pts).unwrap();
            let lim = ball.radius * ball.radius * (1.0 - 1e-7);
            for p in cloud.points() {
                let d2: f64 = p
                    .iter()
                    .zip(ball.center.coords())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                assert!(d2 >= lim, "case {case}: point inside cell {cell:?}");
            }
        }
    }
}

#[test]
fn grid_points_triangulate_after_jitter() {
    // a lattice is maximally degenerate (cocircular quadruples everywhere)
    let pts: Vec<Vec<f64>> = (0..16)
        .map(|i| vec![(i % 4) as f64, (i / 4) as f64])
        .collect();
    let cloud = PointCloud::new(&pts).unwrap();
    let tri = delaunay_triangulation(&cloud, 3).unwrap();
    let filt = alpha_filtration(&tri, &cloud).unwrap();
    for i in 0..20 {
        let r = 2.5 * i as f64 / 19.0;
        // jitter may move values by ~1e-9; stay away from critical radii
        let r = r + 1e-4;
        assert_eq!(
            filt.euler_characteristic(r),
            cech_oracle_chi(&cloud, r, 16).unwrap(),
            "r={r}"
        );
    }
}

fn cloud_strategy(max_n: usize) -> impl Strategy<Value = (usize, Vec<f64>)> {
    (2usize..=4).prop_flat_map(move |d| {
        (d + 1..=max_n).prop_flat_map(move |n| {
            (Just(d), prop::collection::vec(-10.0f64..10.0, n * d))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filtration_is_monotone((d, flat) in cloud_strategy(14)) {
        let cloud = PointCloud::from_flat(d, flat).unwrap();
        let tri = delaunay_triangulation(&cloud, 1).unwrap();
        let filt = alpha_filtration(&tri, &cloud).unwrap();
        for e in filt.entries() {
            prop_assert!(e.radius.is_finite() && e.radius >= 0.0);
            if e.simplex.dim() == 0 {
                prop_assert_eq!(e.radius, 0.0);
            }
            for f in e.simplex.facets() {
                prop_assert!(filt.radius_of(&f).unwrap() <= e.radius);
            }
        }
    }

    #[test]
    fn enclosing_ball_is_minimal(flat in prop::collection::vec(-5.0f64..5.0, 2..=12)) {
        let pts: Vec<&[f64]> = flat.chunks_exact(2).collect();
        let ball = min_enclosing_ball(&pts).unwrap();
        for p in &pts {
            prop_assert!(ball.contains(p));
        }
        let far = |c: [f64; 2]| {
            pts.iter()
                .map(|p| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt())
                .fold(0.0, f64::max)
        };
        let (cx, cy) = (ball.center.0[0], ball.center.0[1]);
        let span = ball.radius.max(1e-3);
        for i in -20..=20 {
            for j in -20..=20 {
                let c = [cx + span * i as f64 / 20.0, cy + span * j as f64 / 20.0];
                prop_assert!(far(c) >= ball.radius - 1e-6);
            }
        }
    }
}
