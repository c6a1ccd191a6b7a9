use ecs_tda::ecs::{build_ecs, euler_metric, pairwise_distance_matrix, EcsMatrix, MetricOrder, ScaleGrid};
use ecs_tda::geometry::PointCloud;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const K: usize = 3;
const R: usize = 4;

fn surface(chi: Vec<i64>) -> EcsMatrix {
    EcsMatrix {
        sample_id: "s".into(),
        grid: ScaleGrid::uniform(1.0, R).unwrap(),
        window_sizes: vec![5; K],
        chi: chi.chunks(R).map(<[i64]>::to_vec).collect(),
    }
}

fn chi() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-40i64..40, K * R)
}

fn order() -> impl Strategy<Value = MetricOrder> {
    prop::sample::select(vec![MetricOrder::L1, MetricOrder::L2])
}

proptest! {
    #[test]
    fn euler_metric_axioms(a in chi(), b in chi(), c in chi(), p in order()) {
        let (a, b, c) = (surface(a), surface(b), surface(c));
        let ab = euler_metric(&a, &b, p).unwrap();
        prop_assert_eq!(euler_metric(&a, &a, p).unwrap(), 0.0);
        prop_assert_eq!(ab, euler_metric(&b, &a, p).unwrap());
        prop_assert_eq!(ab == 0.0, a.chi == b.chi);
        let via = euler_metric(&a, &c, p).unwrap() + euler_metric(&c, &b, p).unwrap();
        // L1 sums are exact; L2 is one rounded square root per term
        let slack = match p { MetricOrder::L1 => 0.0, MetricOrder::L2 => 4.0 * f64::EPSILON * via };
        prop_assert!(ab <= via + slack);
    }

    #[test]
    fn l1_is_sum_of_absolute_differences(a in chi(), b in chi()) {
        let want: i64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        prop_assert_eq!(euler_metric(&surface(a), &surface(b), MetricOrder::L1).unwrap(), want as f64);
    }
}

#[test]
fn mismatched_grids_are_rejected() {
    let a = surface(vec![0; K * R]);
    let mut b = a.clone();
    b.grid = ScaleGrid::uniform(2.0, R).unwrap();
    assert!(euler_metric(&a, &b, MetricOrder::L1).is_err());
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointCloud {
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    PointCloud::new(&pts).unwrap()
}

#[test]
fn windows_are_contractible_beyond_their_diameter() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in 0..20 {
        let d = 2 + case % 3;
        let cloud = random_cloud(&mut rng, 60, d);
        let r_max = cloud.diameter();
        let grid = ScaleGrid::uniform(r_max, 5).unwrap();
        let s = build_ecs("c", &cloud, 4, &grid, case as u64).unwrap();
        assert_eq!(s.window_sizes.iter().sum::<usize>(), 60);
        for row in &s.chi {
            assert_eq!(*row.last().unwrap(), 1, "case {case}");
        }
    }
}

#[test]
fn lattice_surfaces_do_not_depend_on_jitter_seed() {
    let pts: Vec<Vec<f64>> = (0..36).map(|i| vec![(i % 6) as f64, (i / 6) as f64]).collect();
    let cloud = PointCloud::new(&pts).unwrap();
    let grid = ScaleGrid::uniform(1.0, 8).unwrap();
    let base = build_ecs("grid", &cloud, 2, &grid, 0).unwrap();
    for seed in 1..6 {
        assert_eq!(build_ecs("grid", &cloud, 2, &grid, seed).unwrap().chi, base.chi);
    }
}

#[test]
fn distance_matrix_is_symmetric_with_zero_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = ScaleGrid::uniform(0.8, 6).unwrap();
    let surfaces: Vec<EcsMatrix> = (0..6)
        .map(|i| build_ecs(format!("s{i}"), &random_cloud(&mut rng, 40, 3), 3, &grid, i).unwrap())
        .collect();
    let d = pairwise_distance_matrix(&surfaces, MetricOrder::L1).unwrap();
    for i in 0..6 {
        assert_eq!(d[i][i], 0.0);
        for j in 0..6 {
            assert_eq!(d[i][j], d[j][i]);
            assert_eq!(d[i][j], euler_metric(&surfaces[i], &surfaces[j], MetricOrder::L1).unwrap());
        }
    }
}
