use kdee_core::density::{
    auto_grid, cellwise_median, estimate_kde, median_grid, scott_bandwidth, DEFAULT_GRID_CELLS, NORMALIZATION_TOL,
};
use kdee_core::embedding::Point;
use kdee_core::infotheory::entropy;
use kdee_core::simulators::rng::stream;
use kdee_core::{DensityGrid, Error, GaussianKde, GridSpec, PointCloud};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

fn cloud(points: Vec<Point>) -> PointCloud {
    PointCloud::new(points).unwrap()
}

fn gaussian_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = stream(seed, 0, "gaussian-cloud");
    cloud(
        (0..n)
            .map(|_| [rng.sample(StandardNormal), rng.sample(StandardNormal)])
            .collect(),
    )
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn points_strategy() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::array::uniform2(-50.0f64..50.0), 3..200)
}

#[test]
fn scott_examples() {
    assert!((scott_bandwidth(64, 2).unwrap() - 0.5).abs() < 1e-15);
    assert!((scott_bandwidth(1_000_000, 2).unwrap() - 0.1).abs() < 1e-15);
    assert!(matches!(scott_bandwidth(1, 2), Err(Error::Parameter(_))));
}

#[test]
fn too_few_points() {
    let c = cloud(vec![[0.0, 0.0], [1.0, 1.0]]);
    assert!(matches!(estimate_kde(&c, None), Err(Error::InsufficientData(_))));
}

#[test]
fn jittered_cluster_peaks_at_its_center() {
    let mut rng = stream(5, 0, "cluster");
    let mut pts: Vec<Point> = (0..150)
        .map(|_| {
            [
                1e-3 * rng.sample::<f64, _>(StandardNormal),
                1e-3 * rng.sample::<f64, _>(StandardNormal),
            ]
        })
        .collect();
    pts.extend(pts.clone().iter().map(|p| [-p[0], -p[1]]));
    let g = estimate_kde(&cloud(pts), None).unwrap();
    let (j, k) = g.argmax();
    let s = g.spec();
    assert!(s.x0 + j as f64 * s.dx <= 0.0 && 0.0 <= s.x0 + (j + 1) as f64 * s.dx);
    assert!(s.y0 + k as f64 * s.dy <= 0.0 && 0.0 <= s.y0 + (k + 1) as f64 * s.dy);
}

#[test]
fn standard_gaussian_density_at_origin() {
    let g = estimate_kde(&gaussian_cloud(5000, 11), None).unwrap();
    let (j, k) = g.spec().cell_of([0.0, 0.0]).unwrap();
    let target = 1.0 / (2.0 * std::f64::consts::PI);
    assert!((g.value(j, k) / target - 1.0).abs() < 0.15, "{}", g.value(j, k));
}

#[test]
fn degenerate_clouds_stay_finite() {
    let line = cloud((0..50).map(|i| [i as f64, 2.0 * i as f64]).collect());
    let constant = cloud(vec![[3.0, -1.0]; 20]);
    for c in [line, constant] {
        let g = estimate_kde(&c, None).unwrap();
        assert!((g.integral() - 1.0).abs() < NORMALIZATION_TOL);
        assert!(entropy(&g).0.is_finite());
    }
}

#[test]
fn auto_grid_construction() {
    let c = cloud(vec![[0.0, 0.0], [1.0, 0.2], [0.3, 1.0], [1.0, 1.0], [0.5, 0.4]]);
    let e = 3.0 * GaussianKde::new(&c).unwrap().spread();
    let s = auto_grid(&c, 40, 40).unwrap();
    let tol = 1e-12;
    assert!((s.x0 + e).abs() < tol && (s.y0 + e).abs() < tol);
    assert!((s.x0 + 40.0 * s.dx - (1.0 + e)).abs() < tol);
    assert!((s.y0 + 40.0 * s.dy - (1.0 + e)).abs() < tol);
    let d = auto_grid(&c, DEFAULT_GRID_CELLS, DEFAULT_GRID_CELLS).unwrap();
    assert_eq!(d.cells(), 16384);
}

#[test]
fn auto_grid_margin_shrinks_with_n() {
    let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
    let mut prev = f64::INFINITY;
    for reps in 1..20 {
        let pts: Vec<Point> = corners.iter().cycle().take(4 * reps).copied().collect();
        let s = auto_grid(&cloud(pts), 32, 32).unwrap();
        let margin = -s.x0;
        assert!(margin < prev);
        prev = margin;
    }
}

#[test]
fn median_of_copies_and_outliers() {
    let a = estimate_kde(&gaussian_cloud(200, 1), None).unwrap();
    // renormalizing rescales by the rounded grid mass
    let ulps = 1e-13 * a.max();
    assert!(max_abs_diff(median_grid(&[&a, &a, &a]).unwrap().values(), a.values()) <= ulps);
    assert!(max_abs_diff(median_grid(&[&a]).unwrap().values(), a.values()) <= ulps);
    let spec = *a.spec();
    let shifted: Vec<f64> = a.values().iter().map(|v| v * 5.0 + 1.0).collect();
    let outlier = DensityGrid::normalized(spec, shifted).unwrap();
    let m = median_grid(&[&a, &outlier, &a]).unwrap();
    assert!(max_abs_diff(m.values(), a.values()) <= ulps);
}

#[test]
fn median_errors() {
    let a = estimate_kde(&gaussian_cloud(50, 1), None).unwrap();
    let b = estimate_kde(&gaussian_cloud(50, 2), None).unwrap();
    assert!(matches!(median_grid(&[&a, &b]), Err(Error::Parameter(_))));
    assert!(matches!(median_grid(&[]), Err(Error::Parameter(_))));
}

#[test]
fn median_matches_sorting_oracle() {
    let spec = GridSpec::new(0.0, 0.0, 0.5, 0.25, 9, 7).unwrap();
    let grids: Vec<DensityGrid> = (0..5)
        .map(|s| {
            let mut rng = stream(s, 0, "grid");
            DensityGrid::normalized(spec, (0..spec.cells()).map(|_| rng.random::<f64>()).collect()).unwrap()
        })
        .collect();
    for count in [4, 5] {
        let refs: Vec<&DensityGrid> = grids.iter().take(count).collect();
        let m = cellwise_median(&refs).unwrap();
        for i in 0..spec.cells() {
            let mut col: Vec<f64> = refs.iter().map(|g| g.values()[i]).collect();
            col.sort_by(f64::total_cmp);
            let expect = if count % 2 == 1 {
                col[count / 2]
            } else {
                0.5 * (col[count / 2 - 1] + col[count / 2])
            };
            assert_eq!(m[i], expect);
        }
    }
}

#[test]
fn refining_the_grid_barely_moves_entropy() {
    let sine: Vec<Point> = (0..2000)
        .map(|i| {
            let t = i as f64 * 0.05;
            [t.sin() + 0.1 * (3.1 * t).cos(), (t + 0.8).sin()]
        })
        .collect();
    for c in [gaussian_cloud(2000, 4), cloud(sine)] {
        let kde = GaussianKde::new(&c).unwrap();
        let coarse = kde.evaluate(&kde.auto_grid(128, 128).unwrap()).unwrap();
        let fine = kde.evaluate(&kde.auto_grid(256, 256).unwrap()).unwrap();
        let delta = (entropy(&coarse).0 - entropy(&fine).0).abs();
        assert!(delta < 0.05, "refinement moved entropy by {delta}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grids_integrate_to_one(pts in points_strategy(), nx in 2usize..90, ny in 2usize..90) {
        let c = cloud(pts);
        let g = estimate_kde(&c, Some(&auto_grid(&c, nx, ny).unwrap())).unwrap();
        prop_assert!((g.integral() - 1.0).abs() <= NORMALIZATION_TOL);
        prop_assert!(g.values().iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn permutation_invariant(pts in points_strategy(), seed in any::<u64>()) {
        let mut shuffled = pts.clone();
        let mut rng = stream(seed, 0, "shuffle");
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        let a = GaussianKde::new(&cloud(pts)).unwrap();
        let b = GaussianKde::new(&cloud(shuffled)).unwrap();
        let spec = a.auto_grid(48, 48).unwrap();
        let (ga, gb) = (a.evaluate(&spec).unwrap(), b.evaluate(&spec).unwrap());
        prop_assert!(max_abs_diff(ga.values(), gb.values()) <= 1e-12 * ga.max());
    }

    #[test]
    fn translation_equivariant(pts in points_strategy(), c in -100.0f64..100.0) {
        let moved: Vec<Point> = pts.iter().map(|p| [p[0] + c, p[1] + c]).collect();
        let a = GaussianKde::new(&cloud(pts)).unwrap();
        let b = GaussianKde::new(&cloud(moved)).unwrap();
        let s = a.auto_grid(48, 48).unwrap();
        let t = GridSpec::new(s.x0 + c, s.y0 + c, s.dx, s.dy, s.nx, s.ny).unwrap();
        let (ra, rb) = (a.evaluate_raw(&s), b.evaluate_raw(&t));
        let peak = ra.iter().copied().fold(0.0, f64::max);
        prop_assert!(max_abs_diff(&ra, &rb) <= 1e-10 * peak);
    }

    #[test]
    fn median_is_order_free_and_idempotent(seeds in prop::collection::vec(any::<u64>(), 1..8)) {
        let spec = GridSpec::new(-1.0, -1.0, 0.1, 0.1, 12, 10).unwrap();
        let grids: Vec<DensityGrid> = seeds
            .iter()
            .map(|&s| {
                let mut rng = stream(s, 0, "grid");
                DensityGrid::normalized(spec, (0..spec.cells()).map(|_| rng.random::<f64>()).collect()).unwrap()
            })
            .collect();
        let refs: Vec<&DensityGrid> = grids.iter().collect();
        let rev: Vec<&DensityGrid> = grids.iter().rev().collect();
        let m = median_grid(&refs).unwrap();
        prop_assert_eq!(&m, &median_grid(&rev).unwrap());
        let again = median_grid(&[&m, &m]).unwrap();
        prop_assert!(max_abs_diff(again.values(), m.values()) <= 1e-13 * m.max());
    }
}
