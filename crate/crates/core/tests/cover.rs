mod common;

use proptest::prelude::*;
use rand::Rng;
use twomapper::cover::{check_good_tower, epsilon_prime, resolution, CoverSet};
use twomapper::*;

fn square(half: f64) -> BoundingBox {
    BoundingBox::new(vec![-half, -half], vec![half, half]).unwrap()
}

#[test]
fn torus_square_cover() {
    let cov = build_cubical_cover(&square(3.0), &CubicalCoverSpec::new(6, 0.5, 2).unwrap()).unwrap();
    assert_eq!(cov.sets.len(), 36);
    let l = 12.0 / 7.0;
    for s in &cov.sets {
        for w in s.widths() {
            assert!((w - l).abs() < 1e-12);
        }
        for (axis, &a) in s.index.iter().enumerate() {
            let (lo, hi) = common::interval(-3.0, 3.0, 6, 0.5, a);
            assert!((s.lo[axis] - lo).abs() < 1e-12 && (s.hi[axis] - hi).abs() < 1e-12);
        }
    }
    let res = resolution(&cov.sets).unwrap();
    assert!((res - 2f64.sqrt() * l).abs() < 1e-12);
    assert!((res - 2.4244).abs() < 1e-4);
}

#[test]
fn random_points_are_covered_at_most_four_times() {
    let cov = build_cubical_cover(&square(3.0), &CubicalCoverSpec::new(6, 0.5, 2).unwrap()).unwrap();
    let mut rng = common::rng(11);
    for _ in 0..10_000 {
        let p = [rng.gen_range(-3.0..=3.0), rng.gen_range(-3.0..=3.0)];
        let hits = cov.sets.iter().filter(|s| s.contains(&p)).count();
        assert!((1..=4).contains(&hits), "{p:?} in {hits} sets");
    }
}

#[test]
fn torus_lens_cover_membership() {
    let cloud = generate_torus(5000, 2.0, 1.0, 7).unwrap();
    let img = apply_lens(&cloud, &Lens::Projection(vec![0, 1])).unwrap();
    let cov = build_cubical_cover(&bounding_box(&img).unwrap(), &CubicalCoverSpec::new(6, 0.5, 2).unwrap()).unwrap();
    for i in 0..img.len() {
        let hits = cov.sets.iter().filter(|s| s.contains(img.point(i))).count();
        assert!((1..=4).contains(&hits));
    }
}

#[test]
fn epsilon_prime_examples() {
    // Equal widths: ‖(l+ε')·1‖ = ε gives ε' = (ε - s)/√n.
    let w = [1.0, 1.0];
    let s = 2f64.sqrt();
    let got = epsilon_prime(&w, s, 2.0 * s).unwrap();
    assert!((got - 1.0).abs() < 1e-12);
    assert_eq!(epsilon_prime(&w, s, s).unwrap(), 0.0);
    assert!(matches!(epsilon_prime(&w, s, 1.0), Err(Error::Scale { .. })));
}

#[test]
fn torus_epsilon_tower_is_good() {
    let cloud = generate_torus(2000, 2.0, 1.0, 7).unwrap();
    let img = apply_lens(&cloud, &Lens::Projection(vec![0, 1])).unwrap();
    let spec = CubicalCoverSpec::new(6, 0.5, 2).unwrap();
    let bbox = bounding_box(&img).unwrap();
    let s = build_cubical_cover(&bbox, &spec).unwrap().into_level(0.0).resolution();
    let diam = twomapper::pointcloud::diameter(&img).unwrap().value;
    let tower = build_tower(&bbox, &spec, &Schedule::Epsilon(vec![s, 3.0 * diam])).unwrap();
    let report = check_good_tower(&tower, &img, 3.0, 200, 5).unwrap();
    assert!(report.passed(), "{report:?}");
    assert_eq!(report.condition_iii.evaluated, 200);
}

#[test]
fn truncated_epsilon_tower_skips() {
    let cloud = generate_torus(500, 2.0, 1.0, 7).unwrap();
    let img = apply_lens(&cloud, &Lens::Projection(vec![0, 1])).unwrap();
    let spec = CubicalCoverSpec::new(6, 0.5, 2).unwrap();
    let bbox = bounding_box(&img).unwrap();
    let s = build_cubical_cover(&bbox, &spec).unwrap().into_level(0.0).resolution();
    let tower = build_tower(&bbox, &spec, &Schedule::Epsilon(vec![s, 1.01 * s])).unwrap();
    let report = check_good_tower(&tower, &img, 3.0, 50, 5).unwrap();
    assert!(report.condition_iii.skipped > 0);
    assert!(report.condition_iii.witness.is_some());
    assert!(!report.passed());
}

#[test]
fn schedule_errors() {
    let spec = CubicalCoverSpec::new(3, 0.2, 2).unwrap();
    assert!(build_tower(&square(1.0), &spec, &Schedule::Overlap(vec![0.3, 0.2])).is_err());
    assert!(build_tower(&square(1.0), &spec, &Schedule::Overlap(vec![])).is_err());
    assert!(build_tower(&square(1.0), &spec, &Schedule::Epsilon(vec![0.1])).is_err());
    assert!(CubicalCoverSpec::new(0, 0.2, 2).is_err());
    assert!(CubicalCoverSpec::new(2, 1.0, 2).is_err());
}

fn nested(small: &CoverSet, big: &CoverSet) -> bool {
    (0..small.lo.len()).all(|i| big.lo[i] <= small.lo[i] && small.hi[i] <= big.hi[i])
}

proptest! {
    #[test]
    fn overlap_towers_nest_per_index(
        k in 1usize..7, n in 1usize..4, g1 in 0.0f64..0.45, dg in 0.01f64..0.5, seed in 0u64..1000,
    ) {
        let pts = common::random_cloud(&mut common::rng(seed), 30, n, 4.0);
        let bbox = bounding_box(&PointCloud::new(pts).unwrap()).unwrap();
        let spec = CubicalCoverSpec::new(k, g1, n).unwrap();
        let tower = build_tower(&bbox, &spec, &Schedule::Overlap(vec![g1, g1 + dg])).unwrap();
        let (a, b) = (&tower.levels[0], &tower.levels[1]);
        prop_assert_eq!(a.sets.len(), k.pow(n as u32));
        for (sa, sb) in a.sets.iter().zip(&b.sets) {
            prop_assert_eq!(&sa.index, &sb.index);
            prop_assert!(nested(sa, sb), "{:?} not in {:?}", sa, sb);
        }
        prop_assert!(a.resolution() <= b.resolution());
        if k >= 2 {
            prop_assert!(a.resolution() < b.resolution());
        }
    }

    #[test]
    fn covers_contain_their_points(k in 1usize..6, g in 0.0f64..0.9, n in 1usize..4, seed in 0u64..1000) {
        let pts = common::random_cloud(&mut common::rng(seed), 50, n, 3.0);
        let cloud = PointCloud::new(pts).unwrap();
        let cov = build_cubical_cover(&bounding_box(&cloud).unwrap(), &CubicalCoverSpec::new(k, g, n).unwrap()).unwrap();
        for p in cloud.iter() {
            prop_assert!(cov.sets.iter().any(|s| s.contains(p)));
        }
        prop_assert!(resolution(&cov.sets).is_ok());
    }

    #[test]
    fn epsilon_levels_have_the_scheduled_diameter(k in 1usize..5, g in 0.0f64..0.6, n in 1usize..4, grow in 1.0f64..4.0, seed in 0u64..1000) {
        let pts = common::random_cloud(&mut common::rng(seed), 20, n, 2.0);
        let bbox = bounding_box(&PointCloud::new(pts).unwrap()).unwrap();
        let spec = CubicalCoverSpec::new(k, g, n).unwrap();
        let s = build_cubical_cover(&bbox, &spec).unwrap().into_level(0.0).resolution();
        let tower = build_tower(&bbox, &spec, &Schedule::Epsilon(vec![s, grow * s + 1e-3])).unwrap();
        for level in &tower.levels {
            for set in &level.sets {
                prop_assert!((set.diameter() - level.scale).abs() < 1e-6);
            }
        }
        for (sa, sb) in tower.levels[0].sets.iter().zip(&tower.levels[1].sets) {
            prop_assert!(nested(sa, sb));
        }
    }

    #[test]
    fn degenerate_axes_are_padded(v in -5.0f64..5.0, n in 1usize..4) {
        let bbox = BoundingBox::new(vec![v; n], vec![v; n]).unwrap();
        let cov = build_cubical_cover(&bbox, &CubicalCoverSpec::new(2, 0.3, n).unwrap()).unwrap();
        prop_assert_eq!(cov.padded_axes.len(), n);
        let point = vec![v; n];
        prop_assert!(cov.sets.iter().any(|s| s.contains(&point)));
        prop_assert!(resolution(&cov.sets).unwrap() > 0.0);
    }
}
