use super::*;
use crate::exact::verify_solution;
use crate::instance::ViolationKind;

fn small_euclid() -> EuclideanGenParams {
    EuclideanGenParams::default()
}

#[test]
fn euclidean_generator_is_deterministic() {
    let a = gen_random_euclidean(7, &small_euclid()).unwrap();
    let b = gen_random_euclidean(7, &small_euclid()).unwrap();
    let c = gen_random_euclidean(8, &small_euclid()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_ne!(a.to_json(), c.to_json());
}

#[test]
fn euclidean_instances_are_monotone_and_covered() {
    for seed in 0..10 {
        let inst = gen_random_euclidean(seed, &small_euclid()).unwrap();
        assert_eq!((inst.n_points(), inst.n_balls(), inst.dimension()), (20, 8, Some(2)));
        assert!(inst.is_monotone());
        for j in 0..inst.n_points() {
            assert!(!inst.covering_balls(j).is_empty(), "seed {seed} point {j}");
        }
        assert!(inst.validate().is_valid);
    }
}

#[test]
fn uniform_capacity_mode() {
    let params = EuclideanGenParams {
        capacity: CapacityMode::Uniform { capacity: 4 },
        ..small_euclid()
    };
    let inst = gen_random_euclidean(3, &params).unwrap();
    assert!(inst.has_uniform_capacity());
}

#[test]
fn metric_generator_is_deterministic_and_metric() {
    let params = MetricGenParams::default();
    let a = gen_random_metric(11, &params).unwrap();
    assert_eq!(a.to_json(), gen_random_metric(11, &params).unwrap().to_json());
    let report = a.validate();
    assert!(report.is_valid, "{:?}", report.violations);
    assert!(!report.has(ViolationKind::Triangle));
    assert!(a.is_monotone());
    for j in 0..a.n_points() {
        assert!(!a.covering_balls(j).is_empty());
    }
}

#[test]
fn bad_parameters_are_rejected() {
    let zero = EuclideanGenParams {
        n: 0,
        ..small_euclid()
    };
    assert!(gen_random_euclidean(0, &zero).is_err());
    let caps = EuclideanGenParams {
        capacity: CapacityMode::Monotone { min: 5, max: 2 },
        ..small_euclid()
    };
    assert!(gen_random_euclidean(0, &caps).is_err());
}

#[test]
fn gadget_counts() {
    let spec = GadgetSpec3DM::new(1, vec![(0, 0, 0)], 1);
    assert_eq!(spec.p(), 2);
    assert_eq!(spec.balls_per_element(), 9);
    assert_eq!(spec.points_per_element(), 28);
    assert_eq!(spec.element_balls(), 27);
    let g = gen_3dm_gadget(&spec).unwrap();
    let inst = &g.instance;
    assert_eq!(inst.n_balls(), 28);
    assert_eq!(inst.n_points(), 3 * 28);
    assert!(inst.balls.iter().all(|b| b.capacity == GADGET_CAPACITY && b.radius == 1.0));
    // Walk the metric: element balls reach their two shared vertices plus a
    // top and bottom point, triple balls their three ideal points.
    let reach: Vec<usize> = (0..inst.n_balls())
        .map(|i| (0..inst.n_points()).filter(|&j| inst.covers(i, j, 1.0)).count())
        .collect();
    assert!(reach[..27].iter().all(|&k| k == 4));
    assert_eq!(reach[27], 3);
    // Inner shared vertices lie in two element balls, the row ends in one.
    let shared = (0..inst.n_points()).filter(|&j| inst.covering_balls(j).len() == 2).count();
    assert_eq!(shared, 3 * 8 + 3);
}

#[test]
fn gadget_radii_follow_c() {
    let spec = GadgetSpec3DM::new(1, vec![(0, 0, 0)], 3);
    // p = ceil(3 * 4 / 2) + 1 = 7.
    assert_eq!(spec.p(), 7);
    let g = gen_3dm_gadget(&spec).unwrap();
    let mut radii: Vec<f64> = g.instance.balls.iter().map(|b| b.radius).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    assert_eq!(radii, vec![1.0, 3.0]);
    // Two large clusters per element plus the triple ball.
    let large = g.instance.balls.iter().filter(|b| b.radius == 3.0).count();
    assert_eq!(large, 3 * 2 + 1);
}

#[test]
fn canonical_solution_verifies() {
    let spec = GadgetSpec3DM::new(2, vec![(0, 0, 0), (1, 1, 1), (0, 1, 0)], 1);
    let g = gen_3dm_gadget(&spec).unwrap();
    let sol = g.canonical_solution(&[0, 1]).unwrap();
    assert_eq!(sol.cost as usize, spec.element_balls() + 2);
    let report = verify_solution(&g.instance, &sol, 1.0);
    assert!(report.is_valid, "{:?}", report.violations);
    // Triple 2 alone leaves elements uncovered.
    assert!(g.canonical_solution(&[2]).is_err());
}

#[test]
fn gadget_spec_validation() {
    assert!(GadgetSpec3DM::new(1, vec![], 1).validate().is_err());
    assert!(GadgetSpec3DM::new(1, vec![(0, 0, 1)], 1).validate().is_err());
    let over = GadgetSpec3DM::new(1, vec![(0, 0, 0); 4], 1);
    assert!(over.validate().is_err());
}

#[test]
fn random_fractional_is_feasible() {
    let inst = gen_random_euclidean(5, &small_euclid()).unwrap();
    let f = random_fractional(&inst, 1, 0.7, 0.3).unwrap();
    assert!(f.invariant_violations(&inst, 1e-9).is_empty());
}
