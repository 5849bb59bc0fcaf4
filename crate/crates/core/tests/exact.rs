use capcover::exact::{assignment_within, brute_force_opt, feasible_assignment_exists, verify_solution};
use capcover::gen::{gen_random_euclidean, gen_random_metric, CapacityMode, EuclideanGenParams, MetricGenParams};
use capcover::relax::solve_relaxation;
use capcover::round_metric::{run_metric_pipeline_detailed, RoundingParams, Variant};
use capcover::{Ball, MetricInstance, RoundedSolution};
use proptest::prelude::*;

mod common;

/// Kuhn's augmenting paths over capacity-many slots per ball.
fn kuhn_feasible(inst: &MetricInstance, subset: &[usize], beta: f64) -> bool {
    let slots: Vec<usize> = subset
        .iter()
        .flat_map(|&b| std::iter::repeat(b).take(inst.balls[b].capacity.min(inst.n_points() as u64) as usize))
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; slots.len()];
    fn augment(
        inst: &MetricInstance,
        j: usize,
        slots: &[usize],
        owner: &mut [Option<usize>],
        seen: &mut [bool],
        beta: f64,
    ) -> bool {
        for s in 0..slots.len() {
            if seen[s] || !inst.covers(slots[s], j, beta) {
                continue;
            }
            seen[s] = true;
            if owner[s].is_none_or(|k| augment(inst, k, slots, owner, seen, beta)) {
                owner[s] = Some(j);
                return true;
            }
        }
        false
    }
    (0..inst.n_points()).all(|j| augment(inst, j, &slots, &mut owner, &mut vec![false; slots.len()], beta))
}

fn small_metric(seed: u64, n: usize, m: usize) -> MetricInstance {
    gen_random_metric(
        seed,
        &MetricGenParams {
            n,
            m,
            capacity: CapacityMode::Monotone { min: 1, max: 4 },
            ..Default::default()
        },
    )
    .unwrap()
}

fn subsets(m: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << m).map(move |mask| (0..m).filter(|&i| mask >> i & 1 == 1).collect())
}

proptest! {
    #![proptest_config(common::fixed_config(64))]

    #[test]
    fn flow_feasibility_matches_matching(seed in any::<u64>(), beta in 1.0f64..3.0) {
        let inst = small_metric(seed, 10, 5);
        for subset in subsets(5) {
            let flow = feasible_assignment_exists(&inst, &subset, beta);
            prop_assert_eq!(flow, kuhn_feasible(&inst, &subset, beta), "subset {:?}", subset);
            if let Some(a) = assignment_within(&inst, &subset, beta) {
                let sol = RoundedSolution::new(&inst, subset.clone(), a, 0.0, None);
                prop_assert!(sol.selected.iter().all(|b| subset.contains(b)));
                let beta_ok = verify_solution(&inst, &sol, beta + 1e-12);
                prop_assert!(beta_ok.is_valid, "{:?}", beta_ok.violations);
            }
        }
    }

    #[test]
    fn feasibility_is_monotone_in_beta(seed in any::<u64>(), lo in 1.0f64..2.0, step in 0.0f64..2.0) {
        let inst = small_metric(seed, 9, 5);
        for subset in subsets(5) {
            if feasible_assignment_exists(&inst, &subset, lo) {
                prop_assert!(feasible_assignment_exists(&inst, &subset, lo + step));
            }
        }
    }

    #[test]
    fn opt_is_sandwiched(seed in any::<u64>(), n in 3usize..12, m in 2usize..8) {
        let inst = small_metric(seed, n, m);
        let opt = brute_force_opt(&inst, 12).unwrap();
        prop_assert!(kuhn_feasible(&inst, &opt.subset, 1.0));
        // No subset of one fewer ball works.
        if opt.size > 0 {
            for s in subsets(m).filter(|s| s.len() == opt.size - 1) {
                prop_assert!(!kuhn_feasible(&inst, &s, 1.0));
            }
        }
        let lp = solve_relaxation(&inst).unwrap().lp_value;
        prop_assert!(lp <= opt.size as f64 + 1e-7);
        // Expanded balls may beat OPT, which is measured without expansion.
        let run = run_metric_pipeline_detailed(&inst, &RoundingParams::default(), Variant::General).unwrap();
        prop_assert!(run.solution.cost as f64 <= 21.0 * opt.size as f64 + 1e-6);
    }

    #[test]
    fn extra_ball_never_raises_opt(seed in any::<u64>(), r in 0.05f64..0.5, cap in 1u64..5) {
        let inst = gen_random_euclidean(seed, &EuclideanGenParams { n: 8, m: 5, ..Default::default() }).unwrap();
        let before = brute_force_opt(&inst, 12).unwrap().size;
        let (points, mut centers, mut balls) = match &inst.geometry {
            capcover::Geometry::Euclidean { points, centers, .. } => (points.clone(), centers.clone(), inst.balls.clone()),
            _ => unreachable!(),
        };
        centers.push(points[(seed % 8) as usize].clone());
        balls.push(Ball { id: balls.len(), center: centers.len() - 1, radius: r, capacity: cap });
        let bigger = MetricInstance::euclidean(inst.dimension().unwrap(), points, centers, balls);
        let after = brute_force_opt(&bigger, 12).unwrap().size;
        prop_assert!(after <= before);
    }
}

#[test]
fn infeasible_instance_is_reported() {
    // Two points 10 apart, one ball of capacity 2 reaching only one of them.
    let inst = MetricInstance::euclidean(
        1,
        vec![vec![0.0], vec![10.0]],
        vec![vec![0.0]],
        vec![Ball { id: 0, center: 0, radius: 1.0, capacity: 2 }],
    );
    assert!(brute_force_opt(&inst, 12).is_err());
    assert!(!kuhn_feasible(&inst, &[0], 1.0));
    assert!(kuhn_feasible(&inst, &[0], 10.0));
    assert!(feasible_assignment_exists(&inst, &[0], 10.0));
}

#[test]
fn size_cap_is_enforced() {
    let inst = small_metric(1, 20, 13);
    assert!(brute_force_opt(&inst, 12).is_err());
}
