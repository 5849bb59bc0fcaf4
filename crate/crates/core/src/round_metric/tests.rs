use super::trace::{SelectCase, TraceEvent};
use super::*;
use crate::error::Error;
use crate::testutil::{frac, line};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

#[test]
fn integral_solution_passes_preprocessing_unchanged() {
    let inst = line(&[0.0, 0.5], &[(0.0, 1.0, 2)]);
    let f = frac(&inst, &[1.0], &[(0, 0, 1.0), (0, 1, 1.0)]);
    let out = preprocess(&inst, &f, &RoundingParams::default()).unwrap();
    assert_eq!(out, f);
}

#[test]
fn three_light_balls_on_one_point() {
    // Ball 0 is heavy and sends 0.4; balls 1..=3 (radii 1, 2, 3) send 0.2 each.
    let inst = line(&[0.0], &[(0.0, 0.5, 1), (0.0, 1.0, 1), (0.0, 2.0, 2), (0.0, 3.0, 3)]);
    let f = frac(&inst, &[1.0, 0.2, 0.2, 0.2], &[(0, 0, 0.4), (1, 0, 0.2), (2, 0, 0.2), (3, 0, 0.2)]);
    let params = RoundingParams::default();
    let mut tracer = Tracer::new(true);
    tracer.record(init_event(&inst, &f)).unwrap();
    let out = preprocess_traced(&inst, &f, params.alpha, params.tol, true, &mut tracer).unwrap();
    // Scanning by decreasing radius: 0.2 (ball 3), 0.4 (ball 2) > 3/8, so
    // ball 3 absorbs ball 2 and its y of 0.4 is rounded up.
    let merge = &tracer.trace.events[1];
    let TraceEvent::Merge { members, receivers, .. } = merge else {
        panic!("expected a merge, got {merge:?}");
    };
    assert_eq!(members, &vec![3, 2]);
    assert_eq!(receivers, &vec![3]);
    assert_eq!(out.y, vec![1.0, 0.2, 0.0, 1.0]);
    assert!(close(out.x.get(3, 0), 0.4));
    assert_eq!(out.x.get(2, 0), 0.0);
    assert_eq!(out.stage_slack[3], MERGE_SLACK);
    assert!(close(out.cost(), 2.2));
    assert!(out.cost() <= f.cost() / params.alpha);
    // The remaining light load on the point is ball 1's 0.2.
    assert!(first_overloaded(&out, params.alpha, params.tol).is_none());
}

#[test]
fn light_ball_inside_roomy_heavy_ball_is_clustered() {
    // Heavy ball 0 (capacity 10) serves point 0 alone; light ball 1 at
    // y = 3/8 shares points 1 and 2 with it.
    let inst = line(&[0.0, 0.2, 0.8], &[(0.0, 2.0, 10), (0.5, 1.0, 2)]);
    let a = 0.375;
    let f = frac(&inst, &[1.0, a], &[(0, 0, 1.0), (0, 1, 1.0 - a), (0, 2, 1.0 - a), (1, 1, a), (1, 2, a)]);
    let state = cluster_formation(&inst, &f, &RoundingParams::default()).unwrap();
    assert!(state.opened.is_empty());
    assert_eq!(state.clusters[&0], vec![0, 1]);
    assert_eq!(state.frac.x.outflow(1), 0.0);
    assert!(close(state.frac.x.outflow(0), 3.0));
    assert!(state.trace().replay().is_clean());
}

#[test]
fn isolated_light_ball_is_opened() {
    // Heavy ball 0 came out of a merge and serves point 1 at 2.5 = 2.5 r.
    // Light ball 1 reaches point 1 but lies 3.6 > 1 + 1.1 away from it.
    let inst = line(&[0.0, 2.5], &[(0.0, 1.0, 10), (3.6, 1.1, 10)]);
    let mut f = frac(&inst, &[1.0, 0.3], &[(0, 0, 1.0), (0, 1, 0.7), (1, 1, 0.3)]);
    f.stage_slack[0] = MERGE_SLACK;
    let state = cluster_formation(&inst, &f, &RoundingParams::default()).unwrap();
    assert_eq!(
        state.opened,
        vec![Opened {
            ball: 1,
            k: 1,
            case: SelectCase::AllServed
        }]
    );
    assert_eq!(state.clusters[&0], vec![0]);
    assert_eq!(state.clusters[&1], vec![1]);
    assert_eq!(state.frac.x.get(1, 1), 1.0);
    assert_eq!(state.frac.y[1], 1.0);
    let report = state.trace().replay();
    assert!(report.is_clean(), "{:?}", report.violations);
    assert_eq!(report.selections, 1);
}

#[test]
fn no_light_balls_gives_singletons() {
    let inst = line(&[0.0, 5.0], &[(0.0, 1.0, 1), (5.0, 1.0, 1)]);
    let f = frac(&inst, &[1.0, 1.0], &[(0, 0, 1.0), (1, 1, 1.0)]);
    let state = cluster_formation(&inst, &f, &RoundingParams::default()).unwrap();
    assert!(state.opened.is_empty());
    assert_eq!(state.clusters.values().cloned().collect::<Vec<_>>(), vec![vec![0], vec![1]]);
}

#[test]
fn general_selection_prefers_the_larger_light_ball() {
    // Merged heavy ball 0 (r 1, serving up to 3) and a larger light ball 1 (r 2).
    let (pts, c_light) = ([2.9, -2.9], 2.5);
    let inst = line(&pts, &[(0.0, 1.0, 2), (c_light, 2.0, 4)]);
    let mut f = frac(&inst, &[1.0, 0.3], &[(0, 0, 0.7), (0, 1, 1.0), (1, 0, 0.3)]);
    f.stage_slack[0] = MERGE_SLACK;
    let mut state = cluster_formation(&inst, &f, &RoundingParams::default()).unwrap();
    assert_eq!(state.clusters[&0], vec![0, 1]);
    let sel = select_objects_general(&inst, &mut state).unwrap();
    assert_eq!(sel.selected, vec![1]);
    let far = pts.iter().map(|p| (p - c_light).abs()).fold(0.0, f64::max) / 2.0;
    assert!(close(sel.beta[0], far));
    assert!(sel.beta[0] <= 5.0);
    assert!(state.trace().replay().is_clean());
}

#[test]
fn uniform_selection_with_equal_radii_takes_the_light_ball() {
    let inst = line(&[-0.9, 1.2], &[(0.0, 1.0, 5), (1.5, 1.0, 5)]);
    let f = frac(&inst, &[1.0, 0.3], &[(0, 0, 1.0), (0, 1, 0.7), (1, 1, 0.3)]);
    let mut state = cluster_formation(&inst, &f, &RoundingParams::default()).unwrap();
    let sel = select_objects_uniform(&inst, &mut state).unwrap();
    assert_eq!(sel.selected, vec![1]);
    assert!(close(sel.beta[0], 2.4));
    // 3 r_l + 2 r_h = 5 r_l when the radii agree.
    assert!(sel.beta[0] <= 5.0);
}

#[test]
fn uniform_bound_constant() {
    assert!(close(uniform_beta(), 3.0 + 12f64.sqrt()));
    assert!(uniform_beta() < 6.47);
}

#[test]
fn uniform_selection_rejects_mixed_capacities() {
    let inst = line(&[0.0], &[(0.0, 1.0, 1), (0.0, 2.0, 2)]);
    let f = frac(&inst, &[1.0, 0.0], &[(0, 0, 1.0)]);
    let mut state = cluster_formation(&inst, &f, &RoundingParams::default()).unwrap();
    assert!(matches!(select_objects_uniform(&inst, &mut state), Err(Error::Unsupported(_))));
}

#[test]
fn single_ball_pipeline() {
    let inst = line(&[0.0, 0.3, -0.4], &[(0.0, 1.0, 3)]);
    for variant in [Variant::General, Variant::Uniform] {
        let run = run_metric_pipeline_detailed(&inst, &RoundingParams::default(), variant).unwrap();
        assert_eq!(run.solution.cost, 1);
        assert_eq!(run.solution.max_expansion(), 1.0);
        assert!(run.trace.replay().is_clean());
    }
}

#[test]
fn soft_single_ball_opens_two_copies() {
    let inst = line(&[0.0, 0.3, -0.4], &[(0.0, 1.0, 5)]);
    let sol = run_soft_pipeline(&inst).unwrap();
    assert_eq!(sol.copies, Some(vec![2]));
    assert_eq!(sol.cost, 2);
    assert!(close(sol.lp_value, 1.0));
    assert!(sol.cost as f64 <= SOFT_COST_FACTOR * sol.lp_value);
}

#[test]
fn soft_disjoint_integral_balls() {
    let inst = line(&[0.0, 10.0], &[(0.0, 1.0, 1), (10.0, 1.0, 1)]);
    let f = frac(&inst, &[1.0, 1.0], &[(0, 0, 1.0), (1, 1, 1.0)]);
    let sol = solve_soft(&inst, &f, SOFT_ALPHA).unwrap();
    assert_eq!(sol.copies, Some(vec![2, 2]));
    assert_eq!(sol.cost, 4);
}

#[test]
fn params_are_validated() {
    assert!(RoundingParams::with_alpha(0.5).validate().is_err());
    assert!(RoundingParams::with_alpha(0.0).validate().is_err());
    assert!(RoundingParams::with_alpha(0.25).validate().is_ok());
    assert!(close(metric_cost_factor(0.375), METRIC_COST_FACTOR));
}

#[test]
fn corrupted_trace_is_caught() {
    let inst = line(&[0.0, 0.2, 0.8], &[(0.0, 2.0, 10), (0.5, 1.0, 2)]);
    let a = 0.375;
    let f = frac(&inst, &[1.0, a], &[(0, 0, 1.0), (0, 1, 1.0 - a), (0, 2, 1.0 - a), (1, 1, a), (1, 2, a)]);
    let state = cluster_formation(&inst, &f, &RoundingParams::default()).unwrap();
    let text = state.trace().to_ndjson();
    let back = Trace::from_ndjson(&text).unwrap();
    assert_eq!(&back, state.trace());
    let mut bad = back.clone();
    for ev in &mut bad.events {
        if let TraceEvent::Cluster { moves, .. } = ev {
            moves[0].amount *= 2.0;
        }
    }
    assert!(!bad.replay().is_clean());
}
