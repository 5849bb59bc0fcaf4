//! Rounding for point sets in R^d: overloaded light balls are replaced by
//! grid representatives, and each cluster keeps a bounded number of balls,
//! so every ball serves within `1 + eps` of its radius.

pub mod grid;
mod preprocess;
mod select;

use serde::{Deserialize, Serialize};

use crate::error::{assertion, Error, Result};
use crate::exact::integral_assignment;
use crate::instance::MetricInstance;
use crate::relax::{solve_relaxation, FractionalSolution};
use crate::round_metric::{
    check_pipeline_instance, form_clusters, init_event, metric_cost_factor, Intersection, PipelineRun,
    RoundingParams, Tracer,
};
use crate::solution::RoundedSolution;

use grid::dimension_scale;
pub use preprocess::{radius_class, top_class};
pub use select::{euclid_select, ClusterChoice, EuclidCase, EuclidSelection};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EuclidParams {
    pub epsilon: f64,
    pub alpha: f64,
    /// Splits medium from large heavy balls: `r_h <= r_m / c`.
    pub case_constant_c: f64,
    pub tol: f64,
    pub check_invariants: bool,
}

impl Default for EuclidParams {
    fn default() -> Self {
        EuclidParams {
            epsilon: 0.5,
            alpha: 0.375,
            case_constant_c: 2.0,
            tol: 1e-9,
            check_invariants: true,
        }
    }
}

impl EuclidParams {
    pub fn with_epsilon(epsilon: f64) -> Self {
        EuclidParams {
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParams(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.case_constant_c > 1.0 && self.case_constant_c.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "case constant must exceed 1, got {}",
                self.case_constant_c
            )));
        }
        self.rounding().validate()
    }

    pub(crate) fn rounding(&self) -> RoundingParams {
        RoundingParams {
            alpha: self.alpha,
            tol: self.tol,
            intersection: Intersection::Unexpanded,
            check_invariants: self.check_invariants,
        }
    }

    /// Fully opened balls one merge can create, per unit of light y it
    /// consumes times alpha: radius classes times cells per class.
    pub fn preprocess_constant(&self, d: usize) -> f64 {
        let cells = (16.0 / (self.epsilon * dimension_scale(d))).ceil().max(1.0);
        (top_class(self.epsilon) + 1) as f64 * cells.powi(d as i32)
    }

    /// Largest number of balls one cluster can keep, over all cases.
    pub fn cluster_constant(&self, d: usize) -> f64 {
        let (e, c, s) = (self.epsilon, self.case_constant_c, dimension_scale(d));
        let per_axis = [
            16.0 / (e * s),
            16.0 * (1.0 + e / 4.0) / (e * e * s),
            64.0 * (1.0 + 1.0 / c) / (e * e * e * s),
            8.0 * c * (1.0 + 2.0 / e) / (e * e * s),
        ]
        .into_iter()
        .fold(1.0, f64::max);
        // Slack for the round-off in the per-cluster cell counts.
        (per_axis * (1.0 + 1e-9)).ceil().powi(d as i32) + 1.0
    }

    /// Cost bound of the pipeline against the LP value.
    pub fn cost_certificate(&self, d: usize) -> f64 {
        self.cluster_constant(d) * metric_cost_factor(self.alpha) * self.preprocess_constant(d)
    }
}

/// The shared radius when every ball has the same one.
pub(crate) fn common_radius(inst: &MetricInstance) -> Option<f64> {
    let r = inst.balls.first()?.radius;
    inst.balls.iter().all(|b| b.radius == r).then_some(r)
}

fn require_euclidean(inst: &MetricInstance) -> Result<usize> {
    inst.dimension()
        .ok_or_else(|| Error::Unsupported("the Euclidean pipeline needs point coordinates".into()))
}

/// Grid preprocessing alone, on a fresh trace.
pub fn euclid_preprocess(
    inst: &MetricInstance,
    frac: &FractionalSolution,
    params: &EuclidParams,
) -> Result<FractionalSolution> {
    params.validate()?;
    require_euclidean(inst)?;
    let mut tracer = Tracer::new(params.check_invariants);
    tracer.record(init_event(inst, frac))?;
    preprocess::preprocess_traced(inst, frac, params, &mut tracer)
}

pub fn run_euclid_pipeline(inst: &MetricInstance, params: &EuclidParams) -> Result<RoundedSolution> {
    run_euclid_pipeline_detailed(inst, params).map(|r| r.solution)
}

pub fn run_euclid_pipeline_detailed(inst: &MetricInstance, params: &EuclidParams) -> Result<PipelineRun> {
    params.validate()?;
    require_euclidean(inst)?;
    check_pipeline_instance(inst)?;
    let frac = solve_relaxation(inst)?;
    round_euclid_solution(inst, &frac, params).map(|(run, _)| run)
}

/// The pipeline from an already solved relaxation onwards.
pub fn round_euclid_solution(
    inst: &MetricInstance,
    frac: &FractionalSolution,
    params: &EuclidParams,
) -> Result<(PipelineRun, EuclidSelection)> {
    params.validate()?;
    let d = require_euclidean(inst)?;
    let mut tracer = Tracer::new(params.check_invariants);
    tracer.record(init_event(inst, frac))?;
    let pre = preprocess::preprocess_traced(inst, frac, params, &mut tracer)?;
    let preprocessed_cost = pre.cost();
    let mut state = form_clusters(inst, pre, &params.rounding(), tracer)?;
    let sel = euclid_select(inst, &mut state, params)?;
    let assignment = integral_assignment(inst, &sel.selection.selected, &sel.selection.x)?;
    let solution = RoundedSolution::new(inst, sel.selection.selected.clone(), assignment, frac.lp_value, None);
    let bound = params.cost_certificate(d);
    if solution.cost as f64 > bound * frac.lp_value + 1e-6 {
        return Err(assertion(format!(
            "{} balls selected against LP value {}, above {bound} x",
            solution.cost, frac.lp_value
        )));
    }
    let run = PipelineRun {
        solution,
        lp_value: frac.lp_value,
        preprocessed_cost,
        heavy: state.heavy.len(),
        light: state.light.len(),
        opened_light: state.opened.len(),
        max_per_cluster: sel.max_per_cluster(),
        trace: state.tracer.trace,
    };
    Ok((run, sel))
}

#[cfg(test)]
mod tests {
    use super::grid::grid_cells;
    use super::*;
    use crate::instance::Ball;
    use crate::round_metric::cluster_formation;
    use crate::testutil::{frac, line};

    fn plane(points: &[[f64; 2]], balls: &[([f64; 2], f64, u64)]) -> MetricInstance {
        MetricInstance::euclidean(
            2,
            points.iter().map(|p| p.to_vec()).collect(),
            balls.iter().map(|b| b.0.to_vec()).collect(),
            balls
                .iter()
                .enumerate()
                .map(|(id, b)| Ball {
                    id,
                    center: id,
                    radius: b.1,
                    capacity: b.2,
                })
                .collect(),
        )
    }

    #[test]
    fn constants() {
        let p = EuclidParams::with_epsilon(0.5);
        // Two classes of 32 x 32 cells.
        assert_eq!(p.preprocess_constant(2), 2.0 * 1024.0);
        assert!(p.validate().is_ok());
        assert!(EuclidParams::with_epsilon(0.0).validate().is_err());
        let bad = EuclidParams {
            case_constant_c: 1.0,
            ..p
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn cells_per_class_in_the_plane() {
        // Class i at eps = 1/2: side 2^(i+2) r eps over granularity 2^(i-2) r eps^2.
        let (r, eps) = (1.0, 0.5);
        for i in 0..3 {
            let side = 2f64.powi(i + 2) * r * eps;
            let g = 2f64.powi(i - 2) * r * eps * eps;
            assert_eq!(grid_cells(side, g, 2), 1024.0);
        }
    }

    #[test]
    fn conforming_solution_is_unchanged() {
        let inst = line(&[0.0, 0.5], &[(0.0, 1.0, 2)]);
        let f = frac(&inst, &[1.0], &[(0, 0, 1.0), (0, 1, 1.0)]);
        assert_eq!(euclid_preprocess(&inst, &f, &EuclidParams::default()).unwrap(), f);
    }

    #[test]
    fn merge_keeps_one_ball_per_cell() {
        // Balls 1 and 2 share a grid cell, ball 3 sits one unit away.
        let inst = plane(
            &[[0.0, 0.0]],
            &[([0.0, 0.0], 0.2, 1), ([0.5, 0.0], 1.0, 1), ([0.52, 0.0], 1.0, 1), ([-0.5, 0.0], 1.0, 1)],
        );
        let f = frac(&inst, &[1.0, 0.2, 0.1, 0.1], &[(0, 0, 0.6), (1, 0, 0.2), (2, 0, 0.1), (3, 0, 0.1)]);
        let params = EuclidParams::with_epsilon(0.5);
        let out = euclid_preprocess(&inst, &f, &params).unwrap();
        assert_eq!(out.y, vec![1.0, 1.0, 0.0, 1.0]);
        assert!((out.x.get(1, 0) - 0.3).abs() < 1e-12);
        assert_eq!(out.stage_slack[1], 1.5);
        for (i, j, _) in out.x.entries() {
            assert!(inst.ball_point(i, j) <= out.stage_slack[i] * inst.balls[i].radius + 1e-12);
        }
    }

    #[test]
    fn small_balls_fold_into_the_largest() {
        // Ball 2 (r 0.1) is below r eps / 2 = 0.25 and hands its flow to ball 1.
        let inst = plane(&[[0.0, 0.0]], &[([0.0, 0.0], 0.05, 1), ([0.3, 0.0], 1.0, 2), ([0.05, 0.0], 0.1, 1)]);
        let f = frac(&inst, &[1.0, 0.3, 0.2], &[(0, 0, 0.5), (1, 0, 0.3), (2, 0, 0.2)]);
        let out = euclid_preprocess(&inst, &f, &EuclidParams::with_epsilon(0.5)).unwrap();
        assert_eq!(out.y, vec![1.0, 1.0, 0.0]);
        assert!((out.x.get(1, 0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tiny_light_balls_leave_the_heavy_ball_alone() {
        // r_m = 1 <= r_h eps / 2 = 1.
        let inst = line(&[0.0, 1.2], &[(0.0, 4.0, 10), (0.5, 1.0, 5)]);
        let f = frac(&inst, &[1.0, 0.3], &[(0, 0, 1.0), (0, 1, 0.7), (1, 1, 0.3)]);
        let params = EuclidParams::with_epsilon(0.5);
        let mut state = cluster_formation(&inst, &f, &params.rounding()).unwrap();
        let sel = euclid_select(&inst, &mut state, &params).unwrap();
        assert_eq!(sel.selection.selected, vec![0]);
        assert_eq!(sel.clusters[0].case, EuclidCase::HeavyOnly);
        assert_eq!(sel.selection.max_beta(), 1.0);
    }

    #[test]
    fn small_heavy_ball_is_replaced() {
        let inst = plane(&[[0.5, 0.0], [0.6, 0.0]], &[([0.5, 0.0], 0.2, 5), ([0.0, 0.0], 4.0, 10)]);
        let f = frac(&inst, &[1.0, 0.3], &[(0, 0, 1.0), (0, 1, 0.7), (1, 1, 0.3)]);
        let params = EuclidParams::with_epsilon(0.5);
        let mut state = cluster_formation(&inst, &f, &params.rounding()).unwrap();
        assert_eq!(state.clusters[&0], vec![0, 1]);
        let sel = euclid_select(&inst, &mut state, &params).unwrap();
        let choice = &sel.clusters[0];
        assert_eq!(choice.case, EuclidCase::SmallHeavy);
        assert_eq!(choice.chosen, vec![1]);
        // Side 4 r_m over granularity r_m eps^2 / 8, squared, plus the heavy ball.
        let stated_cells = (4.0 / (0.25 / 8.0)) * (4.0 / (0.25 / 8.0));
        assert_eq!(stated_cells, 16384.0);
        assert!(choice.cell_bound <= stated_cells + 1.0);
        assert!(sel.selection.max_beta() <= 1.5);
        assert!(state.trace().replay().is_clean());
    }

    #[test]
    fn single_ball_pipeline() {
        let inst = line(&[0.0, 0.3], &[(0.0, 1.0, 2)]);
        let run = run_euclid_pipeline_detailed(&inst, &EuclidParams::default()).unwrap();
        assert_eq!(run.solution.cost, 1);
        assert_eq!(run.solution.max_expansion(), 1.0);
        assert_eq!(run.max_per_cluster, 1);
    }

    #[test]
    fn explicit_metrics_are_rejected() {
        let inst = MetricInstance::explicit(
            1,
            vec![vec![0.0, 0.5], vec![0.5, 0.0]],
            vec![Ball {
                id: 0,
                center: 0,
                radius: 1.0,
                capacity: 1,
            }],
        );
        assert!(matches!(
            run_euclid_pipeline(&inst, &EuclidParams::default()),
            Err(Error::Unsupported(_))
        ));
    }
}
