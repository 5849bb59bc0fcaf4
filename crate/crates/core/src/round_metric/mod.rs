//! Rounding of the covering LP for general metrics: preprocessing into
//! heavy and light balls, cluster formation, and selection of one ball per
//! cluster. Also the copy-opening variant for soft capacities.

mod cluster;
mod preprocess;
mod select;
mod soft;
pub mod trace;
#[cfg(test)]
mod tests;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::integral_assignment;
use crate::instance::MetricInstance;
use crate::relax::{solve_relaxation, FractionalSolution};
use crate::solution::RoundedSolution;

pub use cluster::{cluster_formation, Opened, RoundingState};
pub(crate) use cluster::form_clusters;
pub use preprocess::MERGE_SLACK;
pub(crate) use preprocess::{absorb, check_preprocessed, first_overloaded, init_event, is_light, preprocess_traced};
pub use select::{
    realized_beta, select_objects_general, select_objects_uniform, uniform_beta, Selection, GENERAL_BETA,
};
pub(crate) use select::finish as finish_selection;
pub use soft::{run_soft_pipeline, solve_soft, solve_soft_traced, SOFT_ALPHA, SOFT_BETA, SOFT_COST_FACTOR};
pub use trace::{Trace, TraceEvent, Tracer};

/// Cost bound of the metric pipeline against the LP value at the default alpha.
pub const METRIC_COST_FACTOR: f64 = 21.0;

/// Cost bound for a given alpha: `(6 + 5 alpha) / alpha`, 21 at alpha = 3/8.
pub fn metric_cost_factor(alpha: f64) -> f64 {
    (6.0 + 5.0 * alpha) / alpha
}

/// How a light ball and a heavy ball are judged to intersect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intersection {
    /// Input radii: `d(c_h, c_t) <= r_h + r_t`.
    #[default]
    Unexpanded,
    /// The heavy radius scaled by its serving factor after preprocessing.
    Expanded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundingParams {
    pub alpha: f64,
    pub tol: f64,
    pub intersection: Intersection,
    /// Replay every trace event as it is produced and fail on a violation.
    pub check_invariants: bool,
}

impl Default for RoundingParams {
    fn default() -> Self {
        RoundingParams {
            alpha: 0.375,
            tol: 1e-9,
            intersection: Intersection::Unexpanded,
            check_invariants: true,
        }
    }
}

impl RoundingParams {
    pub fn with_alpha(alpha: f64) -> Self {
        RoundingParams {
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 0.375) {
            return Err(Error::InvalidParams(format!(
                "alpha must lie in (0, 3/8], got {}",
                self.alpha
            )));
        }
        if !(self.tol >= 0.0 && self.tol < 1e-3) {
            return Err(Error::InvalidParams(format!("tolerance {} out of range", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    General,
    Uniform,
}

/// Folds light balls so that no point carries more than `alpha` of light y,
/// then opens every remaining ball above `alpha` fully.
pub fn preprocess(
    inst: &MetricInstance,
    frac: &FractionalSolution,
    params: &RoundingParams,
) -> Result<FractionalSolution> {
    params.validate()?;
    let mut tracer = Tracer::new(params.check_invariants);
    tracer.record(init_event(inst, frac))?;
    preprocess_traced(inst, frac, params.alpha, params.tol, true, &mut tracer)
}

/// Everything a pipeline run produced, for reporting.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub solution: RoundedSolution,
    pub lp_value: f64,
    pub preprocessed_cost: f64,
    /// Heavy and light ball counts entering cluster formation.
    pub heavy: usize,
    pub light: usize,
    pub opened_light: usize,
    /// Largest per-cluster selection count (1 outside the Euclidean pipeline).
    pub max_per_cluster: usize,
    pub trace: Trace,
}

/// Well-formedness and monotone capacities, required by every pipeline.
pub fn check_pipeline_instance(inst: &MetricInstance) -> Result<()> {
    inst.require_well_formed()?;
    if !inst.is_monotone() {
        return Err(Error::InvalidInstance(
            "capacities are not monotone in the radii".into(),
        ));
    }
    Ok(())
}

pub fn run_metric_pipeline(
    inst: &MetricInstance,
    params: &RoundingParams,
    variant: Variant,
) -> Result<RoundedSolution> {
    run_metric_pipeline_detailed(inst, params, variant).map(|r| r.solution)
}

/// LP, preprocessing, cluster formation, selection and integral assignment.
pub fn run_metric_pipeline_detailed(
    inst: &MetricInstance,
    params: &RoundingParams,
    variant: Variant,
) -> Result<PipelineRun> {
    params.validate()?;
    check_pipeline_instance(inst)?;
    if variant == Variant::Uniform && !inst.has_uniform_capacity() {
        return Err(Error::Unsupported(
            "the uniform variant needs all capacities equal".into(),
        ));
    }
    let frac = solve_relaxation(inst)?;
    round_metric_solution(inst, &frac, params, variant)
}

/// The pipeline from an already solved relaxation onwards.
pub fn round_metric_solution(
    inst: &MetricInstance,
    frac: &FractionalSolution,
    params: &RoundingParams,
    variant: Variant,
) -> Result<PipelineRun> {
    let mut tracer = Tracer::new(params.check_invariants);
    tracer.record(init_event(inst, frac))?;
    let pre = preprocess_traced(inst, frac, params.alpha, params.tol, true, &mut tracer)?;
    let preprocessed_cost = pre.cost();
    let mut state = form_clusters(inst, pre, params, tracer)?;
    let sel = match variant {
        Variant::General => select_objects_general(inst, &mut state)?,
        Variant::Uniform => select_objects_uniform(inst, &mut state)?,
    };
    let assignment = integral_assignment(inst, &sel.selected, &sel.x)?;
    let solution = RoundedSolution::new(inst, sel.selected, assignment, frac.lp_value, None);
    if solution.cost as f64 > metric_cost_factor(params.alpha) * frac.lp_value + 1e-6 {
        return Err(crate::error::assertion(format!(
            "{} balls selected against LP value {}",
            solution.cost, frac.lp_value
        )));
    }
    Ok(PipelineRun {
        solution,
        lp_value: frac.lp_value,
        preprocessed_cost,
        heavy: state.heavy.len(),
        light: state.light.len(),
        opened_light: state.opened.len(),
        max_per_cluster: 1,
        trace: state.tracer.trace,
    })
}
