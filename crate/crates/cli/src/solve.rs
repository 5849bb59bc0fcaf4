use std::path::Path;
use std::time::Instant;

use capcover::exact::{brute_force_opt, verify_solution};
use capcover::relax::{solve_relaxation, solve_soft_relaxation};
use capcover::round_euclid::{round_euclid_solution, EuclidParams};
use capcover::round_metric::{
    check_pipeline_instance, metric_cost_factor, round_metric_solution, solve_soft_traced, uniform_beta,
    RoundingParams, Trace, Variant, GENERAL_BETA, SOFT_ALPHA, SOFT_BETA, SOFT_COST_FACTOR,
};
use capcover::{Error, MetricInstance, RoundedSolution};
use clap::ValueEnum;
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Metric,
    Uniform,
    Euclid,
    Soft,
}

#[derive(Debug, Clone, Copy)]
pub struct ModeParams {
    pub mode: Mode,
    /// Light threshold; `None` picks the mode's default.
    pub alpha: Option<f64>,
    pub epsilon: f64,
}

impl ModeParams {
    fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(match self.mode {
            Mode::Soft => SOFT_ALPHA,
            _ => RoundingParams::default().alpha,
        })
    }
}

/// A finished pipeline run before reporting.
pub struct Outcome {
    pub solution: RoundedSolution,
    pub trace: Trace,
    pub beta_bound: f64,
    pub cost_bound: f64,
    pub max_per_cluster: usize,
    pub lp_ms: f64,
    pub rounding_ms: f64,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs one mode with its LP; `check` turns live invariant checking on.
pub fn run_mode(inst: &MetricInstance, p: &ModeParams, check: bool) -> capcover::Result<Outcome> {
    check_pipeline_instance(inst)?;
    let alpha = p.alpha();
    match p.mode {
        Mode::Metric | Mode::Uniform => {
            let variant = if p.mode == Mode::Metric { Variant::General } else { Variant::Uniform };
            if variant == Variant::Uniform && !inst.has_uniform_capacity() {
                return Err(Error::Unsupported("the uniform mode needs all capacities equal".into()));
            }
            let params = RoundingParams {
                check_invariants: check,
                ..RoundingParams::with_alpha(alpha)
            };
            params.validate()?;
            let t = Instant::now();
            let frac = solve_relaxation(inst)?;
            let lp_ms = ms(t);
            let t = Instant::now();
            let run = round_metric_solution(inst, &frac, &params, variant)?;
            Ok(Outcome {
                solution: run.solution,
                trace: run.trace,
                beta_bound: if variant == Variant::General { GENERAL_BETA } else { uniform_beta() },
                cost_bound: metric_cost_factor(alpha),
                max_per_cluster: run.max_per_cluster,
                lp_ms,
                rounding_ms: ms(t),
            })
        }
        Mode::Euclid => {
            let d = inst
                .dimension()
                .ok_or_else(|| Error::Unsupported("euclid mode needs a Euclidean instance".into()))?;
            let params = EuclidParams {
                alpha,
                check_invariants: check,
                ..EuclidParams::with_epsilon(p.epsilon)
            };
            params.validate()?;
            let t = Instant::now();
            let frac = solve_relaxation(inst)?;
            let lp_ms = ms(t);
            let t = Instant::now();
            let (run, sel) = round_euclid_solution(inst, &frac, &params)?;
            Ok(Outcome {
                solution: run.solution,
                trace: run.trace,
                beta_bound: 1.0 + p.epsilon,
                cost_bound: params.cost_certificate(d),
                max_per_cluster: sel.max_per_cluster(),
                lp_ms,
                rounding_ms: ms(t),
            })
        }
        Mode::Soft => {
            let t = Instant::now();
            let frac = solve_soft_relaxation(inst)?;
            let lp_ms = ms(t);
            let t = Instant::now();
            let (solution, trace) = solve_soft_traced(inst, &frac, alpha, check)?;
            Ok(Outcome {
                solution,
                trace,
                beta_bound: SOFT_BETA,
                cost_bound: SOFT_COST_FACTOR,
                max_per_cluster: 1,
                lp_ms,
                rounding_ms: ms(t),
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceSummary {
    pub n: usize,
    pub m: usize,
    /// `d=<k>` for Euclidean instances, `metric` otherwise.
    pub geometry: String,
}

impl InstanceSummary {
    pub fn of(inst: &MetricInstance) -> Self {
        InstanceSummary {
            n: inst.n_points(),
            m: inst.n_balls(),
            geometry: inst.dimension().map_or_else(|| "metric".to_string(), |d| format!("d={d}")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Checks {
    pub verified: bool,
    pub replay_clean: bool,
    pub within_cost_bound: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub lp_ms: f64,
    pub rounding_ms: f64,
    pub oracle_ms: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub instance: InstanceSummary,
    pub mode: Mode,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub lp_value: f64,
    pub cost: u64,
    pub max_beta: f64,
    pub beta_bound: f64,
    pub cost_bound: f64,
    pub ratio_lp: f64,
    pub opt: Option<usize>,
    pub ratio_opt: Option<f64>,
    pub max_per_cluster: usize,
    pub checks: Checks,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl RunReport {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.verified && self.checks.replay_clean && self.checks.within_cost_bound
    }
}

/// Oracle settings; `None` skips the brute force.
pub type Oracle = Option<usize>;

pub fn report(
    inst: &MetricInstance,
    p: &ModeParams,
    out: &Outcome,
    oracle: Oracle,
    timings: bool,
) -> capcover::Result<RunReport> {
    let sol = &out.solution;
    let verified = verify_solution(inst, sol, out.beta_bound + 1e-9).is_valid;
    let mut oracle_ms = None;
    let opt = match oracle {
        Some(max_balls) => {
            let t = Instant::now();
            let size = match brute_force_opt(inst, max_balls) {
                Ok(o) => Some(o.size),
                Err(Error::SizeCap(_)) => None,
                Err(e) => return Err(e),
            };
            oracle_ms = Some(ms(t));
            size
        }
        None => None,
    };
    Ok(RunReport {
        instance: InstanceSummary::of(inst),
        mode: p.mode,
        alpha: p.alpha(),
        epsilon: (p.mode == Mode::Euclid).then_some(p.epsilon),
        lp_value: sol.lp_value,
        cost: sol.cost,
        max_beta: sol.max_expansion(),
        beta_bound: out.beta_bound,
        cost_bound: out.cost_bound,
        ratio_lp: sol.cost as f64 / sol.lp_value,
        opt,
        ratio_opt: opt.map(|o| sol.cost as f64 / o as f64),
        max_per_cluster: out.max_per_cluster,
        checks: Checks {
            verified,
            replay_clean: out.trace.replay().is_clean(),
            within_cost_bound: sol.cost as f64 <= out.cost_bound * sol.lp_value + 1e-6,
        },
        timings: timings.then_some(Timings {
            lp_ms: out.lp_ms,
            rounding_ms: out.rounding_ms,
            oracle_ms,
        }),
    })
}

pub struct SolveArgs<'a> {
    pub input: &'a Path,
    pub output: Option<&'a Path>,
    pub trace: Option<&'a Path>,
    pub params: ModeParams,
    pub oracle: Oracle,
    pub timings: bool,
}

pub fn cmd_solve(args: &SolveArgs) -> CliResult<RunReport> {
    let inst = MetricInstance::read(args.input)?;
    let out = match run_mode(&inst, &args.params, true) {
        Ok(out) => out,
        Err(Error::Assertion(message)) => return Err(traced_failure(&inst, args, message)),
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = args.output {
        std::fs::write(path, out.solution.to_json() + "\n")?;
    }
    if let Some(path) = args.trace {
        std::fs::write(path, out.trace.to_ndjson())?;
    }
    let rep = report(&inst, &args.params, &out, args.oracle, args.timings)?;
    if !rep.all_checks_pass() {
        return Err(CliError::Core(Error::Assertion(format!(
            "run finished but failed its checks: {}",
            serde_json::to_string(&rep.checks)?
        ))));
    }
    Ok(rep)
}

/// Reruns without live checks so the offending trace can be written out
/// and replayed offline.
fn traced_failure(inst: &MetricInstance, args: &SolveArgs, message: String) -> CliError {
    let Some(path) = args.trace else {
        return CliError::Traced {
            message,
            trace: "rerun with --trace PATH to capture it".into(),
        };
    };
    match run_mode(inst, &args.params, false) {
        Ok(out) => match std::fs::write(path, out.trace.to_ndjson()) {
            Ok(()) => CliError::Traced {
                message,
                trace: path.display().to_string(),
            },
            Err(e) => CliError::Traced {
                message,
                trace: format!("could not write {}: {e}", path.display()),
            },
        },
        Err(e) => CliError::Traced {
            message,
            trace: format!("unchecked rerun also failed: {e}"),
        },
    }
}
