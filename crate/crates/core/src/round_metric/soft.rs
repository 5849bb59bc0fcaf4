use crate::error::{assertion, Error, Result};
use crate::exact::integral_assignment_with_capacity;
use crate::instance::MetricInstance;
use crate::relax::{solve_soft_relaxation, Flow, FractionalSolution};
use crate::solution::RoundedSolution;

use super::preprocess::{init_event, is_light, preprocess_traced};
use super::trace::{Trace, Tracer};

pub const SOFT_ALPHA: f64 = 0.5;
/// Cost bound of the copy-opening rounding against the soft LP value.
pub const SOFT_COST_FACTOR: f64 = 4.0;
pub const SOFT_BETA: f64 = 3.0;

/// Rounds a soft-capacity LP solution by opening copies of every ball with
/// y above `alpha`; ball `i` gets `ceil(y_i / (1 - alpha))` copies.
pub fn solve_soft(inst: &MetricInstance, frac: &FractionalSolution, alpha: f64) -> Result<RoundedSolution> {
    solve_soft_traced(inst, frac, alpha, true).map(|(s, _)| s)
}

/// [`solve_soft`] that also returns the trace; `check` replays events as they are recorded.
pub fn solve_soft_traced(
    inst: &MetricInstance,
    frac: &FractionalSolution,
    alpha: f64,
    check: bool,
) -> Result<(RoundedSolution, Trace)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let tol = crate::instance::TOL;
    let mut frac = frac.clone();
    frac.soft = true;
    let mut tracer = Tracer::new(check);
    tracer.record(init_event(inst, &frac))?;
    let pre = preprocess_traced(inst, &frac, alpha, tol, false, &mut tracer)?;

    let open: Vec<usize> = (0..inst.n_balls())
        .filter(|&i| pre.y[i] > 0.0 && !is_light(pre.y[i], alpha, tol))
        .collect();
    let copies: Vec<u64> = open
        .iter()
        .map(|&i| ((pre.y[i] / (1.0 - alpha)) - tol).ceil().max(1.0) as u64)
        .collect();

    let mut x = Flow::new(inst.n_balls(), inst.n_points());
    for &i in &open {
        for (j, v) in pre.x.served(i) {
            x.set(i, j, v / (1.0 - alpha));
        }
    }
    for j in 0..inst.n_points() {
        let total = x.inflow(j);
        if total < 1.0 - 1e-7 {
            return Err(assertion(format!(
                "point {j} keeps only {total} flow after dropping light balls"
            )));
        }
        let servers: Vec<(usize, f64)> = x.servers(j).collect();
        for (i, v) in servers {
            x.set(i, j, v / total);
        }
    }
    let caps: Vec<u64> = open
        .iter()
        .zip(&copies)
        .map(|(&i, &c)| c * inst.balls[i].capacity)
        .collect();
    for (&i, &cap) in open.iter().zip(&caps) {
        let out = x.outflow(i);
        if out > cap as f64 + 1e-7 {
            return Err(assertion(format!("ball {i} sends {out} over {cap} copy capacity")));
        }
    }
    let assignment = integral_assignment_with_capacity(inst, &open, &caps, &x)?;
    let sol = RoundedSolution::new(inst, open, assignment, frac.lp_value, Some(copies));
    if sol.cost as f64 > SOFT_COST_FACTOR * frac.lp_value + 1e-6 {
        return Err(assertion(format!(
            "{} copies opened against LP value {}",
            sol.cost, frac.lp_value
        )));
    }
    if sol.max_expansion() > SOFT_BETA + tol {
        return Err(assertion(format!(
            "soft rounding expanded a ball by {}",
            sol.max_expansion()
        )));
    }
    Ok((sol, tracer.trace))
}

/// Soft LP followed by [`solve_soft`] with `alpha = 1/2`.
pub fn run_soft_pipeline(inst: &MetricInstance) -> Result<RoundedSolution> {
    inst.require_well_formed()?;
    let frac = solve_soft_relaxation(inst)?;
    solve_soft(inst, &frac, SOFT_ALPHA)
}
