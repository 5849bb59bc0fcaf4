use crate::error::{assertion, Result};
use crate::instance::MetricInstance;
use crate::relax::FractionalSolution;

use super::trace::{Move, TraceEvent, Tracer};

/// Serving factor of balls that absorbed other balls' flow.
pub const MERGE_SLACK: f64 = 3.0;

pub(crate) fn is_light(y: f64, alpha: f64, tol: f64) -> bool {
    y > 0.0 && y <= alpha + tol
}

/// Sum of y over the light balls serving point `j`.
pub(crate) fn light_load(frac: &FractionalSolution, j: usize, alpha: f64, tol: f64) -> f64 {
    frac.x
        .servers(j)
        .map(|(i, _)| frac.y[i])
        .filter(|&y| is_light(y, alpha, tol))
        .sum()
}

/// The first point, by id, whose light servers carry more than `alpha` in total.
pub(crate) fn first_overloaded(frac: &FractionalSolution, alpha: f64, tol: f64) -> Option<usize> {
    (0..frac.x.n_points()).find(|&j| light_load(frac, j, alpha, tol) > alpha + tol)
}

/// Outflow limit per ball used by the replayer: capacity times the number
/// of times the ball is (fractionally) opened, at least once.
pub(crate) fn init_event(inst: &MetricInstance, frac: &FractionalSolution) -> TraceEvent {
    TraceEvent::Init {
        limits: inst
            .balls
            .iter()
            .zip(&frac.y)
            .map(|(b, &y)| b.capacity as f64 * y.max(1.0))
            .collect(),
        flows: frac.x.entries().collect(),
    }
}

/// Moves all flow of `from` to `to`, logging each point.
pub(crate) fn absorb(frac: &mut FractionalSolution, from: usize, to: usize, moves: &mut Vec<Move>) {
    let points: Vec<usize> = frac.x.served(from).map(|(j, _)| j).collect();
    for j in points {
        let amount = frac.x.shift(from, to, j);
        moves.push(Move {
            from,
            to,
            point: j,
            amount,
        });
    }
}

/// Folds light balls together until no point has more than `alpha` light
/// y on it. With `round_up`, every ball left with y above `alpha` is then
/// opened fully; without it (soft capacities) y is kept.
pub(crate) fn preprocess_traced(
    inst: &MetricInstance,
    frac: &FractionalSolution,
    alpha: f64,
    tol: f64,
    round_up: bool,
    tracer: &mut Tracer,
) -> Result<FractionalSolution> {
    let mut out = frac.clone();
    let order = inst.tie_break_order();
    while let Some(j) = first_overloaded(&out, alpha, tol) {
        let servers: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| out.x.serves(i, j) && is_light(out.y[i], alpha, tol))
            .collect();
        let mut members = Vec::new();
        let mut total = 0.0;
        for i in servers {
            members.push(i);
            total += out.y[i];
            if total > alpha + tol {
                break;
            }
        }
        let receiver = members[0];
        let mut moves = Vec::new();
        for &i in &members[1..] {
            absorb(&mut out, i, receiver, &mut moves);
            out.y[i] = 0.0;
        }
        out.y[receiver] = total;
        out.stage_slack[receiver] = MERGE_SLACK;
        tracer.record(TraceEvent::Merge {
            point: j,
            members,
            receivers: vec![receiver],
            moves,
        })?;
    }
    if round_up {
        for y in out.y.iter_mut() {
            if *y > alpha + tol {
                *y = 1.0;
            }
        }
    }
    check_preprocessed(inst, frac, &out, alpha, tol, if round_up { 1.0 / alpha } else { 1.0 })?;
    Ok(out)
}

/// Asserts the post-preprocessing properties: dichotomy, per-point light
/// load, serving distances, capacities and the cost blow-up `cost_factor`.
pub(crate) fn check_preprocessed(
    inst: &MetricInstance,
    input: &FractionalSolution,
    out: &FractionalSolution,
    alpha: f64,
    tol: f64,
    cost_factor: f64,
) -> Result<()> {
    if !out.soft {
        if let Some((i, y)) = out
            .y
            .iter()
            .enumerate()
            .find(|&(_, &y)| y != 0.0 && y != 1.0 && !is_light(y, alpha, tol))
        {
            return Err(assertion(format!(
                "after preprocessing ball {i} has y = {y}, neither heavy nor light"
            )));
        }
    }
    if let Some(j) = first_overloaded(out, alpha, tol) {
        return Err(assertion(format!(
            "after preprocessing point {j} carries light y {}",
            light_load(out, j, alpha, tol)
        )));
    }
    if let Some(v) = out.invariant_violations(inst, 1e-7).first() {
        return Err(assertion(format!("after preprocessing: {v}")));
    }
    let (before, after) = (input.cost(), out.cost());
    if after > cost_factor * before + 1e-6 {
        return Err(assertion(format!(
            "preprocessing raised the cost from {before} to {after}, above {cost_factor} x"
        )));
    }
    Ok(())
}
