use serde::{Deserialize, Serialize};

use crate::error::{assertion, Error, Result};
use crate::instance::MetricInstance;
use crate::relax::Flow;

use super::cluster::RoundingState;
use super::preprocess::absorb;
use super::trace::TraceEvent;

/// Expansion bound of the general selection.
pub const GENERAL_BETA: f64 = 9.0;

/// Expansion bound of the equal-capacity selection, 3 + 2 sqrt(3).
pub fn uniform_beta() -> f64 {
    3.0 + 2.0 * 3f64.sqrt()
}

/// Balls chosen by a selection stage and the fractional assignment onto them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Ascending ball ids.
    pub selected: Vec<usize>,
    pub x: Flow,
    /// Realized serving factor of each selected ball, parallel to `selected`.
    pub beta: Vec<f64>,
}

impl Selection {
    pub fn max_beta(&self) -> f64 {
        self.beta.iter().copied().fold(1.0, f64::max)
    }
}

/// Largest `d(c_i, p) / r_i` over the points ball `i` serves in `x`, at least 1.
pub fn realized_beta(inst: &MetricInstance, x: &Flow, i: usize) -> f64 {
    x.served(i).map(|(j, _)| inst.stretch(i, j)).fold(1.0, f64::max)
}

/// Keeps a cluster's heavy ball when it is alone, otherwise its largest ball.
pub fn select_objects_general(inst: &MetricInstance, state: &mut RoundingState) -> Result<Selection> {
    let clusters = state.clusters.clone();
    let mut selected = Vec::with_capacity(clusters.len());
    for (&h, members) in &clusters {
        let chosen = *members
            .iter()
            .min_by(|&&a, &&b| inst.tie_break(a, b))
            .expect("clusters are non-empty");
        choose(inst, state, h, members, chosen, false)?;
        selected.push(chosen);
    }
    finish(inst, state, selected, GENERAL_BETA)
}

/// Selection for equal capacities: the largest light ball `B_l` of the
/// cluster replaces the heavy ball `B_h` unless `r_l < r_h / sqrt(3)`.
///
/// When the rule's pick would exceed the 3 + 2 sqrt(3) expansion (possible
/// when `B_h` absorbed other balls during preprocessing) and the other
/// candidate stays within it, the other candidate is taken instead and the
/// event is flagged in the trace.
pub fn select_objects_uniform(inst: &MetricInstance, state: &mut RoundingState) -> Result<Selection> {
    if !inst.has_uniform_capacity() {
        return Err(Error::Unsupported(
            "the equal-capacity selection needs all capacities equal".into(),
        ));
    }
    let bound = uniform_beta();
    let tol = state.params.tol;
    let clusters = state.clusters.clone();
    let mut selected = Vec::with_capacity(clusters.len());
    for (&h, members) in &clusters {
        let Some(&l) = members[1..].iter().min_by(|&&a, &&b| inst.tie_break(a, b)) else {
            choose(inst, state, h, members, h, false)?;
            selected.push(h);
            continue;
        };
        let (rl, rh) = (inst.balls[l].radius, inst.balls[h].radius);
        let (pick, other) = if rl >= rh / 3f64.sqrt() - tol { (l, h) } else { (h, l) };
        // Every point of the cluster is served by the heavy ball at this point.
        let beta_of = |b: usize| {
            state
                .frac
                .x
                .served(h)
                .map(|(j, _)| inst.stretch(b, j))
                .fold(1.0, f64::max)
        };
        let overrule = beta_of(pick) > bound + tol && beta_of(other) <= bound + tol;
        let chosen = if overrule { other } else { pick };
        choose(inst, state, h, members, chosen, overrule)?;
        selected.push(chosen);
    }
    finish(inst, state, selected, bound)
}

fn choose(
    inst: &MetricInstance,
    state: &mut RoundingState,
    h: usize,
    members: &[usize],
    chosen: usize,
    overruled: bool,
) -> Result<()> {
    let mut moves = Vec::new();
    if chosen != h {
        if inst.balls[chosen].capacity < inst.balls[h].capacity {
            return Err(assertion(format!(
                "ball {chosen} replaces ball {h} with a smaller capacity"
            )));
        }
        absorb(&mut state.frac, h, chosen, &mut moves);
    }
    for &b in members {
        state.frac.y[b] = if b == chosen { 1.0 } else { 0.0 };
    }
    state.tracer.record(TraceEvent::Choose {
        heavy: h,
        chosen: vec![chosen],
        overruled,
        moves,
    })
}

/// Checks capacity and the expansion bound on the chosen balls.
pub(crate) fn finish(
    inst: &MetricInstance,
    state: &mut RoundingState,
    mut selected: Vec<usize>,
    bound: f64,
) -> Result<Selection> {
    selected.sort_unstable();
    selected.dedup();
    let tol = state.params.tol;
    let mut beta = Vec::with_capacity(selected.len());
    for &i in &selected {
        let out = state.frac.x.outflow(i);
        let cap = inst.balls[i].capacity as f64;
        if out > cap + tol {
            return Err(assertion(format!("selected ball {i} sends {out}, capacity {cap}")));
        }
        let b = realized_beta(inst, &state.frac.x, i);
        if b > bound + tol {
            return Err(assertion(format!(
                "selected ball {i} serves a point at {b} x its radius, above {bound}"
            )));
        }
        beta.push(b);
    }
    for (i, _, _) in state.frac.x.entries() {
        if selected.binary_search(&i).is_err() {
            return Err(assertion(format!("unselected ball {i} still serves points")));
        }
    }
    Ok(Selection {
        selected,
        x: state.frac.x.clone(),
        beta,
    })
}
