use serde::{Deserialize, Serialize};

use crate::error::{assertion, Result};
use crate::exact::FlowNetwork;
use crate::instance::MetricInstance;
use crate::round_metric::trace::{Move, TraceEvent};
use crate::round_metric::{finish_selection, RoundingState, Selection};

use super::grid::{bucket, cells_per_axis, dimension_scale};
use super::{common_radius, EuclidParams};

/// How a cluster's balls were thinned before gridding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EuclidCase {
    /// The cluster has no light balls, or they are all tiny next to the heavy one.
    HeavyOnly,
    /// All radii in the instance are equal.
    EqualRadii,
    /// The heavy ball is tiny next to the largest light ball.
    SmallHeavy,
    MediumHeavy,
    LargeHeavy,
}

/// What the selection kept for one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterChoice {
    pub heavy: usize,
    pub case: EuclidCase,
    /// Ascending ball ids.
    pub chosen: Vec<usize>,
    /// Grid cells the chosen balls can occupy, plus one for the heavy ball.
    pub cell_bound: f64,
    /// The nearest-largest reroute overflowed and max-flow routing was used.
    pub flow_routed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EuclidSelection {
    pub selection: Selection,
    pub clusters: Vec<ClusterChoice>,
}

impl EuclidSelection {
    pub fn max_per_cluster(&self) -> usize {
        self.clusters.iter().map(|c| c.chosen.len()).max().unwrap_or(0)
    }
}

/// Replaces each cluster by grid representatives of its larger balls and
/// moves the heavy ball's points onto them, each within `1 + eps` of a radius.
pub fn euclid_select(inst: &MetricInstance, state: &mut RoundingState, params: &EuclidParams) -> Result<EuclidSelection> {
    params.validate()?;
    let d = inst.dimension().unwrap_or(1);
    let clusters = state.clusters.clone();
    let mut choices = Vec::with_capacity(clusters.len());
    let mut selected = Vec::new();
    for (&h, members) in &clusters {
        let (case, mut chosen, cell_bound) = pick(inst, h, members, params, d)?;
        if cell_bound > params.cluster_constant(d) {
            return Err(assertion(format!(
                "cluster {h} may keep {cell_bound} balls, above the constant {}",
                params.cluster_constant(d)
            )));
        }
        chosen.sort_unstable();
        let flow_routed = reroute(inst, state, h, members, &chosen, params)?;
        selected.extend_from_slice(&chosen);
        choices.push(ClusterChoice {
            heavy: h,
            case,
            chosen,
            cell_bound,
            flow_routed,
        });
    }
    let selection = finish_selection(inst, state, selected, 1.0 + params.epsilon)?;
    Ok(EuclidSelection {
        selection,
        clusters: choices,
    })
}

fn pick(
    inst: &MetricInstance,
    h: usize,
    members: &[usize],
    params: &EuclidParams,
    d: usize,
) -> Result<(EuclidCase, Vec<usize>, f64)> {
    let (eps, c) = (params.epsilon, params.case_constant_c);
    let scale = dimension_scale(d);
    let radius = |b: usize| inst.balls[b].radius;
    let rh = radius(h);
    let rm = members[1..].iter().map(|&b| radius(b)).fold(0.0, f64::max);
    if members.len() == 1 || rm <= rh * eps / 2.0 {
        return Ok((EuclidCase::HeavyOnly, vec![h], 1.0));
    }
    let (case, threshold, g, with_heavy) = if common_radius(inst).is_some() {
        (EuclidCase::EqualRadii, 0.0, eps * rh / 4.0, true)
    } else if rh < rm * eps / 4.0 {
        (EuclidCase::SmallHeavy, rm * eps / 4.0, rm * eps * eps / 8.0, false)
    } else if rh <= rm / c {
        (EuclidCase::MediumHeavy, rh * eps / 4.0, rh * eps * eps / 8.0, true)
    } else {
        (EuclidCase::LargeHeavy, rm * eps / (2.0 * c), rm * eps * eps / (4.0 * c), true)
    };
    let g = g * scale;
    let mut kept: Vec<usize> = members.iter().copied().filter(|&b| radius(b) >= threshold).collect();
    kept.sort_by(|&a, &b| inst.tie_break(a, b));
    // Every center lies within r_h + r_m of the heavy center.
    let side = 2.0 * (rh + rm);
    let groups = bucket(inst, &kept, side, g)?;
    let mut chosen: Vec<usize> = groups.iter().map(|grp| grp[0]).collect();
    if with_heavy && !chosen.contains(&h) {
        chosen.push(h);
    }
    let bound = (cells_per_axis(side, g) as f64).powi(d as i32) + 1.0;
    Ok((case, chosen, bound))
}

/// Moves every point the heavy ball serves to the largest chosen ball that
/// contains it at `1 + eps`, falling back to max-flow routing when that
/// overfills a ball. Returns whether the fallback was used.
fn reroute(
    inst: &MetricInstance,
    state: &mut RoundingState,
    h: usize,
    members: &[usize],
    chosen: &[usize],
    params: &EuclidParams,
) -> Result<bool> {
    let beta = 1.0 + params.epsilon;
    let tol = state.params.tol;
    let points: Vec<(usize, f64)> = state.frac.x.served(h).collect();
    let mut plan: Vec<(usize, usize, f64)> = Vec::with_capacity(points.len());
    let mut load = vec![0.0; chosen.len()];
    let mut options: Vec<Vec<usize>> = Vec::with_capacity(points.len());
    for &(j, v) in &points {
        let near: Vec<usize> = (0..chosen.len()).filter(|&k| inst.covers(chosen[k], j, beta)).collect();
        let Some(&best) = near.iter().min_by(|&&a, &&b| {
            let (ba, bb) = (&inst.balls[chosen[a]], &inst.balls[chosen[b]]);
            bb.capacity.cmp(&ba.capacity).then(inst.tie_break(chosen[a], chosen[b]))
        }) else {
            return Err(assertion(format!(
                "point {j} of cluster {h} lies in no chosen ball expanded by {beta}"
            )));
        };
        load[best] += v;
        plan.push((j, chosen[best], v));
        options.push(near);
    }
    // Chosen balls other than the heavy one carry no flow at this point.
    let base = |k: usize| if chosen[k] == h { 0.0 } else { state.frac.x.outflow(chosen[k]) };
    let fits = |load: &[f64]| (0..chosen.len()).all(|k| base(k) + load[k] <= inst.balls[chosen[k]].capacity as f64 + tol);
    let mut flow_routed = false;
    if !fits(&load) {
        flow_routed = true;
        plan = route_by_flow(inst, state, &points, &options, chosen, &base)
            .ok_or_else(|| assertion(format!("the chosen balls of cluster {h} cannot absorb its flow")))?;
    }
    let mut moves = Vec::new();
    for (j, to, amount) in plan {
        if to != h && amount > 0.0 {
            state.frac.x.add(h, j, -amount);
            state.frac.x.add(to, j, amount);
            moves.push(Move {
                from: h,
                to,
                point: j,
                amount,
            });
        }
    }
    for &b in members {
        state.frac.y[b] = 0.0;
    }
    for &b in chosen {
        state.frac.y[b] = 1.0;
    }
    state.tracer.record(TraceEvent::Choose {
        heavy: h,
        chosen: chosen.to_vec(),
        overruled: false,
        moves,
    })?;
    Ok(flow_routed)
}

fn route_by_flow(
    inst: &MetricInstance,
    state: &RoundingState,
    points: &[(usize, f64)],
    options: &[Vec<usize>],
    chosen: &[usize],
    base: &dyn Fn(usize) -> f64,
) -> Option<Vec<(usize, usize, f64)>> {
    let (nb, np) = (chosen.len(), points.len());
    let (source, sink) = (0, 1 + nb + np);
    let mut net = FlowNetwork::new(sink + 1);
    for k in 0..nb {
        let room = inst.balls[chosen[k]].capacity as f64 - base(k);
        net.add_edge(source, 1 + k, room.max(0.0));
    }
    let mut arcs = Vec::new();
    for (q, near) in options.iter().enumerate() {
        for &k in near {
            arcs.push((q, k, net.add_edge(1 + k, 1 + nb + q, points[q].1)));
        }
        net.add_edge(1 + nb + q, sink, points[q].1);
    }
    let total: f64 = points.iter().map(|p| p.1).sum();
    if net.max_flow(source, sink) < total - state.params.tol.max(1e-12) {
        return None;
    }
    let mut plan: Vec<(usize, usize, f64)> = Vec::with_capacity(arcs.len());
    for q in 0..np {
        let start = plan.len();
        let mut sent = 0.0;
        for &(_, k, e) in arcs.iter().filter(|a| a.0 == q) {
            let f = net.flow_on(e);
            if f > 0.0 {
                plan.push((points[q].0, chosen[k], f));
                sent += f;
            }
        }
        // Absorb round-off so the point's flow moves off the heavy ball exactly.
        if let Some(last) = plan[start..].last_mut() {
            last.2 += points[q].1 - sent;
        }
    }
    Some(plan)
}
