//! Ground truth: integral assignments by max-flow, brute-force optima on
//! small instances, and the solution verifier.

mod flow;

pub use flow::FlowNetwork;

use serde::{Deserialize, Serialize};

use crate::error::{assertion, Error, Result};
use crate::instance::{MetricInstance, ValidationReport, Violation, ViolationKind, TOL};
use crate::relax::Flow;
use crate::solution::RoundedSolution;

/// Default cap on the number of balls for [`brute_force_opt`].
pub const DEFAULT_MAX_BALLS: usize = 12;

/// Flow below this is not treated as serving.
const SUPPORT_TOL: f64 = 1e-9;

/// Bipartite network `source -> balls -> points -> sink`.
struct AssignmentNetwork {
    net: FlowNetwork,
    source: usize,
    sink: usize,
    /// `(ball, point, edge id)` for every ball-to-point arc.
    arcs: Vec<(usize, usize, usize)>,
    ball_edges: Vec<usize>,
    point_edges: Vec<usize>,
}

impl AssignmentNetwork {
    /// `balls` are pairs of (ball id, capacity); `allowed(ball, point)` selects the arcs.
    fn new(n_points: usize, balls: &[(usize, u64)], mut allowed: impl FnMut(usize, usize) -> bool) -> Self {
        let source = balls.len() + n_points;
        let sink = source + 1;
        let mut net = FlowNetwork::new(sink + 1);
        let mut arcs = Vec::new();
        let mut ball_edges = Vec::with_capacity(balls.len());
        for (k, &(b, cap)) in balls.iter().enumerate() {
            ball_edges.push(net.add_edge(source, k, cap as f64));
            for j in 0..n_points {
                if allowed(b, j) {
                    arcs.push((b, j, net.add_edge(k, balls.len() + j, 1.0)));
                }
            }
        }
        let point_edges = (0..n_points)
            .map(|j| net.add_edge(balls.len() + j, sink, 1.0))
            .collect();
        AssignmentNetwork {
            net,
            source,
            sink,
            arcs,
            ball_edges,
            point_edges,
        }
    }

    /// Runs max-flow; returns the assignment when every point is saturated.
    fn solve(mut self, n_points: usize) -> Option<Vec<usize>> {
        self.net.max_flow(self.source, self.sink);
        let mut assignment = vec![usize::MAX; n_points];
        for &(b, j, e) in &self.arcs {
            if self.net.flow_on(e) > 0.5 {
                assignment[j] = b;
            }
        }
        if assignment.contains(&usize::MAX) {
            None
        } else {
            Some(assignment)
        }
    }
}

/// Converts a fractional assignment on the selected balls into an integral one.
///
/// Arcs are the support of `x` restricted to `selected`, so no point moves to
/// a ball that did not already serve it. Points already receiving a whole
/// unit from one ball keep it.
pub fn integral_assignment(inst: &MetricInstance, selected: &[usize], x: &Flow) -> Result<Vec<usize>> {
    let caps: Vec<u64> = selected.iter().map(|&b| inst.balls[b].capacity).collect();
    integral_assignment_with_capacity(inst, selected, &caps, x)
}

/// As [`integral_assignment`] with explicit per-ball capacities, parallel to `selected`.
pub fn integral_assignment_with_capacity(
    inst: &MetricInstance,
    selected: &[usize],
    caps: &[u64],
    x: &Flow,
) -> Result<Vec<usize>> {
    let n = inst.n_points();
    let balls: Vec<(usize, u64)> = selected.iter().copied().zip(caps.iter().copied()).collect();
    let mut network = AssignmentNetwork::new(n, &balls, |b, j| x.get(b, j) > SUPPORT_TOL);

    // Warm start from the points that are already integral.
    let slot: std::collections::HashMap<usize, usize> =
        selected.iter().enumerate().map(|(k, &b)| (b, k)).collect();
    let mut used = vec![0u64; selected.len()];
    let arc_index: std::collections::HashMap<(usize, usize), usize> =
        network.arcs.iter().map(|&(b, j, e)| ((b, j), e)).collect();
    for j in 0..n {
        let whole = x.servers(j).find(|&(b, v)| v >= 1.0 - SUPPORT_TOL && slot.contains_key(&b));
        if let Some((b, _)) = whole {
            let k = slot[&b];
            if used[k] < caps[k] {
                used[k] += 1;
                network.net.push(network.ball_edges[k], 1.0);
                network.net.push(arc_index[&(b, j)], 1.0);
                network.net.push(network.point_edges[j], 1.0);
            }
        }
    }

    network
        .solve(n)
        .ok_or_else(|| assertion("fractional assignment does not admit an integral one; the flow is corrupted"))
}

/// Whether `subset`, each ball expanded by `beta`, can serve every point
/// within capacity.
pub fn feasible_assignment_exists(inst: &MetricInstance, subset: &[usize], beta: f64) -> bool {
    assignment_within(inst, subset, beta).is_some()
}

/// A capacity-respecting assignment of all points to `subset` at expansion `beta`.
pub fn assignment_within(inst: &MetricInstance, subset: &[usize], beta: f64) -> Option<Vec<usize>> {
    let n = inst.n_points();
    if n == 0 {
        return Some(Vec::new());
    }
    let balls: Vec<(usize, u64)> = subset.iter().map(|&b| (b, inst.balls[b].capacity)).collect();
    AssignmentNetwork::new(n, &balls, |b, j| inst.covers(b, j, beta)).solve(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub size: usize,
    pub subset: Vec<usize>,
    pub assignment: Vec<usize>,
}

/// Minimum number of unexpanded balls that cover all points within capacity.
///
/// Subsets are tried by increasing size in lexicographic order, so the
/// witness is the lexicographically first optimum.
pub fn brute_force_opt(inst: &MetricInstance, max_balls: usize) -> Result<ExactSolution> {
    let m = inst.n_balls();
    if m > max_balls {
        return Err(Error::SizeCap(format!(
            "brute force limited to {max_balls} balls, instance has {m}"
        )));
    }
    inst.require_well_formed()?;
    let n = inst.n_points();
    // Coverage pruning via bitmasks; skipped for very large point sets.
    let use_mask = n <= 128;
    let covers: Vec<u128> = (0..m)
        .map(|i| {
            (0..n.min(128))
                .filter(|&j| inst.covers(i, j, 1.0))
                .fold(0u128, |acc, j| acc | 1 << j)
        })
        .collect();
    let all_points: u128 = if n >= 128 { u128::MAX } else { (1u128 << n) - 1 };

    for k in 0..=m {
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            let cap: u64 = subset.iter().map(|&b| inst.balls[b].capacity).sum();
            let covered = !use_mask
                || subset.iter().fold(0u128, |acc, &b| acc | covers[b]) == all_points;
            if cap >= n as u64 && covered {
                if let Some(assignment) = assignment_within(inst, &subset, 1.0) {
                    return Ok(ExactSolution {
                        size: k,
                        subset,
                        assignment,
                    });
                }
            }
            if !next_combination(&mut subset, m) {
                break;
            }
        }
    }
    Err(Error::Infeasible)
}

/// Advances to the next k-subset of `0..m` in lexicographic order.
fn next_combination(subset: &mut [usize], m: usize) -> bool {
    let k = subset.len();
    for pos in (0..k).rev() {
        if subset[pos] < m - k + pos {
            subset[pos] += 1;
            for q in pos + 1..k {
                subset[q] = subset[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Checks that every point is assigned to a selected ball, loads respect
/// capacity and every assigned point lies within `beta_max` times the radius
/// (and within the recorded expansion).
pub fn verify_solution(inst: &MetricInstance, sol: &RoundedSolution, beta_max: f64) -> ValidationReport {
    let mut out = Vec::new();
    let mut push = |kind, detail: String| out.push(Violation { kind, detail });
    let (m, n) = (inst.n_balls(), inst.n_points());

    if sol.assignment.len() != n {
        push(
            ViolationKind::Assignment,
            format!("assignment has {} entries for {n} points", sol.assignment.len()),
        );
    }
    if sol.expansion.len() != sol.selected.len() {
        push(
            ViolationKind::Shape,
            format!(
                "{} expansion factors for {} selected balls",
                sol.expansion.len(),
                sol.selected.len()
            ),
        );
    }
    if let Some(c) = &sol.copies {
        if c.len() != sol.selected.len() {
            push(
                ViolationKind::Shape,
                format!("{} copy counts for {} selected balls", c.len(), sol.selected.len()),
            );
        }
    }
    let mut slot = vec![None; m];
    for (k, &b) in sol.selected.iter().enumerate() {
        if b >= m {
            push(ViolationKind::Assignment, format!("selected ball {b} does not exist"));
        } else if slot[b].is_some() {
            push(ViolationKind::Assignment, format!("ball {b} selected twice"));
        } else {
            slot[b] = Some(k);
        }
    }
    let expected_cost = match &sol.copies {
        Some(c) => c.iter().sum(),
        None => sol.selected.len() as u64,
    };
    if sol.cost != expected_cost {
        push(
            ViolationKind::Assignment,
            format!("cost {} does not match the {expected_cost} opened balls", sol.cost),
        );
    }

    let mut load = vec![0u64; sol.selected.len()];
    for (j, &b) in sol.assignment.iter().enumerate().take(n) {
        let Some(k) = slot.get(b).copied().flatten() else {
            push(ViolationKind::Assignment, format!("point {j} assigned to unselected ball {b}"));
            continue;
        };
        load[k] += 1;
        let d = inst.ball_point(b, j);
        let r = inst.balls[b].radius;
        if d > beta_max * r + TOL {
            push(
                ViolationKind::Distance,
                format!("point {j} at distance {d} from ball {b}, beyond {beta_max} x {r}"),
            );
        } else if let Some(&e) = sol.expansion.get(k) {
            if d > e * r + TOL {
                push(
                    ViolationKind::Distance,
                    format!("point {j} at distance {d} from ball {b}, beyond recorded expansion {e}"),
                );
            }
        }
    }
    for (k, &b) in sol.selected.iter().enumerate() {
        if b >= m {
            continue;
        }
        let copies = sol.copies.as_ref().and_then(|c| c.get(k).copied()).unwrap_or(1);
        let cap = inst.balls[b].capacity * copies;
        if load[k] > cap {
            push(
                ViolationKind::Capacity,
                format!("ball {b} serves {} points, capacity {cap}", load[k]),
            );
        }
    }
    ValidationReport::from_violations(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Ball;

    fn line(points: &[f64], balls: &[(f64, f64, u64)]) -> MetricInstance {
        let centers = balls.iter().map(|b| vec![b.0]).collect();
        let balls = balls
            .iter()
            .enumerate()
            .map(|(id, b)| Ball {
                id,
                center: id,
                radius: b.1,
                capacity: b.2,
            })
            .collect();
        MetricInstance::euclidean(1, points.iter().map(|&p| vec![p]).collect(), centers, balls)
    }

    #[test]
    fn half_flows_become_a_matching() {
        let inst = line(&[0.0, 0.1], &[(0.0, 1.0, 1), (0.1, 1.0, 1)]);
        let mut x = Flow::new(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                x.set(i, j, 0.5);
            }
        }
        let a = integral_assignment(&inst, &[0, 1], &x).unwrap();
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn integral_flow_is_kept() {
        let inst = line(&[0.0, 0.1, 0.2], &[(0.0, 1.0, 3), (0.1, 1.0, 3)]);
        let mut x = Flow::new(2, 3);
        x.set(1, 0, 1.0);
        x.set(0, 1, 1.0);
        x.set(1, 2, 1.0);
        assert_eq!(integral_assignment(&inst, &[0, 1], &x).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn deficit_is_infeasible() {
        let inst = line(&[0.0, 0.1], &[(0.0, 1.0, 1)]);
        assert!(!feasible_assignment_exists(&inst, &[0], 1.0));
        assert!(!feasible_assignment_exists(&inst, &[], 1.0));
    }

    #[test]
    fn two_disjoint_pairs_need_two_balls() {
        let inst = line(&[0.0, 0.1, 5.0, 5.1], &[(0.0, 1.0, 2), (5.0, 1.0, 2)]);
        let opt = brute_force_opt(&inst, 12).unwrap();
        assert_eq!(opt.size, 2);
        assert_eq!(opt.subset, vec![0, 1]);
    }

    #[test]
    fn combination_order() {
        let mut s = vec![0, 1];
        let mut seen = vec![s.clone()];
        while next_combination(&mut s, 4) {
            seen.push(s.clone());
        }
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }

    #[test]
    fn verifier_flags_overload_and_distance() {
        let inst = line(&[0.0, 0.5, 10.0], &[(0.0, 1.0, 2)]);
        let sol = RoundedSolution {
            selected: vec![0],
            expansion: vec![10.0],
            assignment: vec![0, 0, 0],
            cost: 1,
            lp_value: 1.0,
            copies: None,
        };
        let report = verify_solution(&inst, &sol, 9.0);
        assert!(report.has(ViolationKind::Capacity));
        assert!(report.has(ViolationKind::Distance));
        assert!(!report.is_valid);
    }
}
