//! The covering LP: one openness variable per ball, one flow variable per
//! (ball, point) pair with the point inside the ball.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{MetricInstance, TOL};
use crate::lpcore::{simplex_solve, LpProblem, LpStatus, Relation, SimplexOptions};

/// Largest LP (in variables) the dense solver is asked to handle.
pub const MAX_LP_VARS: usize = 20_000;

/// Sparse ball-to-point flow, indexed both ways.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "FlowRecord", from = "FlowRecord")]
pub struct Flow {
    by_ball: Vec<BTreeMap<usize, f64>>,
    by_point: Vec<BTreeMap<usize, f64>>,
}

#[derive(Serialize, Deserialize)]
struct FlowRecord {
    n_balls: usize,
    n_points: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl From<Flow> for FlowRecord {
    fn from(f: Flow) -> Self {
        FlowRecord {
            n_balls: f.n_balls(),
            n_points: f.n_points(),
            entries: f.entries().collect(),
        }
    }
}

impl From<FlowRecord> for Flow {
    fn from(r: FlowRecord) -> Self {
        let mut f = Flow::new(r.n_balls, r.n_points);
        for (i, j, v) in r.entries {
            f.set(i, j, v);
        }
        f
    }
}

impl Flow {
    pub fn new(n_balls: usize, n_points: usize) -> Self {
        Flow {
            by_ball: vec![BTreeMap::new(); n_balls],
            by_point: vec![BTreeMap::new(); n_points],
        }
    }

    pub fn n_balls(&self) -> usize {
        self.by_ball.len()
    }

    pub fn n_points(&self) -> usize {
        self.by_point.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.by_ball[i].get(&j).copied().unwrap_or(0.0)
    }

    /// Sets `x_ij`; zero removes the entry.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        if v == 0.0 {
            self.by_ball[i].remove(&j);
            self.by_point[j].remove(&i);
        } else {
            self.by_ball[i].insert(j, v);
            self.by_point[j].insert(i, v);
        }
    }

    pub fn add(&mut self, i: usize, j: usize, dv: f64) {
        let v = self.get(i, j) + dv;
        self.set(i, j, if v.abs() <= 1e-15 { 0.0 } else { v });
    }

    /// Points served by ball `i` with their flow, ascending by point.
    pub fn served(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.by_ball[i].iter().map(|(&j, &v)| (j, v))
    }

    /// Balls serving point `j` with their flow, ascending by ball.
    pub fn servers(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.by_point[j].iter().map(|(&i, &v)| (i, v))
    }

    pub fn serves(&self, i: usize, j: usize) -> bool {
        self.by_ball[i].contains_key(&j)
    }

    pub fn outflow(&self, i: usize) -> f64 {
        self.by_ball[i].values().sum()
    }

    pub fn inflow(&self, j: usize) -> f64 {
        self.by_point[j].values().sum()
    }

    /// All `(ball, point, flow)` triples in ball-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.by_ball
            .iter()
            .enumerate()
            .flat_map(|(i, m)| m.iter().map(move |(&j, &v)| (i, j, v)))
    }

    /// Moves all of ball `from`'s flow on point `j` to ball `to`; returns the amount.
    pub fn shift(&mut self, from: usize, to: usize, j: usize) -> f64 {
        let v = self.get(from, j);
        if v > 0.0 {
            self.set(from, j, 0.0);
            self.add(to, j, v);
        }
        v
    }
}

/// An LP solution in flow form, possibly mid-rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalSolution {
    pub x: Flow,
    pub y: Vec<f64>,
    /// Serving-radius multiplier per ball for the current stage.
    pub stage_slack: Vec<f64>,
    /// Objective of the relaxation this solution descends from.
    pub lp_value: f64,
    /// Soft solutions may open a ball more than once (`y > 1`).
    #[serde(default)]
    pub soft: bool,
}

impl FractionalSolution {
    pub fn cost(&self) -> f64 {
        self.y.iter().sum()
    }

    /// Checks openness, capacity, unit inflow and serving distance.
    pub fn invariant_violations(&self, inst: &MetricInstance, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (i, ball) in inst.balls.iter().enumerate() {
            let yi = self.y[i];
            if yi < -tol || (!self.soft && yi > 1.0 + tol) {
                out.push(format!("y of ball {i} is {yi}"));
            }
            let mut total = 0.0;
            for (j, v) in self.x.served(i) {
                total += v;
                if v < -tol {
                    out.push(format!("negative flow {v} from ball {i} to point {j}"));
                }
                if v > yi + tol {
                    out.push(format!("flow {v} from ball {i} to point {j} exceeds y = {yi}"));
                }
                let d = inst.ball_point(i, j);
                if d > self.stage_slack[i] * ball.radius + tol {
                    out.push(format!(
                        "ball {i} serves point {j} at distance {d}, beyond {} x radius",
                        self.stage_slack[i]
                    ));
                }
            }
            if total > yi * ball.capacity as f64 + tol {
                out.push(format!(
                    "ball {i} sends {total}, above y * U = {}",
                    yi * ball.capacity as f64
                ));
            }
        }
        for j in 0..self.x.n_points() {
            let inflow = self.x.inflow(j);
            if (inflow - 1.0).abs() > tol {
                out.push(format!("point {j} receives {inflow}"));
            }
        }
        out
    }
}

/// Variable layout of a built LP.
#[derive(Debug, Clone, PartialEq)]
pub struct LpLayout {
    pub n_balls: usize,
    /// `(ball, point)` of flow variable `n_balls + k`.
    pub x_vars: Vec<(usize, usize)>,
}

impl LpLayout {
    pub fn y_var(&self, i: usize) -> usize {
        i
    }
}

/// Builds the covering LP. Flow variables exist only for points inside the
/// unexpanded ball.
pub fn build_mmcc_lp(inst: &MetricInstance) -> Result<(LpProblem, LpLayout)> {
    build(inst, false)
}

/// The soft-capacity LP: as [`build_mmcc_lp`] but `y` is unbounded above.
pub fn build_soft_lp(inst: &MetricInstance) -> Result<(LpProblem, LpLayout)> {
    build(inst, true)
}

fn build(inst: &MetricInstance, soft: bool) -> Result<(LpProblem, LpLayout)> {
    inst.require_well_formed()?;
    let (m, n) = (inst.n_balls(), inst.n_points());
    let mut x_vars = Vec::new();
    let mut per_point: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..m {
        for (j, slots) in per_point.iter_mut().enumerate() {
            if inst.covers(i, j, 1.0) {
                slots.push(m + x_vars.len());
                x_vars.push((i, j));
            }
        }
    }
    if let Some(j) = per_point.iter().position(Vec::is_empty) {
        return Err(Error::Coverage { point: j });
    }
    let n_vars = m + x_vars.len();
    if n_vars > MAX_LP_VARS {
        return Err(Error::SizeCap(format!(
            "LP would have {n_vars} variables, limit is {MAX_LP_VARS}"
        )));
    }

    let mut lp = LpProblem::new(n_vars);
    for i in 0..m {
        lp.objective[i] = 1.0;
        if !soft {
            lp.bounds[i] = (0.0, 1.0);
        }
    }
    for (k, &(i, _)) in x_vars.iter().enumerate() {
        lp.add_sparse(&[(m + k, 1.0), (i, -1.0)], Relation::Le, 0.0);
    }
    let mut by_ball: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for (k, &(i, _)) in x_vars.iter().enumerate() {
        by_ball[i].push((m + k, 1.0));
    }
    for (i, mut terms) in by_ball.into_iter().enumerate() {
        if terms.is_empty() {
            continue;
        }
        terms.push((i, -(inst.balls[i].capacity as f64)));
        lp.add_sparse(&terms, Relation::Le, 0.0);
    }
    for slots in &per_point {
        let terms: Vec<(usize, f64)> = slots.iter().map(|&v| (v, 1.0)).collect();
        lp.add_sparse(&terms, Relation::Eq, 1.0);
    }
    Ok((lp, LpLayout { n_balls: m, x_vars }))
}

/// Solves the covering LP and decodes it into flow form.
pub fn solve_relaxation(inst: &MetricInstance) -> Result<FractionalSolution> {
    let (lp, layout) = build_mmcc_lp(inst)?;
    solve_and_decode(inst, &lp, &layout, false)
}

/// Solves the soft-capacity LP and decodes it.
pub fn solve_soft_relaxation(inst: &MetricInstance) -> Result<FractionalSolution> {
    let (lp, layout) = build_soft_lp(inst)?;
    solve_and_decode(inst, &lp, &layout, true)
}

fn solve_and_decode(
    inst: &MetricInstance,
    lp: &LpProblem,
    layout: &LpLayout,
    soft: bool,
) -> Result<FractionalSolution> {
    let sol = simplex_solve(lp, SimplexOptions::default())?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible),
        LpStatus::Unbounded => return Err(Error::Unbounded),
    }
    let frac = decode(inst, layout, &sol.assignment, soft);
    let bad = frac.invariant_violations(inst, 1e-7);
    if let Some(first) = bad.first() {
        return Err(Error::NumericalFailure(format!(
            "decoded LP solution is inconsistent: {first}"
        )));
    }
    Ok(frac)
}

/// Snaps tiny values to zero (and near-one openness to one) and renormalizes
/// every point's inflow to exactly one.
pub fn decode(
    inst: &MetricInstance,
    layout: &LpLayout,
    values: &[f64],
    soft: bool,
) -> FractionalSolution {
    let (m, n) = (inst.n_balls(), inst.n_points());
    let y: Vec<f64> = (0..m)
        .map(|i| {
            let v = values[layout.y_var(i)];
            if v < TOL {
                0.0
            } else if !soft && v > 1.0 - TOL {
                1.0
            } else {
                v
            }
        })
        .collect();
    let mut x = Flow::new(m, n);
    for (k, &(i, j)) in layout.x_vars.iter().enumerate() {
        let v = values[m + k];
        if v >= TOL {
            x.set(i, j, v);
        }
    }
    for j in 0..n {
        let total = x.inflow(j);
        if total > 0.0 && total != 1.0 {
            let servers: Vec<(usize, f64)> = x.servers(j).collect();
            for (i, v) in servers {
                x.set(i, j, v / total);
            }
        }
    }
    let lp_value = y.iter().sum();
    FractionalSolution {
        x,
        y,
        stage_slack: vec![1.0; m],
        lp_value,
        soft,
    }
}
