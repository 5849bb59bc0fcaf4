//! Event log of a rounding run and an independent replayer that re-derives
//! flows, y-accumulations and available capacities from the events alone.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance of the flow-conservation and lemma checks.
pub const CHECK_TOL: f64 = 1e-9;

/// One unit of rerouting: `amount` of `point`'s flow moves from `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub from: usize,
    pub to: usize,
    pub point: usize,
    pub amount: f64,
}

/// Which sub-step of the O-addition rerouted flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectCase {
    /// All served points fit.
    AllServed,
    /// Capacity above one, fewer slots than served points.
    Partial,
    /// Unit capacity, several served points.
    UnitCapacity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEvent {
    /// Flows of the relaxation and the outflow limit of every ball.
    Init {
        limits: Vec<f64>,
        flows: Vec<(usize, usize, f64)>,
    },
    /// Preprocessing: lighter balls folded into `receivers`.
    Merge {
        point: usize,
        members: Vec<usize>,
        receivers: Vec<usize>,
        moves: Vec<Move>,
    },
    /// Entering cluster formation with heavy set `heavy` and light balls with their y.
    ClusterStart {
        alpha: f64,
        heavy: Vec<usize>,
        light: Vec<(usize, f64)>,
    },
    Cluster {
        heavy: usize,
        light: usize,
        moves: Vec<Move>,
    },
    /// A light ball with no remaining flow leaves without being opened.
    Discard { ball: usize },
    /// A light ball joins O.
    Select {
        ball: usize,
        k: u64,
        case: SelectCase,
        moves: Vec<Move>,
    },
    ClusterEnd { opened: Vec<usize> },
    /// Selection of objects: the cluster of `heavy` is served by `chosen`.
    Choose {
        heavy: usize,
        chosen: Vec<usize>,
        /// The expansion guard replaced the rule's pick.
        #[serde(default)]
        overruled: bool,
        moves: Vec<Move>,
    },
}

impl TraceEvent {
    pub fn moves(&self) -> &[Move] {
        match self {
            TraceEvent::Merge { moves, .. }
            | TraceEvent::Cluster { moves, .. }
            | TraceEvent::Select { moves, .. }
            | TraceEvent::Choose { moves, .. } => moves,
            _ => &[],
        }
    }
}

/// Ordered event log of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    /// One JSON record per line.
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for ev in &self.events {
            out.push_str(&serde_json::to_string(ev).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_ndjson(text: &str) -> Result<Self> {
        let events = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Trace { events })
    }

    /// Replays every event from scratch and collects all invariant violations.
    pub fn replay(&self) -> ReplayReport {
        let mut r = Replayer::default();
        for ev in &self.events {
            r.apply(ev);
        }
        r.report()
    }
}

/// Counts of what a replay checked and what it found.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub events: usize,
    pub selections: usize,
    pub clusterings: usize,
    pub violations: Vec<String>,
}

impl ReplayReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Incremental checker. Fed events in order, it keeps its own copy of the
/// flow and tests conservation after every move set and the cluster
/// formation lemmas after every clustering and O-addition.
#[derive(Debug, Clone, Default)]
pub struct Replayer {
    limits: Vec<f64>,
    /// Keyed by (point, ball).
    flows: BTreeMap<(usize, usize), f64>,
    outflow: Vec<f64>,
    alpha: f64,
    heavy: BTreeSet<usize>,
    light_y: BTreeMap<usize, f64>,
    yacc: BTreeMap<usize, f64>,
    last_k: Option<u64>,
    opened: usize,
    events: usize,
    selections: usize,
    clusterings: usize,
    violations: Vec<String>,
}

impl Replayer {
    /// Applies one event; returns the violations it introduced.
    pub fn apply(&mut self, ev: &TraceEvent) -> Vec<String> {
        let before = self.violations.len();
        self.events += 1;
        match ev {
            TraceEvent::Init { limits, flows } => {
                self.limits = limits.clone();
                self.outflow = vec![0.0; limits.len()];
                self.flows.clear();
                for &(i, j, v) in flows {
                    *self.flows.entry((j, i)).or_default() += v;
                    self.outflow[i] += v;
                }
                let points: BTreeSet<usize> = self.flows.keys().map(|&(j, _)| j).collect();
                let points: Vec<usize> = points.into_iter().collect();
                let balls: Vec<usize> = (0..limits.len()).collect();
                self.check_conservation(&points, &balls, "initial flow");
            }
            TraceEvent::ClusterStart {
                alpha,
                heavy,
                light,
            } => {
                self.alpha = *alpha;
                self.heavy = heavy.iter().copied().collect();
                self.light_y = light.iter().copied().collect();
                self.yacc = heavy.iter().map(|&h| (h, 0.0)).collect();
                self.last_k = None;
                self.opened = 0;
            }
            TraceEvent::Cluster {
                heavy,
                light,
                moves,
            } => {
                self.clusterings += 1;
                self.apply_moves(moves, &format!("clustering ball {light} into {heavy}"));
                match self.light_y.get(light) {
                    Some(&y) => {
                        if let Some(acc) = self.yacc.get_mut(heavy) {
                            *acc -= y;
                        } else {
                            self.fail(format!("ball {heavy} clusters {light} but is not heavy"));
                        }
                    }
                    None => self.fail(format!("clustered ball {light} was not light")),
                }
            }
            TraceEvent::Select {
                ball,
                k,
                moves,
                ..
            } => {
                self.selections += 1;
                self.opened += 1;
                self.apply_moves(moves, &format!("opening ball {ball}"));
                self.check_selection(*ball, *k, moves);
            }
            TraceEvent::ClusterEnd { .. } => {
                let bound = 5.0
                    * ((1.0 + self.alpha) * self.heavy.len() as f64
                        + self.light_y.values().sum::<f64>());
                if self.opened as f64 > bound + 1e-6 {
                    self.fail(format!(
                        "{} light balls opened, above the bound {bound}",
                        self.opened
                    ));
                }
            }
            TraceEvent::Merge { point, moves, .. } => {
                self.apply_moves(moves, &format!("merge at point {point}"));
            }
            TraceEvent::Choose { heavy, moves, .. } => {
                self.apply_moves(moves, &format!("selection for cluster {heavy}"));
            }
            TraceEvent::Discard { .. } => {}
        }
        self.violations[before..].to_vec()
    }

    pub fn report(&self) -> ReplayReport {
        ReplayReport {
            events: self.events,
            selections: self.selections,
            clusterings: self.clusterings,
            violations: self.violations.clone(),
        }
    }

    fn fail(&mut self, msg: String) {
        self.violations.push(msg);
    }

    fn apply_moves(&mut self, moves: &[Move], what: &str) {
        let mut points = BTreeSet::new();
        let mut balls = BTreeSet::new();
        for mv in moves {
            let have = self.flows.get(&(mv.point, mv.from)).copied().unwrap_or(0.0);
            if mv.amount > have + CHECK_TOL {
                self.fail(format!(
                    "{what}: ball {} moves {} of point {} but sends only {have}",
                    mv.from, mv.amount, mv.point
                ));
            }
            let left = have - mv.amount;
            if left.abs() <= 1e-15 {
                self.flows.remove(&(mv.point, mv.from));
            } else {
                self.flows.insert((mv.point, mv.from), left);
            }
            *self.flows.entry((mv.point, mv.to)).or_default() += mv.amount;
            if mv.from < self.outflow.len() && mv.to < self.outflow.len() {
                self.outflow[mv.from] -= mv.amount;
                self.outflow[mv.to] += mv.amount;
            } else {
                self.fail(format!("{what}: move references unknown ball"));
            }
            points.insert(mv.point);
            balls.insert(mv.to);
        }
        let points: Vec<usize> = points.into_iter().collect();
        let balls: Vec<usize> = balls.into_iter().collect();
        self.check_conservation(&points, &balls, what);
    }

    fn check_conservation(&mut self, points: &[usize], balls: &[usize], what: &str) {
        for &j in points {
            let total: f64 = self
                .flows
                .range((j, 0)..=(j, usize::MAX))
                .map(|(_, v)| v)
                .sum();
            if (total - 1.0).abs() > CHECK_TOL {
                self.fail(format!("{what}: point {j} receives {total}"));
            }
        }
        for &i in balls {
            if self.outflow[i] > self.limits[i] + CHECK_TOL {
                self.fail(format!(
                    "{what}: ball {i} sends {}, limit {}",
                    self.outflow[i], self.limits[i]
                ));
            }
        }
    }

    fn check_selection(&mut self, ball: usize, k: u64, moves: &[Move]) {
        if let Some(prev) = self.last_k {
            if k > prev {
                self.fail(format!("k increased from {prev} to {k} when opening ball {ball}"));
            }
        }
        self.last_k = Some(k);
        if k == 0 {
            self.fail(format!("ball {ball} opened with k = 0"));
            return;
        }
        let mut freed: BTreeMap<usize, f64> = BTreeMap::new();
        for mv in moves {
            if mv.to == ball && self.heavy.contains(&mv.from) {
                *freed.entry(mv.from).or_default() += mv.amount;
            }
        }
        let total: f64 = freed.values().sum();
        let kf = k as f64;
        if total < kf / 5.0 - CHECK_TOL {
            self.fail(format!(
                "opening ball {ball} freed {total} on heavy balls, below k/5 = {}",
                kf / 5.0
            ));
        }
        for (&h, &f) in &freed {
            *self.yacc.get_mut(&h).expect("heavy balls have an accumulation") += f / kf;
        }
        let cap = 1.0 + self.alpha;
        let heavy: Vec<usize> = self.heavy.iter().copied().collect();
        for h in heavy {
            let acc = self.yacc[&h];
            if acc > cap + CHECK_TOL {
                self.fail(format!(
                    "y-accumulation of ball {h} is {acc} after opening ball {ball}, above {cap}"
                ));
            }
            let avail = self.limits[h] - self.outflow[h];
            if avail < acc * kf - CHECK_TOL {
                self.fail(format!(
                    "ball {h} has available capacity {avail} below y-accumulation {acc} x k = {}",
                    acc * kf
                ));
            }
        }
    }
}

/// Records events and, when checking is on, replays each one immediately.
#[derive(Debug, Clone, Default)]
pub struct Tracer {
    pub trace: Trace,
    checker: Option<Replayer>,
}

impl Tracer {
    pub fn new(check: bool) -> Self {
        Tracer {
            trace: Trace::default(),
            checker: check.then(Replayer::default),
        }
    }

    /// Appends an event; a violated invariant aborts the run.
    pub fn record(&mut self, ev: TraceEvent) -> Result<()> {
        if let Some(c) = self.checker.as_mut() {
            let bad = c.apply(&ev);
            if let Some(first) = bad.first() {
                self.trace.events.push(ev);
                return Err(Error::Assertion(format!(
                    "{first} (trace event {})",
                    self.trace.events.len()
                )));
            }
        }
        self.trace.events.push(ev);
        Ok(())
    }
}
