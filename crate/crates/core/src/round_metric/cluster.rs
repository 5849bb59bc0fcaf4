use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{assertion, Result};
use crate::instance::MetricInstance;
use crate::relax::FractionalSolution;

use super::preprocess::{absorb, is_light};
use super::trace::{Move, SelectCase, Trace, TraceEvent, Tracer};
use super::{Intersection, RoundingParams};

/// A light ball opened during cluster formation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Opened {
    pub ball: usize,
    pub k: u64,
    pub case: SelectCase,
}

/// Mutable state of the main rounding step.
#[derive(Debug, Clone)]
pub struct RoundingState {
    pub frac: FractionalSolution,
    /// Heavy balls as they entered cluster formation.
    pub heavy: BTreeSet<usize>,
    pub light: BTreeSet<usize>,
    pub lambda: BTreeSet<usize>,
    /// Opened light balls in the order they were opened.
    pub opened: Vec<Opened>,
    /// Members of each cluster keyed by its heavy ball, which is listed first.
    pub clusters: BTreeMap<usize, Vec<usize>>,
    /// Light balls left with no flow and dropped.
    pub discarded: Vec<usize>,
    pub yacc: BTreeMap<usize, f64>,
    pub params: RoundingParams,
    pub tracer: Tracer,
}

impl RoundingState {
    pub fn avail(&self, inst: &MetricInstance, i: usize) -> f64 {
        inst.balls[i].capacity as f64 - self.frac.x.outflow(i)
    }

    pub fn trace(&self) -> &Trace {
        &self.tracer.trace
    }

    fn is_opened(&self, i: usize) -> bool {
        self.opened.iter().any(|o| o.ball == i)
    }

    fn intersects(&self, inst: &MetricInstance, h: usize, t: usize) -> bool {
        let slack = match self.params.intersection {
            Intersection::Unexpanded => 1.0,
            Intersection::Expanded => self.frac.stage_slack[h],
        };
        inst.center_center(h, t)
            <= slack * inst.balls[h].radius + inst.balls[t].radius + self.params.tol
    }

    fn move_part(&mut self, from: usize, to: usize, point: usize, amount: f64, moves: &mut Vec<Move>) {
        let have = self.frac.x.get(from, point);
        let amount = if amount >= have - 1e-15 {
            self.frac.x.shift(from, to, point)
        } else {
            self.frac.x.add(from, point, -amount);
            self.frac.x.add(to, point, amount);
            amount
        };
        if amount > 0.0 {
            moves.push(Move {
                from,
                to,
                point,
                amount,
            });
        }
    }

    /// Servers of `point` other than opened balls, in tie-break order.
    fn unopened_servers(&self, order: &[usize], point: usize) -> Vec<usize> {
        order
            .iter()
            .copied()
            .filter(|&s| self.frac.x.serves(s, point) && !self.is_opened(s))
            .collect()
    }

    /// Flow `point` receives from unopened balls.
    fn unopened_inflow(&self, point: usize) -> f64 {
        self.frac
            .x
            .servers(point)
            .filter(|&(s, _)| !self.is_opened(s))
            .map(|(_, v)| v)
            .sum()
    }
}

/// Runs cluster formation on a preprocessed solution, with a fresh trace.
pub fn cluster_formation(
    inst: &MetricInstance,
    frac: &FractionalSolution,
    params: &RoundingParams,
) -> Result<RoundingState> {
    params.validate()?;
    let mut tracer = Tracer::new(params.check_invariants);
    tracer.record(super::preprocess::init_event(inst, frac))?;
    form_clusters(inst, frac.clone(), params, tracer)
}

pub(crate) fn form_clusters(
    inst: &MetricInstance,
    frac: FractionalSolution,
    params: &RoundingParams,
    tracer: Tracer,
) -> Result<RoundingState> {
    let (alpha, tol) = (params.alpha, params.tol);
    let mut heavy = BTreeSet::new();
    let mut light = BTreeSet::new();
    for (i, &y) in frac.y.iter().enumerate() {
        if y == 1.0 {
            heavy.insert(i);
        } else if is_light(y, alpha, tol) {
            light.insert(i);
        } else if y != 0.0 {
            return Err(assertion(format!(
                "ball {i} enters cluster formation with y = {y}, neither heavy nor light"
            )));
        }
    }
    let mut st = RoundingState {
        frac,
        clusters: heavy.iter().map(|&h| (h, vec![h])).collect(),
        yacc: heavy.iter().map(|&h| (h, 0.0)).collect(),
        lambda: light.clone(),
        heavy,
        light,
        opened: Vec::new(),
        discarded: Vec::new(),
        params: *params,
        tracer,
    };
    st.tracer.record(TraceEvent::ClusterStart {
        alpha,
        heavy: st.heavy.iter().copied().collect(),
        light: st.light.iter().map(|&i| (i, st.frac.y[i])).collect(),
    })?;
    let order = inst.tie_break_order();

    while !st.lambda.is_empty() {
        cluster_pairs(inst, &mut st)?;
        if st.lambda.is_empty() {
            break;
        }
        let empty: Vec<usize> = st
            .lambda
            .iter()
            .copied()
            .filter(|&t| st.frac.x.served(t).next().is_none())
            .collect();
        for t in empty {
            st.lambda.remove(&t);
            st.frac.y[t] = 0.0;
            st.discarded.push(t);
            st.tracer.record(TraceEvent::Discard { ball: t })?;
        }
        if st.lambda.is_empty() {
            break;
        }
        open_next(inst, &mut st, &order)?;
    }

    let opened: Vec<usize> = st.opened.iter().map(|o| o.ball).collect();
    st.tracer.record(TraceEvent::ClusterEnd {
        opened: opened.clone(),
    })?;
    for t in opened {
        st.frac.y[t] = 1.0;
        st.clusters.insert(t, vec![t]);
    }
    Ok(st)
}

/// Step (a): heavy balls absorb intersecting light balls while capacity allows.
fn cluster_pairs(inst: &MetricInstance, st: &mut RoundingState) -> Result<()> {
    loop {
        let mut found = None;
        'scan: for &h in &st.heavy {
            let avail = st.avail(inst, h);
            for &t in &st.lambda {
                if st.intersects(inst, h, t) && avail >= st.frac.x.outflow(t) - st.params.tol {
                    found = Some((h, t));
                    break 'scan;
                }
            }
        }
        let Some((h, t)) = found else {
            return Ok(());
        };
        let mut moves = Vec::new();
        absorb(&mut st.frac, t, h, &mut moves);
        st.lambda.remove(&t);
        st.clusters.get_mut(&h).expect("heavy balls own a cluster").push(t);
        *st.yacc.get_mut(&h).expect("heavy balls have an accumulation") -= st.frac.y[t];
        st.tracer.record(TraceEvent::Cluster {
            heavy: h,
            light: t,
            moves,
        })?;
    }
}

/// Steps (b) and (c): opens the light ball with the largest k and pulls flow to it.
fn open_next(inst: &MetricInstance, st: &mut RoundingState, order: &[usize]) -> Result<()> {
    let k_of = |st: &RoundingState, j: usize| {
        inst.balls[j]
            .capacity
            .min(st.frac.x.served(j).count() as u64)
    };
    let t = st
        .lambda
        .iter()
        .copied()
        .max_by(|&a, &b| k_of(st, a).cmp(&k_of(st, b)).then(inst.tie_break(b, a)))
        .expect("lambda is non-empty");
    let served: Vec<usize> = st.frac.x.served(t).map(|(j, _)| j).collect();
    let cap = inst.balls[t].capacity;
    let k = k_of(st, t);
    st.lambda.remove(&t);
    let case = if served.len() as u64 <= cap {
        SelectCase::AllServed
    } else if cap > 1 {
        SelectCase::Partial
    } else {
        SelectCase::UnitCapacity
    };
    st.opened.push(Opened { ball: t, k, case });

    let mut moves = Vec::new();
    match case {
        SelectCase::AllServed => {
            for &p in &served {
                for s in st.unopened_servers(order, p) {
                    st.move_part(s, t, p, f64::INFINITY, &mut moves);
                }
            }
        }
        SelectCase::Partial => {
            for &p in &served {
                if st.unopened_inflow(p) > st.avail(inst, t) + st.params.tol {
                    break;
                }
                for s in st.unopened_servers(order, p) {
                    st.move_part(s, t, p, f64::INFINITY, &mut moves);
                }
            }
        }
        SelectCase::UnitCapacity => {
            let p = served[0];
            let from_lambda: Vec<usize> = st
                .unopened_servers(order, p)
                .into_iter()
                .filter(|s| st.lambda.contains(s))
                .collect();
            for s in from_lambda {
                st.move_part(s, t, p, f64::INFINITY, &mut moves);
            }
            let f: f64 = st
                .frac
                .x
                .servers(p)
                .filter(|&(s, _)| st.is_opened(s))
                .map(|(_, v)| v)
                .sum();
            let mut want = st.avail(inst, t).min(1.0 - f).max(0.0);
            let donors: Vec<usize> = order
                .iter()
                .copied()
                .filter(|h| st.heavy.contains(h) && st.frac.x.serves(*h, p))
                .collect();
            for h in donors {
                if want <= 0.0 {
                    break;
                }
                let take = want.min(st.frac.x.get(h, p));
                st.move_part(h, t, p, take, &mut moves);
                want -= take;
            }
        }
    }

    let mut freed: BTreeMap<usize, f64> = BTreeMap::new();
    for mv in &moves {
        if st.heavy.contains(&mv.from) {
            *freed.entry(mv.from).or_default() += mv.amount;
        }
    }
    for (h, f) in freed {
        *st.yacc.get_mut(&h).expect("heavy balls have an accumulation") += f / k as f64;
    }
    st.tracer.record(TraceEvent::Select {
        ball: t,
        k,
        case,
        moves,
    })
}
