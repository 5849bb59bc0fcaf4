use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Ball, Geometry, MetricInstance};
use crate::solution::RoundedSolution;

use super::random::dijkstra;

/// Capacity of every gadget ball.
pub const GADGET_CAPACITY: u64 = 3;

/// A 3DM-3 instance plus the expansion constant `c = c_num / c_den` of the reduction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetSpec3DM {
    pub n: usize,
    /// `(x, y, z)` with each coordinate in `0..n`.
    pub triples: Vec<(usize, usize, usize)>,
    pub c_num: u64,
    pub c_den: u64,
}

impl GadgetSpec3DM {
    pub fn new(n: usize, triples: Vec<(usize, usize, usize)>, c: u64) -> Self {
        GadgetSpec3DM {
            n,
            triples,
            c_num: c,
            c_den: 1,
        }
    }

    pub fn c(&self) -> f64 {
        self.c_num as f64 / self.c_den as f64
    }

    /// Small clusters per half chain: `ceil(c (c + 1) / 2) + 1`.
    pub fn p(&self) -> usize {
        let (a, b) = (self.c_num as u128, self.c_den as u128);
        let num = a * (a + b);
        let den = 2 * b * b;
        num.div_ceil(den) as usize + 1
    }

    /// Balls per element gadget, `4p + 1`.
    pub fn balls_per_element(&self) -> usize {
        4 * self.p() + 1
    }

    /// Total element balls, `3N (4p + 1)`.
    pub fn element_balls(&self) -> usize {
        3 * self.n * self.balls_per_element()
    }

    pub fn points_per_element(&self) -> usize {
        3 * self.balls_per_element() + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.c_den == 0 || self.c_num < self.c_den {
            return Err(Error::InvalidParams(
                "need n >= 1 and c >= 1 with a nonzero denominator".into(),
            ));
        }
        let mut count = vec![0usize; 3 * self.n];
        for &(x, y, z) in &self.triples {
            if x >= self.n || y >= self.n || z >= self.n {
                return Err(Error::InvalidParams(format!("triple ({x}, {y}, {z}) out of range")));
            }
            count[x] += 1;
            count[self.n + y] += 1;
            count[2 * self.n + z] += 1;
        }
        if let Some(w) = count.iter().position(|&k| !(1..=3).contains(&k)) {
            return Err(Error::InvalidParams(format!(
                "element {w} lies in {} triples, expected 1 to 3",
                count[w]
            )));
        }
        Ok(())
    }

    /// Index of element `w` of side `s` (0 = X, 1 = Y, 2 = Z).
    fn element(&self, s: usize, w: usize) -> usize {
        s * self.n + w
    }
}

/// The reduction instance with id bookkeeping.
#[derive(Debug, Clone)]
pub struct Gadget {
    pub spec: GadgetSpec3DM,
    pub instance: MetricInstance,
    /// Ideal points per element, in assignment order.
    pub ideal: Vec<[usize; 3]>,
    /// Points each triple ball reaches, one per coordinate.
    pub triple_points: Vec<[usize; 3]>,
}

/// Builds the instance. Elements come X, Y, Z; each element gadget is a row
/// of `4p + 1` clusters (large ones at positions `p` and `3p`) in which
/// consecutive clusters share a vertex. Points are numbered per gadget as
/// the shared vertices `v_0..v_{4p+1}` followed by top and bottom of each
/// cluster; element centers follow the row; triple centers come last.
pub fn gen_3dm_gadget(spec: &GadgetSpec3DM) -> Result<Gadget> {
    spec.validate()?;
    let p = spec.p();
    let k = spec.balls_per_element();
    let ppe = spec.points_per_element();
    let elements = 3 * spec.n;
    let n_points = elements * ppe;
    let n_centers = elements * k + spec.triples.len();
    let total = n_points + n_centers;
    let (small_w, large_w) = (spec.c_den, spec.c_num);

    let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); total];
    let mut link = |a: usize, b: usize, w: u64| {
        adj[a].push((b, w));
        adj[b].push((a, w));
    };
    let mut balls = Vec::with_capacity(n_centers);
    let mut ideal = Vec::with_capacity(elements);
    for e in 0..elements {
        let base = e * ppe;
        let vertex = |i: usize| base + i;
        let top = |i: usize| base + (k + 1) + 2 * i;
        let bottom = |i: usize| base + (k + 1) + 2 * i + 1;
        for i in 0..k {
            let large = i == p || i == 3 * p;
            let w = if large { large_w } else { small_w };
            let center = e * k + i;
            for q in [vertex(i), vertex(i + 1), top(i), bottom(i)] {
                link(n_points + center, q, w);
            }
            balls.push(Ball {
                id: center,
                center,
                radius: w as f64 / spec.c_den as f64,
                capacity: GADGET_CAPACITY,
            });
        }
        ideal.push([bottom(0), bottom(2 * p), bottom(k - 1)]);
    }
    let mut used = vec![0usize; elements];
    let mut triple_points = Vec::with_capacity(spec.triples.len());
    for (t, &(x, y, z)) in spec.triples.iter().enumerate() {
        let center = elements * k + t;
        let mut reach = [0usize; 3];
        for (s, w) in [x, y, z].into_iter().enumerate() {
            let e = spec.element(s, w);
            reach[s] = ideal[e][used[e]];
            used[e] += 1;
            link(n_points + center, reach[s], large_w);
        }
        triple_points.push(reach);
        balls.push(Ball {
            id: center,
            center,
            radius: spec.c(),
            capacity: GADGET_CAPACITY,
        });
    }
    let matrix: Vec<Vec<f64>> = (0..total)
        .map(|s| {
            dijkstra(&adj, s)
                .into_iter()
                .map(|d| d as f64 / spec.c_den as f64)
                .collect()
        })
        .collect();
    let instance = MetricInstance {
        balls,
        geometry: Geometry::Explicit {
            point_names: (0..n_points).map(|j| format!("p{j}")).collect(),
            center_names: (0..n_centers).map(|c| format!("c{c}")).collect(),
            matrix,
        },
    };
    Ok(Gadget {
        spec: spec.clone(),
        instance,
        ideal,
        triple_points,
    })
}

impl Gadget {
    pub fn triple_ball(&self, t: usize) -> usize {
        self.spec.element_balls() + t
    }

    /// All element balls plus the balls of `cover`, with an assignment in
    /// which every ball serves only points inside it. No LP is solved, so
    /// `lp_value` is left at 0.
    pub fn canonical_solution(&self, cover: &[usize]) -> Result<RoundedSolution> {
        let spec = &self.spec;
        let (k, ppe) = (spec.balls_per_element(), spec.points_per_element());
        let elements = 3 * spec.n;
        let mut assignment = vec![usize::MAX; elements * ppe];
        let mut covered = vec![false; elements];
        for &t in cover {
            let &(x, y, z) = spec
                .triples
                .get(t)
                .ok_or_else(|| Error::InvalidParams(format!("no triple {t}")))?;
            for (s, w) in [x, y, z].into_iter().enumerate() {
                assignment[self.triple_points[t][s]] = self.triple_ball(t);
                covered[spec.element(s, w)] = true;
            }
        }
        if let Some(e) = covered.iter().position(|c| !c) {
            return Err(Error::InvalidParams(format!("the triples do not cover element {e}")));
        }
        for e in 0..elements {
            let base = e * ppe;
            let ball = |i: usize| e * k + i;
            let top = |i: usize| base + (k + 1) + 2 * i;
            let bottom = |i: usize| base + (k + 1) + 2 * i + 1;
            // The first cluster whose bottom a triple serves takes both its
            // shared vertices; clusters left of it take their left vertex,
            // clusters right of it their right vertex.
            let b = (0..k)
                .find(|&i| assignment[bottom(i)] != usize::MAX)
                .expect("covered elements have a served ideal point");
            for i in 0..k {
                assignment[top(i)] = ball(i);
                if assignment[bottom(i)] == usize::MAX {
                    assignment[bottom(i)] = ball(i);
                }
                if i <= b {
                    assignment[base + i] = ball(i);
                }
                if i >= b {
                    assignment[base + i + 1] = ball(i);
                }
            }
        }
        let mut selected: Vec<usize> = (0..spec.element_balls()).collect();
        selected.extend(cover.iter().map(|&t| self.triple_ball(t)));
        selected.sort_unstable();
        selected.dedup();
        Ok(RoundedSolution::new(&self.instance, selected, assignment, 0.0, None))
    }
}
