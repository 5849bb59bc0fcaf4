use std::collections::BinaryHeap;
use std::cmp::Reverse;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::feasible_assignment_exists;
use crate::instance::{Ball, MetricInstance, Node};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CapacityMode {
    Uniform { capacity: u64 },
    /// Capacities drawn from `[min, max]` and handed out in radius order.
    Monotone { min: u64, max: u64 },
}

impl CapacityMode {
    fn check(&self) -> Result<()> {
        match *self {
            CapacityMode::Uniform { capacity } if capacity == 0 => {
                Err(Error::InvalidParams("capacity must be positive".into()))
            }
            CapacityMode::Monotone { min, max } if min == 0 || min > max => Err(Error::InvalidParams(
                format!("capacity range [{min}, {max}] is empty or contains 0"),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EuclideanGenParams {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub radius_range: (f64, f64),
    pub capacity: CapacityMode,
    /// Raise all capacities by one until the instance is feasible.
    pub ensure_feasible: bool,
}

impl Default for EuclideanGenParams {
    fn default() -> Self {
        EuclideanGenParams {
            n: 20,
            m: 8,
            d: 2,
            radius_range: (0.1, 0.3),
            capacity: CapacityMode::Monotone { min: 2, max: 6 },
            ensure_feasible: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricGenParams {
    pub n: usize,
    pub m: usize,
    /// Probability of each extra edge beyond a random spanning tree.
    pub edge_prob: f64,
    /// Edge weights are integers in `[1, max_weight]`.
    pub max_weight: u32,
    /// Each ball's radius is its distance to its k-th nearest point, k in this range.
    pub reach: (usize, usize),
    pub capacity: CapacityMode,
    pub ensure_feasible: bool,
}

impl Default for MetricGenParams {
    fn default() -> Self {
        MetricGenParams {
            n: 20,
            m: 8,
            edge_prob: 0.1,
            max_weight: 10,
            reach: (1, 5),
            capacity: CapacityMode::Monotone { min: 2, max: 6 },
            ensure_feasible: true,
        }
    }
}

/// Points and centers uniform in the unit cube.
pub fn gen_random_euclidean(seed: u64, params: &EuclideanGenParams) -> Result<MetricInstance> {
    let &EuclideanGenParams {
        n,
        m,
        d,
        radius_range: (rlo, rhi),
        capacity,
        ensure_feasible,
    } = params;
    if n == 0 || m == 0 || d == 0 {
        return Err(Error::InvalidParams("n, m and d must be positive".into()));
    }
    if !(rlo > 0.0 && rlo <= rhi && rhi.is_finite()) {
        return Err(Error::InvalidParams(format!("bad radius range [{rlo}, {rhi}]")));
    }
    capacity.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cube = |k: usize| -> Vec<Vec<f64>> {
        (0..k).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect()
    };
    let points = cube(n);
    let centers = cube(m);
    let radii: Vec<f64> = (0..m).map(|_| rng.gen_range(rlo..=rhi)).collect();
    let mut inst = MetricInstance::euclidean(d, points, centers, balls_from(&radii));
    finish(&mut inst, &mut rng, capacity, ensure_feasible);
    Ok(inst)
}

/// Shortest-path metric of a random connected graph on points and centers.
pub fn gen_random_metric(seed: u64, params: &MetricGenParams) -> Result<MetricInstance> {
    let MetricGenParams {
        n,
        m,
        edge_prob,
        max_weight,
        reach: (klo, khi),
        capacity,
        ensure_feasible,
    } = *params;
    if n == 0 || m == 0 {
        return Err(Error::InvalidParams("n and m must be positive".into()));
    }
    if !(0.0..=1.0).contains(&edge_prob) || max_weight == 0 || klo == 0 || klo > khi {
        return Err(Error::InvalidParams("bad graph or reach parameters".into()));
    }
    capacity.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n + m;
    let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); total];
    let edge = |a: usize, b: usize, w: u64, adj: &mut Vec<Vec<(usize, u64)>>| {
        adj[a].push((b, w));
        adj[b].push((a, w));
    };
    // Random tree over a random vertex order, then extra edges.
    let mut order: Vec<usize> = (0..total).collect();
    for i in (1..total).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    for k in 1..total {
        let parent = order[rng.gen_range(0..k)];
        let w = rng.gen_range(1..=max_weight as u64);
        edge(order[k], parent, w, &mut adj);
    }
    for a in 0..total {
        for b in a + 1..total {
            if rng.gen_bool(edge_prob) {
                let w = rng.gen_range(1..=max_weight as u64);
                edge(a, b, w, &mut adj);
            }
        }
    }
    let matrix: Vec<Vec<f64>> = (0..total)
        .map(|s| dijkstra(&adj, s).into_iter().map(|v| v as f64).collect())
        .collect();
    let radii: Vec<f64> = (0..m)
        .map(|k| {
            let mut dists: Vec<f64> = (0..n).map(|j| matrix[n + k][j]).collect();
            dists.sort_by(f64::total_cmp);
            let reach = rng.gen_range(klo..=khi).min(n);
            dists[reach - 1]
        })
        .collect();
    let mut inst = MetricInstance::explicit(n, matrix, balls_from(&radii));
    finish(&mut inst, &mut rng, capacity, ensure_feasible);
    Ok(inst)
}

/// Exact single-source distances over integer weights.
pub(crate) fn dijkstra(adj: &[Vec<(usize, u64)>], source: usize) -> Vec<u64> {
    let mut dist = vec![u64::MAX; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0;
    heap.push(Reverse((0u64, source)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    dist
}

fn balls_from(radii: &[f64]) -> Vec<Ball> {
    radii
        .iter()
        .enumerate()
        .map(|(k, &radius)| Ball {
            id: k,
            center: k,
            radius,
            capacity: 1,
        })
        .collect()
}

/// Coverage repair, capacities, and optionally feasibility repair.
fn finish(inst: &mut MetricInstance, rng: &mut ChaCha8Rng, mode: CapacityMode, ensure_feasible: bool) {
    for j in 0..inst.n_points() {
        if (0..inst.n_balls()).any(|i| inst.covers(i, j, 1.0)) {
            continue;
        }
        let (i, d) = (0..inst.n_balls())
            .map(|i| (i, inst.distance(Node::Center(inst.balls[i].center), Node::Point(j)).expect("valid nodes")))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("m is positive");
        inst.balls[i].radius = d;
    }
    match mode {
        CapacityMode::Uniform { capacity } => {
            for b in &mut inst.balls {
                b.capacity = capacity;
            }
        }
        CapacityMode::Monotone { min, max } => {
            let mut caps: Vec<u64> = (0..inst.n_balls()).map(|_| rng.gen_range(min..=max)).collect();
            caps.sort_unstable();
            let mut by_radius: Vec<usize> = (0..inst.n_balls()).collect();
            by_radius.sort_by(|&a, &b| inst.balls[a].radius.total_cmp(&inst.balls[b].radius).then(a.cmp(&b)));
            for (rank, &i) in by_radius.iter().enumerate() {
                inst.balls[i].capacity = caps[rank];
            }
        }
    }
    if ensure_feasible {
        let all: Vec<usize> = (0..inst.n_balls()).collect();
        while !feasible_assignment_exists(inst, &all, 1.0) {
            for b in &mut inst.balls {
                b.capacity += 1;
            }
        }
    }
}
