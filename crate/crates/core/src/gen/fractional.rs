use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::FlowNetwork;
use crate::instance::MetricInstance;
use crate::relax::{Flow, FractionalSolution};

/// A random feasible (not optimal) solution of the covering LP in which a
/// `light_share` fraction of the balls starts with y in `[0.02, y_max]`.
/// Openness is raised geometrically until the points can be routed.
pub fn random_fractional(
    inst: &MetricInstance,
    seed: u64,
    light_share: f64,
    y_max: f64,
) -> Result<FractionalSolution> {
    if !(0.0..=1.0).contains(&light_share) || !(y_max > 0.02 && y_max <= 1.0) {
        return Err(Error::InvalidParams("bad light share or y range".into()));
    }
    let (m, n) = (inst.n_balls(), inst.n_points());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y: Vec<f64> = (0..m)
        .map(|_| {
            if rng.gen_bool(light_share) {
                rng.gen_range(0.02..=y_max)
            } else {
                1.0
            }
        })
        .collect();
    loop {
        let (source, sink) = (m + n, m + n + 1);
        let mut net = FlowNetwork::new(m + n + 2);
        let mut arcs = Vec::new();
        for i in 0..m {
            net.add_edge(source, i, y[i] * inst.balls[i].capacity as f64);
            for j in 0..n {
                if inst.covers(i, j, 1.0) {
                    arcs.push((i, j, net.add_edge(i, m + j, y[i])));
                }
            }
        }
        for j in 0..n {
            net.add_edge(m + j, sink, 1.0);
        }
        if net.max_flow(source, sink) >= n as f64 - 1e-9 {
            let mut x = Flow::new(m, n);
            for (i, j, e) in arcs {
                let v = net.flow_on(e);
                if v > 1e-12 {
                    x.set(i, j, v);
                }
            }
            for j in 0..n {
                let total = x.inflow(j);
                let servers: Vec<(usize, f64)> = x.servers(j).collect();
                for (i, v) in servers {
                    x.set(i, j, v / total);
                }
            }
            // Renormalizing can push a flow a hair above its y.
            for i in 0..m {
                let top = x.served(i).map(|(_, v)| v).fold(0.0, f64::max);
                let load = x.outflow(i) / inst.balls[i].capacity as f64;
                y[i] = y[i].max(top).max(load).min(1.0);
            }
            let lp_value = y.iter().sum();
            return Ok(FractionalSolution {
                x,
                y,
                stage_slack: vec![1.0; m],
                lp_value,
                soft: false,
            });
        }
        if y.iter().all(|&v| v >= 1.0) {
            return Err(Error::Infeasible);
        }
        for v in y.iter_mut() {
            *v = (*v * 1.25 + 0.01).min(1.0);
        }
    }
}
