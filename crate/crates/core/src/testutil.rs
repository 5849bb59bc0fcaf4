//! Hand-built instances and solutions for unit tests.

use crate::instance::{Ball, MetricInstance};
use crate::relax::{FractionalSolution, Flow};

/// Points and ball centers on the real line; balls are `(center, radius, capacity)`.
pub(crate) fn line(points: &[f64], balls: &[(f64, f64, u64)]) -> MetricInstance {
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

/// A solution with the given openings and `(ball, point, flow)` entries.
pub(crate) fn frac(inst: &MetricInstance, y: &[f64], flows: &[(usize, usize, f64)]) -> FractionalSolution {
    let mut x = Flow::new(inst.n_balls(), inst.n_points());
    for &(i, j, v) in flows {
        x.set(i, j, v);
    }
    FractionalSolution {
        x,
        y: y.to_vec(),
        stage_slack: vec![1.0; inst.n_balls()],
        lp_value: y.iter().sum(),
        soft: false,
    }
}
