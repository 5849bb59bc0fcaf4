#![allow(dead_code)]

use capcover::instance::{Ball, MetricInstance};
use capcover::lpcore::{LpProblem, Relation};
use proptest::test_runner::{Config, RngSeed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A bounded LP with small integer data, at most 5 variables and 6 rows.
pub fn random_tiny_lp(seed: u64) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=5);
    let rows = rng.gen_range(1..=6);
    let mut lp = LpProblem::new(n);
    lp.objective = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
    lp.bounds = (0..n).map(|_| (0.0, rng.gen_range(1..=4) as f64)).collect();
    for _ in 0..rows {
        let coeffs = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
        let relation = match rng.gen_range(0..3) {
            0 => Relation::Le,
            1 => Relation::Ge,
            _ => Relation::Eq,
        };
        lp.add(coeffs, relation, rng.gen_range(-2..=6) as f64);
    }
    lp
}

/// Points and balls on the line; balls are `(center, radius, capacity)`.
pub fn line(points: &[f64], balls: &[(f64, f64, u64)]) -> MetricInstance {
    MetricInstance::euclidean(
        1,
        points.iter().map(|&p| vec![p]).collect(),
        balls.iter().map(|b| vec![b.0]).collect(),
        balls
            .iter()
            .enumerate()
            .map(|(id, b)| Ball {
                id,
                center: id,
                radius: b.1,
                capacity: b.2,
            })
            .collect(),
    )
}

/// The three hand-checkable covering LPs with their optimal values.
pub fn hand_mmcc_instances() -> Vec<(MetricInstance, f64)> {
    vec![
        // x <= y forces the only ball open.
        (line(&[0.5], &[(0.0, 1.0, 1)]), 1.0),
        // Two unit-capacity balls must carry two units: y1 + y2 >= 2.
        (line(&[0.1, 0.2], &[(0.0, 1.0, 1), (0.0, 1.0, 1)]), 2.0),
        // One ball of capacity 3 holding exactly 3 points.
        (line(&[0.0, 0.4, -0.4], &[(0.0, 1.0, 3)]), 1.0),
    ]
}

/// Property-test settings with a pinned seed, so every run draws the same cases.
pub fn fixed_config(cases: u32) -> Config {
    Config {
        cases,
        failure_persistence: None,
        rng_seed: RngSeed::Fixed(0x5eed),
        ..Config::default()
    }
}
