use std::path::PathBuf;

use capcover::gen::{
    gen_3dm_gadget, gen_random_euclidean, gen_random_metric, CapacityMode, EuclideanGenParams, GadgetSpec3DM,
    MetricGenParams,
};
use capcover::MetricInstance;
use clap::{Args, Subcommand};

use crate::error::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct CapacityArgs {
    /// Give every ball this capacity instead of a monotone range.
    #[arg(long)]
    pub uniform_capacity: Option<u64>,
    #[arg(long, default_value_t = 2)]
    pub cap_min: u64,
    #[arg(long, default_value_t = 6)]
    pub cap_max: u64,
    /// Keep the drawn capacities even if the instance is infeasible.
    #[arg(long)]
    pub allow_infeasible: bool,
}

impl CapacityArgs {
    fn mode(&self) -> CapacityMode {
        match self.uniform_capacity {
            Some(capacity) => CapacityMode::Uniform { capacity },
            None => CapacityMode::Monotone {
                min: self.cap_min,
                max: self.cap_max,
            },
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Points and centers uniform in the unit cube.
    Euclid {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 0.1)]
        radius_min: f64,
        #[arg(long, default_value_t = 0.3)]
        radius_max: f64,
        #[command(flatten)]
        caps: CapacityArgs,
    },
    /// Shortest-path metric of a random weighted graph.
    Metric {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 0.1)]
        edge_prob: f64,
        #[arg(long, default_value_t = 10)]
        max_weight: u32,
        #[arg(long, default_value_t = 1)]
        reach_min: usize,
        #[arg(long, default_value_t = 5)]
        reach_max: usize,
        #[command(flatten)]
        caps: CapacityArgs,
    },
    /// Reduction gadget of a bounded 3-dimensional matching instance.
    #[command(name = "gadget-3dm")]
    Gadget3dm {
        #[arg(long = "N")]
        n: usize,
        #[arg(long, default_value_t = 1)]
        c: u64,
        /// Triples as `a,b,c;a,b,c`; defaults to the matching `(i, i, i)`.
        #[arg(long)]
        triples: Option<String>,
        /// Indices of the triples forming a perfect matching, as `0,1`.
        #[arg(long)]
        cover: Option<String>,
        /// Where to write the canonical solution of the cover.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
}

fn parse_list(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::Usage(format!("not an index list: {text}"))))
        .collect()
}

fn parse_triples(text: &str) -> CliResult<Vec<(usize, usize, usize)>> {
    text.split(';')
        .map(|t| match parse_list(t)?.as_slice() {
            &[a, b, c] => Ok((a, b, c)),
            _ => Err(CliError::Usage(format!("a triple needs three indices: {t}"))),
        })
        .collect()
}

/// The generated instance and, for gadgets, the canonical solution JSON.
pub fn cmd_gen(kind: &GenKind, seed: u64) -> CliResult<(MetricInstance, Option<(PathBuf, String)>)> {
    match kind {
        GenKind::Euclid {
            n,
            m,
            d,
            radius_min,
            radius_max,
            caps,
        } => {
            let p = EuclideanGenParams {
                n: *n,
                m: *m,
                d: *d,
                radius_range: (*radius_min, *radius_max),
                capacity: caps.mode(),
                ensure_feasible: !caps.allow_infeasible,
            };
            Ok((gen_random_euclidean(seed, &p)?, None))
        }
        GenKind::Metric {
            n,
            m,
            edge_prob,
            max_weight,
            reach_min,
            reach_max,
            caps,
        } => {
            let p = MetricGenParams {
                n: *n,
                m: *m,
                edge_prob: *edge_prob,
                max_weight: *max_weight,
                reach: (*reach_min, *reach_max),
                capacity: caps.mode(),
                ensure_feasible: !caps.allow_infeasible,
            };
            Ok((gen_random_metric(seed, &p)?, None))
        }
        GenKind::Gadget3dm {
            n,
            c,
            triples,
            cover,
            solution,
        } => {
            let (triples, cover) = match (triples, cover) {
                (None, None) => ((0..*n).map(|i| (i, i, i)).collect(), (0..*n).collect()),
                (Some(t), Some(c)) => (parse_triples(t)?, parse_list(c)?),
                (Some(t), None) if solution.is_none() => (parse_triples(t)?, Vec::new()),
                _ => {
                    return Err(CliError::Usage(
                        "custom triples need --cover to build a solution".into(),
                    ))
                }
            };
            let g = gen_3dm_gadget(&GadgetSpec3DM::new(*n, triples, *c))?;
            let witness = match solution {
                Some(path) => Some((path.clone(), g.canonical_solution(&cover)?.to_json() + "\n")),
                None => None,
            };
            Ok((g.instance, witness))
        }
    }
}
