use std::path::{Path, PathBuf};

use capcover::MetricInstance;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::solve::{report, run_mode, ModeParams, Oracle};

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub name: String,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub geometry: String,
    pub lp_value: Option<f64>,
    pub cost: Option<u64>,
    pub opt: Option<usize>,
    pub max_beta: Option<f64>,
    pub ratio_lp: Option<f64>,
    pub ratio_opt: Option<f64>,
    pub checks_pass: Option<bool>,
    pub time_ms: Option<f64>,
    /// Empty on success, the error text otherwise.
    pub error: String,
}

impl BenchRow {
    fn failed(name: String, error: String) -> Self {
        BenchRow {
            name,
            n: None,
            m: None,
            geometry: String::new(),
            lp_value: None,
            cost: None,
            opt: None,
            max_beta: None,
            ratio_lp: None,
            ratio_opt: None,
            checks_pass: None,
            time_ms: None,
            error,
        }
    }
}

/// Instance files (`*.json`) of a directory, sorted by file name.
pub fn instance_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(CliError::Usage(format!("{} is not a directory", dir.display())));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn bench_one(path: &Path, p: &ModeParams, oracle: Oracle, timings: bool) -> BenchRow {
    let name = path.file_name().map_or_else(String::new, |f| f.to_string_lossy().into_owned());
    let run = MetricInstance::read(path).and_then(|inst| {
        let out = run_mode(&inst, p, true)?;
        report(&inst, p, &out, oracle, timings)
    });
    match run {
        Ok(r) => BenchRow {
            name,
            n: Some(r.instance.n),
            m: Some(r.instance.m),
            geometry: r.instance.geometry.clone(),
            lp_value: Some(r.lp_value),
            cost: Some(r.cost),
            opt: r.opt,
            max_beta: Some(r.max_beta),
            ratio_lp: Some(r.ratio_lp),
            ratio_opt: r.ratio_opt,
            checks_pass: Some(r.all_checks_pass()),
            time_ms: r.timings.as_ref().map(|t| t.lp_ms + t.rounding_ms),
            error: String::new(),
        },
        Err(e) => BenchRow::failed(name, e.to_string()),
    }
}

/// Runs every instance of `dir` in parallel; rows come back in file-name order.
pub fn cmd_bench(dir: &Path, p: &ModeParams, oracle: Oracle, timings: bool) -> CliResult<Vec<BenchRow>> {
    let files = instance_files(dir)?;
    Ok(files.par_iter().map(|f| bench_one(f, p, oracle, timings)).collect())
}

pub const BENCH_HEADER: [&str; 13] = [
    "name",
    "n",
    "m",
    "geometry",
    "lp_value",
    "cost",
    "opt",
    "max_beta",
    "ratio_lp",
    "ratio_opt",
    "checks_pass",
    "time_ms",
    "error",
];

pub fn write_csv(rows: &[BenchRow], out: impl std::io::Write) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(BENCH_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
