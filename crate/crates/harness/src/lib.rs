//! Experiment runner for the femtonet engines.
//!
//! A run expands a config into `(sweep point, seed)` jobs, simulates each job
//! in isolation and collects rows in job order, so the output never depends
//! on how jobs were scheduled.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod multicast;
pub mod oracle;
pub mod output;
pub mod stream;

use std::path::Path;

use femtonet::Exec;

pub use config::{ExperimentConfig, Point, Scenario, Sweep};
pub use error::{HarnessError, Result};
pub use output::{ResultRow, SummaryRow, TraceRecord};

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub traces: Vec<TraceRecord>,
}

/// Truncates every dual solve at `budget` iterations.
pub fn apply_budget(cfg: &mut ExperimentConfig, budget: usize) -> Result<()> {
    if budget == 0 {
        return Err(HarnessError::config("budget must be at least one iteration"));
    }
    cfg.stream.max_iters = budget;
    cfg.validate()
}

/// Runs every sweep point for every seed.
pub fn run(cfg: &ExperimentConfig, exec: Exec) -> Result<Outcome> {
    cfg.validate()?;
    let jobs: Vec<(Point, u64)> =
        cfg.points().into_iter().flat_map(|p| cfg.seeds.iter().map(move |&s| (p, s))).collect();
    let results = exec.map(&jobs, |(point, seed)| -> Result<stream::StreamRun> {
        if cfg.scenario.is_multicast() {
            Ok(stream::StreamRun { rows: multicast::run_point(cfg, point, *seed, exec)?, traces: Vec::new() })
        } else {
            stream::run_point(cfg, point, *seed, exec)
        }
    });
    let mut out = Outcome::default();
    for r in results {
        let r = r?;
        out.rows.extend(r.rows);
        out.traces.extend(r.traces);
    }
    out.summary = output::aggregate(&out.rows);
    Ok(out)
}

/// Writes `results.csv`, `summary.csv` and, for streaming runs, `traces.csv`.
pub fn write_outcome(dir: &Path, cfg: &ExperimentConfig, outcome: &Outcome) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    output::write_results(&dir.join("results.csv"), &outcome.rows)?;
    output::write_summary(&dir.join("summary.csv"), &outcome.summary)?;
    if !cfg.scenario.is_multicast() {
        output::write_traces(&dir.join("traces.csv"), &outcome.traces)?;
    }
    Ok(())
}
