//! CSV emission and seed aggregation.

use std::path::Path;

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::Result;

pub const RESULT_HEADER: [&str; 6] = ["scenario", "seed", "sweep", "algorithm", "metric", "value"];
pub const SUMMARY_HEADER: [&str; 7] = ["scenario", "sweep", "algorithm", "metric", "n", "mean", "ci95"];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub seed: u64,
    pub sweep: String,
    pub algorithm: String,
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario: String,
    pub sweep: String,
    pub algorithm: String,
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    pub ci95: f64,
}

/// One dual iteration of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub scenario: String,
    pub seed: u64,
    pub sweep: String,
    pub slot: usize,
    pub iteration: usize,
    pub primal: f64,
    pub duals: Vec<f64>,
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?)
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RESULT_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.seed.to_string(),
            r.sweep.clone(),
            r.algorithm.clone(),
            r.metric.clone(),
            r.value.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.sweep.clone(),
            r.algorithm.clone(),
            r.metric.clone(),
            r.n.to_string(),
            r.mean.to_string(),
            r.ci95.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_traces(path: &Path, rows: &[TraceRecord]) -> Result<()> {
    let mut w = writer(path)?;
    let width = rows.iter().map(|r| r.duals.len()).max().unwrap_or(0);
    let mut header: Vec<String> =
        ["scenario", "seed", "sweep", "slot", "iteration", "primal"].iter().map(|s| s.to_string()).collect();
    header.extend((0..width).map(|i| format!("lambda_{i}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.scenario.clone(),
            r.seed.to_string(),
            r.sweep.clone(),
            r.slot.to_string(),
            r.iteration.to_string(),
            r.primal.to_string(),
        ];
        rec.extend(r.duals.iter().map(f64::to_string));
        rec.resize(header.len(), String::new());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Sample mean and the half-width of its two-sided 95% t interval.
pub fn mean_ci95(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom").inverse_cdf(0.975);
    (mean, t * (var / n as f64).sqrt())
}

/// Groups rows by everything except the seed, in order of first appearance.
pub fn aggregate(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(&str, &str, &str, &str)> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for r in rows {
        let key = (r.scenario.as_str(), r.sweep.as_str(), r.algorithm.as_str(), r.metric.as_str());
        let g = *index.entry(key).or_insert_with(|| {
            keys.push(key);
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(r.value);
    }
    keys.into_iter()
        .zip(groups)
        .map(|((scenario, sweep, algorithm, metric), values)| {
            let (mean, ci95) = mean_ci95(&values);
            SummaryRow {
                scenario: scenario.to_string(),
                sweep: sweep.to_string(),
                algorithm: algorithm.to_string(),
                metric: metric.to_string(),
                n: values.len(),
                mean,
                ci95,
            }
        })
        .collect()
}

/// Looks up the mean of one summary cell.
pub fn summary_mean(rows: &[SummaryRow], sweep: &str, algorithm: &str, metric: &str) -> Option<f64> {
    rows.iter().find(|r| r.sweep == sweep && r.algorithm == algorithm && r.metric == metric).map(|r| r.mean)
}
