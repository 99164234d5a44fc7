//! Orchestration of dataset x probability cells.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rayon::prelude::*;

use overlook_core::dataset::{summarize, validate_dataset, MetricSchema, ProjectDataset};
use overlook_core::logistic::decide;
use overlook_core::metrics::{auc, closest_topleft_cutoff, confusion, f1_score};
use overlook_core::sim::{run_repetitions, ScenarioConfig};

use crate::cli::{ExperimentPlan, MetricsArgs};
use crate::ingest::load_dataset;
use crate::report::{emit_summary, emit_trace, sort_cells, table_md, Cell};

/// What an experiment produced, before and after writing.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub cells: Vec<Cell>,
    /// One line per failed dataset or cell.
    pub failures: Vec<String>,
    pub written: Vec<PathBuf>,
}

impl ExperimentOutcome {
    /// True iff every requested cell produced aggregates.
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

fn load_pair(
    name: &str,
    train: &Path,
    test: &Path,
    schema: &MetricSchema,
) -> anyhow::Result<(ProjectDataset, ProjectDataset)> {
    let prior = load_dataset(train, schema, name).with_context(|| format!("dataset `{name}`: learning file"))?;
    let test = load_dataset(test, schema, name).with_context(|| format!("dataset `{name}`: test file"))?;
    for (role, ds) in [("learning", &prior), ("test", &test)] {
        for finding in validate_dataset(ds) {
            eprintln!("warning: {name} {role} {}: {finding}", ds.version);
        }
    }
    Ok((prior, test))
}

/// Runs every cell of `plan` and writes summaries (and traces if asked).
pub fn run_experiment(plan: &ExperimentPlan, schema: &MetricSchema) -> anyhow::Result<ExperimentOutcome> {
    let mut failures = Vec::new();
    let mut loaded = Vec::new();
    for spec in &plan.datasets {
        match load_pair(&spec.name, &spec.train, &spec.test, schema) {
            Ok((prior, test)) => {
                eprintln!(
                    "{}: learning {} ({}), test {} ({})",
                    spec.name,
                    prior.version,
                    summarize(&prior),
                    test.version,
                    summarize(&test)
                );
                loaded.push((spec.name.clone(), prior, test));
            }
            Err(e) => failures.push(format!("{e:#}")),
        }
    }

    let jobs: Vec<(&str, &ProjectDataset, &ProjectDataset, f64, ScenarioConfig)> = loaded
        .iter()
        .flat_map(|(name, prior, test)| {
            plan.probabilities().map(move |(percent, probability)| {
                let cfg = ScenarioConfig { overlook_probability: probability, ..plan.scenario };
                (name.as_str(), prior, test, percent, cfg)
            })
        })
        .collect();

    let results: Vec<(String, f64, Result<overlook_core::sim::ExperimentReport, overlook_core::Error>)> = jobs
        .into_par_iter()
        .map(|(name, prior, test, percent, cfg)| (name.to_string(), percent, run_repetitions(test, Some(prior), &cfg)))
        .collect();

    let mut cells = Vec::new();
    for (dataset, n_percent, result) in results {
        match result {
            Ok(mut report) => {
                report.dataset = dataset.clone();
                for r in &mut report.rows {
                    r.dataset = dataset.clone();
                }
                for rejected in &report.rejected {
                    eprintln!("warning: {dataset} n={n_percent}% rep {} rejected: {}", rejected.rep, rejected.error);
                }
                if report.aggregate.is_none() {
                    failures.push(format!("{dataset} n={n_percent}%: every repetition was rejected"));
                }
                cells.push(Cell { dataset, n_percent, report });
            }
            Err(e) => failures.push(format!("{dataset} n={n_percent}%: {e}")),
        }
    }
    sort_cells(&mut cells);

    let mut written = emit_summary(&plan.out_dir, &cells)
        .with_context(|| format!("writing summaries to {}", plan.out_dir.display()))?;
    if plan.trace {
        for cell in &cells {
            for (row, trace) in cell.report.rows.iter().zip(&cell.report.traces) {
                let mut trace = trace.clone();
                trace.dataset = cell.dataset.clone();
                written.push(
                    emit_trace(&plan.out_dir, cell.n_percent, row.rep, &trace)
                        .with_context(|| format!("writing trace to {}", plan.out_dir.display()))?,
                );
            }
        }
    }
    Ok(ExperimentOutcome { cells, failures, written })
}

/// Prints the markdown table and diagnostics; returns the exit code.
pub fn run_experiment_command(plan: &ExperimentPlan) -> i32 {
    match run_experiment(plan, &MetricSchema::promise_ck()) {
        Ok(outcome) => {
            print!("{}", table_md(&outcome.cells));
            for f in &outcome.failures {
                eprintln!("error: {f}");
            }
            if outcome.success() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn parse_label(cell: &str) -> Option<bool> {
    match cell.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "defective" | "1.0" => Some(true),
        "0" | "false" | "no" | "clean" | "0.0" => Some(false),
        _ => None,
    }
}

/// Scores and labels from a two-column CSV. A first row whose score cell is
/// not numeric is treated as a header.
pub fn read_scores(text: &str) -> anyhow::Result<(Vec<f64>, Vec<bool>)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 1;
        if row.len() != 2 {
            bail!("line {line}: expected 2 fields (score,label), found {}", row.len());
        }
        let score = match row[0].parse::<f64>() {
            Ok(s) if s.is_finite() => s,
            _ if i == 0 => continue,
            _ => bail!("line {line}: score `{}` is not a finite number", &row[0]),
        };
        let label = parse_label(&row[1]).with_context(|| format!("line {line}: label `{}` is not 0/1", &row[1]))?;
        scores.push(score);
        labels.push(label);
    }
    Ok((scores, labels))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreMetrics {
    pub auc: f64,
    pub cutoff: f64,
    pub auto_cutoff: bool,
    pub f1: f64,
}

pub fn score_metrics(scores: &[f64], labels: &[bool], cutoff: Option<f64>) -> anyhow::Result<ScoreMetrics> {
    let auc = auc(scores, labels)?;
    let (cutoff, auto_cutoff) = match cutoff {
        Some(c) => (c, false),
        None => (closest_topleft_cutoff(scores, labels)?.threshold, true),
    };
    let predictions: Vec<bool> = scores.iter().map(|&s| decide(s, cutoff)).collect();
    let f1 = f1_score(&confusion(&predictions, labels)?);
    Ok(ScoreMetrics { auc, cutoff, auto_cutoff, f1 })
}

pub fn run_metrics_command(args: &MetricsArgs) -> i32 {
    let result = std::fs::read_to_string(&args.scores)
        .with_context(|| format!("cannot read {}", args.scores.display()))
        .and_then(|text| read_scores(&text))
        .and_then(|(s, l)| score_metrics(&s, &l, args.cutoff));
    match result {
        Ok(m) => {
            println!("auc,{}", m.auc);
            println!("cutoff,{}{}", m.cutoff, if m.auto_cutoff { " (closest to top-left)" } else { "" });
            println!("f1,{}", m.f1);
            0
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
