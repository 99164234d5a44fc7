//! CSV and markdown output.
//!
//! Every writer renders to a `String` first; the files are written only
//! after all cells are finished, in sorted order, so output is a pure
//! function of the inputs and flags.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use overlook_core::sim::{Aggregate, ExperimentReport, RunTrace};

pub const SUMMARY_HEADER: &str = "dataset,n_percent,reps_used,mean_auc,sd_auc,mean_f1,sd_f1";
pub const RUNS_HEADER: &str = "dataset,n_percent,rep,seed,auc,f1";
pub const TRACE_HEADER: &str = "position,module_id,score,predicted,forced,observed,actual";

/// Results for one dataset at one overlook percentage.
#[derive(Debug, Clone)]
pub struct Cell {
    pub dataset: String,
    /// As given on the command line, e.g. `80`.
    pub n_percent: f64,
    pub report: ExperimentReport,
}

impl Cell {
    pub fn aggregate(&self) -> Option<&Aggregate> {
        self.report.aggregate.as_ref()
    }
}

/// Sorts by (dataset, n_percent); rows within a cell are already ordered
/// by repetition.
pub fn sort_cells(cells: &mut [Cell]) {
    cells.sort_by(|a, b| a.dataset.cmp(&b.dataset).then(a.n_percent.total_cmp(&b.n_percent)));
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn summary_csv(cells: &[Cell]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for cell in cells {
        let Some(a) = cell.aggregate() else { continue };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_field(&cell.dataset),
            format_number(cell.n_percent),
            a.reps_used,
            format_number(a.mean_auc),
            format_number(a.sd_auc),
            format_number(a.mean_f1),
            format_number(a.sd_f1),
        );
    }
    out
}

pub fn runs_csv(cells: &[Cell]) -> String {
    let mut out = String::from(RUNS_HEADER);
    out.push('\n');
    for cell in cells {
        for row in &cell.report.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_field(&cell.dataset),
                format_number(cell.n_percent),
                row.rep,
                row.seed,
                format_number(row.auc),
                format_number(row.f1),
            );
        }
    }
    out
}

fn probability_label(n_percent: f64) -> String {
    if n_percent == 0.0 {
        "0 (baseline)".to_string()
    } else {
        format_number(n_percent)
    }
}

/// Markdown table of mean AUC and F1 per dataset and overlook probability.
pub fn table_md(cells: &[Cell]) -> String {
    let mut out = String::from("| Software | Probability of overlooking (%) | AUC | F1 score |\n");
    out.push_str("|---|---|---|---|\n");
    for cell in cells {
        let Some(a) = cell.aggregate() else { continue };
        let _ = writeln!(
            out,
            "| {} | {} | {:.2} | {:.2} |",
            cell.dataset,
            probability_label(cell.n_percent),
            a.mean_auc,
            a.mean_f1
        );
    }
    out
}

pub fn trace_csv(trace: &RunTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for o in &trace.outcomes {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            o.position,
            csv_field(&o.module_id),
            format_number(o.score),
            o.predicted_defective,
            o.forced,
            o.observed_defective,
            o.actual_defective
        );
    }
    out
}

pub fn trace_file_name(dataset: &str, n_percent: f64, rep: usize) -> String {
    let safe: String =
        dataset.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect();
    format!("trace_{safe}_{}_{rep}.csv", format_number(n_percent))
}

/// Writes `summary.csv`, `runs.csv` and `table.md` into `out_dir`.
pub fn emit_summary(out_dir: &Path, cells: &[Cell]) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let files = [("summary.csv", summary_csv(cells)), ("runs.csv", runs_csv(cells)), ("table.md", table_md(cells))];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = out_dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

pub fn emit_trace(out_dir: &Path, n_percent: f64, rep: usize, trace: &RunTrace) -> io::Result<PathBuf> {
    fs::create_dir_all(out_dir)?;
    let path = out_dir.join(trace_file_name(&trace.dataset, n_percent, rep));
    fs::write(&path, trace_csv(trace))?;
    Ok(path)
}
