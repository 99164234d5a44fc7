//! Cross-version defect datasets: one record per software module.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// The 20 product metrics of the PROMISE ck-metrics files, in file order.
pub const PROMISE_CK_METRICS: [&str; 20] = [
    "wmc", "dit", "noc", "cbo", "rfc", "lcom", "ca", "ce", "npm", "lcom3", "loc", "dam", "moa", "mfa", "cam", "ic",
    "cbm", "amc", "max_cc", "avg_cc",
];

/// Column layout of a defect dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricSchema {
    metric_names: Vec<String>,
    label_column: String,
    id_columns: Vec<String>,
}

impl MetricSchema {
    pub fn new(metric_names: Vec<String>, label_column: impl Into<String>, id_columns: Vec<String>) -> Result<Self> {
        let label_column = label_column.into();
        if metric_names.is_empty() {
            return Err(Error::InvalidSchema("no metric columns".into()));
        }
        let mut seen = BTreeMap::new();
        for name in &metric_names {
            if name.is_empty() {
                return Err(Error::InvalidSchema("empty metric name".into()));
            }
            if seen.insert(name.as_str(), ()).is_some() {
                return Err(Error::InvalidSchema(format!("duplicate metric `{name}`")));
            }
        }
        if label_column.is_empty() {
            return Err(Error::InvalidSchema("empty label column".into()));
        }
        if seen.contains_key(label_column.as_str()) {
            return Err(Error::InvalidSchema(format!("label column `{label_column}` is also a metric")));
        }
        Ok(Self { metric_names, label_column, id_columns })
    }

    /// The PROMISE ck-metrics layout: `name,version,name,<20 metrics>,bug`.
    ///
    /// The repeated `name` header is addressed as `name.1`, the way CSV
    /// readers usually disambiguate it.
    pub fn promise_ck() -> Self {
        Self {
            metric_names: PROMISE_CK_METRICS.iter().map(|s| s.to_string()).collect(),
            label_column: "bug".into(),
            id_columns: ["name", "version", "name.1"].iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn metric_names(&self) -> &[String] {
        &self.metric_names
    }

    pub fn label_column(&self) -> &str {
        &self.label_column
    }

    pub fn id_columns(&self) -> &[String] {
        &self.id_columns
    }

    pub fn dimension(&self) -> usize {
        self.metric_names.len()
    }
}

/// PROMISE convention: a module is defective iff at least one bug was
/// attributed to it.
#[inline]
pub fn derive_label(bug_count: u32) -> bool {
    bug_count > 0
}

/// One software module.
///
/// The defect label is derived from `bug_count` rather than stored, so it
/// cannot disagree with it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleRecord {
    pub id: String,
    pub features: Vec<f64>,
    pub bug_count: u32,
}

impl ModuleRecord {
    pub fn new(id: impl Into<String>, features: Vec<f64>, bug_count: u32) -> Self {
        Self { id: id.into(), features, bug_count }
    }

    /// Ground truth known after release.
    #[inline]
    pub fn actual_defective(&self) -> bool {
        derive_label(self.bug_count)
    }
}

/// A named, versioned collection of modules sharing one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectDataset {
    pub name: String,
    pub version: String,
    schema: MetricSchema,
    records: Vec<ModuleRecord>,
}

impl ProjectDataset {
    /// Rejects empty datasets and records whose dimension disagrees with the
    /// schema. Duplicate ids are allowed here and reported by
    /// [`validate_dataset`].
    pub fn new(
        name: impl Into<String>,
        version: impl Into<String>,
        schema: MetricSchema,
        records: Vec<ModuleRecord>,
    ) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::InvalidDataset("dataset has no records".into()));
        }
        let d = schema.dimension();
        if let Some((i, r)) = records.iter().enumerate().find(|(_, r)| r.features.len() != d) {
            return Err(Error::InvalidDataset(format!(
                "record {i} (`{}`) has {} features, schema has {d}",
                r.id,
                r.features.len()
            )));
        }
        Ok(Self { name: name.into(), version: version.into(), schema, records })
    }

    pub fn schema(&self) -> &MetricSchema {
        &self.schema
    }

    pub fn records(&self) -> &[ModuleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.schema.dimension()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.records.iter().map(ModuleRecord::actual_defective).collect()
    }
}

/// Module counts in the shape of a dataset table row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetSummary {
    pub module_count: usize,
    pub defective_count: usize,
    pub defective_pct: f64,
}

impl fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} modules, {} defective ({:.1}%)", self.module_count, self.defective_count, self.defective_pct)
    }
}

pub fn summarize(ds: &ProjectDataset) -> DatasetSummary {
    let module_count = ds.len();
    let defective_count = ds.records.iter().filter(|r| r.actual_defective()).count();
    let defective_pct = if module_count == 0 { 0.0 } else { 100.0 * defective_count as f64 / module_count as f64 };
    DatasetSummary { module_count, defective_count, defective_pct }
}

/// A data-quality observation. Findings are informational; none of them
/// stops an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Finding {
    /// `rows` lists every record index carrying `id`.
    DuplicateId {
        id: String,
        rows: Vec<usize>,
    },
    ConstantColumn {
        column: usize,
        name: String,
        value: f64,
    },
    NonFinite {
        row: usize,
        column: usize,
    },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::DuplicateId { id, rows } => write!(f, "id `{id}` appears in rows {rows:?}"),
            Finding::ConstantColumn { column, name, value } => {
                write!(f, "metric column {column} (`{name}`) is constant at {value}")
            }
            Finding::NonFinite { row, column } => write!(f, "non-finite value at row {row}, column {column}"),
        }
    }
}

pub fn validate_dataset(ds: &ProjectDataset) -> Vec<Finding> {
    let mut findings = Vec::new();

    let mut by_id: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in ds.records.iter().enumerate() {
        by_id.entry(r.id.as_str()).or_default().push(i);
    }
    for (id, rows) in by_id {
        if rows.len() > 1 {
            findings.push(Finding::DuplicateId { id: id.to_string(), rows });
        }
    }

    for (col, name) in ds.schema.metric_names().iter().enumerate() {
        let first = ds.records[0].features[col];
        if ds.records.iter().all(|r| r.features[col] == first) {
            findings.push(Finding::ConstantColumn { column: col, name: name.clone(), value: first });
        }
    }

    for (row, r) in ds.records.iter().enumerate() {
        for (column, v) in r.features.iter().enumerate() {
            if !v.is_finite() {
                findings.push(Finding::NonFinite { row, column });
            }
        }
    }
    findings
}
