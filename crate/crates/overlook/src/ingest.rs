//! Reading and writing PROMISE-style defect CSV files.
//!
//! The first row is a header. Metric and label columns are located by name,
//! so column order and extra columns do not matter. A header name that
//! repeats gets a `.1`, `.2`, ... suffix on its later occurrences; this is
//! how the second `name` column of the PROMISE files becomes `name.1`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use overlook_core::dataset::{MetricSchema, ModuleRecord, ProjectDataset};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("input has no header row")]
    MissingHeader,

    #[error("header has no column `{0}`")]
    MissingColumn(String),

    #[error("line {line}: expected {expected} fields, found {found}")]
    FieldCount { line: u64, expected: usize, found: usize },

    #[error("line {line}: metric `{column}` has non-numeric value `{value}`")]
    BadMetric { line: u64, column: String, value: String },

    #[error("line {line}: bug count `{value}` is not a non-negative integer")]
    BadBugCount { line: u64, value: String },

    #[error(transparent)]
    Dataset(#[from] overlook_core::Error),
}

/// Header names with repeats disambiguated as `name`, `name.1`, ...
fn disambiguate(header: &csv::StringRecord) -> Vec<String> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    header
        .iter()
        .map(|h| {
            let h = h.trim().to_string();
            let count = seen.entry(h.clone()).or_insert(0);
            let name = if *count == 0 { h.clone() } else { format!("{h}.{count}") };
            *count += 1;
            name
        })
        .collect()
}

fn parse_bug_count(cell: &str) -> Option<u32> {
    let cell = cell.trim();
    if let Ok(v) = cell.parse::<u32>() {
        return Some(v);
    }
    // Some exports write counts as `2.0`.
    let v: f64 = cell.parse().ok()?;
    (v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64).then_some(v as u32)
}

/// Parses one project version.
///
/// The record id comes from the last schema id column other than `version`
/// present in the header; without one, ids are `row-<index>`. The dataset version is read
/// from a `version` column when there is one.
pub fn parse_defect_csv<R: Read>(input: R, schema: &MetricSchema, name: &str) -> Result<ProjectDataset, IngestError> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(input);
    let mut rows = reader.records();
    let header = match rows.next() {
        Some(h) => disambiguate(&h?),
        None => return Err(IngestError::MissingHeader),
    };
    let index_of = |col: &str| header.iter().position(|h| h == col);

    let metric_idx = schema
        .metric_names()
        .iter()
        .map(|m| index_of(m).ok_or_else(|| IngestError::MissingColumn(m.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let label_idx =
        index_of(schema.label_column()).ok_or_else(|| IngestError::MissingColumn(schema.label_column().into()))?;
    let id_idx = schema.id_columns().iter().rev().filter(|c| *c != "version").find_map(|c| index_of(c));
    let version_idx = index_of("version");

    let mut records = Vec::new();
    let mut version = String::new();
    for (i, row) in rows.enumerate() {
        let row = row?;
        let line = row.position().map_or(i as u64 + 2, |p| p.line());
        if row.len() != header.len() {
            return Err(IngestError::FieldCount { line, expected: header.len(), found: row.len() });
        }
        let mut features = Vec::with_capacity(metric_idx.len());
        for (&j, metric) in metric_idx.iter().zip(schema.metric_names()) {
            let cell = &row[j];
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => features.push(v),
                _ => return Err(IngestError::BadMetric { line, column: metric.clone(), value: cell.into() }),
            }
        }
        let bug_count = parse_bug_count(&row[label_idx])
            .ok_or_else(|| IngestError::BadBugCount { line, value: row[label_idx].into() })?;
        let id = match id_idx {
            Some(j) => row[j].to_string(),
            None => format!("row-{i}"),
        };
        if i == 0 {
            if let Some(j) = version_idx {
                version = row[j].to_string();
            }
        }
        records.push(ModuleRecord::new(id, features, bug_count));
    }
    Ok(ProjectDataset::new(name, version, schema.clone(), records)?)
}

pub fn load_dataset(path: &Path, schema: &MetricSchema, name: &str) -> Result<ProjectDataset, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
    parse_defect_csv(std::io::BufReader::new(file), schema, name)
}

/// Serializes a dataset in the layout [`parse_defect_csv`] reads back.
///
/// Id columns named `name` and `version` carry the dataset name and version;
/// the last id column carries the record id.
pub fn write_defect_csv(ds: &ProjectDataset) -> String {
    let schema = ds.schema();
    let ids: Vec<&str> = if schema.id_columns().is_empty() {
        vec!["name"]
    } else {
        schema.id_columns().iter().map(String::as_str).collect()
    };
    let mut out = String::new();
    let header: Vec<&str> = ids
        .iter()
        .copied()
        .chain(schema.metric_names().iter().map(String::as_str))
        .chain(std::iter::once(schema.label_column()))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in ds.records() {
        for (k, col) in ids.iter().enumerate() {
            let cell = if k + 1 == ids.len() {
                r.id.as_str()
            } else if *col == "version" {
                ds.version.as_str()
            } else if *col == "name" {
                ds.name.as_str()
            } else {
                ""
            };
            out.push_str(cell);
            out.push(',');
        }
        for v in &r.features {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{}", r.bug_count);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_schema() -> MetricSchema {
        MetricSchema::new(vec!["loc".into(), "cbo".into()], "bug", vec!["name".into()]).unwrap()
    }

    #[test]
    fn labels_from_bug_cells() {
        let ds = parse_defect_csv("name,loc,cbo,bug\nA,250,3,3\nB,537,1,0\n".as_bytes(), &small_schema(), "p").unwrap();
        assert_eq!(ds.len(), 2);
        assert!(ds.records()[0].actual_defective());
        assert!(!ds.records()[1].actual_defective());
        assert_eq!(ds.records()[0].features, vec![250.0, 3.0]);
        assert_eq!(ds.records()[1].id, "B");
    }

    #[test]
    fn promise_layout_with_repeated_name_header() {
        let metrics = overlook_core::dataset::PROMISE_CK_METRICS.join(",");
        let values: Vec<String> = (1..=20).map(|i| i.to_string()).collect();
        let text = format!(
            "name,version,name,{metrics},bug\nant,1.7,org.apache.A,{v},2\nant,1.7,org.apache.B,{v},0\n",
            v = values.join(",")
        );
        let ds = parse_defect_csv(text.as_bytes(), &MetricSchema::promise_ck(), "ant").unwrap();
        assert_eq!(ds.version, "1.7");
        assert_eq!(ds.records()[0].id, "org.apache.A");
        assert_eq!(ds.records()[0].features[19], 20.0);
        assert_eq!(ds.records()[0].bug_count, 2);
    }

    #[test]
    fn version_column_is_not_an_id() {
        let schema = MetricSchema::new(vec!["loc".into()], "bug", vec!["name".into(), "version".into()]).unwrap();
        let ds = parse_defect_csv("name,version,loc,bug\nA,2.0,1,0\nB,2.0,2,1\n".as_bytes(), &schema, "p").unwrap();
        assert_eq!(ds.records()[1].id, "B");
        assert_eq!(ds.version, "2.0");
    }

    #[test]
    fn missing_id_column_synthesizes_ids() {
        let schema = MetricSchema::new(vec!["loc".into()], "bug", vec!["name".into()]).unwrap();
        let ds = parse_defect_csv("loc,bug\n1,0\n2,1\n".as_bytes(), &schema, "p").unwrap();
        assert_eq!(ds.records()[1].id, "row-1");
    }

    #[test]
    fn short_row_names_its_line() {
        let metrics = overlook_core::dataset::PROMISE_CK_METRICS.join(",");
        let full: Vec<String> = (0..20).map(|i| i.to_string()).collect();
        let text =
            format!("name,version,name,{metrics},bug\na,1,x,{},0\na,1,y,{},1\n", full.join(","), full[..19].join(","));
        match parse_defect_csv(text.as_bytes(), &MetricSchema::promise_ck(), "p") {
            Err(IngestError::FieldCount { line: 3, expected: 24, found: 23 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn error_cases() {
        let s = small_schema();
        assert!(matches!(
            parse_defect_csv("name,loc,bug\nA,1,0\n".as_bytes(), &s, "p"),
            Err(IngestError::MissingColumn(c)) if c == "cbo"
        ));
        assert!(matches!(
            parse_defect_csv("name,loc,cbo,bug\nA,1,x,0\n".as_bytes(), &s, "p"),
            Err(IngestError::BadMetric { line: 2, .. })
        ));
        assert!(matches!(
            parse_defect_csv("name,loc,cbo,bug\nA,1,2,-1\n".as_bytes(), &s, "p"),
            Err(IngestError::BadBugCount { line: 2, .. })
        ));
        assert!(matches!(
            parse_defect_csv("name,loc,cbo,bug\nA,1,2,1.5\n".as_bytes(), &s, "p"),
            Err(IngestError::BadBugCount { .. })
        ));
        assert!(matches!(
            parse_defect_csv("name,loc,cbo,bug\nA,NaN,2,1\n".as_bytes(), &s, "p"),
            Err(IngestError::BadMetric { .. })
        ));
        assert!(matches!(parse_defect_csv("".as_bytes(), &s, "p"), Err(IngestError::MissingHeader)));
        assert!(matches!(parse_defect_csv("name,loc,cbo,bug\n".as_bytes(), &s, "p"), Err(IngestError::Dataset(_))));
    }

    #[test]
    fn float_bug_counts_accepted() {
        let ds = parse_defect_csv("name,loc,cbo,bug\nA,1,2,2.0\n".as_bytes(), &small_schema(), "p").unwrap();
        assert_eq!(ds.records()[0].bug_count, 2);
    }
}
