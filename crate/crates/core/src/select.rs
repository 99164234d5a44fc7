//! Correlation-based feature selection (CFS).
//!
//! A subset `S` of `k` features is scored by
//!
//! ```text
//! merit(S) = k * mean|r_cf| / sqrt(k + k(k-1) * mean|r_ff|)
//! ```
//!
//! where `r_cf` is the correlation of a feature with the class and `r_ff` the
//! correlation between two distinct features of `S`. Correlations are
//! Pearson on the raw metrics (point-biserial against the 0/1 label).
//! Subsets are searched best-first from the empty set.

use alloc::collections::{BTreeSet, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::{Error, Result};

/// Default number of consecutive non-improving expansions before the
/// best-first search gives up.
pub const DEFAULT_STALL_LIMIT: usize = 5;

/// Correlations within this distance of +-1 are reported as exactly +-1, so
/// duplicated columns are recognized as perfectly collinear.
const UNIT_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    /// Set when either input has zero variance; `r` is then 0.
    pub degenerate: bool,
}

struct Centered {
    dev: Vec<f64>,
    ss: f64,
    constant: bool,
}

impl Centered {
    fn new(values: impl ExactSizeIterator<Item = f64> + Clone) -> Self {
        let n = values.len() as f64;
        let mut first = None;
        let mut constant = true;
        let mut sum = 0.0;
        for v in values.clone() {
            match first {
                None => first = Some(v),
                Some(f) if f != v => constant = false,
                _ => {}
            }
            sum += v;
        }
        let mean = sum / n;
        let dev: Vec<f64> = values.map(|v| v - mean).collect();
        let ss = dev.iter().map(|d| d * d).sum();
        Self { dev, ss, constant }
    }

    fn correlation(&self, other: &Centered) -> Correlation {
        if self.constant || other.constant {
            return Correlation { r: 0.0, degenerate: true };
        }
        let sxy: f64 = self.dev.iter().zip(&other.dev).map(|(a, b)| a * b).sum();
        let r = (sxy / libm::sqrt(self.ss * other.ss)).clamp(-1.0, 1.0);
        let r = if 1.0 - r.abs() <= UNIT_SNAP { r.signum() } else { r };
        Correlation { r, degenerate: false }
    }
}

/// Sample Pearson correlation. Zero-variance input yields `r = 0` with the
/// degenerate flag set.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let cx = Centered::new(x.iter().copied());
    let cy = Centered::new(y.iter().copied());
    Ok(cx.correlation(&cy))
}

/// Absolute feature-class and feature-feature correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTables {
    dim: usize,
    class_corr: Vec<f64>,
    pairwise: Vec<f64>,
    excluded: Vec<bool>,
}

impl CorrelationTables {
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn class_corr(&self, j: usize) -> f64 {
        self.class_corr[j]
    }

    pub fn pairwise(&self, i: usize, j: usize) -> f64 {
        self.pairwise[i * self.dim + j]
    }

    /// Zero-variance features; they cannot enter a subset.
    pub fn is_excluded(&self, j: usize) -> bool {
        self.excluded[j]
    }

    pub fn usable_features(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim).filter(|&j| !self.excluded[j])
    }
}

fn check_xy<R: AsRef<[f64]>>(rows: &[R], labels: &[bool]) -> Result<usize> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch { left: rows.len(), right: labels.len() });
    }
    if rows.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: rows.len() });
    }
    if !(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l)) {
        return Err(Error::SingleClass);
    }
    let d = rows[0].as_ref().len();
    for r in rows {
        let r = r.as_ref();
        if r.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: r.len() });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    Ok(d)
}

/// Builds the correlation tables for an `n x d` matrix given row-wise.
pub fn build_correlation_tables<R: AsRef<[f64]>>(rows: &[R], labels: &[bool]) -> Result<CorrelationTables> {
    let d = check_xy(rows, labels)?;
    let class = Centered::new(labels.iter().map(|&l| if l { 1.0 } else { 0.0 }));
    let columns: Vec<Centered> = (0..d).map(|j| Centered::new(rows.iter().map(move |r| r.as_ref()[j]))).collect();

    let excluded: Vec<bool> = columns.iter().map(|c| c.constant).collect();
    let class_corr: Vec<f64> = columns.iter().map(|c| libm::fabs(c.correlation(&class).r)).collect();
    let mut pairwise = alloc::vec![0.0; d * d];
    for i in 0..d {
        pairwise[i * d + i] = 1.0;
        for j in i + 1..d {
            let r = libm::fabs(columns[i].correlation(&columns[j]).r);
            pairwise[i * d + j] = r;
            pairwise[j * d + i] = r;
        }
    }
    Ok(CorrelationTables { dim: d, class_corr, pairwise, excluded })
}

/// CFS merit of `subset`. Order of indices does not matter.
pub fn cfs_merit(subset: &[usize], tables: &CorrelationTables) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut idx = subset.to_vec();
    idx.sort_unstable();
    idx.dedup();
    for &j in &idx {
        if j >= tables.dim {
            return Err(Error::DimensionMismatch { expected: tables.dim, got: j + 1 });
        }
        if tables.excluded[j] {
            return Err(Error::ExcludedFeature(j));
        }
    }
    let k = idx.len() as f64;
    let r_cf = idx.iter().map(|&j| tables.class_corr[j]).sum::<f64>() / k;
    let mut ff_sum = 0.0;
    let mut pairs = 0usize;
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            ff_sum += tables.pairwise(i, j);
            pairs += 1;
        }
    }
    let r_ff = if pairs == 0 { 0.0 } else { ff_sum / pairs as f64 };
    Ok(k * r_cf / libm::sqrt(k + k * (k - 1.0) * r_ff))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSubset {
    /// Sorted, non-empty.
    pub indices: Vec<usize>,
    pub merit: f64,
}

#[derive(Debug)]
struct Node {
    merit: f64,
    indices: Vec<usize>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap order: higher merit first, then lexicographically smaller
    // index lists.
    fn cmp(&self, other: &Self) -> Ordering {
        self.merit.total_cmp(&other.merit).then_with(|| other.indices.cmp(&self.indices))
    }
}

/// Best-first search over the precomputed tables.
///
/// Expands the most meritorious open subset by every single-feature
/// addition, and stops after `stall_limit` consecutive expansions that fail
/// to improve on the best subset seen (or when the open list runs dry).
pub fn best_first_search(tables: &CorrelationTables, stall_limit: usize) -> Result<FeatureSubset> {
    let usable: Vec<usize> = tables.usable_features().collect();
    if usable.is_empty() {
        return Err(Error::NoUsableFeatures);
    }

    let mut open = BinaryHeap::new();
    let mut visited: BTreeSet<Vec<usize>> = BTreeSet::new();
    open.push(Node { merit: 0.0, indices: Vec::new() });
    visited.insert(Vec::new());
    let mut best = Node { merit: 0.0, indices: Vec::new() };
    let mut stalls = 0;

    while let Some(node) = open.pop() {
        let mut improved = false;
        for &f in &usable {
            let Err(pos) = node.indices.binary_search(&f) else { continue };
            let mut child = node.indices.clone();
            child.insert(pos, f);
            if visited.contains(&child) {
                continue;
            }
            let merit = cfs_merit(&child, tables)?;
            visited.insert(child.clone());
            if merit > best.merit {
                best = Node { merit, indices: child.clone() };
                improved = true;
            }
            open.push(Node { merit, indices: child });
        }
        if improved {
            stalls = 0;
        } else {
            stalls += 1;
            if stalls >= stall_limit {
                break;
            }
        }
    }

    if best.indices.is_empty() {
        // Every usable feature is uncorrelated with the class.
        let top =
            usable
                .iter()
                .copied()
                .fold(usable[0], |acc, j| if tables.class_corr[j] > tables.class_corr[acc] { j } else { acc });
        let indices = alloc::vec![top];
        let merit = cfs_merit(&indices, tables)?;
        return Ok(FeatureSubset { indices, merit });
    }
    Ok(FeatureSubset { indices: best.indices, merit: best.merit })
}

/// Runs CFS with best-first search on an `n x d` matrix given row-wise.
pub fn cfs_best_first<R: AsRef<[f64]>>(rows: &[R], labels: &[bool], stall_limit: usize) -> Result<FeatureSubset> {
    let tables = build_correlation_tables(rows, labels)?;
    best_first_search(&tables, stall_limit)
}
