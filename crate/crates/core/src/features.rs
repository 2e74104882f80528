//! Count matrix used for path selection and the prefix-decomposed feature
//! rows the base learners are fitted on.
//!
//! For a selected path with `m` labels the feature row concatenates, for each
//! prefix `s = 1..=m`, the prefix's occurrence count, the mean attribute vector
//! of the prefix's terminal node and (for `s >= 2`) the mean attribute vector
//! of its last edge. The width is `m + q_v + (m - 1)(q_v + q_e)`. Prefixes that
//! never occur contribute a zero count and zero attribute blocks.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dataset, Graph, LabelAlphabet};
use crate::paths::{count_column, prefix_statistics, AnchorSet, LabelledPath, PathOccurrence};

/// Which parts of the feature row reach the base learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AttributeMode {
    /// Counts, node attributes and edge attributes of every prefix.
    Complete,
    /// Only the per-prefix counts.
    Restricted,
}

/// `[p^[1], ..., p^[m]]`, the leading sub-paths of `path`.
pub fn prefixes(path: &LabelledPath) -> Vec<LabelledPath> {
    (1..=path.len())
        .map(|s| LabelledPath::new(path.labels()[..s].to_vec()).expect("prefix is nonempty"))
        .collect()
}

/// Width of a feature row for a path of `m` labels.
pub fn feature_dimension(m: usize, q_v: usize, q_e: usize, mode: AttributeMode) -> usize {
    match mode {
        AttributeMode::Complete => m + q_v + (m.saturating_sub(1)) * (q_v + q_e),
        AttributeMode::Restricted => m,
    }
}

/// Mean node attributes of the `s`-th node over `occs` (zeros when empty).
pub fn averaged_node_attributes(g: &Graph, occs: &[PathOccurrence], s: usize, q_v: usize) -> Result<Vec<f64>> {
    if s == 0 {
        return Err(Error::Usage("prefix positions start at 1".into()));
    }
    let mut sum = vec![0.0; q_v];
    for occ in occs {
        let v = *occ
            .nodes
            .get(s - 1)
            .ok_or_else(|| Error::Usage(format!("occurrence shorter than prefix {s}")))?;
        for (acc, x) in sum.iter_mut().zip(g.node_attributes(v)) {
            *acc += x;
        }
    }
    Ok(mean(sum, occs.len()))
}

/// Mean attributes of the edge between nodes `s - 1` and `s` over `occs`.
pub fn averaged_edge_attributes(g: &Graph, occs: &[PathOccurrence], s: usize, q_e: usize) -> Result<Vec<f64>> {
    if s < 2 {
        return Err(Error::Usage("a prefix of one node has no last edge".into()));
    }
    let mut sum = vec![0.0; q_e];
    for occ in occs {
        if occ.nodes.len() < s {
            return Err(Error::Usage(format!("occurrence shorter than prefix {s}")));
        }
        let attrs = g.edge_attributes(occ.nodes[s - 2], occ.nodes[s - 1])?;
        for (acc, x) in sum.iter_mut().zip(attrs) {
            *acc += x;
        }
    }
    Ok(mean(sum, occs.len()))
}

fn mean(mut sum: Vec<f64>, n: usize) -> Vec<f64> {
    if n > 0 {
        let n = n as f64;
        for x in &mut sum {
            *x /= n;
        }
    }
    sum
}

/// Feature row of one graph for one path.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedFeatureRow {
    pub entries: Vec<f64>,
}

/// Complete feature row of `g` for `path`.
pub fn extended_feature_row(
    g: &Graph,
    anchors: &AnchorSet,
    path: &LabelledPath,
    q_v: usize,
    q_e: usize,
) -> ExtendedFeatureRow {
    ExtendedFeatureRow {
        entries: feature_row(g, anchors, path, q_v, q_e, AttributeMode::Complete),
    }
}

pub fn feature_row(
    g: &Graph,
    anchors: &AnchorSet,
    path: &LabelledPath,
    q_v: usize,
    q_e: usize,
    mode: AttributeMode,
) -> Vec<f64> {
    let stats = prefix_statistics(g, anchors, path, q_v, q_e);
    let mut row = Vec::with_capacity(feature_dimension(path.len(), q_v, q_e, mode));
    for s in stats {
        row.push(s.count as f64);
        if mode == AttributeMode::Complete {
            let n = s.count as usize;
            row.extend(mean(s.node_sum, n));
            row.extend(mean(s.edge_sum, n));
        }
    }
    row
}

/// Feature rows of every graph in `ds` for `path`, in dataset order.
pub fn feature_matrix(
    ds: &Dataset,
    anchors: &[AnchorSet],
    path: &LabelledPath,
    mode: AttributeMode,
) -> Vec<Vec<f64>> {
    let (q_v, q_e) = (ds.node_attr_dim(), ds.edge_attr_dim());
    (0..ds.len())
        .into_par_iter()
        .map(|i| feature_row(ds.graph(i), &anchors[i], path, q_v, q_e, mode))
        .collect()
}

/// Graphs x candidate paths occurrence counts.
///
/// Columns are append-only. Each column keeps the row order sorted by count
/// (ties by row index) so split scans need no per-iteration sort.
#[derive(Debug, Clone, Default)]
pub struct CountMatrix {
    rows: usize,
    columns: Vec<LabelledPath>,
    values: Vec<Vec<u64>>,
    sorted_rows: Vec<Vec<u32>>,
    index: HashMap<LabelledPath, usize>,
}

impl CountMatrix {
    pub fn new(rows: usize) -> Self {
        CountMatrix {
            rows,
            ..CountMatrix::default()
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[LabelledPath] {
        &self.columns
    }

    pub fn column(&self, c: usize) -> &[u64] {
        &self.values[c]
    }

    pub(crate) fn sorted_rows(&self, c: usize) -> &[u32] {
        &self.sorted_rows[c]
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.values[col][row]
    }

    pub fn position(&self, path: &LabelledPath) -> Option<usize> {
        self.index.get(path).copied()
    }

    pub fn contains(&self, path: &LabelledPath) -> bool {
        self.index.contains_key(path)
    }

    /// Appends a column; fails if the path is already present or the length is wrong.
    pub fn push_column(&mut self, path: LabelledPath, values: Vec<u64>) -> Result<usize> {
        if values.len() != self.rows {
            return Err(Error::Usage(format!(
                "column has {} rows, matrix has {}",
                values.len(),
                self.rows
            )));
        }
        if self.index.contains_key(&path) {
            return Err(Error::Usage(format!("duplicate column {path}")));
        }
        let mut order: Vec<u32> = (0..self.rows as u32).collect();
        order.sort_by_key(|&r| values[r as usize]);
        let c = self.columns.len();
        self.index.insert(path.clone(), c);
        self.columns.push(path);
        self.values.push(values);
        self.sorted_rows.push(order);
        Ok(c)
    }

    /// Counts and appends every path of `paths` not already present.
    /// Returns the number of columns added.
    pub fn append_paths(
        &mut self,
        ds: &Dataset,
        anchors: &[AnchorSet],
        paths: impl IntoIterator<Item = LabelledPath>,
    ) -> Result<usize> {
        let mut added = 0;
        for path in paths {
            if self.contains(&path) {
                continue;
            }
            let values = count_column(ds, anchors, &path);
            self.push_column(path, values)?;
            added += 1;
        }
        Ok(added)
    }

    /// CSV with a `graph` column and one column per path, headed by label names joined by `-`.
    pub fn write_csv<W: Write>(&self, out: W, alphabet: &LabelAlphabet) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["graph".to_string()];
        header.extend(self.columns.iter().map(|p| p.display_with(alphabet)));
        w.write_record(&header).map_err(csv_error)?;
        for r in 0..self.rows {
            let mut record = vec![r.to_string()];
            record.extend(self.values.iter().map(|col| col[r].to_string()));
            w.write_record(&record).map_err(csv_error)?;
        }
        w.flush().map_err(|e| Error::Usage(format!("csv write failed: {e}")))?;
        Ok(())
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    Error::Usage(format!("csv write failed: {e}"))
}

/// Count matrix of `ds` over `paths`, which must be distinct.
pub fn build_count_matrix(ds: &Dataset, anchors: &[AnchorSet], paths: &[LabelledPath]) -> Result<CountMatrix> {
    if anchors.len() != ds.len() {
        return Err(Error::Usage(format!(
            "{} anchor sets for {} graphs",
            anchors.len(),
            ds.len()
        )));
    }
    let mut matrix = CountMatrix::new(ds.len());
    for path in paths {
        if matrix.contains(path) {
            return Err(Error::Usage(format!("duplicate path {path}")));
        }
        matrix.push_column(path.clone(), count_column(ds, anchors, path))?;
    }
    Ok(matrix)
}
