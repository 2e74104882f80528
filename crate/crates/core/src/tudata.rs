//! Reader and writer for the TUDataset text layout.
//!
//! A dataset `NAME` lives in one directory:
//!
//! | file | rows | content |
//! |------|------|---------|
//! | `NAME_A.txt` | one per directed edge | `u, v` (1-based global node ids) |
//! | `NAME_graph_indicator.txt` | one per node | 1-based graph id |
//! | `NAME_graph_labels.txt` | one per graph | class value (classification) |
//! | `NAME_graph_attributes.txt` | one per graph | real targets (regression) |
//! | `NAME_node_labels.txt` | one per node | categorical node label (optional) |
//! | `NAME_node_attributes.txt` | one per node | comma-separated reals (optional) |
//! | `NAME_edge_labels.txt` | one per `_A` row | edge label(s) (optional) |
//! | `NAME_edge_attributes.txt` | one per `_A` row | comma-separated reals (optional) |
//!
//! Edge labels and edge attributes are concatenated (labels first) into the
//! edge attribute vector.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{format_value, Dataset, Graph, LabelAlphabet, LabelId, Task};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    pub task: Task,
    /// Column of `_graph_attributes.txt` used as regression target.
    pub target_index: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            task: Task::Classification,
            target_index: 0,
        }
    }
}

/// Original graph-label values mapped to classes 0 and 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassMapping {
    pub negative: String,
    pub positive: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilePresence {
    pub node_labels: bool,
    pub edge_labels: bool,
    pub node_attributes: bool,
    pub edge_attributes: bool,
    pub graph_attributes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub graphs: usize,
    pub mean_nodes: f64,
    pub mean_edges: f64,
    /// Percentage of class 0 and class 1 (classification only).
    pub class_percentages: Option<[f64; 2]>,
    pub q_v: usize,
    pub q_e: usize,
}

/// Structured description of a load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadReport {
    pub name: String,
    pub task: Task,
    pub files: FilePresence,
    pub class_mapping: Option<ClassMapping>,
    pub target_index: Option<usize>,
    pub node_label_columns: usize,
    pub node_attribute_columns: usize,
    pub edge_label_columns: usize,
    pub edge_attribute_columns: usize,
    pub directed_edge_rows: usize,
    pub self_loops_dropped: usize,
    pub summary: DatasetSummary,
}

impl LoadReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("load report serialises")
    }
}

fn file_path(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{name}_{suffix}.txt"))
}

/// Non-blank rows of a file, split on commas and trimmed, with 1-based line numbers.
struct Rows {
    file: String,
    rows: Vec<(usize, Vec<String>)>,
}

impl Rows {
    fn read(path: &Path) -> Result<Rows> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file = path
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut lines: Vec<&str> = text.lines().collect();
        while lines.last().is_some_and(|l| l.trim().is_empty()) {
            lines.pop();
        }
        let mut rows = Vec::with_capacity(lines.len());
        for (i, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                return Err(Error::Parse {
                    file,
                    line: i + 1,
                    message: "blank line inside data".into(),
                });
            }
            let fields = line.split(',').map(|f| f.trim().to_string()).collect();
            rows.push((i + 1, fields));
        }
        Ok(Rows { file, rows })
    }

    fn read_optional(path: &Path) -> Result<Option<Rows>> {
        if path.exists() {
            Rows::read(path).map(Some)
        } else {
            Ok(None)
        }
    }

    fn read_required(path: &Path) -> Result<Rows> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Rows::read(path)
    }

    fn len(&self) -> usize {
        self.rows.len()
    }

    fn error(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            file: self.file.clone(),
            line,
            message: message.into(),
        }
    }

    fn parse<T: std::str::FromStr>(&self, line: usize, token: &str) -> Result<T> {
        token
            .parse()
            .map_err(|_| self.error(line, format!("non-numeric token {token:?}")))
    }

    fn reals(&self) -> Result<Vec<Vec<f64>>> {
        let width = self.rows.first().map_or(0, |(_, f)| f.len());
        self.rows
            .iter()
            .map(|(line, fields)| {
                if fields.len() != width {
                    return Err(self.error(
                        *line,
                        format!("expected {width} columns, found {}", fields.len()),
                    ));
                }
                fields.iter().map(|t| self.parse::<f64>(*line, t)).collect()
            })
            .collect()
    }

    fn first_column(&self) -> Result<Vec<f64>> {
        self.rows
            .iter()
            .map(|(line, fields)| self.parse::<f64>(*line, &fields[0]))
            .collect()
    }

    fn expect_rows(&self, expected: usize, what: &str) -> Result<()> {
        if self.len() != expected {
            return Err(Error::Load(format!(
                "{} has {} rows but the {what} has {expected}",
                self.file,
                self.len()
            )));
        }
        Ok(())
    }
}

fn width(rows: &[Vec<f64>]) -> usize {
    rows.first().map_or(0, Vec::len)
}

/// Loads `<dir>/<name>_*.txt` into a validated dataset.
pub fn load_dataset(dir: &Path, name: &str, options: LoadOptions) -> Result<(Dataset, LoadReport)> {
    let edges = Rows::read_required(&file_path(dir, name, "A"))?;
    let indicator = Rows::read_required(&file_path(dir, name, "graph_indicator"))?;
    let labels_path = file_path(dir, name, "graph_labels");
    let attrs_path = file_path(dir, name, "graph_attributes");
    let graph_labels = match options.task {
        Task::Classification => Some(Rows::read_required(&labels_path)?),
        Task::Regression => None,
    };
    let graph_attrs = match options.task {
        Task::Regression => Some(Rows::read_required(&attrs_path)?),
        Task::Classification => None,
    };
    let node_labels = Rows::read_optional(&file_path(dir, name, "node_labels"))?;
    let node_attrs = Rows::read_optional(&file_path(dir, name, "node_attributes"))?;
    let edge_labels = Rows::read_optional(&file_path(dir, name, "edge_labels"))?;
    let edge_attrs = Rows::read_optional(&file_path(dir, name, "edge_attributes"))?;

    // node -> graph
    let graph_of: Vec<usize> = indicator
        .rows
        .iter()
        .map(|(line, f)| indicator.parse::<usize>(*line, &f[0]))
        .collect::<Result<_>>()?;
    let node_count = graph_of.len();
    let graph_count = graph_of.iter().copied().max().unwrap_or(0);
    let mut offsets = vec![usize::MAX; graph_count + 1];
    let mut sizes = vec![0usize; graph_count + 1];
    for (node, &gid) in graph_of.iter().enumerate() {
        let line = node + 1;
        if gid == 0 {
            return Err(indicator.error(line, "graph ids are 1-based"));
        }
        if node > 0 && gid < graph_of[node - 1] {
            return Err(indicator.error(line, "graph ids must be non-decreasing"));
        }
        if offsets[gid] == usize::MAX {
            offsets[gid] = node;
        }
        sizes[gid] += 1;
    }
    if let Some(gid) = (1..=graph_count).find(|&g| sizes[g] == 0) {
        return Err(Error::Load(format!(
            "graph id {gid} has no nodes in {}",
            indicator.file
        )));
    }

    for rows in [&node_labels, &node_attrs].into_iter().flatten() {
        rows.expect_rows(node_count, "graph indicator")?;
    }
    for rows in [&edge_labels, &edge_attrs].into_iter().flatten() {
        rows.expect_rows(edges.len(), "adjacency file")?;
    }

    // Node labels form the alphabet, sorted by numeric value.
    let raw_labels = match &node_labels {
        Some(rows) => rows.first_column()?,
        None => vec![0.0; node_count],
    };
    let mut distinct = raw_labels.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let alphabet = LabelAlphabet::new(distinct.iter().map(|&v| format_value(v)).collect());
    let label_ids: Vec<LabelId> = raw_labels
        .iter()
        .map(|x| distinct.binary_search_by(|p| p.total_cmp(x)).unwrap() as LabelId)
        .collect();

    let node_vectors = match &node_attrs {
        Some(rows) => rows.reals()?,
        None => vec![Vec::new(); node_count],
    };
    let q_v = width(&node_vectors);
    let edge_label_vectors = match &edge_labels {
        Some(rows) => rows.reals()?,
        None => vec![Vec::new(); edges.len()],
    };
    let edge_attr_vectors = match &edge_attrs {
        Some(rows) => rows.reals()?,
        None => vec![Vec::new(); edges.len()],
    };
    let edge_label_columns = width(&edge_label_vectors);
    let edge_attribute_columns = width(&edge_attr_vectors);
    let q_e = edge_label_columns + edge_attribute_columns;

    let mut per_graph_edges: Vec<Vec<(usize, usize, Vec<f64>)>> = vec![Vec::new(); graph_count + 1];
    let mut self_loops = 0;
    for (row, (line, fields)) in edges.rows.iter().enumerate() {
        if fields.len() != 2 {
            return Err(edges.error(*line, format!("expected 2 columns, found {}", fields.len())));
        }
        let u: usize = edges.parse(*line, &fields[0])?;
        let v: usize = edges.parse(*line, &fields[1])?;
        if u == 0 || v == 0 || u > node_count || v > node_count {
            return Err(edges.error(*line, format!("node id outside 1..={node_count}")));
        }
        let (gu, gv) = (graph_of[u - 1], graph_of[v - 1]);
        if gu != gv {
            return Err(edges.error(*line, format!("edge joins graphs {gu} and {gv}")));
        }
        if u == v {
            self_loops += 1;
            continue;
        }
        let mut attrs = edge_label_vectors[row].clone();
        attrs.extend_from_slice(&edge_attr_vectors[row]);
        let base = offsets[gu];
        per_graph_edges[gu].push((u - 1 - base, v - 1 - base, attrs));
    }
    if self_loops > 0 {
        log::warn!("{name}: dropped {self_loops} self-loop rows");
    }

    let mut graphs = Vec::with_capacity(graph_count);
    for gid in 1..=graph_count {
        let range = offsets[gid]..offsets[gid] + sizes[gid];
        let g = Graph::from_edges(
            label_ids[range.clone()].to_vec(),
            node_vectors[range].to_vec(),
            std::mem::take(&mut per_graph_edges[gid]),
        )
        .map_err(|e| Error::Load(format!("graph {gid}: {e}")))?;
        graphs.push(g);
    }

    let (targets, class_mapping) = match options.task {
        Task::Classification => {
            let rows = graph_labels.as_ref().unwrap();
            rows.expect_rows(graph_count, "graph indicator")?;
            let raw = rows.first_column()?;
            let (targets, mapping) = normalize_classes(&raw)?;
            log::info!(
                "{name}: graph label {} -> 0, {} -> 1",
                mapping.negative,
                mapping.positive
            );
            (targets, Some(mapping))
        }
        Task::Regression => {
            let rows = graph_attrs.as_ref().unwrap();
            rows.expect_rows(graph_count, "graph indicator")?;
            let table = rows.reals()?;
            let targets = table
                .iter()
                .map(|r| {
                    r.get(options.target_index).copied().ok_or_else(|| {
                        Error::Load(format!(
                            "target index {} outside {} graph attribute columns",
                            options.target_index,
                            r.len()
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            (targets, None)
        }
    };

    let dataset = Dataset::new(name, options.task, graphs, targets, alphabet, q_v, q_e)?
        .with_node_labels_flag(node_labels.is_some());
    let report = LoadReport {
        name: name.to_string(),
        task: options.task,
        files: FilePresence {
            node_labels: node_labels.is_some(),
            edge_labels: edge_labels.is_some(),
            node_attributes: node_attrs.is_some(),
            edge_attributes: edge_attrs.is_some(),
            graph_attributes: graph_attrs.is_some(),
        },
        class_mapping,
        target_index: (options.task == Task::Regression).then_some(options.target_index),
        node_label_columns: usize::from(node_labels.is_some()),
        node_attribute_columns: q_v,
        edge_label_columns,
        edge_attribute_columns,
        directed_edge_rows: edges.len(),
        self_loops_dropped: self_loops,
        summary: dataset_summary(&dataset),
    };
    Ok((dataset, report))
}

/// Maps two distinct class values to 0 (smaller) and 1 (larger).
fn normalize_classes(raw: &[f64]) -> Result<(Vec<f64>, ClassMapping)> {
    let mut values = raw.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let (negative, positive) = match values.as_slice() {
        [a, b] => (*a, *b),
        [a] if *a == 0.0 || *a == 1.0 => (0.0, 1.0),
        [a] => {
            return Err(Error::Load(format!(
                "single graph label value {a} cannot be mapped to {{0, 1}}"
            )))
        }
        _ => {
            return Err(Error::Load(format!(
                "{} distinct graph labels; only binary classification is supported",
                values.len()
            )))
        }
    };
    let targets = raw.iter().map(|&v| if v == positive { 1.0 } else { 0.0 }).collect();
    Ok((
        targets,
        ClassMapping {
            negative: format_value(negative),
            positive: format_value(positive),
        },
    ))
}

pub fn dataset_summary(ds: &Dataset) -> DatasetSummary {
    let n = ds.len().max(1) as f64;
    let nodes: usize = ds.graphs().map(Graph::node_count).sum();
    let edges: usize = ds.graphs().map(Graph::edge_count).sum();
    let class_percentages = (ds.task() == Task::Classification && !ds.is_empty()).then(|| {
        let positive = ds.targets().iter().filter(|&&t| t == 1.0).count() as f64;
        let p1 = 100.0 * positive / n;
        [100.0 - p1, p1]
    });
    DatasetSummary {
        graphs: ds.len(),
        mean_nodes: nodes as f64 / n,
        mean_edges: edges as f64 / n,
        class_percentages,
        q_v: ds.node_attr_dim(),
        q_e: ds.edge_attr_dim(),
    }
}

/// How a dataset's columns map back onto TUDataset files.
#[derive(Debug, Clone, Default)]
pub struct WriteOptions {
    /// Leading edge-attribute columns written to `_edge_labels.txt`.
    pub edge_label_columns: usize,
    /// Original class values; targets are written as 0/1 when absent.
    pub class_mapping: Option<ClassMapping>,
}

impl WriteOptions {
    pub fn from_report(report: &LoadReport) -> Self {
        WriteOptions {
            edge_label_columns: report.edge_label_columns,
            class_mapping: report.class_mapping.clone(),
        }
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(", ")
}

/// Writes `ds` in the TUDataset layout under `dir` using `ds.name()`.
///
/// Each undirected edge is written in both directions.
pub fn write_dataset(dir: &Path, ds: &Dataset, options: &WriteOptions) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = ds.name();
    let mut a = String::new();
    let mut indicator = String::new();
    let mut node_labels = String::new();
    let mut node_attrs = String::new();
    let mut edge_labels = String::new();
    let mut edge_attrs = String::new();
    let split = options.edge_label_columns.min(ds.edge_attr_dim());
    let mut base = 0;
    for (gi, g) in ds.graphs().enumerate() {
        for v in 0..g.node_count() {
            writeln!(indicator, "{}", gi + 1).unwrap();
            writeln!(node_labels, "{}", ds.alphabet().name(g.label(v))).unwrap();
            writeln!(node_attrs, "{}", join(g.node_attributes(v))).unwrap();
        }
        for ((u, v), attrs) in g.edges() {
            for (x, y) in [(u, v), (v, u)] {
                writeln!(a, "{}, {}", base + x + 1, base + y + 1).unwrap();
                writeln!(edge_labels, "{}", join(&attrs[..split])).unwrap();
                writeln!(edge_attrs, "{}", join(&attrs[split..])).unwrap();
            }
        }
        base += g.node_count();
    }
    let mut files: BTreeMap<&str, String> = BTreeMap::new();
    files.insert("A", a);
    files.insert("graph_indicator", indicator);
    if ds.has_node_labels() {
        files.insert("node_labels", node_labels);
    }
    if ds.node_attr_dim() > 0 {
        files.insert("node_attributes", node_attrs);
    }
    if split > 0 {
        files.insert("edge_labels", edge_labels);
    }
    if ds.edge_attr_dim() > split {
        files.insert("edge_attributes", edge_attrs);
    }
    let targets: String = match ds.task() {
        Task::Classification => ds
            .targets()
            .iter()
            .map(|&t| match &options.class_mapping {
                Some(m) if t == 1.0 => format!("{}\n", m.positive),
                Some(m) => format!("{}\n", m.negative),
                None => format!("{}\n", t as i64),
            })
            .collect(),
        Task::Regression => ds.targets().iter().map(|t| format!("{t}\n")).collect(),
    };
    let target_file = match ds.task() {
        Task::Classification => "graph_labels",
        Task::Regression => "graph_attributes",
    };
    files.insert(target_file, targets);
    for (suffix, content) in files {
        let path = file_path(dir, name, suffix);
        fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
